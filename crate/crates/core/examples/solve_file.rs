//! Solve an instance file in exact mode and print the paths and trace.
//!
//!     cargo run --example solve_file -- crates/core/tests/data/detour.txt

use krsp::graph::parse_instance;
use krsp::solver::{solve, SolverOptions, Status};

const BUILTIN: &str = "5 7 2 4\n0 4 0 0\n0 1 0 0\n1 2 1 0\n2 4 1 4\n2 3 0 3\n3 4 0 3\n1 4 9 0\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => BUILTIN.to_string(),
    };
    let inst = parse_instance(&text)?;
    let sol = solve(&inst, &SolverOptions::default())?;
    if sol.status == Status::Infeasible {
        println!("no {} disjoint paths meet delay bound {}", inst.path_count(), inst.delay_bound());
        return Ok(());
    }
    for rec in &sol.trace {
        println!(
            "step {}: cost {} delay {} -> cancel {:?} ({}, c={}, d={})",
            rec.index, rec.cost, rec.delay, rec.cycle.edges, rec.cycle.class, rec.cycle.cost, rec.cycle.delay
        );
    }
    println!("estimate used: {:?}, {} steps over all estimates", sol.cost_estimate, sol.total_iterations);
    for (i, p) in sol.paths.paths().iter().enumerate() {
        let hops: Vec<String> = p.iter().map(|&id| {
            let e = inst.edge(id);
            format!("{}->{}", e.tail, e.head)
        }).collect();
        println!("path {}: {}", i + 1, hops.join(" "));
    }
    println!("cost {} delay {} (bound {})", sol.paths.total_cost(), sol.paths.total_delay(), inst.delay_bound());
    Ok(())
}
