//! Residual graph of a path set, its simple cycles, and rerouting by one
//! of them.

use krsp::graph::parse_instance;
use krsp::oracle::enumerate_simple_cycles;
use krsp::phase1::min_cost_k_disjoint;
use krsp::residual::{apply_cycle, build_residual, diff_cycles};

fn main() {
    let inst = parse_instance("5 7 2 4\n0 4 0 0\n0 1 0 0\n1 2 1 0\n2 4 1 4\n2 3 0 3\n3 4 0 3\n1 4 9 0\n").unwrap();
    let cur = min_cost_k_disjoint(&inst).unwrap();
    println!("start: {:?} cost {} delay {}", cur.paths(), cur.total_cost(), cur.total_delay());

    let g = build_residual(&inst, &cur).unwrap();
    for e in g.edges() {
        let tag = if e.is_reversed() { "reversed" } else { "" };
        println!("  {}: {}->{} c={} d={} {tag}", e.id, e.tail, e.head, e.cost, e.delay);
    }

    let cycles = enumerate_simple_cycles(&g).unwrap();
    for o in &cycles {
        println!("cycle {:?} through {:?}: c={} d={}", o.edges(), o.vertices(&g), o.cost(), o.delay());
    }

    let best = cycles.iter().filter(|o| o.delay() < 0).min_by_key(|o| o.cost()).expect("over the bound");
    let next = apply_cycle(&inst, &cur, best).unwrap();
    println!(
        "after cancelling {:?}: {:?} cost {} delay {} ({} leftover cycles dropped)",
        best.edges(),
        next.paths.paths(),
        next.paths.total_cost(),
        next.paths.total_delay(),
        next.dropped.len()
    );

    // Going back to the start is the reversed cycle in the new residual graph.
    for o in diff_cycles(&cur, &next.paths, &inst).unwrap() {
        println!("difference cycle {:?}: c={} d={}", o.edges(), o.cost(), o.delay());
    }
}
