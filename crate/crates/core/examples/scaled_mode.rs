//! Rounded-weight mode against exact mode on generated instances.

use krsp::graph::{gen_random_instance, GenParams};
use krsp::oracle::{brute_krsp, delay_range};
use krsp::solver::{parse_ratio, scale_instance, solve, Mode, SolverOptions, Status};

fn main() {
    let eps = parse_ratio(&std::env::args().nth(1).unwrap_or("1/2".into())).expect("positive ratio");
    let inst = (0..)
        .map(|seed| gen_random_instance(GenParams { n: 8, m: 16, max_cost: 9, max_delay: 9, k: 2, seed }))
        .find_map(|g| delay_range(&g).unwrap().map(|(lo, hi)| g.with_delay_bound((lo + hi) / 2).unwrap()))
        .unwrap();
    let opt = brute_krsp(&inst).unwrap().unwrap();
    println!("C_OPT {} at delay {} (bound {})", opt.cost, opt.delay, inst.delay_bound());

    let scaled = scale_instance(&inst, eps, eps, opt.cost).unwrap();
    println!("weights rounded for estimate {}: bound {} -> {}", opt.cost, inst.delay_bound(), scaled.delay_bound());
    for (a, b) in inst.edges().iter().zip(scaled.edges()) {
        println!("  {}: ({}, {}) -> ({}, {})", a.id, a.cost, a.delay, b.cost, b.delay);
    }

    for mode in [Mode::Exact, Mode::Scaled] {
        let opts = SolverOptions { mode, eps1: eps, eps2: eps, ..SolverOptions::default() };
        let sol = solve(&inst, &opts).unwrap();
        assert_eq!(sol.status, Status::Solved);
        println!(
            "{mode}: cost {} delay {} estimate {:?}{}",
            sol.paths.total_cost(),
            sol.paths.total_delay(),
            sol.cost_estimate,
            if sol.scaled_fallback { " (fell back to exact)" } else { "" }
        );
    }
}
