//! Starting path sets: min-cost, min-delay, the LP-rounded variant, and the
//! fractional lower bound on the optimum.

use krsp::graph::{gen_random_instance, GenParams};
use krsp::oracle::{brute_krsp, delay_range};
use krsp::phase1::{fractional_lower_bound, min_cost_k_disjoint, min_delay_k_disjoint, phase1_solution, Phase1Mode};

fn main() {
    let inst = (0..)
        .map(|seed| gen_random_instance(GenParams { n: 7, m: 14, max_cost: 6, max_delay: 6, k: 2, seed }))
        .find_map(|g| delay_range(&g).unwrap().filter(|(lo, hi)| lo < hi).map(|(lo, _)| g.with_delay_bound(lo).unwrap()))
        .unwrap();
    let cheap = min_cost_k_disjoint(&inst).unwrap();
    let fast = min_delay_k_disjoint(&inst).unwrap();
    println!("min cost:  {:?} cost {} delay {}", cheap.paths(), cheap.total_cost(), cheap.total_delay());
    println!("min delay: {:?} cost {} delay {}", fast.paths(), fast.total_cost(), fast.total_delay());
    for mode in [Phase1Mode::MinCost, Phase1Mode::LpRound] {
        let ps = phase1_solution(&inst, mode).unwrap();
        println!("{mode}: cost {} delay {}", ps.total_cost(), ps.total_delay());
    }
    let bound = fractional_lower_bound(&inst).unwrap();
    let opt = brute_krsp(&inst).unwrap().unwrap();
    println!("fractional bound {bound} <= C_OPT {} (delay bound {})", opt.cost, inst.delay_bound());
}
