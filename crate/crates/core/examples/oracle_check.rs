//! Brute-force optima against the solver on random draws.
//!
//!     cargo run --release --example oracle_check -- 500

use krsp::graph::{gen_random_instance, GenParams};
use krsp::oracle::{brute_krsp, delay_range};
use krsp::phase1::check_feasible;
use krsp::solver::{solve, SolverOptions, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let draws: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut feasible, mut infeasible, mut worst) = (0, 0, 0.0f64);
    for _ in 0..draws {
        let n = rng.gen_range(4..=8);
        let inst = gen_random_instance(GenParams { n, m: rng.gen_range(n..=16), max_cost: 5, max_delay: 5, k: rng.gen_range(1..=3), seed: rng.gen() });
        let d = match delay_range(&inst).unwrap() {
            Some((lo, hi)) => rng.gen_range((lo - 1).max(0)..=hi),
            None => 0,
        };
        let inst = inst.with_delay_bound(d).unwrap();
        let opt = brute_krsp(&inst).unwrap();
        assert_eq!(check_feasible(&inst), opt.is_some());
        let sol = solve(&inst, &SolverOptions::default()).unwrap();
        match opt {
            None => {
                assert_eq!(sol.status, Status::Infeasible);
                infeasible += 1;
            }
            Some(o) => {
                assert!(sol.paths.total_delay() <= inst.delay_bound());
                assert!(sol.paths.total_cost() <= 2 * o.cost);
                if o.cost > 0 {
                    worst = worst.max(sol.paths.total_cost() as f64 / o.cost as f64);
                }
                feasible += 1;
            }
        }
    }
    println!("{feasible} feasible, {infeasible} infeasible, worst cost ratio {worst:.3}");
}
