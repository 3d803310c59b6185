//! The seeded benchmark suite: every instance solved and compared with its
//! brute-force optimum.
//!
//!     cargo run --release --example bench_suite -- 200 2024 [scaled]

use krsp::solver::{Mode, SolverOptions};
use krsp::suite::{generate_suite, render_table, run_bench, DEFAULT_COUNT, DEFAULT_SEED};

fn main() {
    let mut args = std::env::args().skip(1);
    let count = args.next().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_COUNT);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    let mode = args.next().and_then(|s| s.parse::<Mode>().ok()).unwrap_or(Mode::Exact);
    let suite = generate_suite(count, seed);
    let summary = run_bench(&suite, &SolverOptions { mode, ..SolverOptions::default() }).unwrap();
    print!("{}", render_table(&summary));
}
