//! k edge-disjoint s→t paths of minimum total cost under a total delay
//! bound, by cancelling bicameral cycles in the residual graph.
//!
//! ```
//! use krsp::graph::parse_instance;
//! use krsp::solver::{solve, SolverOptions, Status};
//!
//! let inst = parse_instance("2 3 1 2\n0 1 1 5\n0 1 2 2\n0 1 9 0\n").unwrap();
//! let sol = solve(&inst, &SolverOptions::default()).unwrap();
//! assert_eq!(sol.status, Status::Solved);
//! assert_eq!((sol.paths.total_cost(), sol.paths.total_delay()), (2, 2));
//! ```

pub mod bicameral;
pub mod cli;
pub mod graph;
pub mod lp;
pub mod oracle;
pub mod phase1;
pub mod residual;
pub mod solver;
pub mod suite;
