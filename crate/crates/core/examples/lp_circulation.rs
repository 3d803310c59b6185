//! The exact simplex on a small circulation problem, and splitting the
//! optimal flow into weighted cycles.

use krsp::lp::{decompose_circulation, solve_lp, LpProblem};
use num_bigint::BigInt;
use num_rational::BigRational;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn main() {
    // Two triangles sharing arc 0->1. Minimize cost with a delay budget.
    let arcs = [(0, 1), (1, 2), (2, 0), (1, 3), (3, 0)];
    let cost = [1, 1, 1, 2, 0];
    let delay = [0, -3, 1, -1, 0];
    let mut p = LpProblem::new(arcs.len());
    for (a, &c) in cost.iter().enumerate() {
        p.set_cost(a, q(c, 1));
        p.set_bounds(a, Some(q(0, 1)), Some(q(1, 1)));
    }
    for v in 0..4 {
        let row = arcs
            .iter()
            .enumerate()
            .filter_map(|(a, &(t, h))| match (t == v, h == v) {
                (true, false) => Some((a, q(1, 1))),
                (false, true) => Some((a, q(-1, 1))),
                _ => None,
            })
            .collect();
        p.add_eq(row, q(0, 1));
    }
    p.add_le((0..arcs.len()).map(|a| (a, q(delay[a], 1))).collect(), q(-1, 1));

    let sol = solve_lp(&p);
    println!("{:?}, objective {}", sol.status, sol.objective);
    println!("x = [{}]", sol.values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "));
    assert!(p.is_feasible(&sol.values));
    for c in decompose_circulation(&sol.values, 4, &arcs).unwrap() {
        println!("cycle over arcs {:?} with weight {}", c.arcs, c.weight);
    }
}
