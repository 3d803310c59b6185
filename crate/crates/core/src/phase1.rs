//! Initial solutions: min-cost and min-delay k disjoint paths, the exact
//! feasibility test, and an LP-rounding alternative.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::graph::{Edge, EdgeId, Instance, PathSet};
use crate::lp::{decompose_circulation, solve_lp, LpProblem, LpStatus};
use crate::residual::{decompose_flow, ResidualError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Phase1Error {
    #[error("only {found} of {k} edge-disjoint s-t paths exist")]
    NoKFlow { k: usize, found: usize },
    #[error("instance is infeasible: minimum total delay {min_delay} exceeds bound {bound}")]
    Infeasible { min_delay: i64, bound: i64 },
    #[error(transparent)]
    Residual(#[from] ResidualError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Phase1Mode {
    #[default]
    MinCost,
    LpRound,
}

impl FromStr for Phase1Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mincost" => Ok(Phase1Mode::MinCost),
            "lp-round" => Ok(Phase1Mode::LpRound),
            _ => Err(format!("unknown phase-1 mode `{s}` (expected mincost or lp-round)")),
        }
    }
}

impl fmt::Display for Phase1Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase1Mode::MinCost => "mincost",
            Phase1Mode::LpRound => "lp-round",
        })
    }
}

/// Successive shortest paths on the unit-capacity residual network, with
/// Dijkstra on reduced weights. `weight` must be nonnegative.
fn min_weight_k_disjoint(inst: &Instance, weight: impl Fn(&Edge) -> i64) -> Result<PathSet, Phase1Error> {
    let n = inst.vertex_count();
    let k = inst.path_count();
    let edges = inst.edges();
    let mut used = vec![false; edges.len()];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        adj[e.tail].push(i);
        adj[e.head].push(i);
    }
    let mut pot = vec![0i64; n];

    for found in 0..k {
        // Arc (edge i, forward) is usable iff !used[i]; backward iff used[i].
        let mut dist: Vec<Option<i64>> = vec![None; n];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[inst.source()] = Some(0);
        heap.push(Reverse((0i64, inst.source())));
        while let Some(Reverse((du, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &i in &adj[u] {
                let e = &edges[i];
                let (v, w) = if e.tail == u && !used[i] {
                    (e.head, weight(e))
                } else if e.head == u && used[i] {
                    (e.tail, -weight(e))
                } else {
                    continue;
                };
                let reduced = w + pot[u] - pot[v];
                debug_assert!(reduced >= 0, "potentials keep reduced weights nonnegative");
                let dv = du + reduced;
                if !done[v] && dist[v].is_none_or(|old| dv < old) {
                    dist[v] = Some(dv);
                    parent[v] = Some(i);
                    heap.push(Reverse((dv, v)));
                }
            }
        }
        if dist[inst.sink()].is_none() {
            return Err(Phase1Error::NoKFlow { k, found });
        }
        let mut v = inst.sink();
        while v != inst.source() {
            let i = parent[v].unwrap();
            used[i] = !used[i];
            v = if edges[i].head == v && used[i] { edges[i].tail } else { edges[i].head };
        }
        for u in 0..n {
            if let Some(d) = dist[u] {
                pot[u] += d;
            }
        }
    }

    let flow: Vec<Edge> = edges.iter().zip(&used).filter(|(_, &u)| u).map(|(e, _)| e.clone()).collect();
    Ok(decompose_flow(&flow, inst)?.paths)
}

/// k edge-disjoint s→t paths of minimum total cost, ignoring delay.
pub fn min_cost_k_disjoint(inst: &Instance) -> Result<PathSet, Phase1Error> {
    min_weight_k_disjoint(inst, |e| e.cost)
}

/// k edge-disjoint s→t paths of minimum total delay, ignoring cost.
pub fn min_delay_k_disjoint(inst: &Instance) -> Result<PathSet, Phase1Error> {
    min_weight_k_disjoint(inst, |e| e.delay)
}

pub fn check_feasible(inst: &Instance) -> bool {
    min_delay_k_disjoint(inst).is_ok_and(|p| p.total_delay() <= inst.delay_bound())
}

pub fn phase1_solution(inst: &Instance, mode: Phase1Mode) -> Result<PathSet, Phase1Error> {
    let fastest = min_delay_k_disjoint(inst)?;
    if fastest.total_delay() > inst.delay_bound() {
        return Err(Phase1Error::Infeasible { min_delay: fastest.total_delay(), bound: inst.delay_bound() });
    }
    match mode {
        Phase1Mode::MinCost => min_cost_k_disjoint(inst),
        Phase1Mode::LpRound => match lp_round(inst) {
            Some(p) => Ok(p),
            None => {
                log::debug!("lp-round produced fewer than k disjoint paths; using min-cost paths");
                min_cost_k_disjoint(inst)
            }
        },
    }
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// The fractional relaxation: min Σc·x over unit-capacity flows of value k
/// with Σd·x ≤ D. Variable `m` is the t→s return arc.
fn fractional_lp(inst: &Instance) -> LpProblem {
    let m = inst.edges().len();
    let mut p = LpProblem::new(m + 1);
    for e in inst.edges() {
        p.set_cost(e.id.index(), q(e.cost));
        p.set_bounds(e.id.index(), Some(q(0)), Some(q(1)));
    }
    let k = q(inst.path_count() as i64);
    p.set_bounds(m, Some(k.clone()), Some(k));
    let mut rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); inst.vertex_count()];
    for e in inst.edges() {
        rows[e.tail].push((e.id.index(), q(1)));
        rows[e.head].push((e.id.index(), q(-1)));
    }
    rows[inst.sink()].push((m, q(1)));
    rows[inst.source()].push((m, q(-1)));
    for row in rows.into_iter().filter(|r| !r.is_empty()) {
        p.add_eq(row, q(0));
    }
    p.add_le(inst.edges().iter().map(|e| (e.id.index(), q(e.delay))).collect(), q(inst.delay_bound()));
    p
}

/// Optimal value of the fractional relaxation, a lower bound on the
/// optimum. `None` if the relaxation is infeasible.
pub fn fractional_lower_bound(inst: &Instance) -> Option<BigRational> {
    let s = solve_lp(&fractional_lp(inst));
    (s.status == LpStatus::Optimal).then_some(s.objective)
}

fn lp_round(inst: &Instance) -> Option<PathSet> {
    let sol = solve_lp(&fractional_lp(inst));
    if sol.status != LpStatus::Optimal {
        return None;
    }
    let m = inst.edges().len();
    let mut arcs: Vec<(usize, usize)> = inst.edges().iter().map(|e| (e.tail, e.head)).collect();
    arcs.push((inst.sink(), inst.source()));
    let cycles = decompose_circulation(&sol.values, inst.vertex_count(), &arcs).ok()?;
    let mut weighted: Vec<(BigRational, Vec<EdgeId>)> = cycles
        .into_iter()
        .filter_map(|c| {
            let pos = c.arcs.iter().position(|&a| a == m)?;
            // Rotate so the walk starts just after the return arc, at s.
            let path = c.arcs[pos + 1..].iter().chain(&c.arcs[..pos]).map(|&a| EdgeId(a)).collect();
            Some((c.weight, path))
        })
        .collect();
    weighted.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let mut taken = vec![false; m];
    let mut paths = Vec::new();
    for (_, path) in weighted {
        if paths.len() == inst.path_count() {
            break;
        }
        if path.iter().all(|e| !taken[e.index()]) {
            for e in &path {
                taken[e.index()] = true;
            }
            paths.push(path);
        }
    }
    PathSet::new(inst, paths).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_instance;

    #[test]
    fn parallel_edges_are_taken() {
        let inst = parse_instance("2 3 2 0\n0 1 4 0\n0 1 1 0\n0 1 2 5\n").unwrap();
        let p = min_cost_k_disjoint(&inst).unwrap();
        assert_eq!(p.total_cost(), 3);
        let d = min_delay_k_disjoint(&inst).unwrap();
        assert_eq!(d.total_delay(), 0);
        assert!(check_feasible(&inst));
    }

    #[test]
    fn k1_is_shortest_path() {
        let inst = parse_instance("4 5 1 9\n0 1 1 1\n1 3 1 1\n0 2 1 0\n2 3 5 0\n1 2 0 0\n").unwrap();
        assert_eq!(min_cost_k_disjoint(&inst).unwrap().total_cost(), 2);
        assert_eq!(min_delay_k_disjoint(&inst).unwrap().total_delay(), 0);
    }

    #[test]
    fn needs_rerouting_through_reverse_arc() {
        // The cheapest single path s-a-b-t blocks both disjoint paths unless
        // the second augmentation cancels a-b.
        let inst = parse_instance("4 5 2 100\n0 1 1 0\n1 2 0 0\n2 3 1 0\n0 2 5 0\n1 3 5 0\n").unwrap();
        let p = min_cost_k_disjoint(&inst).unwrap();
        assert_eq!(p.total_cost(), 12);
        assert!(!p.contains(EdgeId(1)));
    }

    #[test]
    fn single_path_graph_with_k2() {
        let inst = parse_instance("3 2 2 10\n0 1 1 1\n1 2 1 1\n").unwrap();
        assert_eq!(min_cost_k_disjoint(&inst), Err(Phase1Error::NoKFlow { k: 2, found: 1 }));
        assert!(!check_feasible(&inst));
    }

    #[test]
    fn delay_bound_decides_feasibility() {
        let inst = parse_instance("2 2 2 3\n0 1 0 2\n0 1 0 2\n").unwrap();
        assert!(!check_feasible(&inst));
        assert!(matches!(phase1_solution(&inst, Phase1Mode::MinCost), Err(Phase1Error::Infeasible { .. })));
        assert!(check_feasible(&inst.with_delay_bound(4).unwrap()));
    }

    #[test]
    fn lp_round_produces_paths() {
        let inst = parse_instance("4 5 2 6\n0 1 1 3\n1 3 1 3\n0 2 2 1\n2 3 2 1\n0 3 9 0\n").unwrap();
        let p = phase1_solution(&inst, Phase1Mode::LpRound).unwrap();
        assert_eq!(p.paths().len(), 2);
        // Cheapest pair within the bound is s-a-t plus the direct edge.
        let lb = fractional_lower_bound(&inst).unwrap();
        assert!(lb <= q(11));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("lp-round".parse::<Phase1Mode>().unwrap(), Phase1Mode::LpRound);
        assert!("x".parse::<Phase1Mode>().is_err());
        assert_eq!(Phase1Mode::MinCost.to_string(), "mincost");
    }
}
