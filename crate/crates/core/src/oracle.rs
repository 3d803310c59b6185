//! Brute-force ground truth for small instances. Deliberately shares nothing
//! with the solver beyond the graph types.

use std::cmp::Ordering;

use thiserror::Error;

use crate::graph::{Edge, EdgeId, Instance, PathSet};
use crate::residual::{Cycle, ResidualGraph};

pub const MAX_EDGES: usize = 16;
pub const MAX_VERTICES: usize = 10;
pub const MAX_CYCLE_VERTICES: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for brute force: n={n}, m={m} (caps n<={MAX_VERTICES}, m<={MAX_EDGES})")]
    TooLarge { n: usize, m: usize },
    #[error("graph too large for cycle enumeration: n={0} (cap {MAX_CYCLE_VERTICES})")]
    TooManyVertices(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub cost: i64,
    pub delay: i64,
    pub paths: PathSet,
}

/// Every k-subset of edges that splits into exactly k edge-disjoint simple
/// s→t paths, as (cost, delay, sorted edge ids, paths). `order` lists the
/// edge indices in the order bits are assigned.
type PathUnion = (i64, i64, Vec<usize>, Vec<Vec<usize>>);

fn path_unions(inst: &Instance, order: &[usize]) -> Vec<PathUnion> {
    let m = order.len();
    let n = inst.vertex_count();
    let (s, t, k) = (inst.source(), inst.sink(), inst.path_count() as i64);
    let edges = inst.edges();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << m) {
        let mut bal = vec![0i64; n];
        for (bit, &e) in order.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                bal[edges[e].tail] += 1;
                bal[edges[e].head] -= 1;
            }
        }
        let balanced = (0..n).all(|v| {
            bal[v]
                == if v == s {
                    k
                } else if v == t {
                    -k
                } else {
                    0
                }
        });
        if !balanced {
            continue;
        }
        let mut chosen: Vec<usize> = (0..m).filter(|bit| mask >> bit & 1 == 1).map(|bit| order[bit]).collect();
        chosen.sort_unstable();
        if let Some(paths) = split_exactly(inst, &chosen) {
            let cost = chosen.iter().map(|&e| edges[e].cost).sum();
            let delay = chosen.iter().map(|&e| edges[e].delay).sum();
            out.push((cost, delay, chosen, paths));
        }
    }
    out
}

/// Backtracking search for a partition of `chosen` into k simple s→t paths.
fn split_exactly(inst: &Instance, chosen: &[usize]) -> Option<Vec<Vec<usize>>> {
    fn extend(
        inst: &Instance,
        chosen: &[usize],
        used: &mut Vec<bool>,
        visited: &mut Vec<bool>,
        at: usize,
        path: &mut Vec<usize>,
        done: &mut Vec<Vec<usize>>,
    ) -> bool {
        if at == inst.sink() {
            done.push(std::mem::take(path));
            let ok = next_path(inst, chosen, used, done);
            if !ok {
                *path = done.pop().unwrap();
            }
            return ok;
        }
        for (slot, &e) in chosen.iter().enumerate() {
            let edge = &inst.edges()[e];
            if used[slot] || edge.tail != at || visited[edge.head] {
                continue;
            }
            used[slot] = true;
            visited[edge.head] = true;
            path.push(e);
            if extend(inst, chosen, used, visited, edge.head, path, done) {
                return true;
            }
            path.pop();
            visited[edge.head] = false;
            used[slot] = false;
        }
        false
    }

    fn next_path(inst: &Instance, chosen: &[usize], used: &mut Vec<bool>, done: &mut Vec<Vec<usize>>) -> bool {
        if done.len() == inst.path_count() {
            return used.iter().all(|&u| u);
        }
        let mut visited = vec![false; inst.vertex_count()];
        visited[inst.source()] = true;
        let mut path = Vec::new();
        extend(inst, chosen, used, &mut visited, inst.source(), &mut path, done)
    }

    let mut used = vec![false; chosen.len()];
    let mut done = Vec::new();
    next_path(inst, chosen, &mut used, &mut done).then_some(done)
}

fn check_size(inst: &Instance) -> Result<(), OracleError> {
    if inst.vertex_count() > MAX_VERTICES || inst.edges().len() > MAX_EDGES {
        return Err(OracleError::TooLarge { n: inst.vertex_count(), m: inst.edges().len() });
    }
    Ok(())
}

fn best(inst: &Instance, order: &[usize]) -> Option<Optimum> {
    let (cost, delay, _, paths) = path_unions(inst, order)
        .into_iter()
        .filter(|u| u.1 <= inst.delay_bound())
        .min_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)))?;
    let paths = paths.into_iter().map(|p| p.into_iter().map(EdgeId).collect()).collect();
    let paths = PathSet::new(inst, paths).expect("brute-force split is a valid path set");
    Some(Optimum { cost, delay, paths })
}

/// Exact optimum by exhaustive edge-subset enumeration. `Ok(None)` means
/// infeasible. Ties prefer lower delay, then the smaller sorted edge-id list.
pub fn brute_krsp(inst: &Instance) -> Result<Option<Optimum>, OracleError> {
    check_size(inst)?;
    let order: Vec<usize> = (0..inst.edges().len()).collect();
    Ok(best(inst, &order))
}

/// The same enumeration with edges assigned to subset bits in reverse order.
pub fn brute_krsp_second_pass(inst: &Instance) -> Result<Option<Optimum>, OracleError> {
    check_size(inst)?;
    let order: Vec<usize> = (0..inst.edges().len()).rev().collect();
    Ok(best(inst, &order))
}

/// Minimum and maximum total delay over all k edge-disjoint path sets,
/// ignoring the bound. `None` if no k disjoint paths exist.
pub fn delay_range(inst: &Instance) -> Result<Option<(i64, i64)>, OracleError> {
    check_size(inst)?;
    let order: Vec<usize> = (0..inst.edges().len()).collect();
    let unions = path_unions(inst, &order);
    let lo = unions.iter().map(|u| u.1).min();
    let hi = unions.iter().map(|u| u.1).max();
    Ok(lo.zip(hi))
}

/// The residual edge list of `paths`, built independently of the solver.
pub fn residual_edges(inst: &Instance, paths: &PathSet) -> Vec<Edge> {
    let on: Vec<EdgeId> = paths.paths().iter().flatten().copied().collect();
    inst.edges()
        .iter()
        .map(|e| {
            if on.contains(&e.id) {
                Edge { id: e.id, tail: e.head, head: e.tail, cost: -e.cost, delay: -e.delay, origin: Some(e.id) }
            } else {
                e.clone()
            }
        })
        .collect()
}

/// Every vertex-simple directed cycle of the multigraph, once each, rooted at
/// its smallest vertex and reported with the smallest edge id first.
pub fn enumerate_cycles(n: usize, edges: &[Edge]) -> Result<Vec<Cycle>, OracleError> {
    if n > MAX_CYCLE_VERTICES {
        return Err(OracleError::TooManyVertices(n));
    }
    let mut out_of: Vec<Vec<&Edge>> = vec![Vec::new(); n];
    for e in edges {
        out_of[e.tail].push(e);
    }
    let mut found = Vec::new();
    for root in 0..n {
        let mut on_path = vec![false; n];
        on_path[root] = true;
        let mut stack: Vec<&Edge> = Vec::new();
        dfs(root, root, &out_of, &mut on_path, &mut stack, &mut found);
    }
    found.sort();
    Ok(found)
}

fn dfs<'a>(
    root: usize,
    at: usize,
    out_of: &[Vec<&'a Edge>],
    on_path: &mut [bool],
    stack: &mut Vec<&'a Edge>,
    found: &mut Vec<Cycle>,
) {
    for &e in &out_of[at] {
        if e.head == root {
            stack.push(e);
            let cost = stack.iter().map(|e| e.cost).sum();
            let delay = stack.iter().map(|e| e.delay).sum();
            found.push(Cycle::from_raw(stack.iter().map(|e| e.id).collect(), cost, delay));
            stack.pop();
        } else if e.head > root && !on_path[e.head] {
            on_path[e.head] = true;
            stack.push(e);
            dfs(root, e.head, out_of, on_path, stack, found);
            stack.pop();
            on_path[e.head] = false;
        }
    }
}

pub fn enumerate_simple_cycles(g: &ResidualGraph) -> Result<Vec<Cycle>, OracleError> {
    enumerate_cycles(g.vertex_count(), g.edges())
}

/// Sign of a/b − x/y for nonzero b and y, by cross-multiplication.
fn frac_cmp(a: i128, b: i128, x: i128, y: i128) -> Ordering {
    let lhs = a * y;
    let rhs = x * b;
    if (b > 0) == (y > 0) {
        lhs.cmp(&rhs)
    } else {
        rhs.cmp(&lhs)
    }
}

/// Independent re-check of the bicameral conditions from raw sums.
pub fn verify_bicameral(cost: i64, delay: i64, delta_d: i64, delta_c: i64, c_hat: i64) -> bool {
    let (c, d) = (cost as i128, delay as i128);
    let (dd, dc, ch) = (delta_d as i128, delta_c as i128, c_hat as i128);
    if (d < 0 && c <= 0) || (d <= 0 && c < 0) {
        return true;
    }
    if dc == 0 {
        return false;
    }
    let type1 = d < 0 && c > 0 && c <= ch && frac_cmp(d, c, dd, dc) != Ordering::Greater;
    let type2 = d >= 0 && c < 0 && -ch <= c && frac_cmp(d, c, dd, dc) != Ordering::Less;
    type1 || type2
}
