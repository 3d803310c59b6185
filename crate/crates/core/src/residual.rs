//! Residual graphs, the ⊕ operator, and the two decompositions cycle
//! cancellation relies on: a k-flow into disjoint paths, and the difference of
//! two path sets into edge-disjoint cycles.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use log::debug;
use thiserror::Error;

use crate::graph::{Edge, EdgeId, Instance, PathSet, PathSetError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResidualError {
    #[error("solution references edge {0} which is not in the instance")]
    InvalidSolution(usize),
    #[error("invalid path set: {0}")]
    PathSet(#[from] PathSetError),
    #[error("edge set is not a {k}-flow: vertex {vertex} has imbalance {imbalance}")]
    NotAKFlow { k: usize, vertex: usize, imbalance: i64 },
    #[error("edge {0} is not a forward edge of the instance")]
    ForeignEdge(usize),
    #[error("edge {0} appears more than once")]
    DuplicateEdge(usize),
}

/// `G` with the edges of the current paths reversed and their cost and delay
/// negated. Every instance edge appears exactly once, keeping its id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualGraph {
    n: usize,
    s: usize,
    t: usize,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
}

impl ResidualGraph {
    /// Residual graph in which exactly the edges in `reversed` are flipped.
    /// Ids outside the instance are ignored.
    pub fn with_reversed(inst: &Instance, reversed: &BTreeSet<EdgeId>) -> Self {
        let edges: Vec<Edge> = inst
            .edges()
            .iter()
            .map(|e| if reversed.contains(&e.id) { e.reversed() } else { e.clone() })
            .collect();
        let mut out = vec![Vec::new(); inst.vertex_count()];
        for e in &edges {
            out[e.tail].push(e.id);
        }
        ResidualGraph { n: inst.vertex_count(), s: inst.source(), t: inst.sink(), edges, out }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> usize {
        self.s
    }

    pub fn sink(&self) -> usize {
        self.t
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    /// Outgoing edge ids of `v`, ascending.
    pub fn out_edges(&self, v: usize) -> &[EdgeId] {
        &self.out[v]
    }

    /// The forward instance edge that residual edge `id` reverses, if any.
    pub fn forward_of(&self, id: EdgeId) -> Option<EdgeId> {
        self.edges[id.0].origin
    }

    pub fn reversed_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_reversed()).count()
    }
}

/// Builds `G̃(P_1..P_k)`.
pub fn build_residual(inst: &Instance, sol: &PathSet) -> Result<ResidualGraph, ResidualError> {
    let mut reversed = BTreeSet::new();
    for &id in sol.paths().iter().flatten() {
        if id.0 >= inst.edges().len() {
            return Err(ResidualError::InvalidSolution(id.0));
        }
        reversed.insert(id);
    }
    Ok(ResidualGraph::with_reversed(inst, &reversed))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycleError {
    #[error("cycle is empty")]
    Empty,
    #[error("edge {0} is not in the residual graph")]
    UnknownEdge(usize),
    #[error("edges do not chain at position {0}")]
    Broken(usize),
    #[error("edge {0} repeats")]
    RepeatedEdge(usize),
}

/// A closed edge sequence of a residual graph with its cost and delay sums.
/// The sequence is stored rotated so that its smallest edge id comes first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    edges: Vec<EdgeId>,
    cost: i64,
    delay: i64,
}

impl Cycle {
    /// Validates that `edges` chain head-to-tail in `g`, close up, and are
    /// distinct; sums are computed from `g`.
    pub fn from_edges(g: &ResidualGraph, edges: Vec<EdgeId>) -> Result<Cycle, CycleError> {
        if edges.is_empty() {
            return Err(CycleError::Empty);
        }
        let mut seen = HashSet::new();
        let (mut cost, mut delay) = (0, 0);
        for (i, &id) in edges.iter().enumerate() {
            let e = g.edges().get(id.0).ok_or(CycleError::UnknownEdge(id.0))?;
            let next = g.edge(edges[(i + 1) % edges.len()]);
            if e.head != next.tail {
                return Err(CycleError::Broken(i));
            }
            if !seen.insert(id) {
                return Err(CycleError::RepeatedEdge(id.0));
            }
            cost += e.cost;
            delay += e.delay;
        }
        Ok(Cycle::from_raw(edges, cost, delay))
    }

    /// Builds a cycle from precomputed sums without validation.
    pub fn from_raw(mut edges: Vec<EdgeId>, cost: i64, delay: i64) -> Cycle {
        if let Some(pos) = edges.iter().enumerate().min_by_key(|(_, id)| **id).map(|(i, _)| i) {
            edges.rotate_left(pos);
        }
        Cycle { edges, cost, delay }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn cost(&self) -> i64 {
        self.cost
    }

    pub fn delay(&self) -> i64 {
        self.delay
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Vertices visited, in order, starting at the tail of the first edge.
    pub fn vertices(&self, g: &ResidualGraph) -> Vec<usize> {
        self.edges.iter().map(|&id| g.edge(id).tail).collect()
    }

    pub fn residual_edges(&self, g: &ResidualGraph) -> Vec<Edge> {
        self.edges.iter().map(|&id| g.edge(id).clone()).collect()
    }
}

/// `E₁ ⊕ E₂`: the union with every forward/reversed pair of the same instance
/// edge removed, one member taken from each side. Identical edges present on
/// both sides appear once. The result is sorted by edge id.
pub fn symmetric_diff(a: &[Edge], b: &[Edge]) -> Vec<Edge> {
    fn cancels(e: &Edge, other: &[Edge]) -> bool {
        match e.origin {
            None => other.iter().any(|o| o.origin == Some(e.id)),
            Some(fwd) => other.iter().any(|o| o.origin.is_none() && o.id == fwd),
        }
    }
    let mut out: Vec<Edge> = Vec::with_capacity(a.len() + b.len());
    for e in a.iter().filter(|e| !cancels(e, b)).chain(b.iter().filter(|e| !cancels(e, a))) {
        if !out.contains(e) {
            out.push(e.clone());
        }
    }
    out.sort_by_key(|e| (e.id, e.origin.is_some()));
    out
}

/// Forward edges of the paths.
pub fn path_edges(inst: &Instance, sol: &PathSet) -> Vec<Edge> {
    sol.edge_ids().into_iter().map(|id| inst.edge(id).clone()).collect()
}

/// Result of splitting a k-flow: the paths, plus the leftover cycles that
/// were discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowDecomposition {
    pub paths: PathSet,
    pub dropped: Vec<Vec<EdgeId>>,
    pub dropped_cost: i64,
    pub dropped_delay: i64,
}

/// Removes a closed sub-walk from `walk` whenever `head` re-enters a vertex
/// already on it. Returns the removed loop, if any.
fn close_loop(walk_vertices: &mut Vec<usize>, walk_edges: &mut Vec<EdgeId>, head: usize) -> Option<Vec<EdgeId>> {
    let pos = walk_vertices.iter().position(|&v| v == head)?;
    let cycle = walk_edges.split_off(pos);
    walk_vertices.truncate(pos + 1);
    Some(cycle)
}

/// Splits an edge set of `G` carrying a unit k-flow into k edge-disjoint
/// s→t paths. Paths are extracted depth-first from `s`, always taking the
/// smallest remaining edge id. Leftover closed walks are broken into cycles;
/// a leftover cycle is dropped only if dropping it raises neither total cost
/// nor total delay, which always holds for the nonnegative weights of `G`.
pub fn decompose_flow(edges: &[Edge], inst: &Instance) -> Result<FlowDecomposition, ResidualError> {
    let k = inst.path_count();
    let mut seen = HashSet::new();
    let mut balance = vec![0i64; inst.vertex_count()];
    let mut out: Vec<BTreeSet<EdgeId>> = vec![BTreeSet::new(); inst.vertex_count()];
    for e in edges {
        if e.origin.is_some() || e.id.0 >= inst.edges().len() || inst.edge(e.id) != e {
            return Err(ResidualError::ForeignEdge(e.id.0));
        }
        if !seen.insert(e.id) {
            return Err(ResidualError::DuplicateEdge(e.id.0));
        }
        balance[e.tail] += 1;
        balance[e.head] -= 1;
        out[e.tail].insert(e.id);
    }
    for (v, &b) in balance.iter().enumerate() {
        let want = if v == inst.source() {
            k as i64
        } else if v == inst.sink() {
            -(k as i64)
        } else {
            0
        };
        if b != want {
            return Err(ResidualError::NotAKFlow { k, vertex: v, imbalance: b });
        }
    }

    fn take(out: &mut [BTreeSet<EdgeId>], v: usize) -> EdgeId {
        let id = *out[v].iter().next().expect("balanced flow never strands a walk");
        out[v].remove(&id);
        id
    }
    let mut paths = Vec::with_capacity(k);
    let mut leftovers = Vec::new();
    for _ in 0..k {
        let mut vs = vec![inst.source()];
        let mut es = Vec::new();
        while *vs.last().unwrap() != inst.sink() {
            let id = take(&mut out, *vs.last().unwrap());
            let head = inst.edge(id).head;
            es.push(id);
            match close_loop(&mut vs, &mut es, head) {
                Some(cycle) => leftovers.push(cycle),
                None => vs.push(head),
            }
        }
        paths.push(es);
    }
    // Whatever remains is balanced at every vertex.
    for v in 0..inst.vertex_count() {
        while !out[v].is_empty() {
            let mut vs = vec![v];
            let mut es = Vec::new();
            loop {
                let id = take(&mut out, *vs.last().unwrap());
                let head = inst.edge(id).head;
                es.push(id);
                if let Some(cycle) = close_loop(&mut vs, &mut es, head) {
                    leftovers.push(cycle);
                    if es.is_empty() {
                        break;
                    }
                } else {
                    vs.push(head);
                }
            }
        }
    }

    leftovers.sort_by_key(|c| c.iter().min().copied());
    let (mut dropped_cost, mut dropped_delay) = (0, 0);
    for c in &leftovers {
        let cost: i64 = c.iter().map(|&id| inst.edge(id).cost).sum();
        let delay: i64 = c.iter().map(|&id| inst.edge(id).delay).sum();
        debug_assert!(cost >= 0 && delay >= 0, "instance cycles are nonnegative");
        debug!("dropping leftover cycle {:?} (cost {}, delay {})", c, cost, delay);
        dropped_cost += cost;
        dropped_delay += delay;
    }
    Ok(FlowDecomposition { paths: PathSet::new(inst, paths)?, dropped: leftovers, dropped_cost, dropped_delay })
}

/// [`decompose_flow`] without the leftover bookkeeping.
pub fn decompose_to_paths(edges: &[Edge], inst: &Instance) -> Result<PathSet, ResidualError> {
    decompose_flow(edges, inst).map(|d| d.paths)
}

/// `{P_1..P_k} ⊕ O` followed by path extraction.
pub fn apply_cycle(inst: &Instance, sol: &PathSet, cycle: &Cycle) -> Result<FlowDecomposition, ResidualError> {
    let g = build_residual(inst, sol)?;
    let merged = symmetric_diff(&path_edges(inst, sol), &cycle.residual_edges(&g));
    decompose_flow(&merged, inst)
}

/// Splits a balanced edge multiset of `g` into vertex-simple cycles, walking
/// from the smallest remaining edge id and following the smallest outgoing id.
pub fn split_into_cycles(g: &ResidualGraph, edges: &[EdgeId]) -> Vec<Cycle> {
    let mut out: BTreeMap<usize, BTreeSet<EdgeId>> = BTreeMap::new();
    for &id in edges {
        out.entry(g.edge(id).tail).or_default().insert(id);
    }
    let mut remaining: BTreeSet<EdgeId> = edges.iter().copied().collect();
    let mut cycles = Vec::new();
    while let Some(&first) = remaining.iter().next() {
        let start = g.edge(first).tail;
        let mut vs = vec![start];
        let mut es: Vec<EdgeId> = Vec::new();
        let mut next = Some(first);
        loop {
            let at = *vs.last().unwrap();
            let id = match next.take() {
                Some(id) => id,
                None => match out.get(&at).and_then(|s| s.iter().next().copied()) {
                    Some(id) => id,
                    None => break,
                },
            };
            out.get_mut(&at).unwrap().remove(&id);
            remaining.remove(&id);
            let head = g.edge(id).head;
            es.push(id);
            if let Some(c) = close_loop(&mut vs, &mut es, head) {
                cycles.push(Cycle::from_edges(g, c).expect("closed loop is a cycle"));
                if es.is_empty() {
                    break;
                }
            } else {
                vs.push(head);
            }
        }
    }
    cycles.sort();
    cycles
}

/// The edge-disjoint cycles composing `{P*} ⊕ {reverse(P)}`, expressed in
/// the residual graph of `cur`.
pub fn diff_cycles(opt: &PathSet, cur: &PathSet, inst: &Instance) -> Result<Vec<Cycle>, ResidualError> {
    let g = build_residual(inst, cur)?;
    let reversed: Vec<Edge> = path_edges(inst, cur).iter().map(Edge::reversed).collect();
    let union = symmetric_diff(&path_edges(inst, opt), &reversed);
    let ids: Vec<EdgeId> = union.iter().map(|e| e.id).collect();
    Ok(split_into_cycles(&g, &ids))
}

/// In-degree minus out-degree per vertex of an edge multiset.
pub fn degree_imbalance(g: &ResidualGraph, edges: &[EdgeId]) -> HashMap<usize, i64> {
    let mut bal = HashMap::new();
    for &id in edges {
        let e = g.edge(id);
        *bal.entry(e.tail).or_insert(0) -= 1;
        *bal.entry(e.head).or_insert(0) += 1;
    }
    bal.retain(|_, b| *b != 0);
    bal
}
