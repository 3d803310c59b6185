//! Auxiliary layered graphs, the per-(v, B) circulation LP, lifting of aux
//! cycles back to residual cycles, cycle classification and the search for a
//! bicameral cycle.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::graph::{EdgeId, Instance, PathSet};
use crate::lp::{decompose_circulation, solve_lp, LpProblem, LpStatus};
use crate::oracle;
use crate::residual::{build_residual, Cycle, ResidualError, ResidualGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxKind {
    Shift(EdgeId),
    Wrap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxEdge {
    pub tail: usize,
    pub head: usize,
    pub cost: i64,
    pub delay: i64,
    pub kind: AuxKind,
}

/// `H_v^±(B)`: `B+1` copies of every residual vertex, edges shifting level
/// by their cost, and zero-weight wrap edges at the anchor. Vertex `(u, i)`
/// has index `u·(B+1) + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxGraph {
    sign: Sign,
    anchor: usize,
    budget: usize,
    base_vertices: usize,
    edges: Vec<AuxEdge>,
}

impl AuxGraph {
    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn vertex_count(&self) -> usize {
        self.base_vertices * (self.budget + 1)
    }

    pub fn vertex(&self, u: usize, level: usize) -> usize {
        u * (self.budget + 1) + level
    }

    /// `(residual vertex, level)` of an aux vertex index.
    pub fn split_vertex(&self, x: usize) -> (usize, usize) {
        (x / (self.budget + 1), x % (self.budget + 1))
    }

    pub fn edges(&self) -> &[AuxEdge] {
        &self.edges
    }

    pub fn wrap_edges(&self) -> impl Iterator<Item = (usize, &AuxEdge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.kind == AuxKind::Wrap)
    }

    pub fn shift_copies(&self, id: EdgeId) -> usize {
        self.edges.iter().filter(|e| e.kind == AuxKind::Shift(id)).count()
    }
}

pub fn build_aux(g: &ResidualGraph, v: usize, budget: usize, sign: Sign) -> AuxGraph {
    let b = budget as i64;
    let width = budget + 1;
    let mut edges = Vec::new();
    for e in g.edges() {
        if e.cost.abs() > b {
            continue;
        }
        let (from, to) = if e.cost >= 0 { (0, b - e.cost) } else { (-e.cost, b) };
        for i in from..=to {
            let j = i + e.cost;
            edges.push(AuxEdge {
                tail: e.tail * width + i as usize,
                head: e.head * width + j as usize,
                cost: e.cost,
                delay: e.delay,
                kind: AuxKind::Shift(e.id),
            });
        }
    }
    let target = match sign {
        Sign::Plus => 0,
        Sign::Minus => budget,
    };
    for i in 0..=budget {
        edges.push(AuxEdge { tail: v * width + i, head: v * width + target, cost: 0, delay: 0, kind: AuxKind::Wrap });
    }
    AuxGraph { sign, anchor: v, budget, base_vertices: g.vertex_count(), edges }
}

/// Splits a closed walk of `g` into vertex-simple cycles by cutting out a
/// loop each time the walk re-enters a vertex already on the current stack.
fn split_walk(g: &ResidualGraph, walk: &[EdgeId]) -> Vec<Cycle> {
    let mut out = Vec::new();
    let Some(&first) = walk.first() else {
        return out;
    };
    let mut vs = vec![g.edge(first).tail];
    let mut es: Vec<EdgeId> = Vec::new();
    for &id in walk {
        let head = g.edge(id).head;
        es.push(id);
        if let Some(pos) = vs.iter().position(|&v| v == head) {
            let cyc = es.split_off(pos);
            vs.truncate(pos + 1);
            out.push(Cycle::from_edges(g, cyc).expect("cut loop is a simple cycle"));
        } else {
            vs.push(head);
        }
    }
    debug_assert!(es.is_empty(), "walk is closed");
    out
}

/// Maps an aux cycle (arc indices in traversal order) to residual cycles:
/// the walk is cut at wrap edges, each piece projects to a closed walk
/// through the anchor, and each closed walk splits into simple cycles.
pub fn lift_cycle(g: &ResidualGraph, aux: &AuxGraph, arcs: &[usize]) -> Vec<Cycle> {
    let is_wrap = |a: usize| aux.edges[a].kind == AuxKind::Wrap;
    let start = arcs.iter().position(|&a| is_wrap(a)).unwrap_or(0);
    let mut pieces: Vec<Vec<EdgeId>> = vec![Vec::new()];
    for &a in arcs[start..].iter().chain(&arcs[..start]) {
        match aux.edges[a].kind {
            AuxKind::Wrap => pieces.push(Vec::new()),
            AuxKind::Shift(id) => pieces.last_mut().unwrap().push(id),
        }
    }
    let mut cycles: Vec<Cycle> = pieces.iter().flat_map(|p| split_walk(g, p)).collect();
    cycles.sort();
    cycles
}

/// Strongly connected component id per vertex (iterative Kosaraju).
fn scc(n: usize, arcs: &[(usize, usize)]) -> Vec<usize> {
    let mut fwd = vec![Vec::new(); n];
    let mut rev = vec![Vec::new(); n];
    for &(u, v) in arcs {
        fwd[u].push(v);
        rev[v].push(u);
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((u, i)) = stack.pop() {
            if i < fwd[u].len() {
                stack.push((u, i + 1));
                let w = fwd[u][i];
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(u);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = next;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &w in &rev[u] {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// The circulation LP on `aux`: minimize cost subject to conservation and
/// `0 ≤ x ≤ 1`, with `Σ d·x ≤ min(ΔD, −1)` on `+` graphs only. Arcs that
/// join different strongly connected components cannot carry circulation
/// and are fixed to zero.
pub fn make_cycle_lp(aux: &AuxGraph, delta_d: i64) -> LpProblem {
    let arcs: Vec<(usize, usize)> = aux.edges.iter().map(|e| (e.tail, e.head)).collect();
    let comp = scc(aux.vertex_count(), &arcs);
    let mut p = LpProblem::new(arcs.len());
    let mut rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); aux.vertex_count()];
    for (a, e) in aux.edges.iter().enumerate() {
        p.set_cost(a, q(e.cost));
        let cap = if comp[e.tail] == comp[e.head] { 1 } else { 0 };
        p.set_bounds(a, Some(q(0)), Some(q(cap)));
        if e.tail != e.head {
            rows[e.tail].push((a, q(1)));
            rows[e.head].push((a, q(-1)));
        }
    }
    for row in rows.into_iter().filter(|r| !r.is_empty()) {
        p.add_eq(row, q(0));
    }
    if aux.sign == Sign::Plus {
        let budget = aux.edges.iter().enumerate().filter(|(_, e)| e.delay != 0).map(|(a, e)| (a, q(e.delay))).collect();
        p.add_le(budget, q(delta_d.min(-1)));
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CycleClass {
    Type0,
    Type1,
    Type2,
    NonBicameral,
}

impl fmt::Display for CycleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleClass::Type0 => "type0",
            CycleClass::Type1 => "type1",
            CycleClass::Type2 => "type2",
            CycleClass::NonBicameral => "nonBicameral",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CycleSource {
    Lp,
    Enumerate,
    #[default]
    Hybrid,
}

impl FromStr for CycleSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lp" => Ok(CycleSource::Lp),
            "enumerate" => Ok(CycleSource::Enumerate),
            "hybrid" => Ok(CycleSource::Hybrid),
            _ => Err(format!("unknown cycle source `{s}` (expected lp, enumerate or hybrid)")),
        }
    }
}

impl fmt::Display for CycleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleSource::Lp => "lp",
            CycleSource::Enumerate => "enumerate",
            CycleSource::Hybrid => "hybrid",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchContext {
    pub residual: ResidualGraph,
    pub delta_d: i64,
    pub c_hat: i64,
    pub delta_c: i64,
    pub bmax: usize,
    pub binary_search_b: bool,
}

impl SearchContext {
    pub fn new(inst: &Instance, sol: &PathSet, c_hat: i64, bmax: Option<usize>) -> Result<Self, ResidualError> {
        Ok(SearchContext {
            residual: build_residual(inst, sol)?,
            delta_d: inst.delay_bound() - sol.total_delay(),
            c_hat,
            delta_c: c_hat - sol.total_cost(),
            bmax: bmax.unwrap_or(c_hat.max(1) as usize).max(1),
            binary_search_b: false,
        })
    }

    fn ratio(&self) -> Option<BigRational> {
        (self.delta_c != 0).then(|| BigRational::new(BigInt::from(self.delta_d), BigInt::from(self.delta_c)))
    }
}

pub fn classify(cost: i64, delay: i64, ctx: &SearchContext) -> CycleClass {
    let (c, d) = (cost, delay);
    if (d < 0 && c <= 0) || (d <= 0 && c < 0) {
        return CycleClass::Type0;
    }
    let Some(r) = ctx.ratio() else {
        return CycleClass::NonBicameral;
    };
    if c == 0 {
        return CycleClass::NonBicameral;
    }
    let own = BigRational::new(BigInt::from(d), BigInt::from(c));
    if d < 0 && 0 < c && c <= ctx.c_hat && own <= r {
        CycleClass::Type1
    } else if d >= 0 && -ctx.c_hat <= c && c < 0 && own >= r {
        CycleClass::Type2
    } else {
        CycleClass::NonBicameral
    }
}

pub fn classify_cycle(o: &Cycle, ctx: &SearchContext) -> CycleClass {
    classify(o.cost(), o.delay(), ctx)
}

fn ratio_of(o: &Cycle) -> BigRational {
    BigRational::new(BigInt::from(o.delay()), BigInt::from(o.cost()))
}

/// Candidate order: a ratio key, then |c|, then edge ids.
fn key(ratio: BigRational, o: &Cycle) -> (BigRational, i64, Vec<EdgeId>) {
    (ratio, o.cost().abs(), o.edges().to_vec())
}

/// Picks among non-type-0 candidates: the negative-delay cycle with cost in
/// (0, Ĉ] and the most negative d/c, and the nonnegative-delay cycle with
/// cost in [−Ĉ, 0) and the largest d/c. The one with the smaller |d/c| wins;
/// the other is tried if the winner does not classify as bicameral.
fn select<'a>(cands: impl IntoIterator<Item = &'a Cycle>, ctx: &SearchContext) -> Option<Cycle> {
    let mut o1: Option<(BigRational, &Cycle)> = None;
    let mut o2: Option<(BigRational, &Cycle)> = None;
    for o in cands {
        let (c, d) = (o.cost(), o.delay());
        let (slot, k) = if d < 0 && 0 < c && c <= ctx.c_hat {
            (&mut o1, ratio_of(o))
        } else if d >= 0 && c < 0 && -ctx.c_hat <= c {
            (&mut o2, -ratio_of(o))
        } else {
            continue;
        };
        if slot.as_ref().is_none_or(|(ck, cur)| key(k.clone(), o) < key(ck.clone(), cur)) {
            *slot = Some((k, o));
        }
    }
    let order = match (o1, o2) {
        // o2's key is already |d/c|; o1's is −|d/c|.
        (Some((a, x)), Some((b, y))) if -&a <= b => [Some(x), Some(y)],
        (Some((_, x)), Some((_, y))) => [Some(y), Some(x)],
        (a, b) => [a.or(b).map(|(_, o)| o), None],
    };
    order.into_iter().flatten().find(|o| classify_cycle(o, ctx) != CycleClass::NonBicameral).cloned()
}

fn first_type0<'a>(cands: impl IntoIterator<Item = &'a Cycle>, ctx: &SearchContext) -> Option<Cycle> {
    cands.into_iter().filter(|o| classify_cycle(o, ctx) == CycleClass::Type0).min().cloned()
}

/// Residual cycles supported by the optimal LP solution on `H_v^sign(B)`.
pub fn lp_cycles(ctx: &SearchContext, v: usize, budget: usize, sign: Sign) -> Vec<Cycle> {
    let aux = build_aux(&ctx.residual, v, budget, sign);
    let sol = solve_lp(&make_cycle_lp(&aux, ctx.delta_d));
    if sol.status != LpStatus::Optimal {
        return Vec::new();
    }
    let arcs: Vec<(usize, usize)> = aux.edges.iter().map(|e| (e.tail, e.head)).collect();
    let weighted = decompose_circulation(&sol.values, aux.vertex_count(), &arcs).expect("LP solution is a circulation");
    let mut out: Vec<Cycle> = weighted.iter().flat_map(|w| lift_cycle(&ctx.residual, &aux, &w.arcs)).collect();
    out.sort();
    out.dedup();
    out
}

enum Found {
    Type0(Cycle),
    Candidates(Vec<Cycle>),
}

fn scan_budget(ctx: &SearchContext, budget: usize, pool: &mut BTreeSet<Cycle>) -> Option<Cycle> {
    for v in 0..ctx.residual.vertex_count() {
        for sign in [Sign::Plus, Sign::Minus] {
            let cycles = lp_cycles(ctx, v, budget, sign);
            if let Some(o) = first_type0(&cycles, ctx) {
                return Some(o);
            }
            pool.extend(cycles);
        }
    }
    None
}

fn lp_search(ctx: &SearchContext) -> Found {
    let mut pool = BTreeSet::new();
    if ctx.binary_search_b {
        let (mut lo, mut hi) = (1, ctx.bmax);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let before = pool.len();
            if let Some(o) = scan_budget(ctx, mid, &mut pool) {
                return Found::Type0(o);
            }
            if select(pool.iter(), ctx).is_some() && pool.len() > before {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if let Some(o) = scan_budget(ctx, lo, &mut pool) {
            return Found::Type0(o);
        }
    } else {
        for budget in 1..=ctx.bmax {
            if let Some(o) = scan_budget(ctx, budget, &mut pool) {
                return Found::Type0(o);
            }
        }
    }
    Found::Candidates(pool.into_iter().collect())
}

fn enumerate_search(ctx: &SearchContext) -> Option<Cycle> {
    let cycles = match oracle::enumerate_simple_cycles(&ctx.residual) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("cycle enumeration unavailable: {e}");
            return None;
        }
    };
    first_type0(&cycles, ctx).or_else(|| select(&cycles, ctx))
}

/// Searches the residual graph for a bicameral cycle. Any cycle returned
/// classifies as type 0, 1 or 2 under `ctx`.
pub fn find_bicameral(ctx: &SearchContext, source: CycleSource) -> Option<Cycle> {
    let lp = || match lp_search(ctx) {
        Found::Type0(o) => Some(o),
        Found::Candidates(c) => select(&c, ctx),
    };
    let found = match source {
        CycleSource::Lp => lp(),
        CycleSource::Enumerate => enumerate_search(ctx),
        CycleSource::Hybrid => lp().or_else(|| {
            log::debug!("lp search found no bicameral cycle; enumerating");
            enumerate_search(ctx)
        }),
    };
    if let Some(o) = &found {
        assert_ne!(classify_cycle(o, ctx), CycleClass::NonBicameral, "search returned a non-bicameral cycle {o:?}");
    }
    found
}
