//! Directed multigraph instances, path sets and the plain-text instance format.
//!
//! An [`Instance`] is immutable once built: every constructor validates the
//! vertex range, terminal distinctness, and non-negativity of costs and delays.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Dense 0-based edge identifier, assigned in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A directed edge. In an [`Instance`] `origin` is always `None`; a residual
/// graph uses `origin` to remember which forward edge a reversed edge undoes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: usize,
    pub head: usize,
    pub cost: i64,
    pub delay: i64,
    pub origin: Option<EdgeId>,
}

impl Edge {
    /// Flips direction and negates cost and delay. Reversing twice restores
    /// the original edge.
    pub fn reversed(&self) -> Edge {
        Edge {
            id: self.id,
            tail: self.head,
            head: self.tail,
            cost: -self.cost,
            delay: -self.delay,
            origin: match self.origin {
                None => Some(self.id),
                Some(_) => None,
            },
        }
    }

    pub fn is_reversed(&self) -> bool {
        self.origin.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("terminals must be distinct (s = t = {0})")]
    SameTerminals(usize),
    #[error("terminal {vertex} out of range for {n} vertices")]
    TerminalOutOfRange { vertex: usize, n: usize },
    #[error("edge {edge}: vertex {vertex} out of range for {n} vertices")]
    DanglingVertex { edge: usize, vertex: usize, n: usize },
    #[error("edge {edge}: negative cost")]
    NegativeCost { edge: usize },
    #[error("edge {edge}: negative delay")]
    NegativeDelay { edge: usize },
    #[error("edge {edge}: self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("path count k must be at least 1")]
    ZeroPaths,
    #[error("delay bound must be nonnegative")]
    NegativeDelayBound,
    #[error("total edge cost or delay overflows 64-bit arithmetic")]
    Overflow,
}

/// A kRSP instance: digraph with integral costs and delays, terminals, path
/// count and total delay bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    edges: Vec<Edge>,
    s: usize,
    t: usize,
    k: usize,
    delay_bound: i64,
}

impl Instance {
    /// Builds an instance from `(tail, head, cost, delay)` tuples. Edge ids are
    /// assigned in input order.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, i64, i64)>,
        s: usize,
        t: usize,
        k: usize,
        delay_bound: i64,
    ) -> Result<Self, InstanceError> {
        if s >= n {
            return Err(InstanceError::TerminalOutOfRange { vertex: s, n });
        }
        if t >= n {
            return Err(InstanceError::TerminalOutOfRange { vertex: t, n });
        }
        if s == t {
            return Err(InstanceError::SameTerminals(s));
        }
        if k == 0 {
            return Err(InstanceError::ZeroPaths);
        }
        if delay_bound < 0 {
            return Err(InstanceError::NegativeDelayBound);
        }
        let mut out = Vec::new();
        let (mut cost_sum, mut delay_sum) = (0i64, 0i64);
        for (i, (tail, head, cost, delay)) in edges.into_iter().enumerate() {
            for vertex in [tail, head] {
                if vertex >= n {
                    return Err(InstanceError::DanglingVertex { edge: i, vertex, n });
                }
            }
            if tail == head {
                return Err(InstanceError::SelfLoop { edge: i, vertex: tail });
            }
            if cost < 0 {
                return Err(InstanceError::NegativeCost { edge: i });
            }
            if delay < 0 {
                return Err(InstanceError::NegativeDelay { edge: i });
            }
            cost_sum = cost_sum.checked_add(cost).ok_or(InstanceError::Overflow)?;
            delay_sum = delay_sum.checked_add(delay).ok_or(InstanceError::Overflow)?;
            out.push(Edge { id: EdgeId(i), tail, head, cost, delay, origin: None });
        }
        Ok(Instance { n, edges: out, s, t, k, delay_bound })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn source(&self) -> usize {
        self.s
    }

    pub fn sink(&self) -> usize {
        self.t
    }

    pub fn path_count(&self) -> usize {
        self.k
    }

    pub fn delay_bound(&self) -> i64 {
        self.delay_bound
    }

    pub fn total_cost(&self) -> i64 {
        self.edges.iter().map(|e| e.cost).sum()
    }

    pub fn total_delay(&self) -> i64 {
        self.edges.iter().map(|e| e.delay).sum()
    }

    /// Same graph and terminals with a different delay bound.
    pub fn with_delay_bound(&self, delay_bound: i64) -> Result<Self, InstanceError> {
        if delay_bound < 0 {
            return Err(InstanceError::NegativeDelayBound);
        }
        Ok(Instance { delay_bound, ..self.clone() })
    }

    /// Same graph with a different path count.
    pub fn with_path_count(&self, k: usize) -> Result<Self, InstanceError> {
        if k == 0 {
            return Err(InstanceError::ZeroPaths);
        }
        Ok(Instance { k, ..self.clone() })
    }

    /// Same topology with every edge's cost and delay replaced.
    pub fn with_weights(
        &self,
        weights: impl IntoIterator<Item = (i64, i64)>,
        delay_bound: i64,
    ) -> Result<Self, InstanceError> {
        let tuples: Vec<_> = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, (c, d))| (e.tail, e.head, c, d))
            .collect();
        assert_eq!(tuples.len(), self.edges.len(), "one weight pair per edge");
        Instance::new(self.n, tuples, self.s, self.t, self.k, delay_bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathSetError {
    #[error("expected {expected} paths, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("path {path} references unknown edge {edge}")]
    UnknownEdge { path: usize, edge: usize },
    #[error("path {path} is empty")]
    EmptyPath { path: usize },
    #[error("path {path} does not start at s")]
    BadStart { path: usize },
    #[error("path {path} does not end at t")]
    BadEnd { path: usize },
    #[error("path {path} is not a chained walk at position {position}")]
    Broken { path: usize, position: usize },
    #[error("path {path} revisits vertex {vertex}")]
    NotSimple { path: usize, vertex: usize },
    #[error("edge {edge} is used more than once")]
    SharedEdge { edge: usize },
}

/// k mutually edge-disjoint s→t paths with cached totals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathSet {
    paths: Vec<Vec<EdgeId>>,
    total_cost: i64,
    total_delay: i64,
}

impl PathSet {
    /// Validates `paths` against `inst` and caches the totals. An empty list
    /// is accepted only through [`PathSet::empty`].
    pub fn new(inst: &Instance, paths: Vec<Vec<EdgeId>>) -> Result<Self, PathSetError> {
        if paths.len() != inst.path_count() {
            return Err(PathSetError::WrongCount { expected: inst.path_count(), got: paths.len() });
        }
        Self::validated(inst, paths)
    }

    /// The "no paths" state; its residual graph is the instance graph itself.
    pub fn empty() -> Self {
        PathSet { paths: Vec::new(), total_cost: 0, total_delay: 0 }
    }

    fn validated(inst: &Instance, paths: Vec<Vec<EdgeId>>) -> Result<Self, PathSetError> {
        let mut used = HashSet::new();
        let (mut cost, mut delay) = (0i64, 0i64);
        for (pi, path) in paths.iter().enumerate() {
            if path.is_empty() {
                return Err(PathSetError::EmptyPath { path: pi });
            }
            let mut seen = HashSet::from([inst.source()]);
            let mut at = inst.source();
            for (pos, &id) in path.iter().enumerate() {
                let e = inst
                    .edges()
                    .get(id.0)
                    .ok_or(PathSetError::UnknownEdge { path: pi, edge: id.0 })?;
                if e.tail != at {
                    return Err(if pos == 0 {
                        PathSetError::BadStart { path: pi }
                    } else {
                        PathSetError::Broken { path: pi, position: pos }
                    });
                }
                if !used.insert(id) {
                    return Err(PathSetError::SharedEdge { edge: id.0 });
                }
                if !seen.insert(e.head) {
                    return Err(PathSetError::NotSimple { path: pi, vertex: e.head });
                }
                at = e.head;
                cost += e.cost;
                delay += e.delay;
            }
            if at != inst.sink() {
                return Err(PathSetError::BadEnd { path: pi });
            }
        }
        Ok(PathSet { paths, total_cost: cost, total_delay: delay })
    }

    pub fn paths(&self) -> &[Vec<EdgeId>] {
        &self.paths
    }

    pub fn total_cost(&self) -> i64 {
        self.total_cost
    }

    pub fn total_delay(&self) -> i64 {
        self.total_delay
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// All edge ids used by the paths, ascending.
    pub fn edge_ids(&self) -> Vec<EdgeId> {
        let mut ids: Vec<EdgeId> = self.paths.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.paths.iter().any(|p| p.contains(&id))
    }

    /// Same paths listed in a canonical order, for comparisons that should
    /// ignore path ordering.
    pub fn canonical(&self) -> PathSet {
        let mut paths = self.paths.clone();
        paths.sort();
        PathSet { paths, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing header line")]
    MissingHeader,
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: &'static str, found: usize },
    #[error("not a nonnegative integer: {0:?}")]
    BadInteger(String),
    #[error("negative cost")]
    NegativeCost,
    #[error("negative delay")]
    NegativeDelay,
    #[error("expected {expected} edge lines, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

fn parse_fields(line: &str, lineno: usize) -> Result<Vec<i128>, ParseError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<i128>()
                .map_err(|_| ParseError { line: lineno, kind: ParseErrorKind::BadInteger(tok.to_string()) })
        })
        .collect()
}

fn to_usize(v: i128, lineno: usize) -> Result<usize, ParseError> {
    usize::try_from(v).map_err(|_| ParseError { line: lineno, kind: ParseErrorKind::BadInteger(v.to_string()) })
}

fn to_i64(v: i128, lineno: usize) -> Result<i64, ParseError> {
    i64::try_from(v).map_err(|_| ParseError { line: lineno, kind: ParseErrorKind::BadInteger(v.to_string()) })
}

/// Parses the line format `n m k D [s t]` followed by `m` lines of
/// `tail head cost delay`. Blank lines are skipped; errors cite the 1-based
/// line number in `text`.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or(ParseError { line: 1, kind: ParseErrorKind::MissingHeader })?;
    let h = parse_fields(header, hline)?;
    if h.len() != 4 && h.len() != 6 {
        return Err(ParseError {
            line: hline,
            kind: ParseErrorKind::FieldCount { expected: "4 or 6", found: h.len() },
        });
    }
    let n = to_usize(h[0], hline)?;
    let m = to_usize(h[1], hline)?;
    let k = to_usize(h[2], hline)?;
    let d = to_i64(h[3], hline)?;
    let (s, t) = if h.len() == 6 {
        (to_usize(h[4], hline)?, to_usize(h[5], hline)?)
    } else {
        (0, n.saturating_sub(1))
    };

    let mut edges = Vec::with_capacity(m);
    let mut last_line = hline;
    let mut edge_lines = Vec::with_capacity(m);
    for (lineno, line) in lines.by_ref() {
        last_line = lineno;
        let f = parse_fields(line, lineno)?;
        if f.len() != 4 {
            return Err(ParseError {
                line: lineno,
                kind: ParseErrorKind::FieldCount { expected: "4", found: f.len() },
            });
        }
        if f[2] < 0 {
            return Err(ParseError { line: lineno, kind: ParseErrorKind::NegativeCost });
        }
        if f[3] < 0 {
            return Err(ParseError { line: lineno, kind: ParseErrorKind::NegativeDelay });
        }
        edges.push((
            to_usize(f[0], lineno)?,
            to_usize(f[1], lineno)?,
            to_i64(f[2], lineno)?,
            to_i64(f[3], lineno)?,
        ));
        edge_lines.push(lineno);
    }
    if edges.len() != m {
        return Err(ParseError {
            line: last_line,
            kind: ParseErrorKind::EdgeCount { expected: m, found: edges.len() },
        });
    }
    Instance::new(n, edges, s, t, k, d).map_err(|err| {
        let line = match &err {
            InstanceError::DanglingVertex { edge, .. }
            | InstanceError::NegativeCost { edge }
            | InstanceError::NegativeDelay { edge }
            | InstanceError::SelfLoop { edge, .. } => edge_lines[*edge],
            _ => hline,
        };
        ParseError { line, kind: ParseErrorKind::Invalid(err) }
    })
}

/// Renders `inst` in the format accepted by [`parse_instance`]. Terminals are
/// written explicitly only when they differ from the defaults.
pub fn render_instance(inst: &Instance) -> String {
    let mut out = format!(
        "{} {} {} {}",
        inst.vertex_count(),
        inst.edges().len(),
        inst.path_count(),
        inst.delay_bound()
    );
    if inst.source() != 0 || inst.sink() != inst.vertex_count() - 1 {
        out.push_str(&format!(" {} {}", inst.source(), inst.sink()));
    }
    out.push('\n');
    for e in inst.edges() {
        out.push_str(&format!("{} {} {} {}\n", e.tail, e.head, e.cost, e.delay));
    }
    out
}

/// Parameters for [`gen_random_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub n: usize,
    pub m: usize,
    pub max_cost: i64,
    pub max_delay: i64,
    pub k: usize,
    pub seed: u64,
}

/// Samples `m` edges with uniformly random distinct endpoints and uniform
/// integer cost in `[0, max_cost]` and delay in `[0, max_delay]`.
///
/// `s = 0`, `t = n - 1`, and the delay bound is left at 0 for the caller to
/// replace via [`Instance::with_delay_bound`]. `n` is raised to 2 and `k` to 1
/// when given smaller values.
pub fn gen_random_instance(p: GenParams) -> Instance {
    let n = p.n.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let edges: Vec<_> = (0..p.m)
        .map(|_| {
            let tail = rng.gen_range(0..n);
            let mut head = rng.gen_range(0..n - 1);
            if head >= tail {
                head += 1;
            }
            let cost = rng.gen_range(0..=p.max_cost.max(0));
            let delay = rng.gen_range(0..=p.max_delay.max(0));
            (tail, head, cost, delay)
        })
        .collect();
    Instance::new(n, edges, 0, n - 1, p.k.max(1), 0).expect("generator output is valid")
}
