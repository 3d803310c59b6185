//! The end-to-end solver: cycle cancellation under a cost estimate, the
//! ladder of estimates, and the scaled polynomial-time mode.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::Signed;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bicameral::{classify_cycle, find_bicameral, CycleClass, CycleSource, SearchContext};
use crate::graph::{render_instance, EdgeId, Instance, InstanceError, PathSet};
use crate::phase1::{check_feasible, min_cost_k_disjoint, phase1_solution, Phase1Error, Phase1Mode};
use crate::residual::{apply_cycle, ResidualError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Exact,
    Scaled,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Mode::Exact),
            "scaled" => Ok(Mode::Scaled),
            _ => Err(format!("unknown mode `{s}` (expected exact or scaled)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Scaled => "scaled",
        })
    }
}

/// Parses a positive rational written as `p/q`, a decimal, or an integer.
pub fn parse_ratio(s: &str) -> Result<Rational64, String> {
    let bad = || format!("`{s}` is not a positive rational");
    let r = if let Some((p, q)) = s.split_once('/') {
        let (p, q): (i64, i64) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
        if q == 0 {
            return Err(bad());
        }
        Rational64::new(p, q)
    } else if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = 10i64.pow(frac.len() as u32);
        let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac: i64 = frac.parse().map_err(|_| bad())?;
        Rational64::new(int.checked_mul(scale).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?, scale)
    } else {
        Rational64::from_integer(s.trim().parse().map_err(|_| bad())?)
    };
    if r.is_positive() {
        Ok(r)
    } else {
        Err(bad())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverOptions {
    pub mode: Mode,
    pub eps1: Rational64,
    pub eps2: Rational64,
    pub phase1: Phase1Mode,
    pub cycles: CycleSource,
    pub bmax: Option<usize>,
    pub binary_search_b: bool,
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            mode: Mode::Exact,
            eps1: Rational64::new(1, 2),
            eps2: Rational64::new(1, 2),
            phase1: Phase1Mode::MinCost,
            cycles: CycleSource::Hybrid,
            bmax: None,
            binary_search_b: false,
            trace: false,
        }
    }
}

fn ser_ratio<S: Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CycleRecord {
    pub edges: Vec<EdgeId>,
    pub cost: i64,
    pub delay: i64,
    pub class: CycleClass,
}

/// One cancellation step. `delay` and `cost` are the totals before the
/// step; the next record's totals are these plus the cycle's sums, minus
/// whatever leftover cycles the re-decomposition discarded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IterationRecord {
    pub index: usize,
    pub delay: i64,
    pub cost: i64,
    pub delta_d: i64,
    pub delta_c: i64,
    #[serde(serialize_with = "ser_ratio")]
    pub ratio: Option<BigRational>,
    pub cycle: CycleRecord,
    pub paths: Vec<Vec<EdgeId>>,
    pub dropped_cost: i64,
    pub dropped_delay: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    Solved,
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Solved => "solved",
            Status::Infeasible => "infeasible",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub status: Status,
    pub paths: PathSet,
    /// Records of the accepted run only.
    pub trace: Vec<IterationRecord>,
    pub cost_estimate: Option<i64>,
    /// Cancellation steps across every rung tried, including rejected ones.
    pub total_iterations: usize,
    /// Every cancellation run, by estimate, in the order tried. In scaled
    /// mode these are runs on scaled instances.
    pub runs: Vec<RungRun>,
    /// True if scaled mode had to fall back to an exact run.
    pub scaled_fallback: bool,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no cost estimate produced an acceptable solution; state:\n{0}")]
    LadderExhausted(String),
    #[error("phase 1 failed: {0}")]
    Phase1(#[from] Phase1Error),
    #[error("residual operation failed: {0}")]
    Residual(#[from] ResidualError),
    #[error("scaling produced an invalid instance: {0}")]
    Scale(#[from] InstanceError),
    #[error("scaled mode needs positive epsilons")]
    BadEpsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopEnd {
    /// The delay bound holds.
    Met,
    /// No bicameral cycle was found while still over the bound.
    NoCycle,
    /// The iteration cap was reached.
    Cap,
    /// A path set repeated.
    Repeat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RungRun {
    pub c_hat: i64,
    pub outcome: LoopOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopOutcome {
    pub paths: PathSet,
    pub trace: Vec<IterationRecord>,
    pub end: LoopEnd,
}

/// Safety cap on cancellation steps for one run.
pub fn iteration_cap(inst: &Instance) -> u128 {
    let f = |v: i64| v as u128 + 1;
    f(inst.delay_bound()) * f(inst.total_cost()) * f(inst.total_delay())
}

/// Cancels bicameral cycles from `start` until the delay bound holds, using
/// `c_hat` in place of the unknown optimum.
pub fn cancel_cycles(inst: &Instance, start: PathSet, c_hat: i64, opts: &SolverOptions) -> Result<LoopOutcome, SolveError> {
    let cap = iteration_cap(inst);
    let mut cur = start;
    let mut trace = Vec::new();
    let mut seen: HashSet<Vec<EdgeId>> = HashSet::new();
    seen.insert(cur.edge_ids());
    while cur.total_delay() > inst.delay_bound() {
        if trace.len() as u128 >= cap {
            return Ok(LoopOutcome { paths: cur, trace, end: LoopEnd::Cap });
        }
        let mut ctx = SearchContext::new(inst, &cur, c_hat, opts.bmax)?;
        ctx.binary_search_b = opts.binary_search_b;
        let Some(o) = find_bicameral(&ctx, opts.cycles) else {
            return Ok(LoopOutcome { paths: cur, trace, end: LoopEnd::NoCycle });
        };
        let dec = apply_cycle(inst, &cur, &o)?;
        trace.push(IterationRecord {
            index: trace.len(),
            delay: cur.total_delay(),
            cost: cur.total_cost(),
            delta_d: ctx.delta_d,
            delta_c: ctx.delta_c,
            ratio: (ctx.delta_c != 0).then(|| BigRational::new(BigInt::from(ctx.delta_d), BigInt::from(ctx.delta_c))),
            cycle: CycleRecord {
                edges: o.edges().to_vec(),
                cost: o.cost(),
                delay: o.delay(),
                class: classify_cycle(&o, &ctx),
            },
            paths: cur.paths().to_vec(),
            dropped_cost: dec.dropped_cost,
            dropped_delay: dec.dropped_delay,
        });
        log::debug!("iteration {}: cycle {:?} (c={}, d={})", trace.len() - 1, o.edges(), o.cost(), o.delay());
        cur = dec.paths;
        if !seen.insert(cur.edge_ids()) {
            return Ok(LoopOutcome { paths: cur, trace, end: LoopEnd::Repeat });
        }
    }
    Ok(LoopOutcome { paths: cur, trace, end: LoopEnd::Met })
}

/// Ascending cost estimates from the min-cost k-path cost up to `Σc(e)`,
/// each rung at least half again the previous one.
pub fn estimate_copt(inst: &Instance) -> Result<Vec<i64>, Phase1Error> {
    let lb = min_cost_k_disjoint(inst)?.total_cost();
    let ub = inst.total_cost().max(lb);
    let mut rungs = vec![lb];
    let mut r = lb;
    while r < ub {
        r = ((3 * r + 1) / 2).max(r + 1).min(ub);
        rungs.push(r);
    }
    Ok(rungs)
}

fn floor_scaled(v: i64, num: i128, den: i128) -> Result<i64, InstanceError> {
    i64::try_from(v as i128 * num / den).map_err(|_| InstanceError::Overflow)
}

/// Rounds delays down to multiples of `ε₁D/n` and costs to multiples of
/// `ε₂Ĉ/n`, with bound `⌊n/ε₁⌋`. A zero `D` or `Ĉ` leaves that weight as is.
pub fn scale_instance(inst: &Instance, eps1: Rational64, eps2: Rational64, c_hat: i64) -> Result<Instance, InstanceError> {
    let n = inst.vertex_count() as i128;
    let d = inst.delay_bound();
    let (p1, q1) = (*eps1.numer() as i128, *eps1.denom() as i128);
    let (p2, q2) = (*eps2.numer() as i128, *eps2.denom() as i128);
    let weights: Vec<(i64, i64)> = inst
        .edges()
        .iter()
        .map(|e| {
            let c = if c_hat > 0 { floor_scaled(e.cost, n * q2, p2 * c_hat as i128)? } else { e.cost };
            let dl = if d > 0 { floor_scaled(e.delay, n * q1, p1 * d as i128)? } else { e.delay };
            Ok((c, dl))
        })
        .collect::<Result<_, InstanceError>>()?;
    let bound = if d > 0 { i64::try_from(n * q1 / p1).map_err(|_| InstanceError::Overflow)? } else { 0 };
    inst.with_weights(weights, bound)
}

fn state_dump(inst: &Instance, rungs: &[i64], last: &PathSet) -> String {
    format!(
        "instance:\n{}rungs: {:?}\nlast paths: {:?} (cost {}, delay {})",
        render_instance(inst),
        rungs,
        last.paths(),
        last.total_cost(),
        last.total_delay()
    )
}

fn infeasible() -> Solution {
    Solution {
        status: Status::Infeasible,
        paths: PathSet::empty(),
        trace: Vec::new(),
        cost_estimate: None,
        total_iterations: 0,
        runs: Vec::new(),
        scaled_fallback: false,
    }
}

fn solve_exact(inst: &Instance, opts: &SolverOptions) -> Result<Solution, SolveError> {
    if !check_feasible(inst) {
        return Ok(infeasible());
    }
    let start = phase1_solution(inst, opts.phase1)?;
    let rungs = estimate_copt(inst)?;
    let mut runs = Vec::new();
    let mut last = start.clone();
    for &c_hat in &rungs {
        let run = cancel_cycles(inst, start.clone(), c_hat, opts)?;
        runs.push(RungRun { c_hat, outcome: run.clone() });
        if run.end == LoopEnd::Met && run.paths.total_cost() <= 2 * c_hat {
            return Ok(Solution {
                status: Status::Solved,
                paths: run.paths,
                trace: run.trace,
                cost_estimate: Some(c_hat),
                total_iterations: runs.iter().map(|r| r.outcome.trace.len()).sum(),
                runs,
                scaled_fallback: false,
            });
        }
        log::debug!("estimate {c_hat} rejected ({:?}, cost {})", run.end, run.paths.total_cost());
        last = run.paths;
    }
    Err(SolveError::LadderExhausted(state_dump(inst, &rungs, &last)))
}

/// `value ≤ (a + ε)·base` in exact arithmetic.
fn within(value: i64, a: i64, eps: Rational64, base: i64) -> bool {
    let lhs = BigRational::from_integer(BigInt::from(value));
    let factor = BigRational::new(BigInt::from(a * eps.denom() + eps.numer()), BigInt::from(*eps.denom()));
    lhs <= factor * BigRational::from_integer(BigInt::from(base))
}

fn solve_scaled(inst: &Instance, opts: &SolverOptions) -> Result<Solution, SolveError> {
    if !(opts.eps1.is_positive() && opts.eps2.is_positive()) {
        return Err(SolveError::BadEpsilon);
    }
    if !check_feasible(inst) {
        return Ok(infeasible());
    }
    let exact_opts = SolverOptions { mode: Mode::Exact, ..opts.clone() };
    let rungs = estimate_copt(inst)?;
    let mut total = 0;
    let mut runs = Vec::new();
    for &c_hat in &rungs {
        let scaled = scale_instance(inst, opts.eps1, opts.eps2, c_hat)?;
        let sol = solve_exact(&scaled, &exact_opts)?;
        total += sol.total_iterations;
        runs.extend(sol.runs.iter().cloned());
        if sol.status == Status::Solved {
            let paths = PathSet::new(inst, sol.paths.paths().to_vec()).expect("same edge ids");
            if within(paths.total_delay(), 1, opts.eps1, inst.delay_bound())
                && within(paths.total_cost(), 2, opts.eps2, c_hat)
            {
                return Ok(Solution {
                    status: Status::Solved,
                    paths,
                    trace: sol.trace,
                    cost_estimate: Some(c_hat),
                    total_iterations: total,
                    runs,
                    scaled_fallback: false,
                });
            }
        }
        log::debug!("scaled run at estimate {c_hat} missed the relaxed bounds");
    }
    log::info!("scaled mode found nothing within bounds; falling back to exact mode");
    let mut sol = solve_exact(inst, &exact_opts)?;
    sol.total_iterations += total;
    runs.append(&mut sol.runs);
    sol.runs = runs;
    sol.scaled_fallback = true;
    Ok(sol)
}

pub fn solve(inst: &Instance, opts: &SolverOptions) -> Result<Solution, SolveError> {
    match opts.mode {
        Mode::Exact => solve_exact(inst, opts),
        Mode::Scaled => solve_scaled(inst, opts),
    }
}

impl IterationRecord {
    /// Lemma-7 style progress between consecutive records: the ratio rises,
    /// or stays equal while the delay total falls. `None` if either ratio is
    /// undefined.
    pub fn progresses_to(&self, next: &IterationRecord) -> Option<bool> {
        let (a, b) = (self.ratio.as_ref()?, next.ratio.as_ref()?);
        Some(b > a || (b == a && next.delay < self.delay))
    }
}
