//! Exact linear programming and circulation decomposition.

mod scalar;
mod simplex;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use scalar::Small;
use simplex::{DenseLp, Outcome, Row, RowKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, BigRational)>,
    pub rhs: BigRational,
}

/// `min c·x` subject to equality rows, `≤` rows and per-variable bounds.
/// Variables default to `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    objective: Vec<BigRational>,
    equalities: Vec<LpRow>,
    inequalities: Vec<LpRow>,
    lower: Vec<Option<BigRational>>,
    upper: Vec<Option<BigRational>>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            objective: vec![BigRational::zero(); num_vars],
            equalities: Vec::new(),
            inequalities: Vec::new(),
            lower: vec![Some(BigRational::zero()); num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_cost(&mut self, var: usize, c: BigRational) {
        self.objective[var] = c;
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<BigRational>, upper: Option<BigRational>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, BigRational)>, rhs: BigRational) {
        self.equalities.push(LpRow { coeffs, rhs });
    }

    pub fn add_le(&mut self, coeffs: Vec<(usize, BigRational)>, rhs: BigRational) {
        self.inequalities.push(LpRow { coeffs, rhs });
    }

    pub fn objective(&self) -> &[BigRational] {
        &self.objective
    }

    pub fn equalities(&self) -> &[LpRow] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[LpRow] {
        &self.inequalities
    }

    pub fn bounds(&self, var: usize) -> (Option<&BigRational>, Option<&BigRational>) {
        (self.lower[var].as_ref(), self.upper[var].as_ref())
    }

    pub fn objective_value(&self, x: &[BigRational]) -> BigRational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Exact feasibility check of a candidate point.
    pub fn is_feasible(&self, x: &[BigRational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let dot = |r: &LpRow| -> BigRational { r.coeffs.iter().map(|(j, a)| a * &x[*j]).sum() };
        (0..x.len()).all(|j| {
            self.lower[j].as_ref().is_none_or(|l| &x[j] >= l) && self.upper[j].as_ref().is_none_or(|u| &x[j] <= u)
        }) && self.equalities.iter().all(|r| dot(r) == r.rhs)
            && self.inequalities.iter().all(|r| dot(r) <= r.rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless `status` is `Optimal`.
    pub values: Vec<BigRational>,
    pub objective: BigRational,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        LpSolution { status, values: Vec::new(), objective: BigRational::zero() }
    }
}

struct Reduced {
    keep: Vec<usize>,
    fixed: Vec<Option<BigRational>>,
    rows: Vec<Row<BigRational>>,
}

/// Substitutes fixed variables and drops rows that become empty.
/// `None` means the problem was found infeasible on the way.
fn presolve(p: &LpProblem) -> Option<Reduced> {
    let n = p.num_vars();
    let mut fixed = vec![None; n];
    let mut keep = Vec::new();
    let mut index = vec![usize::MAX; n];
    for j in 0..n {
        match (&p.lower[j], &p.upper[j]) {
            (Some(l), Some(u)) if l > u => return None,
            (Some(l), Some(u)) if l == u => fixed[j] = Some(l.clone()),
            _ => {
                index[j] = keep.len();
                keep.push(j);
            }
        }
    }
    let mut rows = Vec::new();
    let kinds = p.equalities.iter().map(|r| (r, RowKind::Eq)).chain(p.inequalities.iter().map(|r| (r, RowKind::Le)));
    for (row, kind) in kinds {
        let mut rhs = row.rhs.clone();
        let mut merged: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (j, a) in &row.coeffs {
            match &fixed[*j] {
                Some(v) => rhs -= a * v,
                None => *merged.entry(index[*j]).or_insert_with(BigRational::zero) += a,
            }
        }
        let coeffs: Vec<_> = merged.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        if coeffs.is_empty() {
            let ok = match kind {
                RowKind::Eq => rhs.is_zero(),
                RowKind::Le => !rhs.is_negative(),
            };
            if !ok {
                return None;
            }
            continue;
        }
        rows.push((coeffs, kind, rhs));
    }
    Some(Reduced { keep, fixed, rows })
}

fn convert<F: scalar::Field>(p: &LpProblem, r: &Reduced) -> Result<DenseLp<F>, scalar::Overflow> {
    let opt = |v: &Option<BigRational>| v.as_ref().map(F::from_big).transpose();
    Ok(DenseLp {
        cols: r.keep.len(),
        objective: r.keep.iter().map(|&j| F::from_big(&p.objective[j])).collect::<Result<_, _>>()?,
        rows: r
            .rows
            .iter()
            .map(|(c, k, b)| {
                let coeffs = c.iter().map(|(j, a)| Ok((*j, F::from_big(a)?))).collect::<Result<Vec<_>, _>>()?;
                Ok((coeffs, *k, F::from_big(b)?))
            })
            .collect::<Result<_, _>>()?,
        lower: r.keep.iter().map(|&j| opt(&p.lower[j])).collect::<Result<_, _>>()?,
        upper: r.keep.iter().map(|&j| opt(&p.upper[j])).collect::<Result<_, _>>()?,
    })
}

fn run<F: scalar::Field>(p: &LpProblem, r: &Reduced) -> Result<Outcome<BigRational>, scalar::Overflow> {
    let dense = convert::<F>(p, r)?;
    Ok(match simplex::solve(&dense)? {
        Outcome::Optimal(x) => Outcome::Optimal(x.iter().map(scalar::Field::to_big).collect()),
        Outcome::Infeasible => Outcome::Infeasible,
        Outcome::Unbounded => Outcome::Unbounded,
    })
}

/// Solves exactly. Runs on `i128` rationals first and repeats on big
/// rationals if anything overflows.
pub fn solve_lp(p: &LpProblem) -> LpSolution {
    let Some(reduced) = presolve(p) else {
        return LpSolution::without_point(LpStatus::Infeasible);
    };
    let outcome = match run::<Small>(p, &reduced) {
        Ok(o) => o,
        Err(_) => {
            log::debug!("lp: i128 overflow, retrying with big rationals");
            run::<BigRational>(p, &reduced).expect("big rationals do not overflow")
        }
    };
    match outcome {
        Outcome::Infeasible => LpSolution::without_point(LpStatus::Infeasible),
        Outcome::Unbounded => LpSolution::without_point(LpStatus::Unbounded),
        Outcome::Optimal(x) => {
            let mut values: Vec<BigRational> = reduced.fixed.into_iter().map(|v| v.unwrap_or_else(BigRational::zero)).collect();
            for (k, &j) in reduced.keep.iter().enumerate() {
                values[j] = x[k].clone();
            }
            assert!(p.is_feasible(&values), "simplex returned an infeasible point");
            let objective = p.objective_value(&values);
            LpSolution { status: LpStatus::Optimal, values, objective }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedCycle {
    /// Arc indices in traversal order.
    pub arcs: Vec<usize>,
    pub weight: BigRational,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CirculationError {
    #[error("flow value count {got} does not match arc count {expected}")]
    Length { expected: usize, got: usize },
    #[error("arc {0} has negative flow")]
    Negative(usize),
    #[error("flow is not conserved at vertex {0}")]
    NotConserved(usize),
}

/// Splits a circulation into simple cycles with positive weights whose
/// weighted sum reproduces the flow. The walk always takes the lowest-index
/// arc with flow left, so the result is deterministic.
pub fn decompose_circulation(
    values: &[BigRational],
    n: usize,
    arcs: &[(usize, usize)],
) -> Result<Vec<WeightedCycle>, CirculationError> {
    if values.len() != arcs.len() {
        return Err(CirculationError::Length { expected: arcs.len(), got: values.len() });
    }
    if let Some(a) = values.iter().position(|v| v.is_negative()) {
        return Err(CirculationError::Negative(a));
    }
    let mut balance = vec![BigRational::zero(); n];
    for (a, &(u, v)) in arcs.iter().enumerate() {
        balance[u] -= &values[a];
        balance[v] += &values[a];
    }
    if let Some(v) = balance.iter().position(|b| !b.is_zero()) {
        return Err(CirculationError::NotConserved(v));
    }

    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, &(u, _)) in arcs.iter().enumerate() {
        out[u].push(a);
    }
    let mut rest: Vec<BigRational> = values.to_vec();
    let mut cycles = Vec::new();
    for start in 0..arcs.len() {
        while rest[start].is_positive() {
            let mut walk = vec![start];
            let mut seen_at: BTreeMap<usize, usize> = BTreeMap::new();
            seen_at.insert(arcs[start].0, 0);
            let cycle = loop {
                let v = arcs[*walk.last().unwrap()].1;
                if let Some(&pos) = seen_at.get(&v) {
                    break walk.split_off(pos);
                }
                seen_at.insert(v, walk.len());
                let next = out[v]
                    .iter()
                    .copied()
                    .find(|&a| rest[a].is_positive())
                    .ok_or(CirculationError::NotConserved(v))?;
                walk.push(next);
            };
            let weight = cycle.iter().map(|&a| rest[a].clone()).min().unwrap();
            for &a in &cycle {
                rest[a] -= &weight;
            }
            cycles.push(WeightedCycle { arcs: cycle, weight });
        }
    }
    Ok(cycles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn qr(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_lp() {
        // max x + y  s.t. x + 2y <= 4, 3x + y <= 6
        let mut p = LpProblem::new(2);
        p.set_cost(0, q(-1));
        p.set_cost(1, q(-1));
        p.add_le(vec![(0, q(1)), (1, q(2))], q(4));
        p.add_le(vec![(0, q(3)), (1, q(1))], q(6));
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.values, vec![qr(8, 5), qr(6, 5)]);
        assert_eq!(s.objective, qr(-14, 5));
    }

    #[test]
    fn equality_and_bounds() {
        let mut p = LpProblem::new(3);
        p.set_cost(0, q(2));
        p.set_cost(1, q(3));
        p.set_cost(2, q(1));
        p.add_eq(vec![(0, q(1)), (1, q(1)), (2, q(1))], q(2));
        p.set_bounds(2, Some(q(0)), Some(qr(1, 2)));
        p.set_bounds(1, Some(q(0)), Some(q(0)));
        let s = solve_lp(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.values, vec![qr(3, 2), q(0), qr(1, 2)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut p = LpProblem::new(1);
        p.add_le(vec![(0, q(1))], q(-1));
        assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);

        let mut p = LpProblem::new(2);
        p.set_cost(0, q(-1));
        p.add_le(vec![(0, q(1)), (1, q(-1))], q(1));
        assert_eq!(solve_lp(&p).status, LpStatus::Unbounded);

        let mut p = LpProblem::new(1);
        p.set_bounds(0, Some(q(2)), Some(q(1)));
        assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn free_variable() {
        let mut p = LpProblem::new(1);
        p.set_bounds(0, None, Some(q(5)));
        p.set_cost(0, q(-1));
        p.add_le(vec![(0, q(2))], q(3));
        let s = solve_lp(&p);
        assert_eq!(s.values, vec![qr(3, 2)]);
    }

    #[test]
    fn overflow_falls_back_to_big() {
        let huge = BigRational::from_integer(BigInt::from(i128::MAX) * 8);
        let mut p = LpProblem::new(1);
        p.set_cost(0, q(-1));
        p.add_le(vec![(0, q(1))], huge.clone());
        let s = solve_lp(&p);
        assert_eq!(s.values, vec![huge]);
    }

    #[test]
    fn circulation_splits_into_cycles() {
        let arcs = [(0, 1), (1, 0), (1, 2), (2, 0), (0, 0)];
        let x = vec![qr(3, 2), qr(1, 2), q(1), q(1), qr(1, 3)];
        let cycles = decompose_circulation(&x, 3, &arcs).unwrap();
        let mut total = vec![q(0); arcs.len()];
        for c in &cycles {
            assert!(c.weight.is_positive());
            for &a in &c.arcs {
                total[a] += &c.weight;
            }
        }
        assert_eq!(total, x);
        assert!(cycles.iter().any(|c| c.arcs == vec![4]));
    }

    #[test]
    fn circulation_rejects_imbalance() {
        let arcs = [(0, 1)];
        assert_eq!(decompose_circulation(&[q(1)], 2, &arcs), Err(CirculationError::NotConserved(0)));
    }
}
