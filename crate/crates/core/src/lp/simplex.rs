//! Bounded-variable two-phase primal simplex on a dense tableau, with Bland's
//! smallest-index rule for both the entering and the leaving choice.
//!
//! Artificial variables get implicit identity columns that are never stored;
//! once one leaves the basis it is gone for good. In phase two the remaining
//! basic artificials are pinned to zero.

use std::cmp::Ordering;

use super::scalar::{Field, Overflow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowKind {
    Eq,
    Le,
}

/// Sparse coefficients, row kind, right-hand side.
pub(crate) type Row<F> = (Vec<(usize, F)>, RowKind, F);

#[derive(Debug, Clone)]
pub(crate) struct DenseLp<F> {
    pub cols: usize,
    pub objective: Vec<F>,
    pub rows: Vec<Row<F>>,
    pub lower: Vec<Option<F>>,
    pub upper: Vec<Option<F>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Outcome<F> {
    Optimal(Vec<F>),
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Art(usize),
    Col(usize),
}

impl Var {
    /// Bland ordering: artificials first, so they are preferred to leave.
    fn key(self) -> (u8, usize) {
        match self {
            Var::Art(i) => (0, i),
            Var::Col(j) => (1, j),
        }
    }
}

struct Tableau<F> {
    t: Vec<Vec<F>>,
    basis: Vec<Var>,
    beta: Vec<F>,
    row_of: Vec<Option<usize>>,
    value: Vec<F>,
    lower: Vec<Option<F>>,
    upper: Vec<Option<F>>,
    d: Vec<F>,
    phase_one: bool,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl<F: Field> Tableau<F> {
    fn bounds_of(&self, v: Var) -> (Option<F>, Option<F>) {
        match v {
            Var::Col(j) => (self.lower[j].clone(), self.upper[j].clone()),
            Var::Art(_) if self.phase_one => (Some(F::zero()), None),
            Var::Art(_) => (Some(F::zero()), Some(F::zero())),
        }
    }

    fn entering(&self) -> Option<(usize, bool)> {
        for j in 0..self.value.len() {
            if self.row_of[j].is_some() {
                continue;
            }
            if let (Some(l), Some(u)) = (&self.lower[j], &self.upper[j]) {
                if l == u {
                    continue;
                }
            }
            match self.d[j].sign() {
                Ordering::Less if self.upper[j].as_ref().is_none_or(|u| &self.value[j] < u) => {
                    return Some((j, true));
                }
                Ordering::Greater if self.lower[j].as_ref().is_none_or(|l| &self.value[j] > l) => {
                    return Some((j, false));
                }
                _ => {}
            }
        }
        None
    }

    fn step(&mut self) -> Result<Step, Overflow> {
        let Some((j, increase)) = self.entering() else {
            return Ok(Step::Optimal);
        };
        // Best blocking row: (t, bland key, row).
        let mut best: Option<(F, (u8, usize), usize)> = None;
        for i in 0..self.t.len() {
            let a = &self.t[i][j];
            if a.is_zero() {
                continue;
            }
            // Basic variable moves at rate -a per unit increase of x_j.
            let falling = (a.sign() == Ordering::Greater) == increase;
            let (lo, hi) = self.bounds_of(self.basis[i]);
            let rate = if a.sign() == Ordering::Less { a.neg()? } else { a.clone() };
            let gap = match (falling, lo, hi) {
                (true, Some(l), _) => self.beta[i].sub(&l)?,
                (false, _, Some(h)) => h.sub(&self.beta[i])?,
                _ => continue,
            };
            let limit = gap.div(&rate)?;
            let key = self.basis[i].key();
            let better = match &best {
                None => true,
                Some((bt, bk, _)) => limit < *bt || (limit == *bt && key < *bk),
            };
            if better {
                best = Some((limit, key, i));
            }
        }
        let flip = match (&self.lower[j], &self.upper[j]) {
            (Some(l), Some(u)) => Some(u.sub(l)?),
            _ => None,
        };
        let (step_len, pivot_row) = match (best, flip) {
            (None, None) => return Ok(Step::Unbounded),
            (None, Some(f)) => (f, None),
            (Some((t, _, _)), Some(f)) if f < t => (f, None),
            (Some((t, _, r)), _) => (t, Some(r)),
        };

        let signed = if increase { step_len.clone() } else { step_len.neg()? };
        if !step_len.is_zero() {
            for i in 0..self.t.len() {
                let a = &self.t[i][j];
                if !a.is_zero() {
                    self.beta[i] = self.beta[i].sub(&a.mul(&signed)?)?;
                }
            }
        }
        let entering_value = self.value[j].add(&signed)?;

        let Some(r) = pivot_row else {
            self.value[j] = entering_value;
            return Ok(Step::Moved);
        };
        if let Var::Col(c) = self.basis[r] {
            self.value[c] = self.beta[r].clone();
            self.row_of[c] = None;
        }
        self.basis[r] = Var::Col(j);
        self.row_of[j] = Some(r);
        self.beta[r] = entering_value;
        self.pivot(r, j)?;
        Ok(Step::Moved)
    }

    fn pivot(&mut self, r: usize, j: usize) -> Result<(), Overflow> {
        let piv = self.t[r][j].clone();
        let nz: Vec<usize> = (0..self.t[r].len()).filter(|&k| !self.t[r][k].is_zero()).collect();
        for &k in &nz {
            self.t[r][k] = self.t[r][k].div(&piv)?;
        }
        let (before, rest) = self.t.split_at_mut(r);
        let (prow, after) = rest.split_first_mut().unwrap();
        for row in before.iter_mut().chain(after.iter_mut()) {
            let f = row[j].clone();
            if f.is_zero() {
                continue;
            }
            for &k in &nz {
                row[k] = row[k].sub(&f.mul(&prow[k])?)?;
            }
        }
        let f = self.d[j].clone();
        if !f.is_zero() {
            for &k in &nz {
                self.d[k] = self.d[k].sub(&f.mul(&prow[k])?)?;
            }
        }
        Ok(())
    }

    fn run(&mut self) -> Result<bool, Overflow> {
        loop {
            match self.step()? {
                Step::Optimal => return Ok(true),
                Step::Unbounded => return Ok(false),
                Step::Moved => {}
            }
        }
    }
}

pub(crate) fn solve<F: Field>(lp: &DenseLp<F>) -> Result<Outcome<F>, Overflow> {
    let slack_rows: Vec<usize> = (0..lp.rows.len()).filter(|&i| lp.rows[i].1 == RowKind::Le).collect();
    let ncols = lp.cols + slack_rows.len();
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    lower.extend(std::iter::repeat_n(Some(F::zero()), slack_rows.len()));
    upper.extend(std::iter::repeat_n(None, slack_rows.len()));
    let mut cost = lp.objective.clone();
    cost.extend(std::iter::repeat_n(F::zero(), slack_rows.len()));

    let value: Vec<F> = (0..ncols)
        .map(|j| lower[j].clone().or_else(|| upper[j].clone()).unwrap_or_else(F::zero))
        .collect();

    let m = lp.rows.len();
    let mut t = vec![vec![F::zero(); ncols]; m];
    let mut basis = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut row_of = vec![None; ncols];
    let mut slack = lp.cols;
    for (i, (coeffs, kind, rhs)) in lp.rows.iter().enumerate() {
        for (j, a) in coeffs {
            t[i][*j] = t[i][*j].add(a)?;
        }
        let slack_col = if *kind == RowKind::Le {
            t[i][slack] = F::one();
            slack += 1;
            Some(slack - 1)
        } else {
            None
        };
        let mut resid = rhs.clone();
        for (j, a) in t[i].iter().enumerate() {
            if !a.is_zero() && !value[j].is_zero() {
                resid = resid.sub(&a.mul(&value[j])?)?;
            }
        }
        match slack_col {
            Some(sc) if resid.sign() != Ordering::Less => {
                basis.push(Var::Col(sc));
                row_of[sc] = Some(i);
                beta.push(resid);
            }
            _ => {
                if resid.sign() == Ordering::Less {
                    for a in t[i].iter_mut() {
                        if !a.is_zero() {
                            *a = a.neg()?;
                        }
                    }
                    resid = resid.neg()?;
                }
                basis.push(Var::Art(i));
                beta.push(resid);
            }
        }
    }

    let mut tab = Tableau { t, basis, beta, row_of, value, lower, upper, d: vec![F::zero(); ncols], phase_one: true };

    if tab.basis.iter().any(|b| matches!(b, Var::Art(_))) {
        for i in 0..m {
            if let Var::Art(_) = tab.basis[i] {
                for j in 0..ncols {
                    if !tab.t[i][j].is_zero() {
                        tab.d[j] = tab.d[j].sub(&tab.t[i][j])?;
                    }
                }
            }
        }
        let bounded = tab.run()?;
        debug_assert!(bounded, "phase one objective is bounded below by zero");
        let mut infeas = F::zero();
        for i in 0..m {
            if let Var::Art(_) = tab.basis[i] {
                infeas = infeas.add(&tab.beta[i])?;
            }
        }
        if !infeas.is_zero() {
            return Ok(Outcome::Infeasible);
        }
    }

    tab.phase_one = false;
    for j in 0..ncols {
        let mut dj = cost[j].clone();
        for i in 0..m {
            if let Var::Col(b) = tab.basis[i] {
                if !tab.t[i][j].is_zero() && !cost[b].is_zero() {
                    dj = dj.sub(&cost[b].mul(&tab.t[i][j])?)?;
                }
            }
        }
        tab.d[j] = dj;
    }
    if !tab.run()? {
        return Ok(Outcome::Unbounded);
    }

    let mut x: Vec<F> = tab.value[..lp.cols].to_vec();
    for (i, b) in tab.basis.iter().enumerate() {
        if let Var::Col(c) = b {
            if *c < lp.cols {
                x[*c] = tab.beta[i].clone();
            }
        }
    }
    Ok(Outcome::Optimal(x))
}
