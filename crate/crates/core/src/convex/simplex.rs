//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Solves `min c.x` subject to `a_i . x <= b_i` over free variables. Free
//! variables are split as `x = x+ - x-`, every row gets a slack, and rows with
//! a negative right-hand side get an artificial for phase one. Problem sizes
//! here are a few hundred rows at most, so the tableau is kept dense.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Vector;

/// Half-space `normal . x <= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub normal: Vector,
    pub offset: f64,
}

impl Constraint {
    pub fn new(normal: Vector, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// `normal . x - offset`; nonpositive when satisfied.
    pub fn residual(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vector,
    pub constraints: Vec<Constraint>,
    /// Optional per-variable `(lower, upper)` bounds; infinite entries are skipped.
    pub bounds: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub point: Option<Vector>,
    pub value: f64,
    /// Lagrange weights of `constraints` (bounds excluded); `c + A^T w = 0` at optimality.
    pub duals: Vec<f64>,
    /// Improving direction when unbounded.
    pub ray: Option<Vector>,
    /// Farkas weights over `constraints` followed by finite bound rows when infeasible:
    /// `w >= 0`, `A^T w = 0`, `b . w < 0`.
    pub farkas: Option<Vec<f64>>,
}

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.data[r * w + c];
        for j in 0..w {
            self.data[r * w + j] /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for j in 0..w {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.at(i, j);
                }
            }
        }
        d
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.rows).map(|i| cost[self.basis[i]] * self.rhs(i)).sum()
    }

    /// Runs Bland pivots until optimal; returns the unbounded entering column if any.
    fn optimize(&mut self, cost: &[f64], allowed: usize, pivots: &mut usize) -> Result<Option<usize>> {
        let cscale = cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let deps = 1e-10 * cscale;
        loop {
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::LpFailure(format!("pivot cap {MAX_PIVOTS} exceeded")));
            }
            let d = self.reduced_costs(cost);
            let Some(enter) = (0..allowed).find(|&j| d[j] < -deps) else {
                return Ok(None);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(Some(enter)),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.cols + 1;
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

/// Solves the linear program; numerical breakdown is reported, never silent.
pub fn lp_solve(problem: &LpProblem) -> Result<LpOutcome> {
    let n = problem.objective.len();
    let mut rows: Vec<Constraint> = Vec::with_capacity(problem.constraints.len());
    for c in &problem.constraints {
        if c.normal.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.normal.len() });
        }
        if !c.offset.is_finite() || c.normal.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite constraint".into()));
        }
        rows.push(c.clone());
    }
    let n_user = rows.len();
    if let Some(bounds) = &problem.bounds {
        if bounds.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: bounds.len() });
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            let unit = Vector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
            if hi.is_finite() {
                rows.push(Constraint::new(unit.clone(), hi));
            }
            if lo.is_finite() {
                rows.push(Constraint::new(-unit, -lo));
            }
        }
    }

    let m = rows.len();
    let flipped: Vec<bool> = rows.iter().map(|c| c.offset < 0.0).collect();
    let n_art = flipped.iter().filter(|f| **f).count();
    let slack0 = 2 * n;
    let art0 = slack0 + m;
    let cols = art0 + n_art;
    let mut tab = Tableau { rows: m, cols, data: vec![0.0; m * (cols + 1)], basis: vec![0; m] };
    let w = cols + 1;
    let mut art = art0;
    for (i, c) in rows.iter().enumerate() {
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            tab.data[i * w + j] = sign * c.normal[j];
            tab.data[i * w + n + j] = -sign * c.normal[j];
        }
        tab.data[i * w + slack0 + i] = sign;
        tab.data[i * w + cols] = sign * c.offset;
        if flipped[i] {
            tab.data[i * w + art] = 1.0;
            tab.basis[i] = art;
            art += 1;
        } else {
            tab.basis[i] = slack0 + i;
        }
    }

    let bscale = rows.iter().fold(1.0f64, |s, c| s.max(c.offset.abs()));
    let mut pivots = 0;
    if n_art > 0 {
        let mut cost1 = vec![0.0; cols];
        cost1[art0..].iter_mut().for_each(|c| *c = 1.0);
        tab.optimize(&cost1, cols, &mut pivots)?;
        if tab.objective(&cost1) > 1e-9 * bscale {
            let d = tab.reduced_costs(&cost1);
            let farkas: Vec<f64> = (0..m).map(|i| d[slack0 + i].max(0.0)).collect();
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                point: None,
                value: f64::NAN,
                duals: vec![],
                ray: None,
                farkas: Some(farkas),
            });
        }
        // drive remaining artificials out of the basis
        let mut i = 0;
        while i < tab.rows {
            if tab.basis[i] >= art0 {
                let col = (0..art0).max_by(|&a, &b| tab.at(i, a).abs().total_cmp(&tab.at(i, b).abs()));
                match col {
                    Some(j) if tab.at(i, j).abs() > 1e-9 => tab.pivot(i, j),
                    _ => {
                        tab.remove_row(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost2 = vec![0.0; cols];
    for j in 0..n {
        cost2[j] = problem.objective[j];
        cost2[n + j] = -problem.objective[j];
    }
    if let Some(enter) = tab.optimize(&cost2, art0, &mut pivots)? {
        let mut y = vec![0.0; cols];
        y[enter] = 1.0;
        for i in 0..tab.rows {
            y[tab.basis[i]] = -tab.at(i, enter);
        }
        let ray = Vector::from_fn(n, |j, _| y[j] - y[n + j]);
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            point: None,
            value: f64::NEG_INFINITY,
            duals: vec![],
            ray: Some(ray),
            farkas: None,
        });
    }

    let mut y = vec![0.0; cols];
    for i in 0..tab.rows {
        y[tab.basis[i]] = tab.rhs(i);
    }
    let x = Vector::from_fn(n, |j, _| y[j] - y[n + j]);
    for c in &rows {
        if c.residual(&x) > 1e-8 * (1.0 + c.offset.abs()) {
            return Err(Error::LpFailure(format!("optimal point violates a constraint by {:.3e}", c.residual(&x))));
        }
    }
    let d = tab.reduced_costs(&cost2);
    let duals: Vec<f64> = (0..n_user).map(|i| d[slack0 + i].max(0.0)).collect();
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        value: problem.objective.dot(&x),
        point: Some(x),
        duals,
        ray: None,
        farkas: None,
    })
}
