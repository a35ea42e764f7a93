//! Feasibility of an intersection of balls and halfspaces.
//!
//! Minimizes the largest constraint residual `max_i f_i(x)` with a log-barrier
//! path on the epigraph `min t s.t. f_i(x) <= t`. Every centering step yields
//! a primal upper bound (the residual at the current point) and a Lagrangian
//! lower bound, so the verdict is certified on both sides:
//! feasible once the upper bound drops to the threshold, infeasible once the
//! lower bound exceeds it.

use nalgebra::DMatrix;

use super::simplex::{lp_solve, Constraint, LpProblem, LpStatus};
use crate::error::{Error, Result};
use crate::geom::Vector;

/// Residual band under which the system counts as feasible.
pub const FEASIBLE_RESIDUAL: f64 = 1e-9;

const MAX_NEWTON: usize = 4000;
/// Newton steps per centering before the barrier weight grows anyway; the
/// dual bound holds at any iterate, so partial centering stays sound.
const MAX_CENTERING: usize = 60;
const TAU_GROWTH: f64 = 8.0;
const TAU_MAX: f64 = 1e15;

/// Closed ball `|x - center| <= radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Self {
        Self { center, radius }
    }

    fn residual(&self, x: &Vector) -> f64 {
        (x - &self.center).norm_squared() - self.radius * self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Point with every residual at most [`FEASIBLE_RESIDUAL`] when feasible.
    pub witness: Option<Vector>,
    /// Certified lower bound on `min_x max_i f_i(x)`.
    pub lower_bound: f64,
    /// Largest residual at the final iterate.
    pub upper_bound: f64,
}

/// Barrier outcome when the verdict stays open: the optimum of
/// `max_i f_i` lies in `[lower, upper]` with `lower <= threshold < upper`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Undecided {
    pub point: Vector,
    pub lower: f64,
    pub upper: f64,
}

/// Decides whether all balls and halfspaces share a point.
pub fn convex_feasible(balls: &[Ball], halfspaces: &[Constraint]) -> Result<Feasibility> {
    probe(balls, halfspaces)?.map_err(|u| {
        Error::Inconclusive(format!(
            "feasibility undecided after {MAX_NEWTON} Newton steps (bounds [{:.3e}, {:.3e}])",
            u.lower, u.upper
        ))
    })
}

/// [`convex_feasible`] that hands back the best iterate instead of failing
/// when the optimum sits too close to the threshold.
pub(crate) fn probe(balls: &[Ball], halfspaces: &[Constraint]) -> Result<std::result::Result<Feasibility, Undecided>> {
    let Some(n) = balls.first().map(|b| b.center.len()).or_else(|| halfspaces.first().map(|h| h.normal.len())) else {
        return Err(Error::InvalidInput("no constraints".into()));
    };
    for b in balls {
        if b.center.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.center.len() });
        }
    }
    for h in halfspaces {
        if h.normal.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h.normal.len() });
        }
    }
    if balls.is_empty() {
        return halfspaces_only(halfspaces, n).map(Ok);
    }
    Barrier { balls, halfspaces, n }.run()
}

fn halfspaces_only(halfspaces: &[Constraint], n: usize) -> Result<Feasibility> {
    let out = lp_solve(&LpProblem { objective: Vector::zeros(n), constraints: halfspaces.to_vec(), bounds: None })?;
    Ok(match out.status {
        LpStatus::Infeasible => {
            Feasibility { feasible: false, witness: None, lower_bound: 0.0, upper_bound: f64::INFINITY }
        }
        _ => {
            let x = out.point.expect("bounded zero objective has a point");
            let ub = halfspaces.iter().map(|h| h.residual(&x)).fold(f64::NEG_INFINITY, f64::max);
            Feasibility { feasible: true, witness: Some(x), lower_bound: f64::NEG_INFINITY, upper_bound: ub }
        }
    })
}

struct Barrier<'a> {
    balls: &'a [Ball],
    halfspaces: &'a [Constraint],
    n: usize,
}

impl Barrier<'_> {
    fn residuals(&self, x: &Vector) -> Vec<f64> {
        self.balls.iter().map(|b| b.residual(x)).chain(self.halfspaces.iter().map(|h| h.residual(x))).collect()
    }

    fn max_residual(&self, x: &Vector) -> f64 {
        self.residuals(x).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Barrier value `tau * t - sum log(t - f_i)`, or `None` outside the domain.
    fn value(&self, x: &Vector, t: f64, tau: f64) -> Option<f64> {
        let mut acc = tau * t;
        for f in self.residuals(x) {
            let s = t - f;
            if s <= 0.0 {
                return None;
            }
            acc -= s.ln();
        }
        Some(acc)
    }

    /// Lagrangian lower bound from the multipliers `mu_i = 1 / (tau s_i)`.
    fn dual_bound(&self, x: &Vector, t: f64, tau: f64) -> f64 {
        let f = self.residuals(x);
        let mu: Vec<f64> = f.iter().map(|fi| 1.0 / (tau * (t - fi))).collect();
        let total: f64 = mu.iter().sum();
        let nb = self.balls.len();
        let mu_ball: f64 = mu[..nb].iter().sum::<f64>() / total;
        // minimizer of sum mu_i f_i(x): a weighted center shifted by the halfspace normals
        let mut xhat = Vector::zeros(self.n);
        for (b, w) in self.balls.iter().zip(&mu[..nb]) {
            xhat.axpy(w / total, &b.center, 1.0);
        }
        for (h, w) in self.halfspaces.iter().zip(&mu[nb..]) {
            xhat.axpy(-0.5 * w / total, &h.normal, 1.0);
        }
        xhat /= mu_ball;
        self.residuals(&xhat).iter().zip(&mu).map(|(fi, w)| fi * w / total).sum()
    }

    fn run(&self) -> Result<std::result::Result<Feasibility, Undecided>> {
        let n = self.n;
        let mut x = Vector::zeros(n);
        for b in self.balls {
            x += &b.center;
        }
        x /= self.balls.len() as f64;
        let scale = self.residuals(&x).iter().fold(1.0f64, |m, f| m.max(f.abs()));
        let mut t = self.max_residual(&x) + scale;
        let mut tau = 1.0 / scale;
        let mut lower = f64::NEG_INFINITY;
        let mut newton = 0;

        loop {
            // centering
            for _ in 0..MAX_CENTERING {
                let ub = self.max_residual(&x);
                if ub <= FEASIBLE_RESIDUAL {
                    return Ok(Ok(Feasibility {
                        feasible: true,
                        witness: Some(x),
                        lower_bound: lower,
                        upper_bound: ub,
                    }));
                }
                newton += 1;
                if newton > MAX_NEWTON {
                    return Ok(Err(Undecided { point: x, lower, upper: ub }));
                }
                let (grad, hess) = self.derivatives(&x, t, tau);
                let Some(chol) = damped_cholesky(hess) else {
                    return Ok(Err(Undecided { point: x, lower, upper: ub }));
                };
                let step = -chol.solve(&grad);
                let decrement = -grad.dot(&step);
                if decrement <= 1e-10 {
                    break;
                }
                let base = self.value(&x, t, tau).expect("iterate stays in the barrier domain");
                let mut alpha = 1.0;
                loop {
                    let xn = &x + step.rows(0, n) * alpha;
                    let tn = t + step[n] * alpha;
                    if let Some(v) = self.value(&xn, tn, tau) {
                        if v <= base - 0.25 * alpha * decrement {
                            x = xn;
                            t = tn;
                            break;
                        }
                    }
                    alpha *= 0.5;
                    if alpha < 1e-14 {
                        break;
                    }
                }
                if alpha < 1e-14 {
                    break;
                }
            }
            lower = lower.max(self.dual_bound(&x, t, tau));
            let ub = self.max_residual(&x);
            if ub <= FEASIBLE_RESIDUAL {
                return Ok(Ok(Feasibility { feasible: true, witness: Some(x), lower_bound: lower, upper_bound: ub }));
            }
            if lower > FEASIBLE_RESIDUAL {
                return Ok(Ok(Feasibility { feasible: false, witness: None, lower_bound: lower, upper_bound: ub }));
            }
            if tau >= TAU_MAX || ub - lower <= 1e-14 * scale {
                // optimum sits on the threshold within rounding
                return Ok(Ok(Feasibility { feasible: false, witness: None, lower_bound: lower, upper_bound: ub }));
            }
            tau *= TAU_GROWTH;
        }
    }

    fn derivatives(&self, x: &Vector, t: f64, tau: f64) -> (Vector, DMatrix<f64>) {
        let n = self.n;
        let mut grad = Vector::zeros(n + 1);
        let mut hess = DMatrix::zeros(n + 1, n + 1);
        grad[n] = tau;
        let mut q = Vector::zeros(n + 1);
        for b in self.balls {
            let s = t - b.residual(x);
            let d = x - &b.center;
            q.rows_mut(0, n).copy_from(&(d * -2.0));
            q[n] = 1.0;
            grad.axpy(-1.0 / s, &q, 1.0);
            hess.ger(1.0 / (s * s), &q, &q, 1.0);
            for i in 0..n {
                hess[(i, i)] += 2.0 / s;
            }
        }
        for h in self.halfspaces {
            let s = t - h.residual(x);
            q.rows_mut(0, n).copy_from(&(-&h.normal));
            q[n] = 1.0;
            grad.axpy(-1.0 / s, &q, 1.0);
            hess.ger(1.0 / (s * s), &q, &q, 1.0);
        }
        (grad, hess)
    }
}

/// Cholesky factor, adding a growing multiple of the mean diagonal when
/// rounding has cost the matrix its definiteness.
fn damped_cholesky(hess: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let size = hess.nrows();
    let mean = hess.trace() / size as f64;
    let mut delta = 0.0;
    loop {
        let mut h = hess.clone();
        for i in 0..size {
            h[(i, i)] += delta * mean;
        }
        if let Some(chol) = h.cholesky() {
            return Some(chol);
        }
        delta = if delta == 0.0 { 1e-14 } else { delta * 100.0 };
        if delta > 1e-6 {
            return None;
        }
    }
}
