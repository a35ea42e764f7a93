//! Linear programming, hull classification of the query point, minimum
//! enclosing balls and ball/halfspace feasibility.

mod feasible;
mod meb;
mod simplex;

pub(crate) use feasible::probe;
pub use feasible::{convex_feasible, Ball, Feasibility};
pub use meb::meb;
pub use simplex::{lp_solve, Constraint, LpOutcome, LpProblem, LpStatus};

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Instance, Vector};

/// Result of minimizing the piecewise-affine function `h - g`.
#[derive(Debug, Clone, PartialEq)]
pub struct HgMinimum {
    pub status: LpStatus,
    /// Minimum value; `-inf` when unbounded.
    pub value: f64,
    /// A minimizer when bounded.
    pub point: Option<Vector>,
}

/// Minimizes `max_k [2(C0 - C_k).x + |C_k|^2 - |C0|^2 - r^2]` as an LP in `(x, t)`.
pub fn minimize_h_minus_g(inst: &Instance) -> Result<HgMinimum> {
    let n = inst.dim();
    let sys = &inst.system;
    let r2 = sys.radius() * sys.radius();
    let c0n = inst.c0.norm_squared();
    let constraints = sys
        .centers()
        .iter()
        .map(|c| {
            let mut normal = Vector::zeros(n + 1);
            normal.rows_mut(0, n).copy_from(&((&inst.c0 - c) * 2.0));
            normal[n] = -1.0;
            Constraint::new(normal, c0n + r2 - c.norm_squared())
        })
        .collect();
    let mut objective = Vector::zeros(n + 1);
    objective[n] = 1.0;
    let out = lp_solve(&LpProblem { objective, constraints, bounds: None })?;
    Ok(match out.status {
        LpStatus::Optimal => {
            let z = out.point.expect("optimal LP carries a point");
            HgMinimum { status: LpStatus::Optimal, value: z[n], point: Some(z.rows(0, n).into_owned()) }
        }
        LpStatus::Unbounded => HgMinimum { status: LpStatus::Unbounded, value: f64::NEG_INFINITY, point: None },
        LpStatus::Infeasible => return Err(Error::LpFailure("epigraph LP reported infeasible".into())),
    })
}

/// Supporting-hyperplane gap of `y` against `points`.
///
/// Returns `min_a max_k a.(C_k - y)` over normals with `|a|_inf = 1`, and the
/// minimizing normal. Positive means `y` is interior to the hull, zero on its
/// boundary, negative outside.
pub fn hull_gap(points: &[Vector], y: &Vector) -> Result<(f64, Vector)> {
    let n = y.len();
    let mut best: Option<(f64, Vector)> = None;
    for (axis, sign) in (0..n).cartesian_product([1.0, -1.0]) {
        // variables: a with a[axis] fixed, all others in [-1, 1], then t
        let constraints = points
            .iter()
            .map(|p| {
                let d = p - y;
                let mut normal = Vector::zeros(n + 1);
                for j in 0..n {
                    if j != axis {
                        normal[j] = d[j];
                    }
                }
                normal[n] = -1.0;
                Constraint::new(normal, -sign * d[axis])
            })
            .collect();
        let mut objective = Vector::zeros(n + 1);
        objective[n] = 1.0;
        let mut bounds = vec![(-1.0, 1.0); n];
        bounds[axis] = (0.0, 0.0);
        bounds.push((f64::NEG_INFINITY, f64::INFINITY));
        let out = lp_solve(&LpProblem { objective, constraints, bounds: Some(bounds) })?;
        let z = out.point.ok_or_else(|| Error::LpFailure("hull gap LP is bounded by construction".into()))?;
        let mut a = z.rows(0, n).into_owned();
        a[axis] = sign;
        let gap = points.iter().map(|p| a.dot(&(p - y))).fold(f64::NEG_INFINITY, f64::max);
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, a));
        }
    }
    best.ok_or_else(|| Error::InvalidInput("empty dimension".into()))
}

/// Whether `y` is a convex combination of `points` (LP feasibility).
pub fn in_convex_hull(points: &[Vector], y: &Vector) -> Result<bool> {
    let m = points.len();
    let n = y.len();
    let mut constraints = Vec::with_capacity(2 * (n + 1));
    for j in 0..=n {
        let row = Vector::from_fn(m, |k, _| if j < n { points[k][j] } else { 1.0 });
        let rhs = if j < n { y[j] } else { 1.0 };
        constraints.push(Constraint::new(row.clone(), rhs));
        constraints.push(Constraint::new(-row, -rhs));
    }
    let problem = LpProblem { objective: Vector::zeros(m), constraints, bounds: Some(vec![(0.0, f64::INFINITY); m]) };
    match lp_solve(&problem) {
        Ok(out) => Ok(out.status == LpStatus::Optimal),
        // the equality rows make slight violations possible; treat as outside
        Err(Error::LpFailure(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HullCase {
    Interior,
    Boundary,
    Outside,
}

/// Position of `C0` relative to the convex hull of the centers.
#[derive(Debug, Clone, PartialEq)]
pub struct HullClassification {
    pub case: HullCase,
    /// Zero-based support indices (boundary case).
    pub sigma: Vec<usize>,
    /// Positive weights with `sum alpha = 1` and `sum alpha_k C_sigma_k = C0` (boundary case).
    pub alpha: Vec<f64>,
    /// Outward normal of the supporting hyperplane (boundary case).
    pub normal: Option<Vector>,
    /// Supporting-hyperplane gap; `-inf` for outside points.
    pub gap: f64,
}

impl HullClassification {
    pub fn p(&self) -> usize {
        self.sigma.len()
    }
}

/// Classifies `C0` as interior, boundary or outside of `conv(C_1..C_m)`.
pub fn classify_c0(inst: &Instance) -> Result<HullClassification> {
    let centers = inst.system.centers();
    let outside = |gap| HullClassification { case: HullCase::Outside, sigma: vec![], alpha: vec![], normal: None, gap };
    if minimize_h_minus_g(inst)?.status == LpStatus::Unbounded {
        return Ok(outside(f64::NEG_INFINITY));
    }
    if !in_convex_hull(centers, &inst.c0)? {
        return Err(Error::Inconclusive("bounded h - g but C0 is not a convex combination of the centers".into()));
    }
    let (gap, normal) = hull_gap(centers, &inst.c0)?;
    let scale = centers.iter().map(|c| (c - &inst.c0).amax()).fold(1.0, f64::max);
    if gap > inst.tol.hull_gap * scale {
        return Ok(HullClassification { case: HullCase::Interior, sigma: vec![], alpha: vec![], normal: None, gap });
    }
    let active: Vec<usize> =
        (0..centers.len()).filter(|&k| normal.dot(&(&centers[k] - &inst.c0)) >= -inst.tol.hull_gap * scale).collect();
    let n = inst.dim();
    for size in 1..=n.min(active.len()) {
        for sigma in active.iter().copied().combinations(size) {
            if let Some(alpha) = barycentric(centers, &sigma, &inst.c0) {
                return Ok(HullClassification { case: HullCase::Boundary, sigma, alpha, normal: Some(normal), gap });
            }
        }
    }
    Err(Error::GeneralPosition(format!(
        "no support of at most {n} centers on the active facet {active:?} represents C0"
    )))
}

/// Positive weights `alpha` with `sum alpha = 1` and `sum alpha_k P_sigma_k = y`, if any.
fn barycentric(points: &[Vector], sigma: &[usize], y: &Vector) -> Option<Vec<f64>> {
    let n = y.len();
    let p = sigma.len();
    let a = DMatrix::from_fn(n + 1, p, |i, j| if i < n { points[sigma[j]][i] } else { 1.0 });
    let b = Vector::from_fn(n + 1, |i, _| if i < n { y[i] } else { 1.0 });
    let alpha = a.clone().svd(true, true).solve(&b, 1e-12).ok()?;
    let residual = (&a * &alpha - &b).amax();
    if residual <= 1e-8 && alpha.iter().all(|v| *v > 1e-10) {
        Some(alpha.iter().copied().collect())
    } else {
        None
    }
}
