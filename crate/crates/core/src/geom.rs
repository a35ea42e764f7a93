//! Closed-form vector geometry: ball systems, ray/ball clipping, orthogonal
//! complements, sphere intersections and brute-force convex hull facets.
//!
//! Everything here is a direct formula; the only error that accrues is
//! floating point rounding, so the tolerances in [`Tolerances`] are small
//! absolute bands on squared-distance residuals.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point or direction in `R^n`.
pub type Vector = DVector<f64>;

/// Builds a [`Vector`] from a coordinate slice.
pub fn vector(coords: &[f64]) -> Vector {
    Vector::from_column_slice(coords)
}

/// Numerical bands shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute band on squared-distance residuals (`h(x) <= residual` means `x` is in Q).
    pub residual: f64,
    /// Discriminant band under which two sphere/line intersections merge into one.
    pub tangency: f64,
    /// Distance band under which maximizers are considered tied.
    pub tie: f64,
    /// Gap band of the supporting-hyperplane test separating boundary from interior.
    pub hull_gap: f64,
    /// Radius shrink used as a proxy for the interior of Q.
    pub interior_shrink: f64,
    /// Target width of the bisection on the distance level.
    pub bisection_width: f64,
    /// Iteration cap of the bisection on the distance level.
    pub bisection_iters: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            tangency: 1e-12,
            tie: 1e-7,
            hull_gap: 1e-8,
            interior_shrink: 1e-7,
            bisection_width: 1e-10,
            bisection_iters: 60,
        }
    }
}

/// Outcome of a check that is only decidable at small scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    Verified,
    Violated,
    Unverified,
}

/// `m` closed balls of common radius `r`. Their intersection is the set Q.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSystem {
    centers: Vec<Vector>,
    radius: f64,
    general_position: Verification,
}

impl BallSystem {
    /// Validates dimensions, radius and distinctness of the centers.
    ///
    /// Does not require `m > n`; use [`BallSystem::require_more_centers_than_dim`]
    /// where the problem statement needs it.
    pub fn new(centers: Vec<Vector>, radius: f64) -> Result<Self> {
        let Some(first) = centers.first() else {
            return Err(Error::InvalidInput("a ball system needs at least one center".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!("radius must be positive and finite, got {radius}")));
        }
        for c in &centers {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("center coordinates must be finite".into()));
            }
        }
        for (i, j) in (0..centers.len()).tuple_combinations() {
            if centers[i] == centers[j] {
                return Err(Error::InvalidInput(format!("centers {} and {} coincide", i + 1, j + 1)));
            }
        }
        let general_position = general_position(&centers);
        Ok(Self { centers, radius, general_position })
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vector] {
        &self.centers
    }

    pub fn center(&self, k: usize) -> &Vector {
        &self.centers[k]
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Whether no hull facet carries more than `n` centers (checked for `n <= 4`, `m <= 12`).
    pub fn general_position(&self) -> Verification {
        self.general_position
    }

    pub fn require_more_centers_than_dim(&self) -> Result<()> {
        if self.len() > self.dim() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "need more centers than dimensions (m = {}, n = {})",
                self.len(),
                self.dim()
            )))
        }
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() })
        }
    }

    /// `h(x) = max_k ||x - C_k||^2 - r^2`; nonpositive exactly on Q.
    pub fn h_value(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.h_unchecked(x))
    }

    pub(crate) fn h_unchecked(&self, x: &Vector) -> f64 {
        let r2 = self.radius * self.radius;
        self.centers.iter().map(|c| (x - c).norm_squared() - r2).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether `x` lies in Q up to `tol` on squared residuals.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.dim() && self.h_unchecked(x) <= tol
    }

    /// `| ||x - C_k|| - r |` for every center.
    pub fn sphere_residuals(&self, x: &Vector) -> Vec<f64> {
        self.centers.iter().map(|c| ((x - c).norm() - self.radius).abs()).collect()
    }
}

/// A ball system together with the query point `C_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub system: BallSystem,
    pub c0: Vector,
    pub tol: Tolerances,
}

impl Instance {
    pub fn new(system: BallSystem, c0: Vector) -> Result<Self> {
        Self::with_tolerances(system, c0, Tolerances::default())
    }

    pub fn with_tolerances(system: BallSystem, c0: Vector, tol: Tolerances) -> Result<Self> {
        if c0.len() != system.dim() {
            return Err(Error::DimensionMismatch { expected: system.dim(), got: c0.len() });
        }
        if c0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("query point must be finite".into()));
        }
        Ok(Self { system, c0, tol })
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn h_value(&self, x: &Vector) -> Result<f64> {
        self.system.h_value(x)
    }

    /// `g(x) = ||x - C_0||^2`.
    pub fn g_value(&self, x: &Vector) -> Result<f64> {
        self.system.check_dim(x)?;
        Ok((x - &self.c0).norm_squared())
    }
}

/// Parameter range `[t_lo, t_hi]` along a line `origin + t * dir`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayInterval {
    pub t_lo: f64,
    pub t_hi: f64,
    pub empty: bool,
}

impl RayInterval {
    pub const EMPTY: RayInterval = RayInterval { t_lo: f64::NAN, t_hi: f64::NAN, empty: true };

    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        if t_lo <= t_hi {
            Self { t_lo, t_hi, empty: false }
        } else {
            Self::EMPTY
        }
    }

    pub fn full() -> Self {
        Self { t_lo: f64::NEG_INFINITY, t_hi: f64::INFINITY, empty: false }
    }

    pub fn intersect(&self, other: &RayInterval) -> RayInterval {
        if self.empty || other.empty {
            return Self::EMPTY;
        }
        Self::new(self.t_lo.max(other.t_lo), self.t_hi.min(other.t_hi))
    }
}

/// Parameter range where `origin + t * dir` lies in the closed ball `B(center, r)`.
pub fn ray_ball_interval(origin: &Vector, dir: &Vector, center: &Vector, r: f64) -> Result<RayInterval> {
    if origin.len() != dir.len() || origin.len() != center.len() {
        return Err(Error::DimensionMismatch { expected: origin.len(), got: dir.len().max(center.len()) });
    }
    let a = dir.norm_squared();
    if a == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let oc = origin - center;
    let mid = -dir.dot(&oc) / a;
    // squared half-width of the chord, in parameter units
    let half2 = mid * mid - (oc.norm_squared() - r * r) / a;
    let tangency = Tolerances::default().tangency;
    if half2 < -tangency {
        Ok(RayInterval::EMPTY)
    } else if half2 <= tangency {
        Ok(RayInterval::new(mid, mid))
    } else {
        let half = half2.sqrt();
        Ok(RayInterval::new(mid - half, mid + half))
    }
}

/// Parameter range where the line `origin + t * dir` lies inside every ball.
pub fn axis_clip(origin: &Vector, dir: &Vector, sys: &BallSystem) -> Result<RayInterval> {
    let mut acc = RayInterval::full();
    for c in sys.centers() {
        acc = acc.intersect(&ray_ball_interval(origin, dir, c, sys.radius())?);
        if acc.empty {
            break;
        }
    }
    Ok(acc)
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)` in `R^dim`.
pub fn orthogonal_complement(dim: usize, vectors: &[Vector]) -> Result<Vec<Vector>> {
    let mut basis: Vec<Vector> = Vec::with_capacity(dim);
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        let scale = v.norm();
        let w = reject(v, &basis);
        if scale == 0.0 || w.norm() <= 1e-10 * scale {
            return Err(Error::DependentVectors);
        }
        basis.push(w.normalize());
    }
    let spanned = basis.len();
    while basis.len() < dim {
        let best = (0..dim)
            .map(|i| reject(&Vector::from_fn(dim, |j, _| if i == j { 1.0 } else { 0.0 }), &basis))
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("dim >= 1");
        basis.push(best.normalize());
    }
    Ok(basis.split_off(spanned))
}

/// Removes the components of `v` along the orthonormal `basis`, twice for stability.
fn reject(v: &Vector, basis: &[Vector]) -> Vector {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let coef = b.dot(&w);
            w.axpy(-coef, b, 1.0);
        }
    }
    w
}

/// Slope and intercept of `t -> ||y + t(z-y) - c1||^2 - ||y + t(z-y) - c2||^2`.
///
/// The quadratic terms cancel, so the function is exactly affine.
pub fn affine_gap_coeffs(y: &Vector, z: &Vector, c1: &Vector, c2: &Vector) -> (f64, f64) {
    let w = z - y;
    let slope = 2.0 * w.dot(&(c2 - c1));
    let intercept = (y - c1).norm_squared() - (y - c2).norm_squared();
    (slope, intercept)
}

/// Center and squared radius of the smallest sphere through affinely
/// independent points, with the center forced into their affine hull.
pub fn circumcenter(points: &[Vector]) -> Result<(Vector, f64)> {
    let Some(p0) = points.first() else {
        return Err(Error::InvalidInput("circumcenter of an empty set".into()));
    };
    let k = points.len() - 1;
    if k == 0 {
        return Ok((p0.clone(), 0.0));
    }
    let diffs: Vec<Vector> = points[1..].iter().map(|p| p - p0).collect();
    if k > p0.len() {
        return Err(Error::AffinelyDependent);
    }
    let gram = DMatrix::from_fn(k, k, |i, j| diffs[i].dot(&diffs[j]));
    let rhs = DVector::from_fn(k, |i, _| 0.5 * diffs[i].norm_squared());
    let scale = gram.diagonal().max();
    let chol = gram.clone().cholesky().ok_or(Error::AffinelyDependent)?;
    // reject near-singular Gram matrices explicitly
    let min_pivot = chol.l().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    if min_pivot <= 1e-12 * scale {
        return Err(Error::AffinelyDependent);
    }
    let lambda = chol.solve(&rhs);
    let mut center = p0.clone();
    for (l, d) in lambda.iter().zip(&diffs) {
        center.axpy(*l, d, 1.0);
    }
    let r2 = (&center - p0).norm_squared();
    Ok((center, r2))
}

/// Common intersection of `k` equal-radius spheres with affinely independent
/// centers: a `(n-k)`-sphere with the given center and radius lying in
/// `center + span(directions)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereIntersection {
    pub center: Vector,
    pub radius: f64,
    /// Orthonormal basis of the complement of the centers' difference space.
    pub directions: Vec<Vector>,
}

impl SphereIntersection {
    /// Intersection of the spheres `||x - C|| = r`; `None` when it is empty.
    pub fn of(centers: &[Vector], r: f64) -> Result<Option<Self>> {
        let (center, rho2) = circumcenter(centers)?;
        let n = centers[0].len();
        let diffs: Vec<Vector> = centers[1..].iter().map(|c| c - &centers[0]).collect();
        let directions = orthogonal_complement(n, &diffs)?;
        let rad2 = r * r - rho2;
        let tangency = Tolerances::default().tangency;
        if rad2 < -tangency {
            return Ok(None);
        }
        let radius = if rad2 <= tangency { 0.0 } else { rad2.sqrt() };
        Ok(Some(Self { center, radius, directions }))
    }

    fn project(&self, v: &Vector) -> Vector {
        let mut out = Vector::zeros(v.len());
        for d in &self.directions {
            out.axpy(d.dot(v), d, 1.0);
        }
        out
    }

    /// Point of the intersection nearest to `p` (arbitrary when `p` projects onto the center).
    pub fn nearest_to(&self, p: &Vector) -> Vector {
        let proj = self.project(&(p - &self.center));
        let norm = proj.norm();
        if norm <= 1e-300 {
            return &self.center + &self.directions[0] * self.radius;
        }
        &self.center + proj * (self.radius / norm)
    }

    /// Point of the intersection farthest from `p`.
    ///
    /// When every point is equidistant from `p` (its projection hits the
    /// center), `tiebreak` picks the point extreme along that direction.
    pub fn farthest_from(&self, p: &Vector, tiebreak: &Vector) -> Vector {
        let proj = self.project(&(&self.center - p));
        let scale = (&self.center - p).norm().max(self.radius).max(1e-300);
        let dir = if proj.norm() > 1e-9 * scale {
            proj
        } else {
            let t = self.project(tiebreak);
            if t.norm() <= 1e-300 {
                self.directions[0].clone()
            } else {
                t
            }
        };
        &self.center + dir.normalize() * self.radius
    }

    /// Whether every point of the intersection is at the same distance from `p`.
    pub fn is_equidistant_from(&self, p: &Vector) -> bool {
        let proj = self.project(&(&self.center - p));
        let scale = (&self.center - p).norm().max(self.radius).max(1e-300);
        proj.norm() <= 1e-9 * scale || self.radius == 0.0
    }
}

/// All points lying on the `n` spheres `||x - C_k|| = r` (0, 1 or 2 points).
pub fn sphere_vertex_candidates(centers: &[Vector], r: f64) -> Result<Vec<Vector>> {
    let Some(first) = centers.first() else {
        return Err(Error::InvalidInput("no centers".into()));
    };
    let n = first.len();
    if centers.len() != n {
        return Err(Error::InvalidInput(format!("expected {n} centers, got {}", centers.len())));
    }
    let Some(s) = SphereIntersection::of(centers, r)? else {
        return Ok(vec![]);
    };
    let d = &s.directions[0];
    if s.radius == 0.0 {
        return Ok(vec![s.center]);
    }
    Ok(vec![&s.center + d * s.radius, &s.center - d * s.radius])
}

/// Supporting hyperplane of a point set: `normal . x <= offset` for all points,
/// with `members` the indices lying on it.
#[derive(Debug, Clone, PartialEq)]
pub struct HullFacet {
    pub normal: Vector,
    pub offset: f64,
    pub members: Vec<usize>,
}

impl HullFacet {
    /// Signed distance of `x` inside the facet (positive inside).
    pub fn margin(&self, x: &Vector) -> f64 {
        self.offset - self.normal.dot(x)
    }
}

/// Brute-force facets of the convex hull over all `n`-subsets.
///
/// Returns `None` when the hull is not full-dimensional.
pub fn hull_facets(points: &[Vector]) -> Option<Vec<HullFacet>> {
    let n = points.first()?.len();
    if points.len() <= n {
        return None;
    }
    let scale = points.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let mut facets: Vec<HullFacet> = Vec::new();
    for subset in (0..points.len()).combinations(n) {
        let base = &points[subset[0]];
        let diffs: Vec<Vector> = subset[1..].iter().map(|&i| &points[i] - base).collect();
        let Ok(comp) = orthogonal_complement(n, &diffs) else { continue };
        let mut normal = comp[0].clone();
        let mut offset = normal.dot(base);
        let side: Vec<f64> = points.iter().map(|p| normal.dot(p) - offset).collect();
        let above = side.iter().any(|s| *s > tol);
        let below = side.iter().any(|s| *s < -tol);
        if above && below {
            continue;
        }
        if above {
            normal = -normal;
            offset = -offset;
        }
        let members: Vec<usize> = side.iter().enumerate().filter(|(_, s)| s.abs() <= tol).map(|(i, _)| i).collect();
        if facets.iter().any(|f| f.members == members) {
            continue;
        }
        facets.push(HullFacet { normal, offset, members });
    }
    // a lower-dimensional hull shows up as a "facet" holding every point
    if facets.is_empty() || facets.iter().any(|f| f.members.len() == points.len()) {
        return None;
    }
    Some(facets)
}

fn general_position(centers: &[Vector]) -> Verification {
    let n = centers[0].len();
    if n > 4 || centers.len() > 12 {
        return Verification::Unverified;
    }
    if centers.len() <= n {
        return Verification::Verified;
    }
    match hull_facets(centers) {
        None => Verification::Violated,
        Some(facets) if facets.iter().any(|f| f.members.len() > n) => Verification::Violated,
        Some(_) => Verification::Verified,
    }
}
