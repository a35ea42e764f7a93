//! Farthest point of Q from the query point in each of the three regimes.
//!
//! * outside the hull of the centers: bisection on the level `R` with a
//!   convex feasibility test of `Q ∩ P_{R^2}`, then an exact polish on the
//!   active spheres;
//! * on a hull facet: the closed-form level `R̄` and a walk along the
//!   equidistant flat of the support centers;
//! * inside the hull: vertex enumeration (small scale only).

mod boundary;
mod certificate;
mod exterior;
mod interior;

pub use boundary::{facet_axis, rbar, solve_boundary, FacetAxis};
pub use certificate::{cone_certificate, hull_inclusion};
pub use exterior::solve_exterior;
pub use interior::{enumerate_vertices, solve_interior};

pub(crate) use exterior::farthest_by_levels;

use serde::Serialize;

use crate::convex::{classify_c0, convex_feasible, Ball, HullCase, HullClassification};
use crate::error::{Error, Result};
use crate::geom::{Instance, Vector, Verification};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveCase {
    Interior,
    BoundaryPEqN,
    BoundaryPLtN,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    One,
    Two,
    Infinite,
    FiniteList,
}

/// How firmly a single reported maximizer is known to be the only one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    /// Follows from the theory under hypotheses that were checked.
    Proven,
    /// Only one was found; hypotheses unverified or not applicable.
    Observed,
    /// Several maximizers exist.
    NotUnique,
}

/// Sphere residuals `| |x - C_k| - r |` of one maximizer and the indices of
/// the spheres it lies on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub residuals: Vec<f64>,
    pub active: Vec<usize>,
}

/// Residual band under which a maximizer counts as lying on a sphere.
pub const ACTIVE_BAND: f64 = 1e-7;

impl Certificate {
    pub fn of(inst: &Instance, x: &Vector) -> Self {
        let residuals = inst.system.sphere_residuals(x);
        let active = residuals.iter().enumerate().filter(|(_, r)| **r <= ACTIVE_BAND).map(|(k, _)| k).collect();
        Self { residuals, active }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub case: SolveCase,
    pub rstar: f64,
    pub maximizers: Vec<Vector>,
    pub multiplicity: Multiplicity,
    pub certificates: Vec<Certificate>,
    pub classification: HullClassification,
    /// Closed-form facet level (boundary cases).
    pub rbar: Option<f64>,
    /// Whether some point of Q attains `rbar` (boundary cases).
    pub rbar_attained: Option<bool>,
    /// Whether Q lies in the interior of the centers' hull.
    pub hull_inclusion: Verification,
    pub uniqueness: Uniqueness,
}

impl SolveReport {
    fn new(inst: &Instance, case: SolveCase, cls: HullClassification, maximizers: Vec<Vector>) -> Self {
        let rstar = maximizers.iter().map(|x| (x - &inst.c0).norm()).fold(f64::NEG_INFINITY, f64::max);
        let certificates = maximizers.iter().map(|x| Certificate::of(inst, x)).collect();
        Self {
            case,
            rstar,
            multiplicity: if maximizers.len() == 1 { Multiplicity::One } else { Multiplicity::FiniteList },
            maximizers,
            certificates,
            classification: cls,
            rbar: None,
            rbar_attained: None,
            hull_inclusion: Verification::Unverified,
            uniqueness: Uniqueness::Observed,
        }
    }
}

/// Fails with [`Error::EmptyIntersection`] unless the balls share a point.
pub fn require_nonempty(inst: &Instance) -> Result<Vector> {
    let balls: Vec<Ball> = inst.system.centers().iter().map(|c| Ball::new(c.clone(), inst.system.radius())).collect();
    convex_feasible(&balls, &[])?.witness.ok_or(Error::EmptyIntersection)
}

/// Classifies `C0` and dispatches to the matching regime.
pub fn solve(inst: &Instance) -> Result<SolveReport> {
    require_nonempty(inst)?;
    let cls = classify_c0(inst)?;
    match cls.case {
        HullCase::Outside => solve_exterior(inst, cls),
        HullCase::Boundary => solve_boundary(inst, cls),
        HullCase::Interior => solve_interior(inst, cls),
    }
}

/// [`solve`] without the vertex-enumeration scale guard, for the larger
/// trimming systems of the subset-sum experiments.
pub(crate) fn solve_unguarded(inst: &Instance) -> Result<SolveReport> {
    require_nonempty(inst)?;
    let cls = classify_c0(inst)?;
    match cls.case {
        HullCase::Outside => solve_exterior(inst, cls),
        HullCase::Boundary => solve_boundary(inst, cls),
        HullCase::Interior => interior::solve_interior_unguarded(inst, cls),
    }
}
