use itertools::Itertools;

use super::{Multiplicity, SolveCase, SolveReport, Uniqueness};
use crate::convex::{HullCase, HullClassification};
use crate::error::{Error, Result};
use crate::geom::{sphere_vertex_candidates, BallSystem, Instance, Vector};

const MAX_DIM: usize = 3;
const MAX_CENTERS: usize = 12;
/// Membership band for vertices of Q on squared residuals.
const VERTEX_RESIDUAL: f64 = 1e-8;
/// Distance under which two vertices are merged.
const VERTEX_MERGE: f64 = 1e-7;

/// Points of Q lying on at least `n` spheres, for `n <= 3` and `m <= 12`.
pub fn enumerate_vertices(sys: &BallSystem) -> Result<Vec<Vector>> {
    if sys.dim() > MAX_DIM || sys.len() > MAX_CENTERS {
        return Err(Error::ScaleGuard(format!(
            "vertex enumeration limited to n <= {MAX_DIM}, m <= {MAX_CENTERS} (got n = {}, m = {})",
            sys.dim(),
            sys.len()
        )));
    }
    Ok(enumerate_vertices_unguarded(sys))
}

/// Vertex enumeration without the scale guard; cost grows as `C(m, n)`.
pub(crate) fn enumerate_vertices_unguarded(sys: &BallSystem) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for subset in (0..sys.len()).combinations(sys.dim()) {
        let centers: Vec<Vector> = subset.iter().map(|&k| sys.center(k).clone()).collect();
        let Ok(points) = sphere_vertex_candidates(&centers, sys.radius()) else { continue };
        for p in points {
            if sys.h_unchecked(&p) <= VERTEX_RESIDUAL && out.iter().all(|q| (q - &p).norm() > VERTEX_MERGE) {
                out.push(p);
            }
        }
    }
    out
}

/// Farthest vertices of Q from an interior query point.
pub fn solve_interior(inst: &Instance, cls: HullClassification) -> Result<SolveReport> {
    if cls.case != HullCase::Interior {
        return Err(Error::Precondition(format!("interior solve needs an interior query point, got {:?}", cls.case)));
    }
    enumerate_vertices(&inst.system)?;
    solve_interior_unguarded(inst, cls)
}

pub(crate) fn solve_interior_unguarded(inst: &Instance, cls: HullClassification) -> Result<SolveReport> {
    let vertices = enumerate_vertices_unguarded(&inst.system);
    let dist = |v: &Vector| (v - &inst.c0).norm();
    let best = vertices
        .iter()
        .map(dist)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))))
        .ok_or_else(|| Error::Inconclusive("Q has no vertex on n spheres".into()))?;
    let maximizers: Vec<Vector> = vertices.into_iter().filter(|v| dist(v) >= best - inst.tol.tie).collect();
    let mut report = SolveReport::new(inst, SolveCase::Interior, cls, maximizers);
    report.rstar = best;
    if report.maximizers.len() > 1 {
        report.multiplicity = Multiplicity::FiniteList;
        report.uniqueness = Uniqueness::NotUnique;
    }
    report.hull_inclusion = super::hull_inclusion(&inst.system)?;
    Ok(report)
}
