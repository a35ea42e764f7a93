use itertools::Itertools;

use super::{SolveCase, SolveReport, Uniqueness};
use crate::convex::{convex_feasible, probe, Ball, HullCase, HullClassification};
use crate::error::{Error, Result};
use crate::geom::{sphere_vertex_candidates, Instance, SphereIntersection, Vector};
use crate::levelset::LevelSetPolytope;

/// Unique farthest point for a query point outside the hull of the centers.
pub fn solve_exterior(inst: &Instance, cls: HullClassification) -> Result<SolveReport> {
    if cls.case != HullCase::Outside {
        return Err(Error::Precondition(format!("exterior solve needs an outside query point, got {:?}", cls.case)));
    }
    let x = farthest_by_levels(inst)?;
    let mut report = SolveReport::new(inst, SolveCase::Exterior, cls, vec![x]);
    report.uniqueness = Uniqueness::Proven;
    report.hull_inclusion = super::hull_inclusion(&inst.system)?;
    Ok(report)
}

/// Largest `R` with `Q ∩ P_{R^2}` nonempty, found by bisection, and the
/// polished farthest point.
///
/// `max_Q (g - h)` is a concave maximization whose value equals the
/// farthest distance whenever its maximizer lies on the boundary of Q; that
/// holds for outside query points and whenever `Q` misses `argmin (h - g)`.
pub(crate) fn farthest_by_levels(inst: &Instance) -> Result<Vector> {
    let sys = &inst.system;
    let balls: Vec<Ball> = sys.centers().iter().map(|c| Ball::new(c.clone(), sys.radius())).collect();
    let mut seed = convex_feasible(&balls, &[])?.witness.ok_or(Error::EmptyIntersection)?;
    let mut lo = 0.0;
    let mut hi = sys.centers().iter().map(|c| (c - &inst.c0).norm()).fold(0.0, f64::max) + sys.radius();
    for _ in 0..inst.tol.bisection_iters {
        if hi - lo <= inst.tol.bisection_width * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let poly = LevelSetPolytope::build(inst, mid)?;
        match probe(&balls, &poly.halfspaces)? {
            Ok(out) => match out.witness {
                Some(w) => {
                    lo = mid;
                    seed = w;
                }
                None => hi = mid,
            },
            // the level sits on the optimum up to the barrier's resolution, so
            // the near-feasible iterate is close to the maximizer
            Err(undecided) => {
                return polish(inst, &undecided.point, 1e-5 * (1.0 + hi * hi)).ok_or_else(|| {
                    Error::Inconclusive(format!(
                        "level {mid} undecided (bounds [{:.3e}, {:.3e}]) and no exact vertex nearby",
                        undecided.lower, undecided.upper
                    ))
                })
            }
        }
    }
    Ok(polish(inst, &seed, 1e-6 * (1.0 + lo * lo)).unwrap_or(seed))
}

/// Exact farthest point near `seed` on the intersections of nearly active spheres.
///
/// Returns `None` when no candidate inside Q comes within `slack` (on squared
/// distances) of the seed.
pub(crate) fn polish(inst: &Instance, seed: &Vector, slack: f64) -> Option<Vector> {
    let sys = &inst.system;
    let n = inst.dim();
    let r = sys.radius();
    let band = 1e-2 * (1.0 + r);
    let near: Vec<usize> = (0..sys.len())
        .map(|k| (k, r - (seed - sys.center(k)).norm()))
        .filter(|(_, gap)| *gap <= band)
        .sorted_by(|a, b| a.1.total_cmp(&b.1))
        .take(12)
        .map(|(k, _)| k)
        .sorted()
        .collect();
    let reach = 5e-2 * (1.0 + r);
    let mut best: Option<(f64, Vector)> = None;
    let seed_dist = (seed - &inst.c0).norm_squared();
    for size in 1..=n.min(near.len()) {
        for subset in near.iter().combinations(size) {
            let centers: Vec<Vector> = subset.iter().map(|&&k| sys.center(k).clone()).collect();
            let candidates = if size == n {
                sphere_vertex_candidates(&centers, r).unwrap_or_default()
            } else {
                match SphereIntersection::of(&centers, r) {
                    Ok(Some(s)) => vec![s.farthest_from(&inst.c0, &(seed - &s.center))],
                    _ => vec![],
                }
            };
            for x in candidates {
                if (&x - seed).norm() > reach || sys.h_unchecked(&x) > inst.tol.residual {
                    continue;
                }
                let d = (&x - &inst.c0).norm_squared();
                if best.as_ref().is_none_or(|(bd, _)| d > *bd) {
                    best = Some((d, x));
                }
            }
        }
    }
    best.filter(|(d, _)| *d >= seed_dist - slack).map(|(_, x)| x)
}
