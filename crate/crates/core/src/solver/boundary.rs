use nalgebra::DMatrix;

use super::{Multiplicity, SolveCase, SolveReport, Uniqueness};
use crate::convex::{convex_feasible, Ball, Constraint, HullCase, HullClassification};
use crate::error::{Error, Result};
use crate::geom::{axis_clip, circumcenter, orthogonal_complement, Instance, Vector, Verification};
use crate::levelset::LevelSetPolytope;

/// Largest level `R̄` at which `P_{R^2}` is nonempty for a facet query point:
/// `R̄^2 = |C0|^2 - sum alpha_k (|C_sigma_k|^2 - r^2)`.
pub fn rbar(inst: &Instance, cls: &HullClassification) -> Result<f64> {
    require_boundary(cls)?;
    let r2 = inst.system.radius().powi(2);
    let radicand = inst.c0.norm_squared()
        - cls.sigma.iter().zip(&cls.alpha).map(|(&k, a)| a * (inst.system.center(k).norm_squared() - r2)).sum::<f64>();
    if radicand < -inst.tol.residual {
        return Err(Error::Precondition(format!(
            "negative level radicand {radicand:.3e}: Q is empty or the facet decomposition is wrong"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

fn require_boundary(cls: &HullClassification) -> Result<()> {
    if cls.case == HullCase::Boundary && !cls.sigma.is_empty() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("facet operations need a boundary query point, got {:?}", cls.case)))
    }
}

/// The flat of points equidistant from the support centers.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetAxis {
    /// Circumcenter of the support centers, inside their affine hull.
    pub base: Vector,
    /// Orthonormal basis of the flat's directions (`n - p + 1` vectors).
    pub directions: Vec<Vector>,
    pub rbar: f64,
}

impl FacetAxis {
    pub fn point(&self, coords: &[f64]) -> Vector {
        let mut x = self.base.clone();
        for (d, c) in self.directions.iter().zip(coords) {
            x.axpy(*c, d, 1.0);
        }
        x
    }

    /// Coordinates of the orthogonal projection of `x` onto the flat.
    pub fn coords(&self, x: &Vector) -> Vec<f64> {
        let rel = x - &self.base;
        self.directions.iter().map(|d| d.dot(&rel)).collect()
    }
}

pub fn facet_axis(inst: &Instance, cls: &HullClassification) -> Result<FacetAxis> {
    let rb = rbar(inst, cls)?;
    let support: Vec<Vector> = cls.sigma.iter().map(|&k| inst.system.center(k).clone()).collect();
    let (base, _) = circumcenter(&support)?;
    let diffs: Vec<Vector> = support[1..].iter().map(|c| c - &support[0]).collect();
    let directions = orthogonal_complement(inst.dim(), &diffs).map_err(|_| Error::AffinelyDependent)?;
    Ok(FacetAxis { base, directions, rbar: rb })
}

/// Farthest points for a query point on a hull facet.
pub fn solve_boundary(inst: &Instance, cls: HullClassification) -> Result<SolveReport> {
    let axis = facet_axis(inst, &cls)?;
    let n = inst.dim();
    let case = if cls.p() == n { SolveCase::BoundaryPEqN } else { SolveCase::BoundaryPLtN };
    let r = inst.system.radius();
    let rho_sigma2 = (&axis.base - inst.system.center(cls.sigma[0])).norm_squared();
    // radius of the support spheres' intersection inside the flat
    let rho_s = (r * r - rho_sigma2).max(0.0).sqrt();

    let attained = if case == SolveCase::BoundaryPEqN {
        line_maximizers(inst, &axis, rho_s)?
    } else {
        flat_maximizers(inst, &cls, &axis, rho_s)?
    };

    let hull_inclusion = super::hull_inclusion(&inst.system)?;
    let mut report = match attained {
        Some((maximizers, multiplicity)) => {
            let mut report = SolveReport::new(inst, case, cls, maximizers);
            report.multiplicity = multiplicity;
            report.rbar_attained = Some(true);
            report.uniqueness = match multiplicity {
                Multiplicity::One if case == SolveCase::BoundaryPEqN && hull_inclusion == Verification::Verified => {
                    Uniqueness::Proven
                }
                Multiplicity::One => Uniqueness::Observed,
                _ => Uniqueness::NotUnique,
            };
            report
        }
        None => {
            // no point of Q reaches the facet level; the level-set bisection
            // is exact in that situation
            let x = super::farthest_by_levels(inst)?;
            let mut report = SolveReport::new(inst, case, cls, vec![x]);
            report.rbar_attained = Some(false);
            report
        }
    };
    report.rbar = Some(axis.rbar);
    report.hull_inclusion = hull_inclusion;
    Ok(report)
}

/// `p = n`: the flat is a line; its clip against Q has endpoints on the
/// support spheres exactly when they attain `R̄`.
fn line_maximizers(inst: &Instance, axis: &FacetAxis, rho_s: f64) -> Result<Option<(Vec<Vector>, Multiplicity)>> {
    let u = &axis.directions[0];
    let clip = axis_clip(&axis.base, u, &inst.system)?;
    if clip.empty {
        return Ok(None);
    }
    let on_sphere = |t: f64| (t.abs() - rho_s).abs() <= inst.tol.tie;
    let mut ends = vec![];
    if on_sphere(clip.t_lo) {
        ends.push(clip.t_lo);
    }
    if on_sphere(clip.t_hi) && (ends.is_empty() || clip.t_hi - clip.t_lo > inst.tol.tie) {
        ends.push(clip.t_hi);
    }
    let multiplicity = match ends.len() {
        0 => return Ok(None),
        1 => Multiplicity::One,
        _ => Multiplicity::Two,
    };
    Ok(Some((ends.into_iter().map(|t| axis.point(&[t])).collect(), multiplicity)))
}

/// `p < n`: find a point of `Q ∩ P_{R̄^2}` inside the flat, then walk against
/// the facet normal until the support spheres are reached. The walk keeps
/// every non-support row of `P_{R̄^2}`, so the end point attains `R̄`.
fn flat_maximizers(
    inst: &Instance,
    cls: &HullClassification,
    axis: &FacetAxis,
    rho_s: f64,
) -> Result<Option<(Vec<Vector>, Multiplicity)>> {
    let split = LevelSetPolytope::build(inst, axis.rbar)?.split(&cls.sigma)?;
    let r = inst.system.radius();
    let interior = flat_witness(inst, axis, &split.pminus, r - inst.tol.interior_shrink)?;
    let (seed, multiplicity) = match interior {
        Some(y) => (y, Multiplicity::Infinite),
        None => match flat_witness(inst, axis, &split.pminus, r)? {
            Some(y) => (y, Multiplicity::One),
            None => return Ok(None),
        },
    };
    let normal = cls.normal.as_ref().expect("boundary classification carries a normal");
    let dir = -Vector::from_vec(axis.coords(&(normal + &axis.base)));
    let dir = dir.normalize();
    // solve |y + s dir| = rho_s for s >= 0
    let y = Vector::from_vec(seed);
    let b = y.dot(&dir);
    let c = y.norm_squared() - rho_s * rho_s;
    let s = -b + (b * b - c).max(0.0).sqrt();
    let end = y + dir * s;
    let x = axis.point(end.as_slice());
    if inst.system.h_unchecked(&x) > inst.tol.residual * (1.0 + r * r)
        || ((&x - &inst.c0).norm() - axis.rbar).abs() > 1e-8 * (1.0 + axis.rbar)
    {
        return Ok(None);
    }
    Ok(Some((vec![x], multiplicity)))
}

/// A point of `Q(radius) ∩ P⁻` on the flat, in flat coordinates.
///
/// Restricting to the flat turns the support rows (which hold with equality
/// at `R̄`) into identities and every ball into a lower-dimensional ball.
fn flat_witness(inst: &Instance, axis: &FacetAxis, pminus: &[Constraint], radius: f64) -> Result<Option<Vec<f64>>> {
    if radius <= 0.0 {
        return Ok(None);
    }
    let k = axis.directions.len();
    let basis = DMatrix::from_columns(&axis.directions);
    let mut balls = Vec::with_capacity(inst.system.len());
    for c in inst.system.centers() {
        let rel = c - &axis.base;
        let inside = basis.transpose() * &rel;
        let off2 = (rel.norm_squared() - inside.norm_squared()).max(0.0);
        let rad2 = radius * radius - off2;
        if rad2 < 0.0 {
            return Ok(None);
        }
        balls.push(Ball::new(Vector::from_iterator(k, inside.iter().copied()), rad2.sqrt()));
    }
    let halfspaces: Vec<Constraint> = pminus
        .iter()
        .map(|h| {
            let normal = basis.transpose() * &h.normal;
            Constraint::new(Vector::from_iterator(k, normal.iter().copied()), h.offset - h.normal.dot(&axis.base))
        })
        .collect();
    Ok(convex_feasible(&balls, &halfspaces)?.witness.map(|w| w.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::super::tests::q3;
    use super::*;
    use crate::convex::classify_c0;
    use crate::geom::{vector, BallSystem};
    use approx::assert_abs_diff_eq;

    fn q4(c0: &[f64]) -> Instance {
        let sys = BallSystem::new(
            vec![
                vector(&[0.0, 0.0, 0.0]),
                vector(&[2.0, 0.0, 0.0]),
                vector(&[1.0, 3f64.sqrt(), 0.0]),
                vector(&[1.0, 1.0 / 3f64.sqrt(), 1.4]),
            ],
            1.2,
        )
        .unwrap();
        Instance::new(sys, vector(c0)).unwrap()
    }

    fn solved(inst: &Instance) -> SolveReport {
        solve_boundary(inst, classify_c0(inst).unwrap()).unwrap()
    }

    #[test]
    fn rbar_examples() {
        let inst = q3(&[1.0, 0.0]);
        let cls = classify_c0(&inst).unwrap();
        assert_abs_diff_eq!(rbar(&inst, &cls).unwrap(), 0.44f64.sqrt(), epsilon = 1e-12);

        let sys = BallSystem::new(vec![vector(&[-1.0, 0.0]), vector(&[1.0, 0.0]), vector(&[0.0, 1.0])], 1.0).unwrap();
        let inst = Instance::new(sys, vector(&[0.0, 0.0])).unwrap();
        let cls = classify_c0(&inst).unwrap();
        assert_abs_diff_eq!(rbar(&inst, &cls).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rbar_needs_boundary() {
        let inst = q3(&[1.0, 0.3]);
        let cls = classify_c0(&inst).unwrap();
        assert!(matches!(rbar(&inst, &cls), Err(Error::Precondition(_))));
    }

    #[test]
    fn axis_examples() {
        let inst = q3(&[1.0, 0.0]);
        let axis = facet_axis(&inst, &classify_c0(&inst).unwrap()).unwrap();
        assert_abs_diff_eq!(axis.base[0], 1.0, epsilon = 1e-12);
        assert_eq!(axis.directions.len(), 1);
        assert_abs_diff_eq!(axis.directions[0][1].abs(), 1.0, epsilon = 1e-12);

        let sys = BallSystem::new(vec![vector(&[0.0, 0.0]), vector(&[0.0, 2.0]), vector(&[-1.0, 1.0])], 1.5).unwrap();
        let inst = Instance::new(sys, vector(&[0.0, 1.0])).unwrap();
        let axis = facet_axis(&inst, &classify_c0(&inst).unwrap()).unwrap();
        assert_abs_diff_eq!(axis.base[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(axis.directions[0][0].abs(), 1.0, epsilon = 1e-12);

        let inst = q4(&[1.0, 0.0, 0.0]);
        let axis = facet_axis(&inst, &classify_c0(&inst).unwrap()).unwrap();
        assert_eq!(axis.directions.len(), 2);
        for d in &axis.directions {
            assert_abs_diff_eq!(d[0], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn q3_closed_form() {
        let report = solved(&q3(&[1.0, 0.0]));
        assert_eq!(report.case, SolveCase::BoundaryPEqN);
        assert_eq!(report.multiplicity, Multiplicity::One);
        assert_abs_diff_eq!(report.rstar, 0.44f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(report.maximizers[0][1], 0.44f64.sqrt(), epsilon = 1e-12);
        assert_eq!(report.certificates[0].active, vec![0, 1]);
        assert_eq!(report.rbar_attained, Some(true));
    }

    #[test]
    fn q4_edge_is_infinite() {
        let report = solved(&q4(&[1.0, 0.0, 0.0]));
        assert_eq!(report.case, SolveCase::BoundaryPLtN);
        assert_eq!(report.multiplicity, Multiplicity::Infinite);
        assert_abs_diff_eq!(report.rstar, 0.44f64.sqrt(), epsilon = 1e-9);
        let x = &report.maximizers[0];
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[1] * x[1] + x[2] * x[2], 0.44, epsilon = 1e-9);
    }

    #[test]
    fn unattained_level_falls_back() {
        let sys = BallSystem::new(vec![vector(&[0.0, 0.0]), vector(&[2.0, 0.0]), vector(&[-3.0, 0.5])], 5.0).unwrap();
        let inst = Instance::new(sys, vector(&[1.0, 0.0])).unwrap();
        let report = solved(&inst);
        assert_eq!(report.rbar_attained, Some(false));
        assert!(report.rstar < report.rbar.unwrap());
        assert!(inst.system.h_value(&report.maximizers[0]).unwrap() <= 1e-9);
    }
}
