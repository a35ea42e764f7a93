use serde::Serialize;

use super::geometry::SspGeometry;
use crate::convex::{hull_gap, in_convex_hull};
use crate::error::{Error, Result};
use crate::geom::{orthogonal_complement, BallSystem, Instance, Vector};
use crate::levelset::LevelSetPolytope;

/// Trimming balls of one perturbed query point: one ball per facet of its
/// level-set polytope, placed so that the ball cuts the cube's circumsphere
/// exactly along the facet hyperplane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrimmingBlock {
    pub query: Vector,
    pub level: f64,
    /// Centers in the order of the original centers.
    pub centers: Vec<Vector>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrimmingSystem {
    pub blocks: Vec<TrimmingBlock>,
    pub radius: f64,
    /// Per original center: whether it stays out of the interior of the trimming centers' hull.
    pub outside_trimming_hull: Vec<bool>,
    /// Largest `| |w - center| - r |` over sampled points `w` where a facet
    /// hyperplane meets the circumsphere.
    pub cap_residual: f64,
}

impl TrimmingSystem {
    /// Whether no original center lies inside the trimming centers' hull.
    pub fn separation_holds(&self) -> bool {
        self.outside_trimming_hull.iter().all(|b| *b)
    }

    /// Every trimming center, with exact repeats dropped.
    pub fn centers(&self) -> Vec<Vector> {
        let mut out: Vec<Vector> = Vec::new();
        for c in self.blocks.iter().flat_map(|b| &b.centers) {
            if out.iter().all(|o| (o - c).amax() > 1e-12) {
                out.push(c.clone());
            }
        }
        out
    }

    pub fn ball_system(&self) -> Result<BallSystem> {
        BallSystem::new(self.centers(), self.radius)
    }

    pub fn contains(&self, x: &Vector) -> bool {
        let r2 = self.radius * self.radius;
        self.blocks.iter().flat_map(|b| &b.centers).all(|c| (x - c).norm_squared() <= r2 + 1e-9)
    }
}

/// Builds the trimming balls for the given perturbed query points and levels.
pub fn build_trimming(geom: &SspGeometry, queries: &[Vector], levels: &[f64]) -> Result<TrimmingSystem> {
    let n = geom.dim();
    if queries.len() != levels.len() || queries.is_empty() {
        return Err(Error::InvalidInput(format!(
            "need one level per query point ({} points, {} levels)",
            queries.len(),
            levels.len()
        )));
    }
    let original = geom.centers();
    let labels = geom.center_labels();
    for (p, q) in queries.iter().enumerate() {
        if q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.len() });
        }
        let (gap, _) = hull_gap(&original, q)?;
        if gap <= 1e-12 {
            return Err(Error::Precondition(format!("query point {} is not interior to the centers' hull", p + 1)));
        }
    }
    if !in_convex_hull(queries, &geom.c0)? {
        return Err(Error::Precondition("C0 is not in the hull of the query points".into()));
    }

    let sys = geom.ball_system()?;
    let r = geom.instance.r;
    let quarter_n = n as f64 / 4.0;
    let mut cap_residual: f64 = 0.0;
    let mut blocks = Vec::with_capacity(queries.len());
    for (p, (q, &level)) in queries.iter().zip(levels).enumerate() {
        let inst = Instance::new(sys.clone(), q.clone())?;
        let poly = LevelSetPolytope::build(&inst, level)?;
        let mut centers = Vec::with_capacity(original.len());
        for (h, label) in poly.halfspaces.iter().zip(&labels) {
            let a = &h.normal;
            let a_norm = a.norm();
            let foot = &geom.c - a * ((a.dot(&geom.c) - h.offset) / (a_norm * a_norm));
            let cp2 = (&geom.c - &foot).norm_squared();
            let d2 = r * r - quarter_n + cp2;
            if d2 < 0.0 {
                return Err(Error::SspGeometry(format!(
                    "facet {label} of query point {}: r^2 = {} below n/4 - |C - P|^2 = {}",
                    p + 1,
                    r * r,
                    quarter_n - cp2
                )));
            }
            let center = &foot - a * (d2.sqrt() / a_norm);
            cap_residual = cap_residual.max(cap_check(&geom.c, quarter_n, &foot, a, &center, r)?);
            centers.push(center);
        }
        blocks.push(TrimmingBlock { query: q.clone(), level, centers });
    }

    let all: Vec<Vector> = blocks.iter().flat_map(|b| b.centers.iter().cloned()).collect();
    let outside_trimming_hull =
        original.iter().map(|c| hull_gap(&all, c).map(|(gap, _)| gap <= 1e-12)).collect::<Result<Vec<_>>>()?;
    Ok(TrimmingSystem { blocks, radius: r, outside_trimming_hull, cap_residual })
}

/// Sphere residual of the new ball on points of `hyperplane ∩ circumsphere`.
fn cap_check(c: &Vector, quarter_n: f64, foot: &Vector, normal: &Vector, center: &Vector, r: f64) -> Result<f64> {
    let rim2 = quarter_n - (c - foot).norm_squared();
    if rim2 < 0.0 {
        return Ok(0.0);
    }
    let rim = rim2.sqrt();
    let basis = orthogonal_complement(c.len(), std::slice::from_ref(normal))?;
    let mut worst: f64 = 0.0;
    for (i, u) in basis.iter().enumerate() {
        for sign in [1.0, -1.0] {
            let mut dir = u * sign;
            if let Some(v) = basis.get(i + 1) {
                dir = (dir + v).normalize();
            }
            let w = foot + dir * rim;
            worst = worst.max(((&w - center).norm() - r).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssp::geometry::{build_geometry, corner, SspInstance};
    use approx::assert_abs_diff_eq;

    fn example() -> SspGeometry {
        build_geometry(&SspInstance::new(vec![1.0, 2.0], 2.0, 0.8, 1.5).unwrap()).unwrap()
    }

    #[test]
    fn unperturbed_slab_ball_is_reproduced() {
        let g = example();
        let sys = build_trimming(&g, &vec![g.c0.clone(); 3], &[g.r0; 3]).unwrap();
        let s_center = sys.blocks[0].centers.last().unwrap();
        assert_abs_diff_eq!(s_center[0], g.cs[0], epsilon = 1e-9);
        assert_abs_diff_eq!(s_center[1], g.cs[1], epsilon = 1e-9);
        assert!(sys.cap_residual <= 1e-8);
        assert_eq!(sys.centers().len(), 5);
    }

    #[test]
    fn solution_corner_sits_on_matching_trimming_spheres() {
        let g = example();
        let xstar = corner(&[0, 1]);
        let sys = build_trimming(&g, &vec![g.c0.clone(); 3], &[g.r0; 3]).unwrap();
        assert!(sys.contains(&xstar));
        let on_original: Vec<bool> = g.centers().iter().map(|c| ((&xstar - c).norm() - 1.5).abs() < 1e-9).collect();
        for (k, c) in sys.blocks[0].centers.iter().enumerate() {
            let on_trim = ((&xstar - c).norm() - 1.5).abs() < 1e-9;
            assert_eq!(on_trim, on_original[k], "center {k}");
        }
    }

    #[test]
    fn small_radius_names_the_facet() {
        let g = example();
        let mut bad = g.clone();
        bad.instance.r = 0.3;
        let err = build_trimming(&bad, &vec![g.c0.clone(); 3], &[g.r0; 3]).unwrap_err();
        assert!(matches!(err, Error::SspGeometry(ref m) if m.contains("facet 1+")), "{err}");
    }

    #[test]
    fn query_outside_hull_rejected() {
        let g = example();
        let far = Vector::from_vec(vec![5.0, 5.0]);
        assert!(matches!(build_trimming(&g, &[far], &[g.r0]), Err(Error::Precondition(_))));
    }
}
