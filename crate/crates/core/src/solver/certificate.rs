use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::interior::enumerate_vertices_unguarded;
use crate::convex::in_convex_hull;
use crate::error::{Error, Result};
use crate::geom::{hull_facets, BallSystem, Vector, Verification};

/// Required inside margin of every tested point against every hull facet.
const HULL_MARGIN: f64 = 1e-6;
const SAMPLES_2D: usize = 720;
const SAMPLES_3D: usize = 2000;

/// Whether Q lies in the interior of `conv(C_1..C_m)`.
///
/// Sufficient check at small scale (`n <= 3`, `m <= 12`): every vertex of Q
/// and a dense lattice of boundary points must sit strictly inside every
/// hull facet. Larger systems are reported unverified.
pub fn hull_inclusion(sys: &BallSystem) -> Result<Verification> {
    let n = sys.dim();
    if !(2..=3).contains(&n) || sys.len() > 12 {
        return Ok(Verification::Unverified);
    }
    let Some(facets) = hull_facets(sys.centers()) else {
        return Ok(Verification::Violated);
    };
    let mut points = enumerate_vertices_unguarded(sys);
    for c in sys.centers() {
        points.extend(sphere_lattice(c, sys.radius()).into_iter().filter(|p| sys.h_unchecked(p) <= 1e-9));
    }
    let inside = points.iter().all(|p| facets.iter().all(|f| f.margin(p) > HULL_MARGIN));
    Ok(if inside { Verification::Verified } else { Verification::Violated })
}

/// Evenly spread points on a circle (`n = 2`) or a Fibonacci sphere (`n = 3`).
fn sphere_lattice(center: &Vector, r: f64) -> Vec<Vector> {
    match center.len() {
        2 => (0..SAMPLES_2D)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / SAMPLES_2D as f64;
                center + Vector::from_vec(vec![r * a.cos(), r * a.sin()])
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..SAMPLES_3D)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / SAMPLES_3D as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    center + Vector::from_vec(vec![r * rho * a.cos(), r * rho * a.sin(), r * z])
                })
                .collect()
        }
        _ => vec![],
    }
}

/// Checks the cone condition certifying `xstar` as the unique farthest point
/// of `∩_{k<=n} B(C_k, r)` from `C_{n+1}`.
///
/// `centers` holds `C_1..C_{n+1}`, all at distance `r` from `xstar`. The
/// certificate holds when `xstar` is outside their hull and
/// `C_{n+1} - xstar = sum alpha_k (C_k - xstar)` with every `alpha_k > 0`.
pub fn cone_certificate(xstar: &Vector, centers: &[Vector], r: f64) -> Result<bool> {
    let n = xstar.len();
    if centers.len() != n + 1 {
        return Err(Error::InvalidInput(format!("expected {} centers, got {}", n + 1, centers.len())));
    }
    for (k, c) in centers.iter().enumerate() {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        let residual = ((c - xstar).norm() - r).abs();
        if residual > 1e-8 {
            return Err(Error::Precondition(format!("center {} is {residual:.3e} off the sphere around xstar", k + 1)));
        }
    }
    if in_convex_hull(centers, xstar)? {
        return Ok(false);
    }
    let basis = DMatrix::from_fn(n, n, |i, j| centers[j][i] - xstar[i]);
    let target = &centers[n] - xstar;
    let Some(alpha) = basis.lu().solve(&target) else {
        return Ok(false);
    };
    Ok(alpha.iter().all(|a| *a > 0.0))
}
