//! Randomized recovery of a unique subset-sum solution from perturbed query
//! points and trimming balls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::geometry::{corner, SspGeometry};
use super::trimming::{build_trimming, TrimmingSystem};
use crate::convex::hull_gap;
use crate::error::{Error, Result};
use crate::geom::{Instance, Vector};
use crate::solver::solve_unguarded;

/// Attempts allowed when drawing query points around `C0`.
pub const REJECTION_CAP: usize = 10_000;
/// Distance under which a computed maximizer counts as the solution corner.
pub const RECOVERY_TOL: f64 = 1e-6;

/// Farthest point of the trimming system from one original center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterOutcome {
    pub label: String,
    pub maximizer: Option<Vector>,
    pub distance: Option<f64>,
    pub recovered: bool,
    /// Whether the solution corner lies on this center's sphere.
    pub xstar_on_sphere: bool,
    /// Largest `| |x* - C_{k,p}| - r |` over the matching trimming centers.
    pub xstar_trim_residual: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub epsilon: f64,
    pub seed: u64,
    pub attempts: usize,
    pub queries: Vec<Vector>,
    pub levels: Vec<f64>,
    /// Whether no original center lies inside the trimming centers' hull.
    pub separation_holds: bool,
    pub cap_residual: f64,
    pub outcomes: Vec<CenterOutcome>,
    pub recovered: bool,
    pub recovered_by: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformLevelReport {
    pub epsilon: f64,
    pub rho: f64,
    pub seed: u64,
    pub labels: Vec<String>,
    /// `| |C_i - x_i(rho)| - |C_i - x_i(R_{0,1..n+1})| |` per center; `None` when a solve failed.
    pub deltas: Vec<Option<f64>>,
    pub max_delta: Option<f64>,
    pub errors: Vec<Option<String>>,
}

/// Draws `n + 1` points uniformly in `B(C0, eps)` until `C0` is strictly
/// inside their hull and each point is strictly inside the centers' hull.
pub fn sample_queries(geom: &SspGeometry, epsilon: f64, rng: &mut ChaCha8Rng) -> Result<(Vec<Vector>, usize)> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be finite and nonnegative, got {epsilon}")));
    }
    let n = geom.dim();
    let centers = geom.centers();
    let threshold = 1e-9 * epsilon.max(f64::MIN_POSITIVE);
    for attempt in 1..=REJECTION_CAP {
        let points: Vec<Vector> = (0..=n).map(|_| uniform_in_ball(&geom.c0, epsilon, rng)).collect();
        if epsilon == 0.0 {
            continue;
        }
        let (gap, _) = hull_gap(&points, &geom.c0)?;
        if gap <= threshold {
            continue;
        }
        let mut interior = true;
        for p in &points {
            if hull_gap(&centers, p)?.0 <= 1e-12 {
                interior = false;
                break;
            }
        }
        if interior {
            return Ok((points, attempt));
        }
    }
    Err(Error::RejectionCap(REJECTION_CAP))
}

fn uniform_in_ball(center: &Vector, radius: f64, rng: &mut ChaCha8Rng) -> Vector {
    let n = center.len();
    let dir = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = dir.norm();
    let scale = radius * rng.random::<f64>().powf(1.0 / n as f64);
    if norm == 0.0 {
        return center.clone();
    }
    center + dir * (scale / norm)
}

/// Checks that `xstar` is the unique solution corner.
fn validate_solution(geom: &SspGeometry, xstar: &[u8]) -> Result<Vector> {
    if !geom.corner_check(xstar)?.is_solution {
        return Err(Error::Precondition(format!("{xstar:?} does not solve the subset-sum instance")));
    }
    if let Ok(all) = geom.solutions() {
        if all.len() != 1 {
            return Err(Error::Precondition(format!("the instance has {} solutions, not one", all.len())));
        }
    }
    Ok(corner(xstar))
}

/// Farthest point of the trimming system from every original center.
fn farthest_from_centers(geom: &SspGeometry, trim: &TrimmingSystem, xstar: &Vector) -> Result<Vec<CenterOutcome>> {
    let sys = trim.ball_system()?;
    let r = geom.instance.r;
    let labels = geom.center_labels();
    Ok(geom
        .centers()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let xstar_on_sphere = ((xstar - c).norm() - r).abs() <= 1e-9;
            let xstar_trim_residual =
                trim.blocks.iter().map(|b| ((xstar - &b.centers[k]).norm() - r).abs()).fold(0.0, f64::max);
            let solved = Instance::new(sys.clone(), c.clone()).and_then(|inst| solve_unguarded(&inst));
            match solved {
                Ok(report) => {
                    let x = report.maximizers[0].clone();
                    CenterOutcome {
                        label: labels[k].clone(),
                        recovered: report.maximizers.iter().any(|m| (m - xstar).norm() <= RECOVERY_TOL),
                        distance: Some(report.rstar),
                        maximizer: Some(x),
                        xstar_on_sphere,
                        xstar_trim_residual,
                        error: None,
                    }
                }
                Err(e) => CenterOutcome {
                    label: labels[k].clone(),
                    maximizer: None,
                    distance: None,
                    recovered: false,
                    xstar_on_sphere,
                    xstar_trim_residual,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Perturbed query points and their exact levels `R_{0,p} = |x* - C_{0,p}|`.
fn perturbed_levels(
    geom: &SspGeometry,
    xstar: &Vector,
    epsilon: f64,
    seed: u64,
) -> Result<(Vec<Vector>, Vec<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (queries, attempts) = sample_queries(geom, epsilon, &mut rng)?;
    let levels: Vec<f64> = queries.iter().map(|q| (xstar - q).norm()).collect();
    for (p, l) in levels.iter().enumerate() {
        if (l - geom.r0).abs() > epsilon * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::SspGeometry(format!(
                "level {l} of query point {} is outside [R0 - eps, R0 + eps]",
                p + 1
            )));
        }
    }
    Ok((queries, levels, attempts))
}

/// Builds the trimming system at the exact levels and tries to recover `xstar`
/// as the farthest point from one of the original centers.
pub fn recovery_experiment(geom: &SspGeometry, xstar: &[u8], epsilon: f64, seed: u64) -> Result<RecoveryReport> {
    let x = validate_solution(geom, xstar)?;
    let (queries, levels, attempts) = perturbed_levels(geom, &x, epsilon, seed)?;
    let trim = build_trimming(geom, &queries, &levels)?;
    let outcomes = farthest_from_centers(geom, &trim, &x)?;
    let recovered_by: Vec<String> = outcomes.iter().filter(|o| o.recovered).map(|o| o.label.clone()).collect();
    Ok(RecoveryReport {
        epsilon,
        seed,
        attempts,
        queries,
        levels,
        separation_holds: trim.separation_holds(),
        cap_residual: trim.cap_residual,
        recovered: !recovered_by.is_empty(),
        recovered_by,
        outcomes,
    })
}

/// Compares farthest points under a common level `rho` with those under the
/// exact per-point levels.
pub fn uniform_rho_solve(
    geom: &SspGeometry,
    xstar: &[u8],
    epsilon: f64,
    rho: f64,
    seed: u64,
) -> Result<UniformLevelReport> {
    let slack = 1e-12 * (1.0 + geom.r0);
    if !(rho >= geom.r0 - epsilon - slack && rho <= geom.r0 + epsilon + slack) {
        return Err(Error::InvalidInput(format!(
            "rho = {rho} outside [R0 - eps, R0 + eps] = [{}, {}]",
            geom.r0 - epsilon,
            geom.r0 + epsilon
        )));
    }
    let x = validate_solution(geom, xstar)?;
    let (queries, levels, _) = perturbed_levels(geom, &x, epsilon, seed)?;
    let exact = farthest_from_centers(geom, &build_trimming(geom, &queries, &levels)?, &x)?;
    let uniform = farthest_from_centers(geom, &build_trimming(geom, &queries, &vec![rho; queries.len()])?, &x)?;
    let mut deltas = Vec::with_capacity(exact.len());
    let mut errors = Vec::with_capacity(exact.len());
    for (e, u) in exact.iter().zip(&uniform) {
        match (e.distance, u.distance) {
            (Some(a), Some(b)) => {
                deltas.push(Some((a - b).abs()));
                errors.push(None);
            }
            _ => {
                deltas.push(None);
                errors.push(e.error.clone().or_else(|| u.error.clone()));
            }
        }
    }
    let max_delta = deltas.iter().copied().collect::<Option<Vec<f64>>>().map(|d| d.into_iter().fold(0.0, f64::max));
    Ok(UniformLevelReport { epsilon, rho, seed, labels: geom.center_labels(), deltas, max_delta, errors })
}
