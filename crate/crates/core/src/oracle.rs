//! Brute-force ground truth built only from the geometric primitives.
//!
//! Nothing here calls the LP, feasibility, level-set or solver code: the
//! boundary oracle samples every sphere, keeps the points of Q and polishes
//! the best ones onto nearby sphere intersections; the corner oracle walks
//! all binary vectors with integer arithmetic.

use std::f64::consts::PI;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{sphere_vertex_candidates, Instance, SphereIntersection, Vector};
use crate::ssp::SspGeometry;

/// Smallest accepted sample budget.
pub const MIN_BUDGET: usize = 10_000;
/// Maximizers closer than this belong to one cluster.
pub const CLUSTER_RADIUS: f64 = 1e-4;
/// Samples are kept when `h(x)` is at most this.
pub const SAMPLE_RESIDUAL: f64 = 1e-6;
/// Distances within this band count as ties.
pub const TIE: f64 = 1e-7;
/// Largest dimension the corner oracle enumerates.
pub const CORNER_MAX_DIM: usize = 20;

const POLISH_LIMIT: usize = 4000;
const POLISH_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub best: f64,
    /// One representative per cluster of maximizers.
    pub argmax: Vec<Vector>,
    pub clusters: usize,
    /// Samples drawn (boundary oracle) or corners visited (corner oracle).
    pub budget: usize,
    pub cluster_radius: f64,
}

/// Cluster counts of the boundary oracle under increasing budgets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingTest {
    pub budgets: Vec<usize>,
    pub counts: Vec<usize>,
    pub best: f64,
}

impl DoublingTest {
    /// The common count when every budget saw the same number of clusters.
    pub fn stable_count(&self) -> Option<usize> {
        self.counts.iter().all_equal_value().ok().copied()
    }

    /// Whether the count grew with the budget, the signature of a continuum.
    pub fn growing(&self) -> bool {
        self.counts.last() > self.counts.first()
    }
}

/// Farthest sampled point of Q from `C0`, for `n` in `{2, 3}`.
pub fn boundary_sample_max(inst: &Instance, budget: usize, seed: u64) -> Result<OracleResult> {
    let n = inst.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidInput(format!("boundary sampling needs n in {{2, 3}}, got {n}")));
    }
    if budget < MIN_BUDGET {
        return Err(Error::InvalidInput(format!("sample budget {budget} below {MIN_BUDGET}")));
    }
    let sys = &inst.system;
    let r = sys.radius();
    let per_sphere = (budget / sys.len()).max(1);
    let spacing = match n {
        2 => 2.0 * PI * r / per_sphere as f64,
        _ => r * (4.0 * PI / per_sphere as f64).sqrt(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut kept: Vec<(f64, Vector)> = Vec::new();
    for c in sys.centers() {
        for u in sphere_grid(n, per_sphere, &mut rng) {
            let x = c + u * r;
            if sys.h_unchecked(&x) <= SAMPLE_RESIDUAL {
                kept.push(((&x - &inst.c0).norm(), x));
            }
        }
    }
    if kept.is_empty() {
        return Ok(OracleResult {
            best: f64::NEG_INFINITY,
            argmax: vec![],
            clusters: 0,
            budget: per_sphere * sys.len(),
            cluster_radius: CLUSTER_RADIUS,
        });
    }
    kept.sort_by(|a, b| b.0.total_cmp(&a.0));
    let window = 2.0 * spacing;
    let top = kept[0].0;
    let polished: Vec<Polished> = kept
        .iter()
        .take_while(|(d, _)| *d >= top - window)
        .take(POLISH_LIMIT)
        .map(|(d, x)| polish(inst, x, *d, spacing))
        .collect();
    let best = polished.iter().map(|p| p.dist).fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<&Polished> = polished.iter().filter(|p| p.dist >= best - TIE).collect();
    // an equidistant sphere intersection through a maximizer holds a continuum
    // of maximizers; sample it at the same density as the spheres
    let mut flats: Vec<&Vec<usize>> = winners.iter().flat_map(|p| &p.flats).collect();
    flats.sort();
    flats.dedup();
    let mut extra = Vec::new();
    for subset in flats {
        let centers: Vec<Vector> = subset.iter().map(|&k| sys.center(k).clone()).collect();
        if let Ok(Some(s)) = SphereIntersection::of(&centers, r) {
            for _ in 0..per_sphere {
                let y = on_intersection(&s, &mut rng);
                if sys.h_unchecked(&y) <= POLISH_RESIDUAL && (&y - &inst.c0).norm() >= best - TIE {
                    extra.push(y);
                }
            }
        }
    }
    let argmax = cluster(winners.into_iter().map(|p| p.point.clone()).chain(extra));
    Ok(OracleResult {
        best,
        clusters: argmax.len(),
        argmax,
        budget: per_sphere * sys.len(),
        cluster_radius: CLUSTER_RADIUS,
    })
}

/// Runs [`boundary_sample_max`] at `budget`, `2 budget` and `4 budget`.
pub fn doubling_test(inst: &Instance, budget: usize, seed: u64) -> Result<DoublingTest> {
    let budgets = vec![budget, 2 * budget, 4 * budget];
    let mut counts = Vec::with_capacity(3);
    let mut best = f64::NEG_INFINITY;
    for b in &budgets {
        let out = boundary_sample_max(inst, *b, seed)?;
        counts.push(out.clusters);
        best = best.max(out.best);
    }
    Ok(DoublingTest { budgets, counts, best })
}

/// Unit vectors on a jittered grid: equal angles on the circle, a Fibonacci
/// lattice on the 2-sphere.
fn sphere_grid(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    let step = 1.0 / count as f64;
    if n == 2 {
        return (0..count)
            .map(|j| {
                let theta = 2.0 * PI * (j as f64 + rng.random::<f64>()) * step;
                Vector::from_vec(vec![theta.cos(), theta.sin()])
            })
            .collect();
    }
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let offset: f64 = rng.random();
    (0..count)
        .map(|j| {
            let z = 1.0 - 2.0 * (j as f64 + rng.random::<f64>()) * step;
            let phi = 2.0 * PI * (j as f64 * golden + offset).fract();
            let rho = (1.0 - z * z).max(0.0).sqrt();
            Vector::from_vec(vec![rho * phi.cos(), rho * phi.sin(), z])
        })
        .collect()
}

fn on_intersection(s: &SphereIntersection, rng: &mut ChaCha8Rng) -> Vector {
    let mut dir = Vector::zeros(s.center.len());
    for d in &s.directions {
        dir.axpy(rng.sample::<f64, _>(StandardNormal), d, 1.0);
    }
    let norm = dir.norm();
    if norm == 0.0 {
        return s.center.clone();
    }
    &s.center + dir * (s.radius / norm)
}

struct Polished {
    dist: f64,
    point: Vector,
    /// Sphere subsets whose whole intersection is equidistant from `C0` and
    /// passes through a point of Q tied with `point`.
    flats: Vec<Vec<usize>>,
}

/// Moves a sample onto the best nearby point of the intersections of its
/// nearly active spheres, keeping it when nothing better lies within reach.
fn polish(inst: &Instance, x: &Vector, dist: f64, spacing: f64) -> Polished {
    let sys = &inst.system;
    let n = inst.dim();
    let r = sys.radius();
    let band = 3.0 * spacing;
    let reach = 3.0 * band;
    let near: Vec<usize> = (0..sys.len())
        .map(|k| (k, ((x - sys.center(k)).norm() - r).abs()))
        .filter(|(_, gap)| *gap <= band)
        .sorted_by(|a, b| a.1.total_cmp(&b.1))
        .take(6)
        .map(|(k, _)| k)
        .collect();
    let mut best = Polished { dist, point: x.clone(), flats: vec![] };
    let mut flats: Vec<(f64, Vec<usize>)> = Vec::new();
    for size in 1..=n.min(near.len()) {
        for subset in near.iter().combinations(size) {
            let centers: Vec<Vector> = subset.iter().map(|&&k| sys.center(k).clone()).collect();
            let (candidates, equidistant) = if size == n {
                (sphere_vertex_candidates(&centers, r).unwrap_or_default(), false)
            } else {
                match SphereIntersection::of(&centers, r) {
                    Ok(Some(s)) => (
                        vec![s.farthest_from(&inst.c0, &(x - &s.center)), s.nearest_to(x)],
                        s.radius > 0.0 && s.is_equidistant_from(&inst.c0),
                    ),
                    _ => (vec![], false),
                }
            };
            for y in candidates {
                if (&y - x).norm() > reach || sys.h_unchecked(&y) > POLISH_RESIDUAL {
                    continue;
                }
                let d = (&y - &inst.c0).norm();
                if equidistant {
                    flats.push((d, subset.iter().map(|&&k| k).sorted().collect()));
                }
                if d > best.dist {
                    best.dist = d;
                    best.point = y;
                }
            }
        }
    }
    best.flats = flats.into_iter().filter(|(d, _)| *d >= best.dist - TIE).map(|(_, f)| f).collect();
    best
}

fn cluster(points: impl Iterator<Item = Vector>) -> Vec<Vector> {
    let mut reps: Vec<Vector> = Vec::new();
    for p in points {
        if reps.iter().all(|q| (q - &p).norm() > CLUSTER_RADIUS) {
            reps.push(p);
        }
    }
    reps
}

/// Farthest corner from `C0` among the binary `x` with `S.x <= T`, by
/// depth-first enumeration (`n <= 20`).
///
/// Integral data are summed exactly; other data use floating sums with a
/// relative slack of `1e-12`. No admissible corner gives `best = -inf`.
pub fn exhaustive_corner_oracle(geom: &SspGeometry) -> Result<OracleResult> {
    let n = geom.dim();
    if n > CORNER_MAX_DIM {
        return Err(Error::ScaleGuard(format!("corner enumeration limited to n <= {CORNER_MAX_DIM}, got {n}")));
    }
    let inst = &geom.instance;
    let weights: Weights = match inst.integral() {
        Some((s, t)) => Weights::Exact { s, t },
        None => {
            let slack = 1e-12 * inst.s.iter().fold(inst.t.abs(), |m, v| m + v.abs()).max(1.0);
            Weights::Float { s: inst.s.clone(), t: inst.t + slack }
        }
    };
    let c0: Vec<f64> = geom.c0.iter().copied().collect();
    let mut search = CornerSearch { weights, c0, best: f64::NEG_INFINITY, argmax: vec![], visited: 0 };
    let mut x = vec![0u8; n];
    search.descend(&mut x, 0, 0, 0.0);
    let argmax: Vec<Vector> =
        search.argmax.iter().map(|x| Vector::from_iterator(n, x.iter().map(|b| f64::from(*b)))).collect();
    Ok(OracleResult {
        best: if search.best.is_finite() { search.best.sqrt() } else { f64::NEG_INFINITY },
        clusters: argmax.len(),
        argmax,
        budget: search.visited,
        cluster_radius: 0.0,
    })
}

enum Weights {
    Exact { s: Vec<i128>, t: i128 },
    Float { s: Vec<f64>, t: f64 },
}

struct CornerSearch {
    weights: Weights,
    c0: Vec<f64>,
    /// Best squared distance.
    best: f64,
    argmax: Vec<Vec<u8>>,
    visited: usize,
}

impl CornerSearch {
    fn descend(&mut self, x: &mut Vec<u8>, depth: usize, exact: i128, float: f64) {
        if depth == x.len() {
            self.visited += 1;
            let admissible = match &self.weights {
                Weights::Exact { t, .. } => exact <= *t,
                Weights::Float { t, .. } => float <= *t,
            };
            if !admissible {
                return;
            }
            let d2: f64 = x.iter().zip(&self.c0).map(|(b, c)| (f64::from(*b) - c).powi(2)).sum();
            let scale = 1e-12 * d2.max(1.0);
            if d2 > self.best + scale {
                self.best = d2;
                self.argmax = vec![x.clone()];
            } else if d2 >= self.best - scale {
                self.argmax.push(x.clone());
            }
            return;
        }
        for bit in [0u8, 1] {
            x[depth] = bit;
            let (e, f) = match (&self.weights, bit) {
                (_, 0) => (exact, float),
                (Weights::Exact { s, .. }, _) => (exact + s[depth], float),
                (Weights::Float { s, .. }, _) => (exact, float + s[depth]),
            };
            self.descend(x, depth + 1, e, f);
        }
        x[depth] = 0;
    }
}
