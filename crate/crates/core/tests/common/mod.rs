//! Shared fixtures: regression instances, seeded random generators and
//! brute-force reference computations written independently of the library.

#![allow(dead_code)]

use ballmax::geom::{vector, BallSystem, Instance, Vector};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SQRT3: f64 = 1.7320508075688772;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q3_system() -> BallSystem {
    BallSystem::new(vec![vector(&[0.0, 0.0]), vector(&[2.0, 0.0]), vector(&[1.0, SQRT3])], 1.2).unwrap()
}

pub fn q3(c0: &[f64]) -> Instance {
    Instance::new(q3_system(), vector(c0)).unwrap()
}

pub fn q4() -> Instance {
    let sys = BallSystem::new(
        vec![
            vector(&[0.0, 0.0, 0.0]),
            vector(&[2.0, 0.0, 0.0]),
            vector(&[1.0, 1.7320508, 0.0]),
            vector(&[1.0, 0.5773503, 1.4]),
        ],
        1.2,
    )
    .unwrap();
    Instance::new(sys, vector(&[1.0, 0.0, 0.0])).unwrap()
}

/// Regular tetrahedron of edge 2 with the query point on the bottom face.
pub fn tetra(c0: &[f64]) -> Instance {
    let sys = BallSystem::new(
        vec![
            vector(&[0.0, 0.0, 0.0]),
            vector(&[2.0, 0.0, 0.0]),
            vector(&[1.0, SQRT3, 0.0]),
            vector(&[1.0, SQRT3 / 3.0, (8.0f64 / 3.0).sqrt()]),
        ],
        1.4,
    )
    .unwrap();
    Instance::new(sys, vector(c0)).unwrap()
}

/// Desk-scale instances covering every regime, labelled for messages.
pub fn regression_suite() -> Vec<(&'static str, Instance)> {
    let wide = BallSystem::new(vec![vector(&[0.0, 0.0]), vector(&[2.0, 0.0]), vector(&[-3.0, 0.5])], 5.0).unwrap();
    let square =
        BallSystem::new(vec![vector(&[0.0, 0.0]), vector(&[2.0, 0.0]), vector(&[2.0, 2.0]), vector(&[0.0, 2.0])], 1.6)
            .unwrap();
    vec![
        ("q3 facet midpoint", q3(&[1.0, 0.0])),
        ("q3 facet off-center", q3(&[0.7, 0.0])),
        ("q3 below", q3(&[1.0, -1.0])),
        ("q3 far below", q3(&[1.0, -5.0])),
        ("q3 beside", q3(&[-1.0, 0.4])),
        ("q3 centroid", q3(&[1.0, SQRT3 / 3.0])),
        ("q3 off-center interior", q3(&[1.0, 0.3])),
        ("q3 near vertex", q3(&[0.2, 0.1])),
        ("q4 edge", q4()),
        ("tetra face", tetra(&[1.0, 0.5, 0.0])),
        ("tetra interior", tetra(&[1.0, 0.6, 0.4])),
        ("tetra outside", tetra(&[1.0, 0.6, -0.8])),
        ("wide facet", Instance::new(wide, vector(&[1.0, 0.0])).unwrap()),
        ("square facet", Instance::new(square.clone(), vector(&[1.0, 0.0])).unwrap()),
        ("square interior", Instance::new(square, vector(&[0.9, 1.2])).unwrap()),
    ]
}

/// Centers uniform in `[-1, 1]^n` and a radius leaving a ball of radius at
/// least `0.05` around the centroid inside Q.
pub fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> BallSystem {
    let centers: Vec<Vector> = (0..m).map(|_| Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))).collect();
    let centroid = centers.iter().fold(Vector::zeros(n), |acc, c| acc + c) / m as f64;
    let reach = centers.iter().map(|c| (c - &centroid).norm()).fold(0.0, f64::max);
    let margin = rng.random_range(0.05..0.6);
    BallSystem::new(centers, reach + margin).unwrap()
}

/// Facet of the hull of `points` (n in {2, 3}): outward unit normal, offset
/// and member indices. Brute force over all n-subsets.
pub struct Facet {
    pub normal: Vector,
    pub offset: f64,
    pub members: Vec<usize>,
}

pub fn facets(points: &[Vector]) -> Vec<Facet> {
    let n = points[0].len();
    let mut out = Vec::new();
    for subset in (0..points.len()).combinations(n) {
        let normal = match n {
            2 => {
                let d = &points[subset[1]] - &points[subset[0]];
                vector(&[d[1], -d[0]])
            }
            3 => (&points[subset[1]] - &points[subset[0]]).cross(&(&points[subset[2]] - &points[subset[0]])),
            _ => panic!("facets only for n in {{2, 3}}"),
        };
        let norm = normal.norm();
        if norm < 1e-9 {
            continue;
        }
        let mut normal = normal / norm;
        let mut offset = normal.dot(&points[subset[0]]);
        let sides: Vec<f64> = points.iter().map(|p| normal.dot(p) - offset).collect();
        let above = sides.iter().any(|s| *s > 1e-9);
        let below = sides.iter().any(|s| *s < -1e-9);
        if above && below {
            continue;
        }
        if above {
            normal = -normal;
            offset = -offset;
        }
        let members: Vec<usize> =
            (0..points.len()).filter(|&k| (normal.dot(&points[k]) - offset).abs() <= 1e-9).collect();
        if out.iter().any(|f: &Facet| f.members == members) {
            continue;
        }
        out.push(Facet { normal, offset, members });
    }
    out
}

/// Largest facet margin `normal . x - offset`; negative strictly inside.
pub fn hull_margin(points: &[Vector], x: &Vector) -> f64 {
    facets(points).iter().map(|f| f.normal.dot(x) - f.offset).fold(f64::NEG_INFINITY, f64::max)
}

/// Positive weights summing to one.
pub fn weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

pub fn combine(points: &[Vector], ix: &[usize], w: &[f64]) -> Vector {
    ix.iter().zip(w).fold(Vector::zeros(points[0].len()), |acc, (&k, a)| acc + &points[k] * *a)
}

/// Smallest enclosing ball by trying every circumball of at most `n + 1`
/// points and keeping the smallest one that covers everything.
pub fn brute_meb(points: &[Vector]) -> (Vector, f64) {
    let n = points[0].len();
    let mut best: Option<(Vector, f64)> = None;
    for size in 1..=(n + 1).min(points.len()) {
        for subset in (0..points.len()).combinations(size) {
            let Some((center, radius)) = circumball(&subset.iter().map(|&k| points[k].clone()).collect::<Vec<_>>())
            else {
                continue;
            };
            if points.iter().all(|p| (p - &center).norm() <= radius + 1e-9)
                && best.as_ref().is_none_or(|(_, r)| radius < *r)
            {
                best = Some((center, radius));
            }
        }
    }
    best.unwrap()
}

/// Center of the smallest ball through the points, found in their affine hull.
fn circumball(points: &[Vector]) -> Option<(Vector, f64)> {
    let k = points.len() - 1;
    if k == 0 {
        return Some((points[0].clone(), 0.0));
    }
    let diffs: Vec<Vector> = points[1..].iter().map(|p| p - &points[0]).collect();
    let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| 2.0 * diffs[i].dot(&diffs[j]));
    let rhs = nalgebra::DVector::from_fn(k, |i, _| diffs[i].norm_squared());
    let lambda = gram.lu().solve(&rhs)?;
    let center = diffs.iter().zip(lambda.iter()).fold(points[0].clone(), |acc, (d, l)| acc + d * *l);
    let radius = (&center - &points[0]).norm();
    Some((center, radius))
}

/// Distance to the nearest of a set of points.
pub fn nearest(points: &[Vector], x: &Vector) -> f64 {
    points.iter().map(|p| (p - x).norm()).fold(f64::INFINITY, f64::min)
}
