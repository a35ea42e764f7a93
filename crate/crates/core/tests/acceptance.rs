//! Acceptance criteria, one test each. Every test prints a `PASS` or `FAIL`
//! line before asserting so the whole table shows up with `--nocapture`.

mod common;

use std::time::Instant;

use ballmax::convex::{classify_c0, minimize_h_minus_g, HullCase, LpStatus};
use ballmax::geom::{affine_gap_coeffs, vector, Instance, Vector, Verification};
use ballmax::oracle::{boundary_sample_max, doubling_test, exhaustive_corner_oracle};
use ballmax::solver::{solve, SolveCase};
use ballmax::ssp::{build_geometry, corner, recovery_experiment, uniform_rho_solve, SspGeometry, SspInstance};
use common::*;
use itertools::Itertools;
use rand::Rng;

fn verdict(id: &str, ok: bool, detail: &str) {
    println!("criterion {id}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_01_boundary_closed_form() {
    let start = Instant::now();
    let inst = q3(&[1.0, 0.0]);
    let report = solve(&inst).unwrap();
    // top of the lens cut by the first two circles: x = 1, y^2 = r^2 - 1
    let expected = (1.2f64 * 1.2 - 1.0).sqrt();
    let x = &report.maximizers[0];
    let oracle = boundary_sample_max(&inst, 100_000, 1).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = report.case == SolveCase::BoundaryPEqN
        && report.maximizers.len() == 1
        && (report.rstar - expected).abs() <= 1e-8
        && (x[0] - 1.0).abs() <= 1e-8
        && (x[1] - expected).abs() <= 1e-8
        && (oracle.best - report.rstar).abs() <= 1e-4
        && elapsed < 1.0;
    verdict(
        "1",
        ok,
        &format!("rstar {:.10}, expected {expected:.10}, oracle {:.10}, {elapsed:.3} s", report.rstar, oracle.best),
    );
}

#[derive(Clone, Copy, PartialEq)]
enum Placement {
    Outside,
    Interior,
    Facet,
}

/// Random instance with `C0` placed as requested relative to the centers' hull.
fn placed_instance(rng: &mut rand_chacha::ChaCha8Rng, placement: Placement) -> Instance {
    let n = rng.random_range(2..=3);
    let m = rng.random_range(n + 1..=8);
    let sys = random_system(rng, n, m);
    let pts = sys.centers().to_vec();
    let c0 = match placement {
        Placement::Interior => combine(&pts, &(0..m).collect_vec(), &weights(rng, m)),
        Placement::Facet => {
            let fs = facets(&pts);
            let f = &fs[rng.random_range(0..fs.len())];
            let pick = f.members.iter().copied().take(n).collect_vec();
            combine(&pts, &pick, &weights(rng, pick.len()))
        }
        Placement::Outside => {
            let centroid = pts.iter().fold(Vector::zeros(n), |a, c| a + c) / m as f64;
            let dir = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)).normalize();
            let reach = pts.iter().map(|c| (c - &centroid).norm()).fold(0.0, f64::max);
            centroid + dir * (reach + rng.random_range(0.1..1.0))
        }
    };
    Instance::new(sys, c0).unwrap()
}

#[test]
fn criterion_02a_unbounded_iff_outside() {
    let start = Instant::now();
    let mut rng = rng(2);
    let mut mismatches = Vec::new();
    let mut counts = [0usize; 3];
    for i in 0..200 {
        let placement = [Placement::Outside, Placement::Interior, Placement::Facet][i % 3];
        let inst = placed_instance(&mut rng, placement);
        ballmax::solver::require_nonempty(&inst).unwrap();
        let cls = classify_c0(&inst).unwrap();
        let hg = minimize_h_minus_g(&inst).unwrap();
        counts[match cls.case {
            HullCase::Outside => 0,
            HullCase::Interior => 1,
            HullCase::Boundary => 2,
        }] += 1;
        let outside_by_facets = hull_margin(inst.system.centers(), &inst.c0) > 1e-9;
        if (hg.status == LpStatus::Unbounded) != (cls.case == HullCase::Outside)
            || outside_by_facets != (cls.case == HullCase::Outside)
        {
            mismatches.push(i);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "2a",
        mismatches.is_empty() && elapsed < 60.0,
        &format!(
            "200 instances (outside {}, interior {}, boundary {}), mismatches {mismatches:?}, {elapsed:.2} s",
            counts[0], counts[1], counts[2]
        ),
    );
}

#[test]
fn criterion_02b_interior_minimizer_is_meb_center() {
    let mut rng = rng(22);
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    let mut lp_worse = 0;
    let mut total = 0;
    for _ in 0..200 {
        let inst = placed_instance(&mut rng, Placement::Interior);
        if classify_c0(&inst).unwrap().case != HullCase::Interior {
            continue;
        }
        total += 1;
        let hg = minimize_h_minus_g(&inst).unwrap();
        let point = hg.point.unwrap();
        let (center, _) = brute_meb(inst.system.centers());
        // h - g evaluated directly; the LP point must be at least as good as the MEB center
        let value = |x: &ballmax::geom::Vector| {
            let r = inst.system.radius();
            let h = inst.system.centers().iter().map(|c| (x - c).norm_squared() - r * r).fold(f64::MIN, f64::max);
            h - (x - &inst.c0).norm_squared()
        };
        if value(&point) > value(&center) + 1e-9 * (1.0 + value(&center).abs()) {
            lp_worse += 1;
        }
        let err = (point - center).norm();
        worst = worst.max(err);
        if err > 1e-6 {
            misses += 1;
        }
    }
    verdict(
        "2b",
        misses == 0,
        &format!(
            "{misses} of {total} interior minimizers farther than 1e-6 from the MEB center (worst {worst:.3e}); \
             LP value above the MEB-center value in {lp_worse}"
        ),
    );
}

#[test]
fn criterion_03_multiplicity_law() {
    let mut rng = rng(3);
    let mut full = [0usize; 3]; // one, two, other
    let mut partial = [0usize; 3]; // one, growing, other
    let mut bad = Vec::new();
    for i in 0..100 {
        let lower = i % 2 == 1;
        let n = if lower { 3 } else { rng.random_range(2..=3) };
        let m = rng.random_range(n + 1..=7);
        let sys = random_system(&mut rng, n, m);
        let pts = sys.centers().to_vec();
        let fs = facets(&pts);
        let f = &fs[rng.random_range(0..fs.len())];
        let p = if lower { 2 } else { n };
        let pick = f.members.iter().copied().take(p).collect_vec();
        let c0 = combine(&pts, &pick, &weights(&mut rng, p));
        let inst = Instance::new(sys, c0).unwrap();
        let test = doubling_test(&inst, 10_000, i as u64).unwrap();
        match (lower, test.stable_count()) {
            (false, Some(1)) => full[0] += 1,
            (false, Some(2)) => full[1] += 1,
            (false, _) => {
                full[2] += 1;
                bad.push((i, test.counts.clone()));
            }
            (true, Some(1)) => partial[0] += 1,
            (true, None) if test.growing() => partial[1] += 1,
            (true, _) => {
                partial[2] += 1;
                bad.push((i, test.counts.clone()));
            }
        }
    }
    verdict(
        "3",
        bad.is_empty(),
        &format!(
            "p = n: one {}, two {}, other {}; p < n: one {}, growing {}, other {}; offending {bad:?}",
            full[0], full[1], full[2], partial[0], partial[1], partial[2]
        ),
    );
}

#[test]
fn criterion_04_vertex_certificates() {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (name, inst) in regression_suite() {
        let report = solve(&inst).unwrap();
        let applies = report.case == SolveCase::Interior
            || (report.case == SolveCase::BoundaryPEqN && report.hull_inclusion == Verification::Verified);
        if !applies {
            continue;
        }
        for x in &report.maximizers {
            checked += 1;
            let on: usize =
                inst.system.centers().iter().filter(|c| ((x - *c).norm() - inst.system.radius()).abs() <= 1e-7).count();
            if on < inst.dim() {
                failures.push(format!("{name}: {on} spheres"));
            }
        }
    }
    verdict("4", failures.is_empty() && checked > 0, &format!("{checked} maximizers checked, failures {failures:?}"));
}

#[test]
fn criterion_05_distance_gap_is_affine() {
    let mut rng = rng(5);
    let mut worst_quad: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=6);
        let rand_vec = |rng: &mut rand_chacha::ChaCha8Rng| Vector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let y = rand_vec(&mut rng);
        let c1 = rand_vec(&mut rng);
        // reflect c1 through a random hyperplane containing y
        let u = rand_vec(&mut rng).normalize();
        let c2 = &c1 - &u * (2.0 * u.dot(&(&c1 - &y)));
        let z = rand_vec(&mut rng);
        let (c1, c2) = if (&z - &c1).norm() >= (&z - &c2).norm() { (c1, c2) } else { (c2, c1) };
        let h = |t: f64| {
            let p = &y + (&z - &y) * t;
            (&p - &c1).norm_squared() - (&p - &c2).norm_squared()
        };
        let ts: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let scale = ((&c1 - &c2).norm() * (&z - &y).norm()).max(1e-12);
        let quad = quadratic_fit(&ts, &ts.iter().map(|t| h(*t) / scale).collect_vec());
        worst_quad = worst_quad.max(quad.abs());
        let (a, b) = affine_gap_coeffs(&y, &z, &c1, &c2);
        let nonneg = ts.iter().all(|t| h(*t) / scale >= -1e-9);
        let matches = ts.iter().all(|t| (a * t + b - h(*t)).abs() <= 1e-9 * (1.0 + h(*t).abs()));
        if quad.abs() > 1e-10 || !nonneg || !matches || a < -1e-12 * scale {
            violations += 1;
        }
    }
    verdict(
        "5",
        violations == 0,
        &format!("1000 configurations, {violations} violations, worst quadratic {worst_quad:.2e}"),
    );
}

/// Leading coefficient of the least-squares quadratic through the samples.
fn quadratic_fit(ts: &[f64], hs: &[f64]) -> f64 {
    let a = nalgebra::DMatrix::from_fn(ts.len(), 3, |i, j| ts[i].powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(hs);
    let coef = a.svd(true, true).solve(&b, 1e-14).unwrap();
    coef[2]
}

/// `R0` recomputed from its definition.
fn r0_reference(s: &[f64], t: f64, beta: f64) -> f64 {
    let n = s.len();
    let sv = Vector::from_column_slice(s);
    let c = Vector::from_element(n, 0.5);
    let lambda = (t - sv.dot(&c)) / sv.norm_squared();
    let ps = &c + &sv * lambda;
    let c0 = &c - &sv * (beta / 2.0);
    ((&c0 - &ps).norm_squared() + n as f64 / 4.0 - (&c - &ps).norm_squared()).sqrt()
}

/// Smallest power of two radius admitted by the embedding.
fn embed(s: &[f64], t: f64, beta: f64) -> SspGeometry {
    (0..16)
        .map(|k| 2f64.powi(k))
        .find_map(|r| SspInstance::new(s.to_vec(), t, beta, r).and_then(|i| build_geometry(&i)).ok())
        .expect("some radius admits the embedding")
}

fn subset_sums(s: &[i64]) -> std::collections::HashSet<i64> {
    let mut sums = std::collections::HashSet::from([0i64]);
    for v in s {
        let next: Vec<i64> = sums.iter().map(|x| x + v).collect();
        sums.extend(next);
    }
    sums
}

#[test]
fn criterion_06_ssp_reduction_exact() {
    let start = Instant::now();
    let mut rng = rng(6);
    let mut solvable_failures = Vec::new();
    for i in 0..50 {
        let n = rng.random_range(2..=12);
        let s: Vec<i64> = (0..n).map(|_| rng.random_range(1..=50)).collect();
        let x: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
        let t: i64 = s.iter().zip(&x).map(|(v, b)| v * i64::from(*b)).sum();
        let sf: Vec<f64> = s.iter().map(|v| *v as f64).collect();
        let beta = 1.5 * (n as f64).sqrt() / Vector::from_column_slice(&sf).norm();
        let g = embed(&sf, t as f64, beta);
        let dec = g.decide_small().unwrap();
        let r0 = r0_reference(&sf, t as f64, beta);
        let sols = g.solutions().unwrap();
        let on_slab = sols.iter().all(|x| ((corner(x) - &g.cs).norm() - g.instance.r).abs() <= 1e-9);
        if (dec.max - r0).abs() > 1e-9 || !on_slab || sols.is_empty() {
            solvable_failures.push(i);
        }
    }
    let mut gaps = Vec::new();
    let mut non_gap = 0;
    let mut exceed = 0;
    let mut made = 0;
    while made < 50 {
        let n = rng.random_range(2..=12);
        let s: Vec<i64> = (0..n).map(|_| rng.random_range(1..=50)).collect();
        let total: i64 = s.iter().sum();
        let sums = subset_sums(&s);
        let Some(t) = (0..20).map(|_| rng.random_range(1..total)).find(|t| !sums.contains(t)) else { continue };
        made += 1;
        let sf: Vec<f64> = s.iter().map(|v| *v as f64).collect();
        let beta = 1.5 * (n as f64).sqrt() / Vector::from_column_slice(&sf).norm();
        let g = embed(&sf, t as f64, beta);
        let dec = g.decide_small().unwrap();
        let oracle = exhaustive_corner_oracle(&g).unwrap();
        let r0 = r0_reference(&sf, t as f64, beta);
        let gap = r0 - dec.max;
        if gap <= 1e-9 {
            non_gap += 1;
        }
        if dec.max > r0 + 1e-9 || (oracle.best - dec.max).abs() > 1e-12 {
            exceed += 1;
        }
        gaps.push(gap);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    println!("criterion 6 unsolvable gaps: min {min_gap:.3e}, instances without a gap {non_gap}");
    verdict(
        "6",
        solvable_failures.is_empty() && exceed == 0 && elapsed < 120.0,
        &format!(
            "solvable failures {solvable_failures:?}; unsolvable: {exceed} above R0 or off the corner oracle, \
             {non_gap} without a gap (logged, min gap {min_gap:.3e}); {elapsed:.2} s"
        ),
    );
}

#[test]
fn criterion_07_cap_identities() {
    let mut rng = rng(7);
    let mut worst: f64 = 0.0;
    let mut sign_flips = 0;
    for n in 2..=8 {
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(1..=50) as f64).collect();
        let t = (s.iter().sum::<f64>() / 2.0).round();
        let sv = Vector::from_column_slice(&s);
        let beta = 1.5 * (n as f64).sqrt() / sv.norm();
        let g = embed(&s, t, beta);
        let r2 = g.instance.r * g.instance.r;
        let c = Vector::from_element(n, 0.5);
        let lambda = (t - sv.dot(&c)) / sv.norm_squared();
        let slab_coef = 2.0 * (g.ds - lambda * sv.norm()) / sv.norm();
        let half = (n as f64).sqrt() / 2.0;
        for _ in 0..1000 {
            let dir = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal)).normalize();
            let w = &c + dir * half;
            for k in 0..n {
                let plus = (&w - &g.centers_plus[k]).norm_squared() - r2;
                let minus = (&w - &g.centers_minus[k]).norm_squared() - r2;
                worst = worst.max((plus + 2.0 * g.d * w[k]).abs()).max((minus - 2.0 * g.d * (w[k] - 1.0)).abs());
                if w[k].abs() > 1e-8 && (plus <= 0.0) != (w[k] >= 0.0) {
                    sign_flips += 1;
                }
                if (w[k] - 1.0).abs() > 1e-8 && (minus <= 0.0) != (w[k] <= 1.0) {
                    sign_flips += 1;
                }
            }
            let slab = (&w - &g.cs).norm_squared() - r2;
            let affine = sv.dot(&w) - t;
            worst = worst.max((slab - slab_coef * affine).abs());
            if affine.abs() > 1e-8 && (slab <= 0.0) != (affine <= 0.0) {
                sign_flips += 1;
            }
        }
    }
    verdict(
        "7",
        worst <= 1e-8 && sign_flips == 0,
        &format!(
            "n = 2..8, 1000 points each, worst identity residual {worst:.2e}, membership disagreements {sign_flips}"
        ),
    );
}

fn unique_example() -> SspGeometry {
    build_geometry(&SspInstance::new(vec![1.0, 2.0], 2.0, 0.8, 1.5).unwrap()).unwrap()
}

#[test]
fn criterion_08_desk_recovery() {
    let start = Instant::now();
    let g = unique_example();
    let mut recovered = 0;
    let mut failures = Vec::new();
    for seed in 1..=20u64 {
        match recovery_experiment(&g, &[0, 1], 1e-2, seed) {
            Ok(rep) if rep.recovered => recovered += 1,
            Ok(rep) => failures.push(format!("seed {seed}: {rep:?}")),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    for f in &failures {
        println!("criterion 8 failure: {f}\n  geometry: {g:?}");
    }
    verdict("8", recovered >= 19 && elapsed < 60.0, &format!("recovered {recovered}/20, {elapsed:.2} s"));
}

#[test]
fn criterion_09_level_perturbation() {
    let g = unique_example();
    let mut sweep = Vec::new();
    let mut finite = true;
    for eps in [1e-2, 1e-3, 1e-4] {
        let mut worst: f64 = 0.0;
        for rho in [g.r0 - eps, g.r0, g.r0 + eps] {
            match uniform_rho_solve(&g, &[0, 1], eps, rho, 7) {
                Ok(rep) => match rep.max_delta {
                    Some(d) if d.is_finite() => worst = worst.max(d),
                    _ => finite = false,
                },
                Err(e) => {
                    println!("criterion 9: eps {eps}, rho {rho}: {e}");
                    finite = false;
                }
            }
        }
        sweep.push(worst);
    }
    let decreasing = sweep.windows(2).all(|w| w[1] < w[0]);
    verdict(
        "9",
        finite && decreasing,
        &format!("max delta per eps 1e-2, 1e-3, 1e-4: {}", sweep.iter().map(|d| format!("{d:.3e}")).join(", ")),
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/instances");
    let q3 = format!("{dir}/q3.json");
    let q4 = format!("{dir}/q4.json");
    let commands: Vec<Vec<&str>> = vec![
        vec!["ballmax", "solve", "--no-timing", "--oracle", "--budget", "20000", "--seed", "11", &q3, &q4],
        vec![
            "ballmax",
            "ssp",
            "experiment",
            "--s",
            "1,2",
            "--t",
            "2",
            "--beta",
            "0.8",
            "--r",
            "1.5",
            "--eps",
            "0.01",
            "--seed",
            "7",
        ],
        vec!["ballmax", "ssp", "decide", "--s", "1,2", "--t", "2", "--beta", "0.8", "--r", "1.5"],
    ];
    let mut distinct = Vec::new();
    for cmd in &commands {
        let runs: Vec<String> = (0..10).map(|_| ballmax::cli::run(cmd.iter().copied()).stdout).collect();
        distinct.push(runs.iter().unique().count());
        assert!(!runs[0].is_empty());
    }
    let timed = ["ballmax", "solve", "--seed", "3", q3.as_str()];
    let strip = |s: String| {
        let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_s");
        v
    };
    let a = strip(ballmax::cli::run(timed).stdout);
    let b = strip(ballmax::cli::run(timed).stdout);
    verdict(
        "10",
        distinct.iter().all(|d| *d == 1) && a == b,
        &format!("distinct outputs per command over 10 runs: {distinct:?}"),
    );
}

#[test]
fn regression_values_match_closed_forms() {
    // lens top for the first two circles and the centroid distance to the lens corners
    let top = (1.2f64 * 1.2 - 1.0).sqrt();
    let report = solve(&q3(&[1.0, -1.0])).unwrap();
    assert!((report.rstar - (1.0 + top)).abs() <= 1e-9);
    let centroid = vector(&[1.0, SQRT3 / 3.0]);
    let report = solve(&q3(&[1.0, SQRT3 / 3.0])).unwrap();
    assert!((report.rstar - (top - centroid[1]).abs()).abs() <= 1e-9);
}
