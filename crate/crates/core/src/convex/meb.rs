//! Minimum enclosing ball by Welzl's recursion.

use itertools::Itertools;

use crate::geom::{circumcenter, Vector};

/// Smallest ball containing every point: `(center, radius)`.
///
/// # Panics
///
/// Panics on an empty point list.
pub fn meb(points: &[Vector]) -> (Vector, f64) {
    assert!(!points.is_empty(), "minimum enclosing ball of an empty set");
    let dim = points[0].len();
    let mut support = Vec::with_capacity(dim + 1);
    let (center, r2) = welzl(points, points.len(), &mut support, dim).expect("nonempty input yields a ball");
    (center, r2.max(0.0).sqrt())
}

fn encloses(ball: &Option<(Vector, f64)>, p: &Vector) -> bool {
    match ball {
        None => false,
        Some((c, r2)) => (p - c).norm_squared() <= r2 * (1.0 + 1e-12) + 1e-15,
    }
}

fn welzl(points: &[Vector], len: usize, support: &mut Vec<Vector>, dim: usize) -> Option<(Vector, f64)> {
    if len == 0 || support.len() == dim + 1 {
        return ball_from_support(support);
    }
    let p = &points[len - 1];
    let ball = welzl(points, len - 1, support, dim);
    if encloses(&ball, p) {
        return ball;
    }
    support.push(p.clone());
    let ball = welzl(points, len - 1, support, dim);
    support.pop();
    ball
}

/// Smallest ball with every support point on its boundary; degenerate
/// supports fall back to the smallest ball over their subsets that still
/// encloses all of them.
fn ball_from_support(support: &[Vector]) -> Option<(Vector, f64)> {
    if support.is_empty() {
        return None;
    }
    if let Ok(ball) = circumcenter(support) {
        return Some(ball);
    }
    (1..support.len())
        .rev()
        .flat_map(|k| support.iter().cloned().combinations(k))
        .filter_map(|sub| circumcenter(&sub).ok())
        .filter(|b| support.iter().all(|p| encloses(&Some(b.clone()), p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::vector;
    use approx::assert_abs_diff_eq;

    #[test]
    fn equilateral() {
        let (c, r) = meb(&[vector(&[0.0, 0.0]), vector(&[2.0, 0.0]), vector(&[1.0, 3f64.sqrt()])]);
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(r, 2.0 / 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn two_points_and_one_point() {
        let (c, r) = meb(&[vector(&[0.0, 0.0]), vector(&[2.0, 0.0])]);
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-15);
        let (c, r) = meb(&[vector(&[5.0, 5.0])]);
        assert_eq!(c, vector(&[5.0, 5.0]));
        assert_eq!(r, 0.0);
    }

    #[test]
    fn obtuse_triangle_uses_longest_edge() {
        let (c, r) = meb(&[vector(&[0.0, 0.0]), vector(&[4.0, 0.0]), vector(&[2.0, 0.5])]);
        assert_abs_diff_eq!(c[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn collinear_points() {
        let pts: Vec<Vector> = (0..5).map(|i| vector(&[i as f64, 2.0 * i as f64])).collect();
        let (c, r) = meb(&pts);
        assert_abs_diff_eq!(c[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 20f64.sqrt(), epsilon = 1e-12);
    }
}
