use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{BallSystem, Vector, Verification};
use crate::solver::hull_inclusion;

/// Subset-sum data `(S, T)` with the embedding parameters `beta` and `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SspInstance {
    pub s: Vec<f64>,
    pub t: f64,
    pub beta: f64,
    pub r: f64,
}

impl SspInstance {
    pub fn new(s: Vec<f64>, t: f64, beta: f64, r: f64) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidInput("S must have at least one entry".into()));
        }
        if s.iter().chain([&t, &beta, &r]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("S, T, beta and r must be finite".into()));
        }
        if s.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidInput("S must be nonzero".into()));
        }
        if beta <= 0.0 || r <= 0.0 {
            return Err(Error::InvalidInput(format!("beta and r must be positive (beta = {beta}, r = {r})")));
        }
        let lo: f64 = s.iter().map(|v| v.min(0.0)).sum();
        let hi: f64 = s.iter().map(|v| v.max(0.0)).sum();
        if t < lo || t > hi {
            return Err(Error::InvalidInput(format!(
                "hyperplane S.x = {t} misses the unit cube (S.x ranges over [{lo}, {hi}])"
            )));
        }
        Ok(Self { s, t, beta, r })
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    /// `(S, T)` as integers when every entry is integral and small enough for exact sums.
    pub fn integral(&self) -> Option<(Vec<i128>, i128)> {
        let exact = |v: f64| (v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i128);
        let s = self.s.iter().map(|v| exact(*v)).collect::<Option<Vec<_>>>()?;
        Some((s, exact(self.t)?))
    }

    /// Whether the binary vector `x` solves `S.x = T`; exact for integral data.
    pub fn solves(&self, x: &[u8]) -> bool {
        match self.integral() {
            Some((s, t)) => s.iter().zip(x).filter(|(_, b)| **b == 1).map(|(v, _)| *v).sum::<i128>() == t,
            None => {
                let sum: f64 = self.s.iter().zip(x).filter(|(_, b)| **b == 1).map(|(v, _)| *v).sum();
                let scale = self.s.iter().fold(self.t.abs(), |m, v| m + v.abs()).max(1.0);
                (sum - self.t).abs() <= 1e-12 * scale
            }
        }
    }

    /// Whether `S.x <= T` for the binary vector `x`.
    pub fn admits(&self, x: &[u8]) -> bool {
        match self.integral() {
            Some((s, t)) => s.iter().zip(x).filter(|(_, b)| **b == 1).map(|(v, _)| *v).sum::<i128>() <= t,
            None => {
                let sum: f64 = self.s.iter().zip(x).filter(|(_, b)| **b == 1).map(|(v, _)| *v).sum();
                let scale = self.s.iter().fold(self.t.abs(), |m, v| m + v.abs()).max(1.0);
                sum <= self.t + 1e-12 * scale
            }
        }
    }
}

/// Ball-polytope embedding of a subset-sum instance.
///
/// The `2n` facet balls `B(C ± d e_k, r)` cut the cube's circumsphere exactly
/// along the cube facets, and `B(C_s, r)` cuts it along `S.x = T`. The query
/// point `C0 = C - (beta/2) S` turns the quadratic subset-sum objective into
/// a distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SspGeometry {
    pub instance: SspInstance,
    /// Cube center `(1/2, .., 1/2)`.
    pub c: Vector,
    pub d: f64,
    /// Lower bound `sqrt(n)/2` on `d` and on `|C0 - C|`.
    pub d_min: f64,
    pub centers_plus: Vec<Vector>,
    pub centers_minus: Vec<Vector>,
    /// Projection of `C` onto `S.x = T`.
    pub ps: Vector,
    pub ds: f64,
    pub cs: Vector,
    pub c0: Vector,
    pub r0: f64,
    /// Whether `Q_r` lies in the interior of the centers' hull.
    pub inclusion: Verification,
}

/// Builds the embedding and checks every inequality it relies on.
pub fn build_geometry(inst: &SspInstance) -> Result<SspGeometry> {
    let n = inst.dim();
    let nf = n as f64;
    let r = inst.r;
    let s = Vector::from_column_slice(&inst.s);
    let s_norm2 = s.norm_squared();
    let c = Vector::from_element(n, 0.5);
    let d_min = nf.sqrt() / 2.0;
    let slack = 1e-12 * (1.0 + r);

    let radicand = r * r - (nf - 1.0) / 4.0;
    if radicand <= 0.0 {
        return Err(Error::SspGeometry(format!("r^2 = {} must exceed (n - 1)/4 = {}", r * r, (nf - 1.0) / 4.0)));
    }
    let d = radicand.sqrt() - 0.5;
    if d < d_min - slack {
        return Err(Error::SspGeometry(format!("d = {d} < sqrt(n)/2 = {d_min}: r is too small")));
    }

    let lambda = (inst.t - s.dot(&c)) / s_norm2;
    let ps = &c + &s * lambda;
    let cp2 = (&c - &ps).norm_squared();
    let ds2 = r * r - nf / 4.0 + cp2;
    if ds2 < 0.0 {
        return Err(Error::SspGeometry(format!("slab offset radicand {ds2} is negative")));
    }
    let ds = ds2.sqrt();
    let cs = &ps - &s * (ds / s_norm2.sqrt());
    let c0 = &c - &s * (inst.beta / 2.0);

    let c0_dist = (&c0 - &c).norm();
    if c0_dist < d_min - slack {
        return Err(Error::SspGeometry(format!("|C0 - C| = {c0_dist:.7} < sqrt(n)/2 = {d_min:.7}: beta is too small")));
    }
    // C0 = C - (beta/2) S and C_s = C - (d_s/|S| - lambda) S share the line C + t S
    let cs_param = ds / s_norm2.sqrt() - lambda;
    if cs_param.is_nan() || inst.beta / 2.0 >= cs_param {
        return Err(Error::SspGeometry(format!(
            "C0 is not strictly between C and C_s (beta/2 = {} >= {cs_param}): r is too small for this beta",
            inst.beta / 2.0
        )));
    }

    let r0 = ((&c0 - &ps).norm_squared() + nf / 4.0 - cp2).sqrt();
    let unit = |k: usize| Vector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 });
    let centers_plus: Vec<Vector> = (0..n).map(|k| &c + unit(k) * d).collect();
    let centers_minus: Vec<Vector> = (0..n).map(|k| &c - unit(k) * d).collect();

    let mut geom = SspGeometry {
        instance: inst.clone(),
        c,
        d,
        d_min,
        centers_plus,
        centers_minus,
        ps,
        ds,
        cs,
        c0,
        r0,
        inclusion: Verification::Unverified,
    };
    geom.inclusion = hull_inclusion(&geom.ball_system()?)?;
    Ok(geom)
}

/// Result of checking one cube corner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerCheck {
    pub is_solution: bool,
    pub distance: f64,
}

/// Exhaustive maximum of `|x - C0|` over the corners with `S.x <= T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub max: f64,
    pub corners: Vec<Vec<u8>>,
    pub solvable: bool,
    pub equals_r0: bool,
    /// `R0 - max`.
    pub gap: f64,
}

pub const DECIDE_MAX_DIM: usize = 20;

impl SspGeometry {
    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Centers in the order `1+, 1-, .., n+, n-, s`.
    pub fn centers(&self) -> Vec<Vector> {
        let mut out: Vec<Vector> =
            self.centers_plus.iter().zip(&self.centers_minus).flat_map(|(p, m)| [p.clone(), m.clone()]).collect();
        out.push(self.cs.clone());
        out
    }

    /// Labels matching [`SspGeometry::centers`].
    pub fn center_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = (1..=self.dim()).flat_map(|k| [format!("{k}+"), format!("{k}-")]).collect();
        out.push("s".into());
        out
    }

    pub fn ball_system(&self) -> Result<BallSystem> {
        BallSystem::new(self.centers(), self.instance.r)
    }

    /// Whether `x` lies in every one of the `2n + 1` balls.
    pub fn contains(&self, x: &Vector) -> bool {
        let r2 = self.instance.r * self.instance.r;
        x.len() == self.dim() && self.centers().iter().all(|c| (x - c).norm_squared() <= r2 + 1e-9)
    }

    pub fn corner_check(&self, x: &[u8]) -> Result<CornerCheck> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if x.iter().any(|b| *b > 1) {
            return Err(Error::InvalidInput("corner entries must be 0 or 1".into()));
        }
        let is_solution = self.instance.solves(x);
        let distance = (corner(x) - &self.c0).norm();
        if is_solution && (distance - self.r0).abs() > 1e-9 {
            return Err(Error::SspGeometry(format!(
                "solution corner at distance {distance} instead of R0 = {}",
                self.r0
            )));
        }
        Ok(CornerCheck { is_solution, distance })
    }

    /// Decides the instance by enumerating all `2^n` corners (`n <= 20`).
    pub fn decide_small(&self) -> Result<Decision> {
        let n = self.dim();
        if n > DECIDE_MAX_DIM {
            return Err(Error::ScaleGuard(format!("exhaustive decision limited to n <= {DECIDE_MAX_DIM}, got {n}")));
        }
        let mut best = f64::NEG_INFINITY;
        let mut corners: Vec<Vec<u8>> = vec![];
        let mut solvable = false;
        let mut x = vec![0u8; n];
        for mask in 0u32..(1u32 << n) {
            for (i, b) in x.iter_mut().enumerate() {
                *b = ((mask >> i) & 1) as u8;
            }
            if !self.instance.admits(&x) {
                continue;
            }
            solvable |= self.instance.solves(&x);
            let dist = (corner(&x) - &self.c0).norm();
            if dist > best + 1e-12 {
                best = dist;
                corners.clear();
                corners.push(x.clone());
            } else if dist >= best - 1e-12 {
                corners.push(x.clone());
            }
        }
        Ok(Decision { max: best, corners, solvable, equals_r0: (best - self.r0).abs() <= 1e-9, gap: self.r0 - best })
    }

    /// Every solution corner (`n <= 20`).
    pub fn solutions(&self) -> Result<Vec<Vec<u8>>> {
        let n = self.dim();
        if n > DECIDE_MAX_DIM {
            return Err(Error::ScaleGuard(format!("solution enumeration limited to n <= {DECIDE_MAX_DIM}, got {n}")));
        }
        Ok((0u32..(1u32 << n))
            .map(|mask| (0..n).map(|i| ((mask >> i) & 1) as u8).collect::<Vec<u8>>())
            .filter(|x| self.instance.solves(x))
            .collect())
    }
}

/// Binary vector as a point.
pub fn corner(x: &[u8]) -> Vector {
    Vector::from_iterator(x.len(), x.iter().map(|b| f64::from(*b)))
}
