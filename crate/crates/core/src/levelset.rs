//! Level-set polytopes `P_{R^2} = {x : h(x) - g(x) <= -R^2}`.
//!
//! Expanding the squares turns every piece of `h - g` into an affine
//! function, so the level set is the polyhedron
//! `2(C0 - C_k).x <= |C0|^2 - |C_k|^2 + r^2 - R^2`, one row per center.

use crate::convex::{convex_feasible, Ball, Constraint};
use crate::error::{Error, Result};
use crate::geom::{Instance, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetPolytope {
    pub level: f64,
    /// One halfspace per center, in center order.
    pub halfspaces: Vec<Constraint>,
}

impl LevelSetPolytope {
    /// Builds `P_{R^2}`; rejects a query point sitting on a center.
    pub fn build(inst: &Instance, level: f64) -> Result<Self> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::InvalidInput(format!("level must be finite and nonnegative, got {level}")));
        }
        let r2 = inst.system.radius().powi(2);
        let c0n = inst.c0.norm_squared();
        let halfspaces = inst
            .system
            .centers()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let normal = (&inst.c0 - c) * 2.0;
                if normal.amax() <= 1e-12 {
                    return Err(Error::CenterCoincidesWithQuery { index: k + 1 });
                }
                Ok(Constraint::new(normal, c0n - c.norm_squared() + r2 - level * level))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { level, halfspaces })
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.residual(x) <= tol)
    }

    /// Partitions the halfspaces into those of `support` and the rest.
    pub fn split(&self, support: &[usize]) -> Result<LevelSetSplit> {
        let m = self.halfspaces.len();
        let mut in_support = vec![false; m];
        for &k in support {
            if k >= m {
                return Err(Error::InvalidInput(format!("support index {} out of range 1..={m}", k + 1)));
            }
            if in_support[k] {
                return Err(Error::InvalidInput(format!("support index {} repeated", k + 1)));
            }
            in_support[k] = true;
        }
        let rest: Vec<usize> = (0..m).filter(|k| !in_support[*k]).collect();
        Ok(LevelSetSplit {
            level: self.level,
            support: support.to_vec(),
            p0: support.iter().map(|&k| self.halfspaces[k].clone()).collect(),
            rest: rest.clone(),
            pminus: rest.iter().map(|&k| self.halfspaces[k].clone()).collect(),
        })
    }
}

/// `P_{R^2}` split into the rows of a support set (`p0`) and the rest (`pminus`).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetSplit {
    pub level: f64,
    pub support: Vec<usize>,
    pub p0: Vec<Constraint>,
    pub rest: Vec<usize>,
    pub pminus: Vec<Constraint>,
}

impl LevelSetSplit {
    fn all_halfspaces(&self) -> Vec<Constraint> {
        self.p0.iter().chain(&self.pminus).cloned().collect()
    }

    /// Whether the split polytope meets the interior of Q, using balls shrunk
    /// by the instance's interior band as a proxy for `int(Q)`.
    pub fn meets_interior(&self, inst: &Instance) -> Result<bool> {
        Ok(self.interior_witness(inst)?.is_some())
    }

    /// A point of `P ∩ int(Q)` (shrunk balls), if any.
    pub fn interior_witness(&self, inst: &Instance) -> Result<Option<Vector>> {
        let shrunk = inst.system.radius() - inst.tol.interior_shrink;
        if shrunk <= 0.0 {
            return Ok(None);
        }
        self.witness_with_radius(inst, shrunk)
    }

    /// A point of `P ∩ Q`, if any.
    pub fn witness(&self, inst: &Instance) -> Result<Option<Vector>> {
        self.witness_with_radius(inst, inst.system.radius())
    }

    fn witness_with_radius(&self, inst: &Instance, radius: f64) -> Result<Option<Vector>> {
        let balls: Vec<Ball> = inst.system.centers().iter().map(|c| Ball::new(c.clone(), radius)).collect();
        Ok(convex_feasible(&balls, &self.all_halfspaces())?.witness)
    }
}
