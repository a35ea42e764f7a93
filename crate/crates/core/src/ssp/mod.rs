//! Subset-sum instances embedded as ball systems.
//!
//! A binary vector `x` with `S.x = T` maximizes `|x - C0|` over the cube cut
//! by `S.x <= T`; replacing the cube facets and the slab by equal-radius
//! balls keeps every cube corner and yields a ball system whose farthest
//! point from `C0` reaches `R0` exactly when the instance is solvable.

mod experiment;
mod geometry;
mod trimming;

pub use experiment::{
    recovery_experiment, sample_queries, uniform_rho_solve, CenterOutcome, RecoveryReport, UniformLevelReport,
    RECOVERY_TOL, REJECTION_CAP,
};
pub use geometry::{build_geometry, corner, CornerCheck, Decision, SspGeometry, SspInstance, DECIDE_MAX_DIM};
pub use trimming::{build_trimming, TrimmingBlock, TrimmingSystem};
