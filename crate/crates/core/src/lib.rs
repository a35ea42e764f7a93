//! Farthest-point search over intersections of equal-radius balls.
//!
//! Given centers `C_1..C_m`, a common radius `r` and a query point `C_0`, the
//! library computes `max ||x - C_0||` over `Q = ∩ B(C_k, r)`. The position of
//! `C_0` relative to the convex hull of the centers selects the method:
//! outside points reduce to a sequence of convex feasibility problems, points
//! on a hull facet have a closed form, and interior points fall back to
//! vertex enumeration at small scale.
//!
//! The [`ssp`] module embeds subset-sum instances into such ball systems and
//! [`oracle`] provides brute-force ground truth for testing.

pub mod cli;
pub mod convex;
pub mod error;
pub mod geom;
pub mod levelset;
pub mod oracle;
pub mod solver;
pub mod ssp;

pub use error::{Error, Result};
