//! Complete minimal surfaces of finite total curvature in ℝ⁴: Gauss maps,
//! curvature integrals, the link at infinity and embeddedness obstructions.

pub mod complex_fn;
pub mod curvature;
pub mod document;
pub mod double_points;
pub mod error;
pub mod gallery;
pub mod grassmann;
pub mod knots;
pub mod link;
pub mod poly;
pub mod report;
pub mod surface;

pub use error::{Error, Result};
