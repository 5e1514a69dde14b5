//! Convex polyhedral Cauchy surfaces in anti-de Sitter and Minkowski
//! (2+1)-spacetimes, their intrinsic cone-metrics, and the inverse problem.

pub mod cone_metric;
pub mod error;
pub mod fixtures;
pub mod fuchsian;
pub mod hull;
pub mod projective;
pub mod solver;
pub mod surfaces;

pub use error::{Error, Result};
