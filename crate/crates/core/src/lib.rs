//! Nonnegative tensor completion by blended conditional gradients.
//!
//! The estimate is a convex combination of binary rank-one tensors scaled by
//! `lambda`, fitted to observed entries by least squares. See [`solver::solve`].

pub mod error;
pub mod instance;
pub mod objective;
pub mod oracle;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use instance::Instance;
pub use objective::{exact_line_search, gradient, loss, nmse, LossContext};
pub use solver::{
    make_variant, solve, solve_with, SolveOptions, SolveResult, Termination, VariantConfig,
};
pub use tensor::{ActiveSet, ObservedData, Sample, Shape, Storage, Vertex};
