//! Radial solvers for the singular p-Laplacian Dirichlet problem
//!
//! ```text
//!   -Δp u = λ |u|^{p-2} u - γ u^{-α}   in B_R ⊂ ℝ^N,   u = 0 on ∂B_R
//! ```
//!
//! * [`grid`], [`energy`]: radial mesh, quadrature, the discrete energy and
//!   its exact gradient.
//! * [`nehari`]: fibering maps and the projection onto the Nehari set.
//! * [`eigen`]: the first eigenvalue `λ₁` of `-Δp` on the same mesh.
//! * [`solver`]: positive solutions by projected descent on the Nehari set.
//! * [`analysis`]: the existence window in `λ`, Pohozaev residuals and the
//!   β-interval nonexistence certificate.
//! * [`shooting`]: an independent initial-value/shooting oracle.

pub mod analysis;
pub mod eigen;
pub mod energy;
pub mod error;
pub mod exec;
pub mod grid;
mod linalg;
pub mod nehari;
pub mod params;
pub mod shooting;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{build_grid, RadialFn, RadialGrid};
pub use params::{ProblemParams, SingularTerm};

/// Version string embedded in emitted results.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
