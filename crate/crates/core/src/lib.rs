//! Pseudospectral solver and verification suite for the Calabi-Yau equation
//! on the Kodaira-Thurston manifold with fiber-invariant data.
//!
//! For a fiber-invariant datum `F` the equation `(Ω + dα)² = e^F Ω²` reduces,
//! via `α = d^c u − u e¹`, to the fully nonlinear elliptic equation
//!
//! ```text
//! (u_xx + 1)(u_yy + u_tt + u_t + 1) − u_xy² − u_xt² = e^F
//! ```
//!
//! on the 3-torus. The crate is organized as
//!
//! - [`field`]: periodic grids, spectral derivatives, quadrature and norms;
//! - [`geometry`]: invariant forms on the coframe, `dα`, wedge products, `J`,
//!   and the metric of `Ω + dα`;
//! - [`pde`]: the reduced operator, the continuity path, the linearization and
//!   ellipticity diagnostics;
//! - [`solver`]: continuity method with Newton-Krylov inner iterations;
//! - [`estimates`]: a-priori estimates as runtime checks, and a uniqueness probe;
//! - [`rotation`]: rotated symplectic forms with rational slope;
//! - [`cli`]: datum sources, manufactured solutions, reports and exports.

pub mod cli;
pub mod error;
pub mod estimates;
pub mod field;
pub mod geometry;
pub mod krylov;
pub mod pde;
pub mod rotation;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use estimates::{verify, EstimateReport};
pub use field::{Axis, GridSpec, ScalarField};
pub use rotation::{solve_rotated, RationalAngle};
pub use solver::{solve, SolveReport, SolverConfig};
