//! Numerical laboratory for viscous shock waves of one-dimensional
//! hyperbolic-parabolic systems of conservation laws,
//!
//! ```text
//!     G(U)_t + F(U)_x = (B(U) U_x)_x,
//! ```
//!
//! with symmetric (or symmetrizable) Jacobians, degenerate block viscosity
//! `B = [[0,0],[0,b]]`, and genuinely coupled dissipation. The crate covers
//! the full desk-scale pipeline:
//!
//! * [`model`] — system definitions and the builtin test systems;
//! * [`structure`] — verification of the structural hypotheses
//!   (symmetry, block structure, dissipativity, genuine nonlinearity)
//!   and Kawashima compensator construction;
//! * [`profile`] — Rankine-Hugoniot solves, Lax admissibility, and the
//!   traveling-wave profile boundary value problem;
//! * [`kernel`] — endpoint wave families, diffusion and dissipation rates,
//!   scattering coefficients, and evaluators for the hyperbolic / excited /
//!   scattering pieces of the linearized Green's function;
//! * [`simulator`] — conservative nonlinear and linearized time integration,
//!   shock-location extraction, energy monitors, and decay-rate fits;
//! * [`verify`] — the acceptance suite run by the CLI and the integration
//!   tests.

pub mod error;
pub mod fit;
pub mod grid;

pub mod linalg;
pub mod model;
pub mod ode;
pub mod profile;



pub mod structure;


pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
