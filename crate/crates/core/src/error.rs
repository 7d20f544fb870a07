//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    #[error("state outside the validity neighborhood: |U - U*| = {distance:.3e} > {radius:.3e}")]
    OutOfNeighborhood { distance: f64, radius: f64 },

    #[error("evaluator returned a non-finite value at {context}")]
    NonFiniteEvaluation { context: String },

    #[error("eigenvalue solver failed: {0}")]
    EigenFailure(String),

    #[error("no skew compensator with positive dissipation found ({0})")]
    DissipativityFailure(String),

    #[error("Newton iteration failed to converge: {0}")]
    NewtonDivergence(String),

    #[error("shock triple violates the Lax conditions: {0}")]
    LaxViolation(String),

    #[error("degenerate shock: endstates coincide (strength {0:.3e})")]
    DegenerateShock(f64),

    #[error("profile solve failed: {0}")]
    ProfileFailure(String),

    #[error("algebraic reduction singular (noncharacteristic condition violated): {0}")]
    SingularReduction(String),

    #[error("scattering basis singular; triple is not a Lax p-shock ({0})")]
    SingularScatteringBasis(String),

    #[error("kernel evaluation error: {0}")]
    KernelFailure(String),

    #[error("simulation aborted: {0}")]
    SimulationFailure(String),

    #[error("solution blow-up detected at t = {t:.4}: |U|_inf = {norm:.3e} exceeds {bound:.3e}")]
    BlowUp { t: f64, norm: f64, bound: f64 },

    #[error("insufficient horizon: {0}")]
    InsufficientHorizon(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
