use num_complex::Complex64 as C64;
use thiserror::Error;

/// Errors raised by the special-function layer, the model constructions and
/// the integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bad modulus tau = {0}: Im(tau) must be at least {min}", min = crate::elliptic::MIN_IM_TAU)]
    BadModulus(C64),

    #[error("theta series did not converge within {0} terms per side")]
    NonConvergent(usize),

    #[error("argument {what} = {z} lies within the pole tolerance of the lattice")]
    PoleProximity { what: &'static str, z: C64 },

    #[error("particles {i} and {j} collide (q_ij on the lattice)")]
    Collision { i: usize, j: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("non-finite value in state")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
