//! Elliptic special functions, the sine-algebra basis of `gl(N)` and Lax
//! pairs for the relativistic interacting elliptic tops hierarchy: spin
//! Ruijsenaars-Schneider particles, the relativistic elliptic top, the
//! `GL(NM)` interacting tops and their rank-one reduction, together with
//! their non-relativistic limits.

pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod models;
pub mod sine_algebra;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<C64>;
