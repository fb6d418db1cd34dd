//! Lax pairs, linear operators and equations of motion for the model
//! families: spin Ruijsenaars-Schneider, the relativistic elliptic top, the
//! `GL(NM)` interacting tops, their rank-one reduction and the
//! non-relativistic limits of all four.
//!
//! States hold positions and spin variables only; velocities of the
//! relativistic families are derived from the constraints
//! `qdot_i = tr(S^ii) / N`.

pub mod multitop;
pub mod nonrel;
pub mod rank1;
pub mod sample;
pub mod spin_rs;
pub mod top;

pub use multitop::MultiTopState;
pub use nonrel::{NonrelMultiTopState, NonrelRank1State, SpinCmState};
pub use rank1::Rank1State;
pub use spin_rs::SpinRsState;
pub use top::TopState;

use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::sine_algebra::{compose, decompose, ComponentMap, ModeIndex};
use crate::{CMatrix, C64};

/// Tolerance on `tr S^ii` for the Calogero-Moser type families.
pub const TRACE_FREE_TOL: f64 = 1e-10;

pub(crate) fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub(crate) fn ensure_n(params: &EllipticParams, n: usize) -> Result<()> {
    if params.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "state has block size {n} but params carry N = {}",
            params.n()
        )));
    }
    Ok(())
}

pub(crate) fn ensure_square(s: &CMatrix, size: usize, what: &str) -> Result<()> {
    if s.nrows() != size || s.ncols() != size {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {size}x{size}, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    Ok(())
}

/// Fails with `Collision(i, j)` when some `q_i - q_j` sits on the lattice.
pub fn check_collisions(params: &EllipticParams, q: &[C64]) -> Result<()> {
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            if params.lattice_distance(q[i] - q[j]) < params.eps_pole() {
                return Err(Error::Collision { i, j });
            }
        }
    }
    Ok(())
}

/// `A(S) = sum_alpha T_alpha S_alpha A_alpha` for a diagonal operator with
/// coefficient table `coeffs`.
pub fn apply_op(s: &CMatrix, coeffs: &ComponentMap) -> Result<CMatrix> {
    Ok(compose(&decompose(s)?.hadamard(coeffs)))
}

/// Coefficients of `J^eta` (`E1(omega_a + eta) - E1(omega_a)`) or of the
/// non-relativistic `J` (`-E2(omega_a)`); the scalar mode is excluded.
pub fn top_j_coeffs(params: &EllipticParams, relativistic: bool) -> Result<ComponentMap> {
    let n = params.n();
    let mut out = ComponentMap::zeros(n);
    for alpha in ModeIndex::nonzero(n) {
        let w = params.omega(alpha);
        let c = if relativistic {
            params.e1(w + params.eta())? - params.e1(w)?
        } else {
            -params.e2(w)?
        };
        out.set(alpha, c);
    }
    Ok(out)
}

/// `J^eta` (or `J`) applied to a component table.
pub fn top_j(
    s: &ComponentMap,
    params: &EllipticParams,
    relativistic: bool,
) -> Result<ComponentMap> {
    if s.n() != params.n() {
        return Err(Error::DimensionMismatch(format!(
            "component table has N = {} but params carry N = {}",
            s.n(),
            params.n()
        )));
    }
    Ok(s.hadamard(&top_j_coeffs(params, relativistic)?))
}

/// Coefficients of `J^{eta,q}`: `E1(omega_a + q + eta) - E1(omega_a + q)`
/// for every mode, or `-E2(omega_a + q)` in the non-relativistic case.
pub fn j_eta_q_coeffs(params: &EllipticParams, q: C64, relativistic: bool) -> Result<ComponentMap> {
    let n = params.n();
    let mut out = ComponentMap::zeros(n);
    for alpha in ModeIndex::all(n) {
        let w = params.omega(alpha) + q;
        let c = if relativistic {
            params.e1(w + params.eta())? - params.e1(w)?
        } else {
            -params.e2(w)?
        };
        out.set(alpha, c);
    }
    Ok(out)
}

/// `d/dq` of the non-relativistic `J^q` coefficients: `-E2'(omega_a + q)`.
pub fn j_q_prime_coeffs(params: &EllipticParams, q: C64) -> Result<ComponentMap> {
    let n = params.n();
    let mut out = ComponentMap::zeros(n);
    for alpha in ModeIndex::all(n) {
        out.set(alpha, -params.e2_prime(params.omega(alpha) + q)?);
    }
    Ok(out)
}

/// `J^{eta,q}` (or `J^q`) applied to a component table.
pub fn j_eta_q(
    block: &ComponentMap,
    q: C64,
    params: &EllipticParams,
    relativistic: bool,
) -> Result<ComponentMap> {
    Ok(block.hadamard(&j_eta_q_coeffs(params, q, relativistic)?))
}

/// Fourier-transformed kernel of `J^{eta,q}` used by the rank-one operators.
///
/// Relativistic: `I_0 = E1(Nq + N eta) - E1(Nq)` and
/// `I_a = phi_a(Nq + N eta, omega_a) - phi_a(Nq, omega_a)`.
/// Non-relativistic: `F_0 = E1(Nq)` and `F_a = phi_a(Nq, omega_a)`.
pub fn i_coeffs(q: C64, params: &EllipticParams, relativistic: bool) -> Result<ComponentMap> {
    if relativistic {
        i_coeffs_at(params, q, params.eta())
    } else {
        f_coeffs_jet(params, q).map(|[f, _, _]| f)
    }
}

pub(crate) fn i_coeffs_at(params: &EllipticParams, q: C64, eta: C64) -> Result<ComponentMap> {
    let n = params.n();
    let nf = n as f64;
    let (a, b) = (q * nf + eta * nf, q * nf);
    let mut out = ComponentMap::zeros(n);
    out.set(ModeIndex::zero(n), params.e1(a)? - params.e1(b)?);
    for alpha in ModeIndex::nonzero(n) {
        let w = params.omega(alpha);
        out.set(
            alpha,
            params.phi_mode(a, w, alpha)? - params.phi_mode(b, w, alpha)?,
        );
    }
    Ok(out)
}

/// `F_alpha(z)` at `z = Nq` together with its first and second derivatives
/// in `z`.
pub(crate) fn f_coeffs_jet(params: &EllipticParams, q: C64) -> Result<[ComponentMap; 3]> {
    let n = params.n();
    let z = q * n as f64;
    let mut out = [
        ComponentMap::zeros(n),
        ComponentMap::zeros(n),
        ComponentMap::zeros(n),
    ];
    let zero_mode = ModeIndex::zero(n);
    out[0].set(zero_mode, params.e1(z)?);
    out[1].set(zero_mode, -params.e2(z)?);
    out[2].set(zero_mode, -params.e2_prime(z)?);
    for alpha in ModeIndex::nonzero(n) {
        let jet = params.phi_mode_z_jet(z, params.omega(alpha), alpha)?;
        for (o, v) in out.iter_mut().zip(jet) {
            o.set(alpha, v);
        }
    }
    Ok(out)
}

/// `A_{-alpha}` arranged by `alpha`.
pub fn reflect(coeffs: &ComponentMap) -> ComponentMap {
    ComponentMap::from_fn(coeffs.n(), |alpha| coeffs.get(alpha.neg()))
}

/// Block `(i, j)` of size `n` of a block matrix.
pub fn block(s: &CMatrix, n: usize, i: usize, j: usize) -> CMatrix {
    s.view((i * n, j * n), (n, n)).into_owned()
}

pub(crate) fn set_block(s: &mut CMatrix, n: usize, i: usize, j: usize, b: &CMatrix) {
    s.view_mut((i * n, j * n), (n, n)).copy_from(b);
}

pub(crate) fn trace_over_n(s: &CMatrix) -> C64 {
    s.trace() / s.nrows() as f64
}
