//! Random initial data. Spin entries are complex standard normals (real and
//! imaginary parts with variance 1/2); positions are uniform in the
//! rectangle `[0, 1) x [0, Im tau)` and redrawn while any singular argument
//! of the family comes within `radius` of the lattice.

use nalgebra::{DVector, RowDVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::multitop::MultiTopState;
use super::nonrel::{NonrelMultiTopState, NonrelRank1State, SpinCmState};
use super::rank1::Rank1State;
use super::spin_rs::SpinRsState;
use super::top::TopState;
use super::{block, set_block, trace_over_n};
use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::sine_algebra::ModeIndex;
use crate::{CMatrix, C64};

const MAX_DRAWS: usize = 10_000;

pub fn complex_normal(rng: &mut impl Rng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

pub fn complex_normal_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    let mut out = CMatrix::zeros(rows, cols);
    // Filled row by row so that the draw order is independent of storage.
    for i in 0..rows {
        for j in 0..cols {
            out[(i, j)] = complex_normal(rng);
        }
    }
    out
}

/// Every `q`-dependent argument that any family evaluates on the lattice
/// check: `omega_a + q_ij (+ eta)`, `N q_ij` and `N (q_ij + eta)`.
pub fn singular_arguments(params: &EllipticParams, q: &[C64]) -> Vec<C64> {
    let n = params.n();
    let eta = params.eta();
    let mut out = Vec::new();
    for i in 0..q.len() {
        for j in (0..q.len()).filter(|&j| j != i) {
            let qij = q[i] - q[j];
            for alpha in ModeIndex::all(n) {
                let w = params.omega(alpha) + qij;
                out.push(w);
                out.push(w + eta);
            }
            out.push(qij * n as f64);
            out.push((qij + eta) * n as f64);
        }
    }
    out
}

/// Positions avoiding every singular argument by at least `radius`.
pub fn random_positions(
    params: &EllipticParams,
    m: usize,
    rng: &mut impl Rng,
    radius: f64,
) -> Result<Vec<C64>> {
    let im_tau = params.tau().im;
    for _ in 0..MAX_DRAWS {
        let q: Vec<C64> = (0..m)
            .map(|_| C64::new(rng.random::<f64>(), rng.random::<f64>() * im_tau))
            .collect();
        if singular_arguments(params, &q)
            .iter()
            .all(|&z| !params.is_near_lattice(z, radius))
        {
            return Ok(q);
        }
    }
    Err(Error::InvalidParameter(format!(
        "no admissible positions for M = {m} at exclusion radius {radius}"
    )))
}

pub fn random_spin_rs(
    params: &EllipticParams,
    m: usize,
    rng: &mut impl Rng,
    radius: f64,
) -> Result<SpinRsState> {
    let q = random_positions(params, m, rng, radius)?;
    SpinRsState::new(q, complex_normal_matrix(m, m, rng))
}

pub fn random_top(params: &EllipticParams, rng: &mut impl Rng) -> TopState {
    let n = params.n();
    TopState {
        s: complex_normal_matrix(n, n, rng),
    }
}

pub fn random_multitop(
    params: &EllipticParams,
    m: usize,
    rng: &mut impl Rng,
    radius: f64,
) -> Result<MultiTopState> {
    let n = params.n();
    let q = random_positions(params, m, rng, radius)?;
    MultiTopState::new(n, q, complex_normal_matrix(n * m, n * m, rng))
}

fn random_vectors(
    n: usize,
    m: usize,
    rng: &mut impl Rng,
) -> (Vec<DVector<C64>>, Vec<RowDVector<C64>>) {
    let xi = (0..m)
        .map(|_| DVector::from_iterator(n, (0..n).map(|_| complex_normal(rng))))
        .collect();
    let rho = (0..m)
        .map(|_| RowDVector::from_iterator(n, (0..n).map(|_| complex_normal(rng))))
        .collect();
    (xi, rho)
}

pub fn random_rank1(
    params: &EllipticParams,
    m: usize,
    rng: &mut impl Rng,
    radius: f64,
) -> Result<Rank1State> {
    let n = params.n();
    let q = random_positions(params, m, rng, radius)?;
    let (xi, rho) = random_vectors(n, m, rng);
    Rank1State::new(n, q, xi, rho)
}

/// Spin Calogero-Moser data with `S_ii = 0`.
pub fn random_spin_cm(
    params: &EllipticParams,
    m: usize,
    rng: &mut impl Rng,
    radius: f64,
) -> Result<SpinCmState> {
    let q = random_positions(params, m, rng, radius)?;
    let v = (0..m).map(|_| complex_normal(rng)).collect();
    let mut s = complex_normal_matrix(m, m, rng);
    s.fill_diagonal(C64::new(0.0, 0.0));
    SpinCmState::new(q, v, s)
}

/// Calogero-type tops with trace-free diagonal blocks.
pub fn random_nonrel_multitop(
    params: &EllipticParams,
    m: usize,
    rng: &mut impl Rng,
    radius: f64,
) -> Result<NonrelMultiTopState> {
    let n = params.n();
    let q = random_positions(params, m, rng, radius)?;
    let v = (0..m).map(|_| complex_normal(rng)).collect();
    let mut s = complex_normal_matrix(n * m, n * m, rng);
    for i in 0..m {
        let b = block(&s, n, i, i);
        let t = trace_over_n(&b);
        set_block(&mut s, n, i, i, &(b - CMatrix::identity(n, n) * t));
    }
    NonrelMultiTopState::new(n, q, v, s)
}

/// Rank-one data with `rho^i xi^i = 0`, obtained by projecting each `rho^i`
/// off the conjugate of `xi^i`.
pub fn random_nonrel_rank1(
    params: &EllipticParams,
    m: usize,
    rng: &mut impl Rng,
    radius: f64,
) -> Result<NonrelRank1State> {
    let n = params.n();
    let q = random_positions(params, m, rng, radius)?;
    let v = (0..m).map(|_| complex_normal(rng)).collect();
    let (xi, mut rho) = random_vectors(n, m, rng);
    for (x, r) in xi.iter().zip(rho.iter_mut()) {
        let c = (&*r * x)[(0, 0)] / x.norm_squared();
        *r -= x.adjoint() * c;
    }
    NonrelRank1State::new(n, q, v, xi, rho)
}
