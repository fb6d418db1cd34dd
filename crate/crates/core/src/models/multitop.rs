//! `GL(NM)` generalization of the spin Ruijsenaars-Schneider model: `M`
//! particles carrying `N x N` spin blocks `S^ij` of an `NM x NM` matrix.

use super::{
    apply_op, block, check_collisions, ensure_n, ensure_square, j_eta_q_coeffs, set_block,
    top_j_coeffs, trace_over_n,
};
use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::sine_algebra::{compose, decompose, ComponentMap, ModeIndex};
use crate::{CMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTopState {
    pub n: usize,
    pub q: Vec<C64>,
    pub s: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmEom {
    pub qdot: Vec<C64>,
    pub sdot: CMatrix,
}

impl MultiTopState {
    pub fn new(n: usize, q: Vec<C64>, s: CMatrix) -> Result<Self> {
        if n == 0 || q.is_empty() {
            return Err(Error::DimensionMismatch("need N >= 1 and M >= 1".into()));
        }
        ensure_square(&s, n * q.len(), "block spin matrix")?;
        Ok(Self { n, q, s })
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        block(&self.s, self.n, i, j)
    }

    /// Velocities on the constraint surface, `tr(S^ii) / N`.
    pub fn qdot(&self) -> Vec<C64> {
        (0..self.m())
            .map(|i| trace_over_n(&self.block(i, i)))
            .collect()
    }

    fn check(&self, params: &EllipticParams) -> Result<()> {
        ensure_n(params, self.n)?;
        check_collisions(params, &self.q)
    }
}

/// Blocks `sum_a T_a S^ij_a phi_a(z, omega_a + q_ij + eta)`.
pub fn nm_lax(params: &EllipticParams, st: &MultiTopState, z: C64) -> Result<CMatrix> {
    st.check(params)?;
    let (n, m) = (st.n, st.m());
    let mut l = CMatrix::zeros(n * m, n * m);
    for i in 0..m {
        for j in 0..m {
            let s = decompose(&st.block(i, j))?;
            let qij = st.q[i] - st.q[j];
            let mut c = ComponentMap::zeros(n);
            for (alpha, v) in s.iter() {
                let u = params.omega(alpha) + qij + params.eta();
                c.set(alpha, v * params.phi_mode(z, u, alpha)?);
            }
            set_block(&mut l, n, i, j, &compose(&c));
        }
    }
    Ok(l)
}

/// Off-diagonal blocks `-sum_a T_a S^ij_a phi_a(z, omega_a + q_ij)`; diagonal
/// blocks `-S^ii_0 (E1(z) + E1(eta)) - sum_{a != 0} T_a S^ii_a phi_a(z, omega_a)`.
pub fn nm_m(params: &EllipticParams, st: &MultiTopState, z: C64) -> Result<CMatrix> {
    st.check(params)?;
    let (n, m) = (st.n, st.m());
    let scalar = params.e1(z)? + params.e1(params.eta())?;
    let mut out = CMatrix::zeros(n * m, n * m);
    for i in 0..m {
        for j in 0..m {
            let s = decompose(&st.block(i, j))?;
            let qij = st.q[i] - st.q[j];
            let mut c = ComponentMap::zeros(n);
            for (alpha, v) in s.iter() {
                let value = if i == j && alpha.is_zero() {
                    -v * scalar
                } else {
                    -v * params.phi_mode(z, params.omega(alpha) + qij, alpha)?
                };
                c.set(alpha, value);
            }
            set_block(&mut out, n, i, j, &compose(&c));
        }
    }
    Ok(out)
}

/// Precomputed operator images: `d[i] = J^eta(S^ii)` and
/// `a[i][j] = J^{eta,q_ij}(S^ij)` for `i != j`.
pub(crate) struct Images {
    pub d: Vec<CMatrix>,
    pub a: Vec<Vec<CMatrix>>,
    pub blocks: Vec<Vec<CMatrix>>,
}

pub(crate) fn images(
    params: &EllipticParams,
    n: usize,
    q: &[C64],
    s: &CMatrix,
    relativistic: bool,
) -> Result<Images> {
    let m = q.len();
    let blocks: Vec<Vec<CMatrix>> = (0..m)
        .map(|i| (0..m).map(|j| block(s, n, i, j)).collect())
        .collect();
    let jt = top_j_coeffs(params, relativistic)?;
    let mut d = Vec::with_capacity(m);
    let mut a = vec![vec![CMatrix::zeros(n, n); m]; m];
    for i in 0..m {
        d.push(apply_op(&blocks[i][i], &jt)?);
        for j in (0..m).filter(|&j| j != i) {
            let c = j_eta_q_coeffs(params, q[i] - q[j], relativistic)?;
            a[i][j] = apply_op(&blocks[i][j], &c)?;
        }
    }
    Ok(Images { d, a, blocks })
}

/// Diagonal blocks `[S^ii, D_i] + sum_{k != i} (S^ik A_ki - A_ik S^ki)` and
/// off-diagonal blocks in the two-sum form
/// `S^ij D_j - D_i S^ij + sum_{k != j} S^ik A_kj - sum_{k != i} A_ik S^kj`.
pub(crate) fn assemble(im: &Images, n: usize, m: usize) -> CMatrix {
    let (s, a, d) = (&im.blocks, &im.a, &im.d);
    let mut out = CMatrix::zeros(n * m, n * m);
    for i in 0..m {
        for j in 0..m {
            let mut b = if i == j {
                &s[i][i] * &d[i] - &d[i] * &s[i][i]
            } else {
                &s[i][j] * &d[j] - &d[i] * &s[i][j]
            };
            for k in 0..m {
                if k != j {
                    b += &s[i][k] * &a[k][j];
                }
                if k != i {
                    b -= &a[i][k] * &s[k][j];
                }
            }
            set_block(&mut out, n, i, j, &b);
        }
    }
    out
}

/// Equations of motion; `qdot_i = tr(S^ii) / N`.
pub fn nm_eom(params: &EllipticParams, st: &MultiTopState) -> Result<NmEom> {
    st.check(params)?;
    let im = images(params, st.n, &st.q, &st.s, true)?;
    Ok(NmEom {
        qdot: st.qdot(),
        sdot: assemble(&im, st.n, st.m()),
    })
}

/// Off-diagonal blocks grouped with the `S^ii A_ij - A_ij S^jj` terms
/// separated from the sum over `k != i, j`; diagonal blocks are zero.
pub fn nm_sdot_offdiag_grouped(params: &EllipticParams, st: &MultiTopState) -> Result<CMatrix> {
    st.check(params)?;
    let (n, m) = (st.n, st.m());
    let im = images(params, n, &st.q, &st.s, true)?;
    let (s, a, d) = (&im.blocks, &im.a, &im.d);
    let mut out = CMatrix::zeros(n * m, n * m);
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            let mut b =
                &s[i][j] * &d[j] - &d[i] * &s[i][j] + &s[i][i] * &a[i][j] - &a[i][j] * &s[j][j];
            for k in (0..m).filter(|&k| k != i && k != j) {
                b += &s[i][k] * &a[k][j] - &a[i][k] * &s[k][j];
            }
            set_block(&mut out, n, i, j, &b);
        }
    }
    Ok(out)
}

/// `qddot_i = (1/N) sum_{k != i} tr(S^ik A_ki - A_ik S^ki)`.
pub fn nm_qddot(params: &EllipticParams, st: &MultiTopState) -> Result<Vec<C64>> {
    st.check(params)?;
    let (n, m) = (st.n, st.m());
    let im = images(params, n, &st.q, &st.s, true)?;
    Ok((0..m)
        .map(|i| {
            (0..m)
                .filter(|&k| k != i)
                .map(|k| (&im.blocks[i][k] * &im.a[k][i] - &im.a[i][k] * &im.blocks[k][i]).trace())
                .sum::<C64>()
                / n as f64
        })
        .collect())
}

/// Constraint residuals `mu_0^i = qdot_i - tr(S^ii) / N`.
pub fn nm_mu(st: &MultiTopState, qdot: &[C64]) -> Vec<C64> {
    qdot.iter().zip(st.qdot()).map(|(v, w)| v - w).collect()
}

/// Additional term of the off-constraint Lax equation:
/// blocks `(mu_0^i - mu_0^j) sum_a T_a S^ij_a f_a(z, omega_a + q_ij + eta)`.
pub fn nm_mu_term(
    params: &EllipticParams,
    st: &MultiTopState,
    qdot: &[C64],
    z: C64,
) -> Result<CMatrix> {
    st.check(params)?;
    let mu = nm_mu(st, qdot);
    let (n, m) = (st.n, st.m());
    let mut out = CMatrix::zeros(n * m, n * m);
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            let dmu = mu[i] - mu[j];
            let s = decompose(&st.block(i, j))?;
            let qij = st.q[i] - st.q[j];
            let mut c = ComponentMap::zeros(n);
            for (alpha, v) in s.iter() {
                let u = params.omega(alpha) + qij + params.eta();
                c.set(alpha, dmu * v * params.f_mode(z, u, alpha)?);
            }
            set_block(&mut out, n, i, j, &compose(&c));
        }
    }
    Ok(out)
}

/// Scalar component of the interaction sum in `Sdot^ii`, assembled from the
/// `beta = -gamma` terms only.
pub fn nm_scalar_interaction(params: &EllipticParams, st: &MultiTopState, i: usize) -> Result<C64> {
    st.check(params)?;
    let n = st.n;
    let mut acc = C64::new(0.0, 0.0);
    for k in (0..st.m()).filter(|&k| k != i) {
        let sik = decompose(&st.block(i, k))?;
        let ski = decompose(&st.block(k, i))?;
        let jik = j_eta_q_coeffs(params, st.q[i] - st.q[k], true)?;
        let jki = j_eta_q_coeffs(params, st.q[k] - st.q[i], true)?;
        for beta in ModeIndex::all(n) {
            let gamma = beta.neg();
            let pc = crate::sine_algebra::product_coeff(beta, gamma);
            acc += pc * sik.get(beta) * ski.get(gamma) * (jki.get(gamma) - jik.get(beta));
        }
    }
    Ok(acc)
}
