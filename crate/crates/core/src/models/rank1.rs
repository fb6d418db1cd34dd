//! Rank-one reduction `S^ij = xi^i rho^j`: `M` interacting tops whose
//! dynamics closes on the diagonal blocks.

use nalgebra::{DVector, RowDVector};

use super::multitop::MultiTopState;
use super::{apply_op, check_collisions, ensure_n, i_coeffs, reflect, top_j_coeffs, trace_over_n};
use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::sine_algebra::ComponentMap;
use crate::{CMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Rank1State {
    pub n: usize,
    pub q: Vec<C64>,
    pub xi: Vec<DVector<C64>>,
    pub rho: Vec<RowDVector<C64>>,
}

/// Reduced equations of motion together with a flow of `(xi, rho)` that
/// realizes them.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Eom {
    pub qdot: Vec<C64>,
    pub qddot: Vec<C64>,
    pub diag_dot: Vec<CMatrix>,
    pub xidot: Vec<DVector<C64>>,
    pub rhodot: Vec<RowDVector<C64>>,
}

impl Rank1State {
    pub fn new(
        n: usize,
        q: Vec<C64>,
        xi: Vec<DVector<C64>>,
        rho: Vec<RowDVector<C64>>,
    ) -> Result<Self> {
        let m = q.len();
        if n == 0 || m == 0 || xi.len() != m || rho.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "rank-one data needs M = {m} vectors xi and rho, got {} and {}",
                xi.len(),
                rho.len()
            )));
        }
        if xi.iter().any(|v| v.len() != n) || rho.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "xi and rho must have length N = {n}"
            )));
        }
        Ok(Self { n, q, xi, rho })
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    /// `S^ij = xi^i rho^j`.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        &self.xi[i] * &self.rho[j]
    }

    pub fn qdot(&self) -> Vec<C64> {
        (0..self.m())
            .map(|i| (&self.rho[i] * &self.xi[i])[(0, 0)] / self.n as f64)
            .collect()
    }
}

/// Full `NM x NM` block matrix of the embedded state.
pub fn rank1_embed(st: &Rank1State) -> Result<MultiTopState> {
    let (n, m) = (st.n, st.m());
    let xi = DVector::from_iterator(n * m, st.xi.iter().flat_map(|v| v.iter().copied()));
    let rho = RowDVector::from_iterator(n * m, st.rho.iter().flat_map(|v| v.iter().copied()));
    MultiTopState::new(n, st.q.clone(), xi * rho)
}

/// `J^check^{eta,q}(S) = sum_a T_a S_a I_a^{eta,q}`.
pub fn j_check(s: &CMatrix, q: C64, params: &EllipticParams) -> Result<CMatrix> {
    apply_op(s, &i_coeffs(q, params, true)?)
}

/// `J^tilde^{eta,q}(S) = sum_a T_a S_a I_{-a}^{eta,q}`.
pub fn j_tilde(s: &CMatrix, q: C64, params: &EllipticParams) -> Result<CMatrix> {
    apply_op(s, &reflect(&i_coeffs(q, params, true)?))
}

/// Right and left multipliers `X_i`, `Y_i` with `Sdot^ij = S^ij X_j - Y_i S^ij`.
fn multipliers(
    params: &EllipticParams,
    st: &Rank1State,
    diag: &[CMatrix],
) -> Result<(Vec<CMatrix>, Vec<CMatrix>)> {
    let m = st.m();
    let jt = top_j_coeffs(params, true)?;
    let mut x = Vec::with_capacity(m);
    let mut y = Vec::with_capacity(m);
    let coeffs: Vec<Vec<Option<ComponentMap>>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    (i != k)
                        .then(|| i_coeffs(st.q[i] - st.q[k], params, true))
                        .transpose()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    for i in 0..m {
        let d = apply_op(&diag[i], &jt)?;
        let mut xi = d.clone();
        let mut yi = d;
        for k in (0..m).filter(|&k| k != i) {
            xi += apply_op(&diag[k], &reflect(coeffs[k][i].as_ref().unwrap()))?;
            yi += apply_op(&diag[k], coeffs[i][k].as_ref().unwrap())?;
        }
        x.push(xi);
        y.push(yi);
    }
    Ok((x, y))
}

/// `Sdot^ii = [S^ii, J^eta(S^ii)] + sum_{k != i} (S^ii J~^{q_ki}(S^kk) - Jv^{q_ik}(S^kk) S^ii)`
/// and `qddot_i = tr(Sdot^ii) / N`; the spin vectors flow by
/// `xidot^i = -Y_i xi^i`, `rhodot^i = rho^i X_i`.
pub fn rank1_eom(params: &EllipticParams, st: &Rank1State) -> Result<Rank1Eom> {
    ensure_n(params, st.n)?;
    check_collisions(params, &st.q)?;
    let m = st.m();
    let diag: Vec<CMatrix> = (0..m).map(|i| st.block(i, i)).collect();
    let (x, y) = multipliers(params, st, &diag)?;
    let diag_dot: Vec<CMatrix> = (0..m)
        .map(|i| &diag[i] * &x[i] - &y[i] * &diag[i])
        .collect();
    Ok(Rank1Eom {
        qdot: st.qdot(),
        qddot: diag_dot.iter().map(trace_over_n).collect(),
        xidot: (0..m).map(|i| -(&y[i] * &st.xi[i])).collect(),
        rhodot: (0..m).map(|i| &st.rho[i] * &x[i]).collect(),
        diag_dot,
    })
}
