//! Non-relativistic limits: spin Calogero-Moser, the elliptic top (via
//! [`top_eom`](super::top::top_eom) with `relativistic = false`), the
//! `GL(NM)` Calogero-type tops and their rank-one reduction.
//!
//! These families carry explicit velocities `v` and require trace-free
//! diagonal spin blocks.

use nalgebra::{DVector, RowDVector};

use super::multitop::{assemble, images};
use super::{
    apply_op, block, check_collisions, ensure_n, ensure_square, f_coeffs_jet, j_q_prime_coeffs,
    top_j_coeffs, trace_over_n, zero, TRACE_FREE_TOL,
};
use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::sine_algebra::ComponentMap;
use crate::{CMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SpinCmState {
    pub q: Vec<C64>,
    pub v: Vec<C64>,
    pub s: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonrelMultiTopState {
    pub n: usize,
    pub q: Vec<C64>,
    pub v: Vec<C64>,
    pub s: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonrelRank1State {
    pub n: usize,
    pub q: Vec<C64>,
    pub v: Vec<C64>,
    pub xi: Vec<DVector<C64>>,
    pub rho: Vec<RowDVector<C64>>,
}

/// Derivatives `(qdot, vdot, Sdot)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonrelEom {
    pub qdot: Vec<C64>,
    pub vdot: Vec<C64>,
    pub sdot: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonrelRank1Eom {
    pub qdot: Vec<C64>,
    pub vdot: Vec<C64>,
    pub diag_dot: Vec<CMatrix>,
    pub xidot: Vec<DVector<C64>>,
    pub rhodot: Vec<RowDVector<C64>>,
}

fn ensure_trace_free(traces: impl Iterator<Item = C64>) -> Result<()> {
    for (i, t) in traces.enumerate() {
        if t.norm() > TRACE_FREE_TOL {
            return Err(Error::ConstraintViolated(format!(
                "tr S^{i}{i} = {t} but the non-relativistic constraint requires 0"
            )));
        }
    }
    Ok(())
}

impl SpinCmState {
    pub fn new(q: Vec<C64>, v: Vec<C64>, s: CMatrix) -> Result<Self> {
        if q.is_empty() || v.len() != q.len() {
            return Err(Error::DimensionMismatch(
                "need M >= 1 positions and as many velocities".into(),
            ));
        }
        ensure_square(&s, q.len(), "spin matrix")?;
        Ok(Self { q, v, s })
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }
}

impl NonrelMultiTopState {
    pub fn new(n: usize, q: Vec<C64>, v: Vec<C64>, s: CMatrix) -> Result<Self> {
        if n == 0 || q.is_empty() || v.len() != q.len() {
            return Err(Error::DimensionMismatch(
                "need N, M >= 1 and as many velocities as positions".into(),
            ));
        }
        ensure_square(&s, n * q.len(), "block spin matrix")?;
        Ok(Self { n, q, v, s })
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        block(&self.s, self.n, i, j)
    }
}

impl NonrelRank1State {
    pub fn new(
        n: usize,
        q: Vec<C64>,
        v: Vec<C64>,
        xi: Vec<DVector<C64>>,
        rho: Vec<RowDVector<C64>>,
    ) -> Result<Self> {
        let m = q.len();
        if v.len() != m {
            return Err(Error::DimensionMismatch(
                "need as many velocities as positions".into(),
            ));
        }
        let r = super::Rank1State::new(n, q, xi, rho)?;
        Ok(Self {
            n,
            q: r.q,
            v,
            xi: r.xi,
            rho: r.rho,
        })
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        &self.xi[i] * &self.rho[j]
    }
}

/// Spin Calogero-Moser:
/// `qddot_i = sum_k S_ik S_ki E2'(q_ik)`, `Sdot_ii = 0`,
/// `Sdot_ij = sum_{k != i,j} S_ik S_kj (E2(q_ik) - E2(q_kj))`.
pub fn spin_cm_eom(params: &EllipticParams, st: &SpinCmState) -> Result<NonrelEom> {
    check_collisions(params, &st.q)?;
    let m = st.m();
    let s = &st.s;
    ensure_trace_free((0..m).map(|i| s[(i, i)]))?;
    let mut e2 = CMatrix::zeros(m, m);
    let mut vdot = vec![zero(); m];
    for i in 0..m {
        for k in (0..m).filter(|&k| k != i) {
            let qik = st.q[i] - st.q[k];
            e2[(i, k)] = params.e2(qik)?;
            vdot[i] += s[(i, k)] * s[(k, i)] * params.e2_prime(qik)?;
        }
    }
    let mut sdot = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            for k in (0..m).filter(|&k| k != i && k != j) {
                sdot[(i, j)] += s[(i, k)] * s[(k, j)] * (e2[(i, k)] - e2[(k, j)]);
            }
        }
    }
    Ok(NonrelEom {
        qdot: st.v.clone(),
        vdot,
        sdot,
    })
}

/// Calogero-type interacting tops: spin blocks evolve like the relativistic
/// model with `J^eta -> J` and `J^{eta,q} -> J^q`, and
/// `qddot_i = -(1/N) sum_{k != i} tr(J'^{q_ik}(S^ik) S^ki)` with
/// `J'^q` the analytic `q`-derivative of `J^q`.
pub fn nonrel_multitop_eom(params: &EllipticParams, st: &NonrelMultiTopState) -> Result<NonrelEom> {
    ensure_n(params, st.n)?;
    check_collisions(params, &st.q)?;
    let (n, m) = (st.n, st.m());
    ensure_trace_free((0..m).map(|i| st.block(i, i).trace()))?;
    let im = images(params, n, &st.q, &st.s, false)?;
    let mut vdot = vec![zero(); m];
    for (i, acc) in vdot.iter_mut().enumerate() {
        for k in (0..m).filter(|&k| k != i) {
            let jp = j_q_prime_coeffs(params, st.q[i] - st.q[k])?;
            *acc -= (apply_op(&im.blocks[i][k], &jp)? * &im.blocks[k][i]).trace() / n as f64;
        }
    }
    Ok(NonrelEom {
        qdot: st.v.clone(),
        vdot,
        sdot: assemble(&im, n, m),
    })
}

/// Coefficients of the non-relativistic rank-one operator
/// `Jv^q = d/dq_i sum_a T_a S_a F_a(N q)`, and of its next `q`-derivative.
pub fn nonrel_check_coeffs(
    params: &EllipticParams,
    q: C64,
) -> Result<(ComponentMap, ComponentMap)> {
    let n = params.n() as f64;
    let [_, d1, d2] = f_coeffs_jet(params, q)?;
    let scale = |c: &ComponentMap, s: f64| ComponentMap::from_fn(c.n(), |a| c.get(a) * s);
    Ok((scale(&d1, n), scale(&d2, n * n)))
}

/// Rank-one Calogero-type tops:
/// `Sdot^ii = [S^ii, J(S^ii) + sum_{k != i} Jv^{q_ik}(S^kk)]` and
/// `qddot_i = -(1/N) sum_{k != i} d/dq_i tr(S^ii Jv^{q_ik}(S^kk))`.
pub fn nonrel_rank1_eom(params: &EllipticParams, st: &NonrelRank1State) -> Result<NonrelRank1Eom> {
    ensure_n(params, st.n)?;
    check_collisions(params, &st.q)?;
    let (n, m) = (st.n, st.m());
    let diag: Vec<CMatrix> = (0..m).map(|i| st.block(i, i)).collect();
    ensure_trace_free(diag.iter().map(|d| d.trace()))?;
    let jt = top_j_coeffs(params, false)?;
    let mut w = Vec::with_capacity(m);
    let mut vdot = vec![zero(); m];
    for i in 0..m {
        let mut wi = apply_op(&diag[i], &jt)?;
        for k in (0..m).filter(|&k| k != i) {
            let (c1, c2) = nonrel_check_coeffs(params, st.q[i] - st.q[k])?;
            wi += apply_op(&diag[k], &c1)?;
            vdot[i] -= (&diag[i] * apply_op(&diag[k], &c2)?).trace() / n as f64;
        }
        w.push(wi);
    }
    Ok(NonrelRank1Eom {
        qdot: st.v.clone(),
        vdot,
        diag_dot: (0..m)
            .map(|i| &diag[i] * &w[i] - &w[i] * &diag[i])
            .collect(),
        xidot: (0..m).map(|i| -(&w[i] * &st.xi[i])).collect(),
        rhodot: (0..m).map(|i| &st.rho[i] * &w[i]).collect(),
    })
}

/// Trace-free check shared with the samplers.
pub fn max_diag_trace(s: &CMatrix, n: usize) -> f64 {
    (0..s.nrows() / n)
        .map(|i| trace_over_n(&block(s, n, i, i)).norm() * n as f64)
        .fold(0.0, f64::max)
}
