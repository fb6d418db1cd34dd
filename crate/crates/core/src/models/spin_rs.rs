//! Spin elliptic Ruijsenaars-Schneider model of `M` particles.

use super::{check_collisions, ensure_square, zero};
use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Positions `q` and the `M x M` spin matrix `S`. On the constraint surface
/// the velocities are `qdot_i = S_ii`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinRsState {
    pub q: Vec<C64>,
    pub s: CMatrix,
}

/// Right-hand side of the equations of motion.
#[derive(Debug, Clone, PartialEq)]
pub struct RsEom {
    pub qdot: Vec<C64>,
    pub sdot: CMatrix,
}

impl SpinRsState {
    pub fn new(q: Vec<C64>, s: CMatrix) -> Result<Self> {
        ensure_square(&s, q.len(), "spin matrix")?;
        if q.is_empty() {
            return Err(Error::DimensionMismatch(
                "at least one particle is required".into(),
            ));
        }
        Ok(Self { q, s })
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    /// Velocities on the constraint surface.
    pub fn qdot(&self) -> Vec<C64> {
        (0..self.m()).map(|i| self.s[(i, i)]).collect()
    }
}

/// `L_ij(z) = S_ij phi(z, q_ij + eta)`.
pub fn rs_lax(params: &EllipticParams, st: &SpinRsState, z: C64) -> Result<CMatrix> {
    check_collisions(params, &st.q)?;
    let m = st.m();
    let mut l = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            l[(i, j)] = st.s[(i, j)] * params.phi(z, st.q[i] - st.q[j] + params.eta())?;
        }
    }
    Ok(l)
}

/// `M_ii = -(E1(z) + E1(eta)) S_ii`, `M_ij = -S_ij phi(z, q_ij)`.
pub fn rs_m(params: &EllipticParams, st: &SpinRsState, z: C64) -> Result<CMatrix> {
    check_collisions(params, &st.q)?;
    let m = st.m();
    let diag = params.e1(z)? + params.e1(params.eta())?;
    let mut out = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            out[(i, j)] = if i == j {
                -diag * st.s[(i, i)]
            } else {
                -st.s[(i, j)] * params.phi(z, st.q[i] - st.q[j])?
            };
        }
    }
    Ok(out)
}

/// Table `b_ij = E1(q_ij + eta) - E1(q_ij)` for `i != j`.
fn kernel(params: &EllipticParams, q: &[C64]) -> Result<CMatrix> {
    let m = q.len();
    let mut b = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let qij = q[i] - q[j];
                b[(i, j)] = params.e1(qij + params.eta())? - params.e1(qij)?;
            }
        }
    }
    Ok(b)
}

/// Equations of motion with the diagonal law
/// `Sdot_ii = -sum_k S_ik S_ki (E1(q_ik + eta) + E1(q_ik - eta) - 2 E1(q_ik))`
/// and the off-diagonal law grouped by the `(S_ii - S_jj)` term.
pub fn rs_eom(params: &EllipticParams, st: &SpinRsState) -> Result<RsEom> {
    check_collisions(params, &st.q)?;
    let m = st.m();
    let s = &st.s;
    let b = kernel(params, &st.q)?;
    let mut sdot = CMatrix::zeros(m, m);
    for i in 0..m {
        let mut acc = zero();
        for k in (0..m).filter(|&k| k != i) {
            let qik = st.q[i] - st.q[k];
            let e = params.e1(qik + params.eta())? + params.e1(qik - params.eta())?
                - 2.0 * params.e1(qik)?;
            acc -= s[(i, k)] * s[(k, i)] * e;
        }
        sdot[(i, i)] = acc;
    }
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            let mut acc = s[(i, j)] * (s[(i, i)] - s[(j, j)]) * b[(i, j)];
            for k in (0..m).filter(|&k| k != i && k != j) {
                acc += s[(i, k)] * s[(k, j)] * (b[(k, j)] - b[(i, k)]);
            }
            sdot[(i, j)] = acc;
        }
    }
    Ok(RsEom {
        qdot: st.qdot(),
        sdot,
    })
}

/// Off-diagonal part of `Sdot` in the two-sum form
/// `sum_{k != j} S_ik S_kj b_kj - sum_{k != i} S_ik S_kj b_ik`; the diagonal is
/// left at zero.
pub fn rs_sdot_offdiag_sum_form(params: &EllipticParams, st: &SpinRsState) -> Result<CMatrix> {
    check_collisions(params, &st.q)?;
    let m = st.m();
    let s = &st.s;
    let b = kernel(params, &st.q)?;
    let mut out = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            let mut acc = zero();
            for k in 0..m {
                if k != j {
                    acc += s[(i, k)] * s[(k, j)] * b[(k, j)];
                }
                if k != i {
                    acc -= s[(i, k)] * s[(k, j)] * b[(i, k)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Constraint residuals `mu_i = qdot_i - S_ii`.
pub fn rs_mu(st: &SpinRsState, qdot: &[C64]) -> Vec<C64> {
    qdot.iter()
        .enumerate()
        .map(|(i, v)| v - st.s[(i, i)])
        .collect()
}

/// Additional term `sum_ij E_ij (mu_i - mu_j) S_ij f(z, q_ij + eta)` of the
/// off-constraint Lax equation.
pub fn rs_mu_term(
    params: &EllipticParams,
    st: &SpinRsState,
    qdot: &[C64],
    z: C64,
) -> Result<CMatrix> {
    let mu = rs_mu(st, qdot);
    let m = st.m();
    let mut out = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            let d = mu[i] - mu[j];
            if d != zero() {
                out[(i, j)] = d * st.s[(i, j)] * params.f(z, st.q[i] - st.q[j] + params.eta())?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample::{complex_normal_matrix, random_spin_rs};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> EllipticParams {
        EllipticParams::new(C64::new(0.0, 1.0), 1, C64::new(0.21, 0.07)).unwrap()
    }

    /// Fourth-order central difference of `L` along the flow `(qdot, Sdot)`.
    fn fd_ldot(
        p: &EllipticParams,
        st: &SpinRsState,
        qdot: &[C64],
        sdot: &CMatrix,
        z: C64,
    ) -> CMatrix {
        let h = 1e-6;
        let l = |k: f64| {
            let shifted = SpinRsState {
                q: st.q.iter().zip(qdot).map(|(q, v)| q + v * k * h).collect(),
                s: &st.s + sdot * C64::new(k * h, 0.0),
            };
            rs_lax(p, &shifted, z).unwrap()
        };
        ((l(1.0) - l(-1.0)) * C64::new(8.0, 0.0) - l(2.0) + l(-2.0)) / C64::new(12.0 * h, 0.0)
    }

    #[test]
    fn residue_of_lax_is_spin_matrix() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let st = random_spin_rs(&p, 3, &mut rng, 0.02).unwrap();
        let z = C64::new(1e-6, 0.0);
        let zl = rs_lax(&p, &st, z).unwrap() * z;
        assert!((zl - &st.s).norm() < 1e-4 * st.s.norm());
    }

    #[test]
    fn single_particle() {
        let p = params();
        let st = SpinRsState::new(
            vec![C64::new(0.2, 0.1)],
            CMatrix::from_element(1, 1, C64::new(0.7, -0.3)),
        )
        .unwrap();
        let z = C64::new(0.3, 0.2);
        let l = rs_lax(&p, &st, z).unwrap();
        assert!((l[(0, 0)] - st.s[(0, 0)] * p.phi(z, p.eta()).unwrap()).norm() < 1e-15);
        let eom = rs_eom(&p, &st).unwrap();
        assert_eq!(eom.qdot, vec![st.s[(0, 0)]]);
        assert_eq!(eom.sdot[(0, 0)], zero());
    }

    #[test]
    fn diagonal_spins_move_freely() {
        let p = params();
        let mut s = CMatrix::zeros(2, 2);
        s[(0, 0)] = C64::new(0.4, 0.1);
        s[(1, 1)] = C64::new(-0.2, 0.3);
        let st = SpinRsState::new(vec![C64::new(0.1, 0.1), C64::new(0.6, 0.4)], s).unwrap();
        let eom = rs_eom(&p, &st).unwrap();
        assert_eq!(eom.sdot.norm(), 0.0);
    }

    #[test]
    fn offdiagonal_forms_agree() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [2, 3] {
            for _ in 0..50 {
                let st = random_spin_rs(&p, m, &mut rng, 0.02).unwrap();
                let grouped = rs_eom(&p, &st).unwrap().sdot;
                let sums = rs_sdot_offdiag_sum_form(&p, &st).unwrap();
                for i in 0..m {
                    for j in (0..m).filter(|&j| j != i) {
                        let a = grouped[(i, j)];
                        assert!((a - sums[(i, j)]).norm() <= 1e-12 * a.norm().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn lax_equation_on_constraint() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z = C64::new(0.17, 0.13);
        for _ in 0..5 {
            let st = random_spin_rs(&p, 3, &mut rng, 0.02).unwrap();
            let eom = rs_eom(&p, &st).unwrap();
            let ldot = fd_ldot(&p, &st, &eom.qdot, &eom.sdot, z);
            let l = rs_lax(&p, &st, z).unwrap();
            let mm = rs_m(&p, &st, z).unwrap();
            let res = (ldot - (&l * &mm - &mm * &l)).norm();
            assert!(res < 1e-8, "{res}");
        }
    }

    #[test]
    fn lax_equation_off_constraint_needs_mu_term() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let z = C64::new(0.31, 0.42);
        let st = random_spin_rs(&p, 3, &mut rng, 0.02).unwrap();
        let shift = complex_normal_matrix(3, 1, &mut rng);
        let qdot: Vec<C64> = (0..3).map(|i| st.s[(i, i)] + shift[(i, 0)]).collect();
        let eom = rs_eom(&p, &st).unwrap();
        let ldot = fd_ldot(&p, &st, &qdot, &eom.sdot, z);
        let l = rs_lax(&p, &st, z).unwrap();
        let mm = rs_m(&p, &st, z).unwrap();
        let comm = &l * &mm - &mm * &l;
        let extra = rs_mu_term(&p, &st, &qdot, z).unwrap();
        assert!((&ldot - &comm - extra).norm() < 1e-8);
        assert!((&ldot - &comm).norm() > 1e-3);
    }

    #[test]
    fn mu_term_ignores_common_shift() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = random_spin_rs(&p, 3, &mut rng, 0.02).unwrap();
        assert!(rs_mu(&st, &st.qdot()).iter().all(|m| *m == zero()));
        let c = C64::new(0.3, -0.8);
        let qdot: Vec<C64> = st.qdot().iter().map(|v| v + c).collect();
        let extra = rs_mu_term(&p, &st, &qdot, C64::new(0.2, 0.3)).unwrap();
        assert!(extra.norm() < 1e-14);
    }

    #[test]
    fn collision_is_reported() {
        let p = params();
        let st = SpinRsState::new(
            vec![C64::new(0.2, 0.1), C64::new(0.2, 0.1)],
            CMatrix::identity(2, 2),
        )
        .unwrap();
        assert_eq!(rs_eom(&p, &st), Err(Error::Collision { i: 0, j: 1 }));
    }
}
