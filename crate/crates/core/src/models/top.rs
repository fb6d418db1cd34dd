//! Relativistic `GL(N)` elliptic top of Euler-Arnold type.

use super::{ensure_n, ensure_square, top_j_coeffs};
use crate::elliptic::EllipticParams;
use crate::error::Result;
use crate::sine_algebra::{compose, decompose, product_coeff, ComponentMap, ModeIndex};
use crate::{CMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct TopState {
    pub s: CMatrix,
}

impl TopState {
    pub fn new(s: CMatrix) -> Result<Self> {
        ensure_square(&s, s.nrows(), "top matrix")?;
        Ok(Self { s })
    }

    pub fn n(&self) -> usize {
        self.s.nrows()
    }
}

fn components(params: &EllipticParams, st: &TopState) -> Result<ComponentMap> {
    ensure_n(params, st.n())?;
    decompose(&st.s)
}

/// `L(z) = sum_a T_a S_a phi_a(z, omega_a + eta)`.
pub fn top_lax(params: &EllipticParams, st: &TopState, z: C64) -> Result<CMatrix> {
    let s = components(params, st)?;
    let mut c = ComponentMap::zeros(st.n());
    for (alpha, v) in s.iter() {
        let u = params.omega(alpha) + params.eta();
        c.set(alpha, v * params.phi_mode(z, u, alpha)?);
    }
    Ok(compose(&c))
}

/// `M(z) = -sum_{a != 0} T_a S_a phi_a(z, omega_a)`.
pub fn top_m(params: &EllipticParams, st: &TopState, z: C64) -> Result<CMatrix> {
    let s = components(params, st)?;
    let mut c = ComponentMap::zeros(st.n());
    for (alpha, v) in s.iter().filter(|(a, _)| !a.is_zero()) {
        c.set(alpha, -v * params.phi_mode(z, params.omega(alpha), alpha)?);
    }
    Ok(compose(&c))
}

/// `Sdot = [S, J^eta(S)]` (or with the non-relativistic `J`).
pub fn top_eom(params: &EllipticParams, st: &TopState, relativistic: bool) -> Result<CMatrix> {
    let s = components(params, st)?;
    let js = compose(&s.hadamard(&top_j_coeffs(params, relativistic)?));
    Ok(&st.s * &js - &js * &st.s)
}

/// The same right-hand side assembled mode by mode:
/// `Sdot_a = sum_b c_{b,a-b} S_b S_{a-b} J_{a-b}` where `c` is the commutator
/// coefficient against the canonical label `a`.
pub fn top_eom_components(
    params: &EllipticParams,
    st: &TopState,
    relativistic: bool,
) -> Result<ComponentMap> {
    let s = components(params, st)?;
    let j = top_j_coeffs(params, relativistic)?;
    let n = st.n();
    Ok(ComponentMap::from_fn(n, |alpha| {
        let mut acc = C64::new(0.0, 0.0);
        for beta in ModeIndex::nonzero(n) {
            let gamma = alpha.add(beta.neg());
            if gamma.is_zero() {
                continue;
            }
            let c = product_coeff(beta, gamma) - product_coeff(gamma, beta);
            acc += c * s.get(beta) * s.get(gamma) * j.get(gamma);
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample::random_top;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize) -> EllipticParams {
        EllipticParams::new(C64::new(0.3, 0.8), n, C64::new(0.21, 0.07)).unwrap()
    }

    #[test]
    fn scalar_top_is_static() {
        let p = params(3);
        let st = TopState::new(CMatrix::identity(3, 3) * C64::new(1.5, -0.5)).unwrap();
        assert!(top_eom(&p, &st, true).unwrap().norm() < 1e-14);
    }

    #[test]
    fn trace_is_conserved_and_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3, 4] {
            let p = params(n);
            for _ in 0..10 {
                let st = random_top(&p, &mut rng);
                for rel in [true, false] {
                    let sdot = top_eom(&p, &st, rel).unwrap();
                    assert!(sdot.trace().norm() < 1e-13);
                    let comps = top_eom_components(&p, &st, rel).unwrap();
                    assert!(comps.get(ModeIndex::zero(n)).norm() < 1e-13);
                    let scale = sdot.norm().max(1.0);
                    assert!((compose(&comps) - &sdot).norm() < 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn lax_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = C64::new(0.17, 0.13 * 0.8);
        let h = 1e-6;
        for n in [2, 3] {
            let p = params(n);
            for _ in 0..5 {
                let st = random_top(&p, &mut rng);
                let sdot = top_eom(&p, &st, true).unwrap();
                let l_at = |k: f64| {
                    let s = &st.s + &sdot * C64::new(k * h, 0.0);
                    top_lax(&p, &TopState { s }, z).unwrap()
                };
                let ldot = ((l_at(1.0) - l_at(-1.0)) * C64::new(8.0, 0.0) - l_at(2.0) + l_at(-2.0))
                    / C64::new(12.0 * h, 0.0);
                let l = top_lax(&p, &st, z).unwrap();
                let m = top_m(&p, &st, z).unwrap();
                let res = (ldot - (&l * &m - &m * &l)).norm();
                assert!(res < 1e-8, "{res}");
            }
        }
    }

    #[test]
    fn residue_of_lax() {
        let p = params(2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let st = random_top(&p, &mut rng);
        let z = C64::new(1e-6, 0.0);
        assert!((top_lax(&p, &st, z).unwrap() * z - &st.s).norm() < 1e-4 * st.s.norm());
    }
}
