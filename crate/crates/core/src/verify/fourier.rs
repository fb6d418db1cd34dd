use std::f64::consts::PI;

use rand::Rng;

use super::{admissible_points, max_of, rel, suite_rng, Case, Criterion, VerifyReport};
use crate::elliptic::EllipticParams;
use crate::error::Result;
use crate::models::{i_coeffs, j_eta_q_coeffs};
use crate::sine_algebra::{kappa, ModeIndex};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const POINTS: usize = 10;
const TOL: f64 = 1e-10;

/// Finite Fourier transforms of `E1(omega_a + eta) + 2 pi i a_2 / N` over
/// `Z_N x Z_N`, and the closed-form rank-one kernel `I_a` against the direct
/// transform of `E1(omega_a + q + eta) - E1(omega_a + q)`, for every `N` in
/// `ns` at ten random arguments each. The curve and `eta` of the kernel
/// check come from `params`; its `N` is ignored.
pub fn fourier_suite(params: &EllipticParams, ns: &[usize], seed: u64) -> VerifyReport {
    let mut rng = suite_rng(seed);
    let mut report = VerifyReport::new("fourier", seed, params);
    for &n in ns {
        let p = match params.with_n(n) {
            Ok(p) => p,
            Err(e) => {
                report.push(Case::from_result(format!("N = {n}"), Err(e), below()));
                continue;
            }
        };
        let (mean, modes) = match averages(&p, &mut rng) {
            Ok(v) => (Ok(v.0), Ok(v.1)),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        report.push(Case::from_result(
            format!("E1 average = E1(N eta), N = {n}"),
            mean,
            below(),
        ));
        if n > 1 {
            report.push(Case::from_result(
                format!("kappa^2-weighted E1 average = phi_gamma(N eta, omega_gamma), N = {n}"),
                modes,
                below(),
            ));
        }
        report.push(Case::from_result(
            format!("closed-form I_alpha = transformed kernel, N = {n}"),
            kernel_transform(&p, &mut rng),
            below(),
        ));
    }
    report
}

fn below() -> Criterion {
    Criterion::Below { tolerance: TOL }
}

fn shifted_e1(p: &EllipticParams, alpha: ModeIndex, eta: C64) -> Result<C64> {
    let n = p.n() as f64;
    Ok(p.e1(p.omega(alpha) + eta)? + 2.0 * PI * I * alpha.a2() as f64 / n)
}

/// Worst residuals of the plain and the `gamma != 0` averages.
fn averages(p: &EllipticParams, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let n = p.n();
    let nf = n as f64;
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..POINTS {
        let eta = admissible_points(p, rng, 1, |x| {
            let mut out: Vec<C64> = ModeIndex::all(n).map(|a| p.omega(a) + x[0]).collect();
            out.push(x[0] * nf);
            out
        })?[0];
        let terms = ModeIndex::all(n)
            .map(|a| Ok((a, shifted_e1(p, a, eta)?)))
            .collect::<Result<Vec<_>>>()?;
        let mean: C64 = terms.iter().map(|t| t.1).sum::<C64>() / nf;
        worst.0 = worst.0.max(rel(p.e1(eta * nf)?, mean));
        for gamma in ModeIndex::nonzero(n) {
            let lhs: C64 = terms
                .iter()
                .map(|&(a, e)| kappa(a, gamma).powi(2) * e)
                .sum::<C64>()
                / nf;
            let rhs = p.phi_mode(eta * nf, p.omega(gamma), gamma)?;
            worst.1 = worst.1.max(rel(rhs, lhs));
        }
    }
    Ok(worst)
}

fn kernel_transform(p: &EllipticParams, rng: &mut impl Rng) -> Result<f64> {
    let n = p.n();
    let nf = n as f64;
    let eta = p.eta();
    max_of((0..POINTS).map(|_| {
        let q = admissible_points(p, rng, 1, |x| {
            let mut out = Vec::new();
            for a in ModeIndex::all(n) {
                out.push(p.omega(a) + x[0]);
                out.push(p.omega(a) + x[0] + eta);
            }
            out.push(x[0] * nf);
            out.push((x[0] + eta) * nf);
            out
        })?[0];
        let kernel = j_eta_q_coeffs(p, q, true)?;
        let closed = i_coeffs(q, p, true)?;
        let mut worst = 0.0f64;
        for gamma in ModeIndex::all(n) {
            let direct: C64 = ModeIndex::all(n)
                .map(|a| kappa(a, gamma).powi(2) * kernel.get(a))
                .sum::<C64>()
                / nf;
            worst = worst.max(rel(closed.get(gamma), direct));
        }
        Ok(worst)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_is_trivial_and_small_n_pass() {
        let p = EllipticParams::new(C64::new(0.0, 1.0), 1, C64::new(0.21, 0.07)).unwrap();
        let r = fourier_suite(&p, &[1], 42);
        assert!(r.passed(), "{r}");
        assert_eq!(r.cases.len(), 2);
        assert!(r.cases[0].measured < 1e-15);
        let r = fourier_suite(&p, &[2, 3], 42);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn wrong_weights_are_caught() {
        // Dropping the 2 pi i a_2 / N shift breaks the plain average.
        let p = EllipticParams::new(C64::new(0.0, 1.0), 3, C64::new(0.21, 0.07)).unwrap();
        let eta = C64::new(0.11, 0.07);
        let mean: C64 = ModeIndex::all(3)
            .map(|a| p.e1(p.omega(a) + eta).unwrap())
            .sum::<C64>()
            / 3.0;
        assert!(rel(p.e1(eta * 3.0).unwrap(), mean) > 1e-3);
    }
}
