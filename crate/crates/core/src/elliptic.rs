//! Odd Riemann theta function, Eisenstein functions and the Kronecker
//! function on the curve with modulus `tau`.
//!
//! All evaluations first reduce the argument to the fundamental cell
//! `|Re z| <= 1/2`, `-Im(tau)/2 <= Im z < Im(tau)/2` and carry the
//! quasi-periodicity factor of theta separately, in log form, so that large
//! arguments never overflow the series.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sine_algebra::ModeIndex;

/// Smallest accepted `Im(tau)` for [`EllipticParams`].
pub const MIN_IM_TAU: f64 = 0.05;

/// Hard cap on the number of series terms summed on each side of the index
/// range.
pub const MAX_THETA_TERMS: usize = 200;

const STOP_FACTOR: f64 = 1e-17;

const I: C64 = C64::new(0.0, 1.0);

/// Distance below which an argument counts as a lattice point.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoleTolerance(f64);

impl PoleTolerance {
    pub const DEFAULT: f64 = 1e-9;

    pub fn new(eps_pole: f64) -> Result<Self> {
        if !(eps_pole > 0.0) || !eps_pole.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pole tolerance must be positive, got {eps_pole}"
            )));
        }
        Ok(Self(eps_pole))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for PoleTolerance {
    fn default() -> Self {
        Self(Self::DEFAULT)
    }
}

/// Theta and its first three derivatives at a reduced argument `z0`,
/// together with the quasi-periodicity data relating it to the original
/// argument `z = z0 + a + b*tau`:
///
/// `theta(z) = exp(log_factor) * theta(z0)` and
/// `d/dz log(factor) = lambda = -2 pi i b`.
#[derive(Debug, Clone, Copy)]
struct ThetaJet {
    log_factor: C64,
    lambda: C64,
    d: [C64; 4],
}

impl ThetaJet {
    /// `theta^(k)(z0) / theta(z0)` for `k = 1, 2, 3`.
    fn ratios(&self) -> [C64; 3] {
        [
            self.d[1] / self.d[0],
            self.d[2] / self.d[0],
            self.d[3] / self.d[0],
        ]
    }
}

/// Split `z = z0 + a + b*tau` with `z0` in the fundamental cell.
fn reduce(z: C64, tau: C64) -> (C64, f64, f64) {
    let b = (z.im / tau.im + 0.5).floor();
    let z1 = z - tau * b;
    let a = (z1.re + 0.5).floor();
    (z1 - a, a, b)
}

/// Term-wise differentiated theta series at `z0`, orders 0..=3.
fn theta_series(z0: C64, tau: C64) -> Result<[C64; 4]> {
    let mut sum = [C64::new(0.0, 0.0); 4];
    let mut quiet = 0;
    for n in 0..MAX_THETA_TERMS {
        let mut pair = [C64::new(0.0, 0.0); 4];
        for k in [n as f64, -(n as f64) - 1.0] {
            let x = k + 0.5;
            let term = (I * PI * tau * x * x + 2.0 * I * PI * (z0 + 0.5) * x).exp();
            let w = 2.0 * I * PI * x;
            let mut t = term;
            for p in pair.iter_mut() {
                *p += t;
                t *= w;
            }
        }
        let mut small = true;
        for p in 0..4 {
            sum[p] += pair[p];
            if pair[p].norm() >= STOP_FACTOR * (sum[p].norm() + 1.0) {
                small = false;
            }
        }
        quiet = if small { quiet + 1 } else { 0 };
        if quiet >= 2 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergent(MAX_THETA_TERMS))
}

fn theta_jet(z: C64, tau: C64) -> Result<ThetaJet> {
    let (z0, a, b) = reduce(z, tau);
    let d = theta_series(z0, tau)?;
    let log_factor = I * PI * (a + b) - I * PI * tau * b * b - 2.0 * I * PI * b * z0;
    Ok(ThetaJet {
        log_factor,
        lambda: -2.0 * I * PI * b,
        d,
    })
}

/// The `order`-th derivative of the odd theta function
/// `sum_k exp(pi i tau (k+1/2)^2 + 2 pi i (z+1/2)(k+1/2))`.
pub fn theta(z: C64, tau: C64, order: usize) -> Result<C64> {
    if !(tau.im > 0.0) {
        return Err(Error::BadModulus(tau));
    }
    if order > 3 {
        return Err(Error::InvalidParameter(format!(
            "theta derivative order must be 0..=3, got {order}"
        )));
    }
    let jet = theta_jet(z, tau)?;
    // Leibniz rule for exp(log_factor(z)) * theta(z0(z)).
    const BINOM: [[f64; 4]; 4] = [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0],
        [1.0, 3.0, 3.0, 1.0],
    ];
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..=order {
        acc += BINOM[order][j] * jet.lambda.powu((order - j) as u32) * jet.d[j];
    }
    Ok(jet.log_factor.exp() * acc)
}

/// Analytic data shared by every model in a run: modulus `tau`, matrix size
/// `n` of the sine-algebra basis and the relativistic deformation `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticParams {
    tau: C64,
    n: usize,
    eta: C64,
    eps_pole: f64,
    theta_p0: C64,
    cubic_ratio: C64,
}

impl EllipticParams {
    pub fn new(tau: C64, n: usize, eta: C64) -> Result<Self> {
        Self::with_tolerance(tau, n, eta, PoleTolerance::default())
    }

    pub fn with_tolerance(tau: C64, n: usize, eta: C64, tol: PoleTolerance) -> Result<Self> {
        if !(tau.im >= MIN_IM_TAU) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::BadModulus(tau));
        }
        if n == 0 {
            return Err(Error::InvalidParameter(
                "basis size N must be at least 1".into(),
            ));
        }
        let eps_pole = tol.value();
        if eps_pole >= 0.1 * tau.im.min(1.0) {
            return Err(Error::InvalidParameter(format!(
                "pole tolerance {eps_pole} must be below 0.1*min(1, Im tau)"
            )));
        }
        let d0 = theta_series(C64::new(0.0, 0.0), tau)?;
        let mut params = Self {
            tau,
            n,
            eta,
            eps_pole,
            theta_p0: d0[1],
            cubic_ratio: d0[3] / d0[1],
        };
        params.ensure_off_lattice(eta, "eta")?;
        params.eta = eta;
        Ok(params)
    }

    /// Same curve and tolerance with a different basis size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "basis size N must be at least 1".into(),
            ));
        }
        Ok(Self { n, ..self.clone() })
    }

    /// Same curve and tolerance with a different deformation parameter.
    pub fn with_eta(&self, eta: C64) -> Result<Self> {
        self.ensure_off_lattice(eta, "eta")?;
        Ok(Self {
            eta,
            ..self.clone()
        })
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> C64 {
        self.eta
    }

    pub fn eps_pole(&self) -> f64 {
        self.eps_pole
    }

    /// `theta'(0)`.
    pub fn theta_prime_zero(&self) -> C64 {
        self.theta_p0
    }

    /// `theta'''(0) / theta'(0)`, the constant relating `E2` to Weierstrass p.
    pub fn theta_cubic_ratio(&self) -> C64 {
        self.cubic_ratio
    }

    /// Distance from `z` to the nearest point of `Z + tau Z`.
    pub fn lattice_distance(&self, z: C64) -> f64 {
        let (z0, _, _) = reduce(z, self.tau);
        let mut best = f64::INFINITY;
        for m in -1..=1 {
            for k in -1..=1 {
                let p = C64::new(m as f64, 0.0) + self.tau * k as f64;
                best = best.min((z0 - p).norm());
            }
        }
        best
    }

    pub fn is_near_lattice(&self, z: C64, radius: f64) -> bool {
        self.lattice_distance(z) < radius
    }

    pub fn ensure_off_lattice(&self, z: C64, what: &'static str) -> Result<()> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite);
        }
        if self.lattice_distance(z) < self.eps_pole {
            return Err(Error::PoleProximity { what, z });
        }
        Ok(())
    }

    fn jet(&self, z: C64) -> Result<ThetaJet> {
        theta_jet(z, self.tau)
    }

    pub fn theta(&self, z: C64, order: usize) -> Result<C64> {
        theta(z, self.tau, order)
    }

    /// `E1(z) = theta'(z) / theta(z)`.
    pub fn e1(&self, z: C64) -> Result<C64> {
        self.ensure_off_lattice(z, "z")?;
        let jet = self.jet(z)?;
        Ok(jet.lambda + jet.ratios()[0])
    }

    /// `E2(z) = -E1'(z)`.
    pub fn e2(&self, z: C64) -> Result<C64> {
        self.ensure_off_lattice(z, "z")?;
        let [g, r2, _] = self.jet(z)?.ratios();
        Ok(g * g - r2)
    }

    /// `E2'(z) = -E1''(z)`.
    pub fn e2_prime(&self, z: C64) -> Result<C64> {
        self.ensure_off_lattice(z, "z")?;
        let [g, r2, r3] = self.jet(z)?.ratios();
        Ok(-(r3 - 3.0 * g * r2 + 2.0 * g * g * g))
    }

    /// Kronecker function `theta'(0) theta(z+q) / (theta(z) theta(q))`.
    pub fn phi(&self, z: C64, q: C64) -> Result<C64> {
        self.ensure_off_lattice(z, "z")?;
        self.ensure_off_lattice(q, "q")?;
        let jz = self.jet(z)?;
        let jq = self.jet(q)?;
        let jzq = self.jet(z + q)?;
        let factor = (jzq.log_factor - jz.log_factor - jq.log_factor).exp();
        Ok(self.theta_p0 * factor * jzq.d[0] / (jz.d[0] * jq.d[0]))
    }

    /// `f(z, q) = d/dq phi(z, q) = phi(z, q) (E1(z+q) - E1(q))`.
    pub fn f(&self, z: C64, q: C64) -> Result<C64> {
        self.ensure_off_lattice(z + q, "z+q")?;
        Ok(self.phi(z, q)? * (self.e1(z + q)? - self.e1(q)?))
    }

    /// `omega_alpha = (alpha_1 + alpha_2 tau) / N` for the canonical
    /// representative of `alpha`.
    pub fn omega(&self, alpha: ModeIndex) -> C64 {
        omega_of(alpha.a1() as f64, alpha.a2() as f64, alpha.n(), self.tau)
    }

    /// `exp(2 pi i alpha_2 z / N) phi(z, u)`; the caller supplies the full
    /// second argument `u`, typically `omega_alpha + q + eta`.
    pub fn phi_mode(&self, z: C64, u: C64, alpha: ModeIndex) -> Result<C64> {
        Ok(mode_exponent(z, alpha) * self.phi(z, u)?)
    }

    /// `exp(2 pi i alpha_2 z / N) f(z, u)`.
    pub fn f_mode(&self, z: C64, u: C64, alpha: ModeIndex) -> Result<C64> {
        Ok(mode_exponent(z, alpha) * self.f(z, u)?)
    }

    /// Value, first and second derivative in `z` of `phi_mode(z, u, alpha)`.
    pub fn phi_mode_z_jet(&self, z: C64, u: C64, alpha: ModeIndex) -> Result<[C64; 3]> {
        self.ensure_off_lattice(z + u, "z+u")?;
        let c = 2.0 * I * PI * alpha.a2() as f64 / alpha.n() as f64;
        let e = mode_exponent(z, alpha);
        let p = self.phi(z, u)?;
        let g = self.e1(z + u)? - self.e1(z)?;
        let dp = p * g;
        let d2p = p * (g * g - self.e2(z + u)? + self.e2(z)?);
        Ok([
            e * p,
            e * (c * p + dp),
            e * (c * c * p + 2.0 * c * dp + d2p),
        ])
    }
}

/// `(a1 + a2 tau) / n` for arbitrary (not necessarily canonical) labels.
pub fn omega_of(a1: f64, a2: f64, n: usize, tau: C64) -> C64 {
    (C64::new(a1, 0.0) + tau * a2) / n as f64
}

fn mode_exponent(z: C64, alpha: ModeIndex) -> C64 {
    (2.0 * I * PI * alpha.a2() as f64 * z / alpha.n() as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn params() -> EllipticParams {
        EllipticParams::new(c(0.0, 1.0), 3, c(0.21, 0.07)).unwrap()
    }

    fn brute_theta(z: C64, tau: C64) -> C64 {
        (-400..=400)
            .map(|k| {
                let x = k as f64 + 0.5;
                (I * PI * tau * x * x + 2.0 * I * PI * (z + 0.5) * x).exp()
            })
            .sum()
    }

    // Frozen from brute_theta(0.25, i) over k in [-400, 400].
    const THETA_QUARTER_I: C64 = C64::new(-0.6435897640385858, 0.0);

    #[test]
    fn theta_vanishes_at_origin() {
        assert!(theta(c(0.0, 0.0), c(0.0, 1.0), 0).unwrap().norm() < 1e-15);
    }

    #[test]
    fn theta_is_odd() {
        let z = c(0.3, 0.1);
        let tau = c(0.0, 1.0);
        let a = theta(z, tau, 0).unwrap();
        let b = theta(-z, tau, 0).unwrap();
        assert!((a + b).norm() < 1e-14 * a.norm());
    }

    #[test]
    fn theta_golden_value() {
        let brute = brute_theta(c(0.25, 0.0), c(0.0, 1.0));
        assert!((brute - THETA_QUARTER_I).norm() < 1e-15);
        let v = theta(c(0.25, 0.0), c(0.0, 1.0), 0).unwrap();
        assert!((v - THETA_QUARTER_I).norm() <= 1e-13 * v.norm().max(1.0));
    }

    #[test]
    fn theta_reduction_matches_brute_force() {
        let tau = c(0.3, 0.8);
        for z in [c(1.7, 0.9), c(-2.3, -1.1), c(0.4, 2.5)] {
            for order in 0..4 {
                let v = theta(z, tau, order).unwrap();
                let h = 1e-4;
                if order == 0 {
                    let b = brute_theta(z, tau);
                    assert!((v - b).norm() <= 1e-12 * b.norm().max(1.0), "{z} {v} {b}");
                } else {
                    let lo = theta(z - h, tau, order - 1).unwrap();
                    let hi = theta(z + h, tau, order - 1).unwrap();
                    let fd = (hi - lo) / (2.0 * h);
                    assert!(
                        (v - fd).norm() <= 1e-6 * v.norm().max(1.0),
                        "{order} {v} {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn bad_modulus() {
        assert!(matches!(
            theta(c(0.1, 0.0), c(1.0, 0.0), 0),
            Err(Error::BadModulus(_))
        ));
        assert!(matches!(
            EllipticParams::new(c(1.0, 0.0), 2, c(0.2, 0.1)),
            Err(Error::BadModulus(_))
        ));
        assert!(matches!(
            EllipticParams::new(c(0.0, 0.01), 2, c(0.2, 0.1)),
            Err(Error::BadModulus(_))
        ));
    }

    #[test]
    fn eta_on_lattice_is_rejected() {
        let r = EllipticParams::new(c(0.0, 1.0), 2, c(1.0, 1.0));
        assert!(matches!(r, Err(Error::PoleProximity { what: "eta", .. })));
    }

    #[test]
    fn tolerance_bounds() {
        assert!(PoleTolerance::new(0.0).is_err());
        let tol = PoleTolerance::new(0.2).unwrap();
        assert!(EllipticParams::with_tolerance(c(0.0, 1.0), 2, c(0.2, 0.1), tol).is_err());
    }

    #[test]
    fn e1_odd_and_quasi_periodic() {
        let p = params();
        let z = c(0.2, 0.05);
        let a = p.e1(z).unwrap();
        assert!((a + p.e1(-z).unwrap()).norm() < 1e-13);
        assert!((p.e1(z + 1.0).unwrap() - a).norm() < 1e-12);
        let shifted = p.e1(z + p.tau()).unwrap();
        assert!((shifted - (a - 2.0 * I * PI)).norm() < 1e-12);
    }

    #[test]
    fn e1_pole_is_reported() {
        let p = params();
        assert!(matches!(
            p.e1(c(1e-12, 0.0)),
            Err(Error::PoleProximity { .. })
        ));
        assert!(matches!(
            p.e1(p.tau() + 2.0),
            Err(Error::PoleProximity { .. })
        ));
    }

    #[test]
    fn e2_even_periodic_and_derivative_of_e1() {
        let p = params();
        let z = c(0.3, 0.2);
        let v = p.e2(z).unwrap();
        assert!((v - p.e2(-z).unwrap()).norm() < 1e-12);
        assert!((v - p.e2(z + p.tau()).unwrap()).norm() < 1e-12);
        let h = 1e-5;
        let fd = -(p.e1(z + h).unwrap() - p.e1(z - h).unwrap()) / (2.0 * h);
        assert!((v - fd).norm() < 1e-7);
        let fd2 = (p.e2(z + h).unwrap() - p.e2(z - h).unwrap()) / (2.0 * h);
        assert!((p.e2_prime(z).unwrap() - fd2).norm() < 1e-7);
    }

    #[test]
    fn kronecker_residue_symmetry_and_quasi_periodicity() {
        let p = params();
        let q = c(0.31, 0.17);
        let z = c(1e-6, 0.0);
        assert!((z * p.phi(z, q).unwrap() - 1.0).norm() < 1e-4);
        let z = c(0.12, -0.33);
        let a = p.phi(z, q).unwrap();
        assert!((a - p.phi(q, z).unwrap()).norm() < 1e-13 * a.norm());
        let b = p.phi(z + p.tau(), q).unwrap();
        assert!((b - (-2.0 * I * PI * q).exp() * a).norm() < 1e-12 * a.norm());
        assert!((p.phi(z + 1.0, q).unwrap() - a).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn kronecker_pole_names_argument() {
        let p = params();
        let err = p.phi(c(0.2, 0.1), c(0.0, 0.0)).unwrap_err();
        assert_eq!(
            err,
            Error::PoleProximity {
                what: "q",
                z: c(0.0, 0.0)
            }
        );
    }

    #[test]
    fn f_is_q_derivative_of_phi() {
        let p = params();
        let (z, q) = (c(0.23, 0.11), c(-0.17, 0.29));
        let h = 1e-5;
        let fd = (p.phi(z, q + h).unwrap() - p.phi(z, q - h).unwrap()) / (2.0 * h);
        let v = p.f(z, q).unwrap();
        assert!((v - fd).norm() < 1e-7);
    }

    #[test]
    fn f_from_fay_differentiated_in_q1() {
        // d/dq1 of the Fay identity f(z1,q1) phi(z2,q2) = f(z1-z2,q1) phi(z2,q1+q2)
        //   + phi(z1-z2,q1) f(z2,q1+q2) + phi(z2-z1,q2) f(z1,q1+q2)
        let p = params();
        let (z1, z2, q1, q2) = (c(0.21, 0.13), c(-0.11, 0.37), c(0.33, -0.12), c(0.07, 0.24));
        let lhs = p.f(z1, q1).unwrap() * p.phi(z2, q2).unwrap();
        let rhs = p.f(z1 - z2, q1).unwrap() * p.phi(z2, q1 + q2).unwrap()
            + p.phi(z1 - z2, q1).unwrap() * p.f(z2, q1 + q2).unwrap()
            + p.phi(z2 - z1, q2).unwrap() * p.f(z1, q1 + q2).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn phi_mode_special_cases() {
        let p = params();
        let z = c(0.19, 0.23);
        let u = c(0.4, 0.1);
        let zero = ModeIndex::zero(3);
        assert_eq!(p.phi_mode(z, u, zero).unwrap(), p.phi(z, u).unwrap());
        // alpha_2 = N is the canonical alpha_2 = 0 times exp(2 pi i z).
        let raw = (2.0 * I * PI * 3.0 * z / 3.0).exp() * p.phi(z, u).unwrap();
        let canon = p.phi_mode(z, u, ModeIndex::new(1, 3, 3)).unwrap();
        assert!((raw - canon * (2.0 * I * PI * z).exp()).norm() < 1e-13 * raw.norm());
    }

    #[test]
    fn phi_mode_jet_matches_finite_differences() {
        let p = params();
        let alpha = ModeIndex::new(1, 2, 3);
        let u = p.omega(alpha);
        let z = c(0.37, 0.12);
        let h = 1e-4;
        let [v, d1, d2] = p.phi_mode_z_jet(z, u, alpha).unwrap();
        let lo = p.phi_mode(z - h, u, alpha).unwrap();
        let hi = p.phi_mode(z + h, u, alpha).unwrap();
        assert!((d1 - (hi - lo) / (2.0 * h)).norm() < 1e-6 * d1.norm().max(1.0));
        assert!((d2 - (hi - 2.0 * v + lo) / (h * h)).norm() < 1e-4 * d2.norm().max(1.0));
    }
}
