use std::f64::consts::PI;

use rand::Rng;

use super::{admissible_points, max_of, rel, suite_rng, Case, VerifyReport};
use crate::elliptic::EllipticParams;
use crate::error::Result;
use crate::sine_algebra::ModeIndex;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Fay identity and its degeneration, quasi-periodicity of `E1` and `phi`,
/// the indexed product rule for `N = 2, 3` and invisibility of argument
/// reduction, each at `n_cases` random points.
pub fn identity_suite(params: &EllipticParams, seed: u64, n_cases: usize) -> VerifyReport {
    let mut rng = suite_rng(seed);
    let mut report = VerifyReport::new("identity", seed, params);
    report.push(Case::from_result(
        format!("Fay identity, {n_cases} points"),
        fay(params, &mut rng, n_cases),
        below(1e-12),
    ));
    report.push(Case::from_result(
        format!("Fay degeneration, {n_cases} points"),
        degeneration(params, &mut rng, n_cases),
        below(1e-12),
    ));
    report.push(Case::from_result(
        format!("quasi-periodicity of E1, {n_cases} points"),
        e1_periods(params, &mut rng, n_cases),
        below(1e-12),
    ));
    report.push(Case::from_result(
        format!("quasi-periodicity of phi, {n_cases} points"),
        phi_periods(params, &mut rng, n_cases),
        below(1e-12),
    ));
    for n in [2, 3] {
        let measured = params
            .with_n(n)
            .and_then(|p| indexed_product(&p, &mut rng, n_cases));
        report.push(Case::from_result(
            format!("indexed product rule, N = {n}, {n_cases} points x all (alpha, beta)"),
            measured,
            below(1e-11),
        ));
    }
    report.push(Case::from_result(
        format!("argument reduction, {n_cases} lattice shifts"),
        reduction_invisible(params, &mut rng, n_cases),
        below(1e-12),
    ));
    report
}

fn below(tolerance: f64) -> super::Criterion {
    super::Criterion::Below { tolerance }
}

fn fay(p: &EllipticParams, rng: &mut impl Rng, k: usize) -> Result<f64> {
    max_of((0..k).map(|_| {
        let x = admissible_points(p, rng, 4, |x| {
            vec![x[0], x[1], x[2], x[3], x[0] - x[1], x[2] + x[3]]
        })?;
        let (z1, z2, q1, q2) = (x[0], x[1], x[2], x[3]);
        let lhs = p.phi(z1, q1)? * p.phi(z2, q2)?;
        let rhs =
            p.phi(z1 - z2, q1)? * p.phi(z2, q1 + q2)? + p.phi(z2 - z1, q2)? * p.phi(z1, q1 + q2)?;
        Ok(rel(lhs, rhs))
    }))
}

fn degeneration(p: &EllipticParams, rng: &mut impl Rng, k: usize) -> Result<f64> {
    max_of((0..k).map(|_| {
        let x = admissible_points(p, rng, 3, |x| {
            vec![x[0], x[1], x[2], x[1] + x[2], x[0] + x[1] + x[2]]
        })?;
        let (z, q1, q2) = (x[0], x[1], x[2]);
        let lhs = p.phi(z, q1)? * p.phi(z, q2)?;
        let rhs = p.phi(z, q1 + q2)? * (p.e1(z)? + p.e1(q1)? + p.e1(q2)? - p.e1(q1 + q2 + z)?);
        Ok(rel(lhs, rhs))
    }))
}

fn e1_periods(p: &EllipticParams, rng: &mut impl Rng, k: usize) -> Result<f64> {
    let tau = p.tau();
    max_of((0..k).map(|_| {
        let z = admissible_points(p, rng, 1, |x| x.to_vec())?[0];
        let e = p.e1(z)?;
        Ok(rel(e, p.e1(z + 1.0)?).max(rel(e - 2.0 * PI * I, p.e1(z + tau)?)))
    }))
}

fn phi_periods(p: &EllipticParams, rng: &mut impl Rng, k: usize) -> Result<f64> {
    let tau = p.tau();
    max_of((0..k).map(|_| {
        let x = admissible_points(p, rng, 2, |x| vec![x[0], x[1], x[0] + x[1]])?;
        let (z, q) = (x[0], x[1]);
        let f = p.phi(z, q)?;
        let shifted = (-2.0 * PI * I * q).exp() * f;
        Ok(rel(f, p.phi(z + 1.0, q)?).max(rel(shifted, p.phi(z + tau, q)?)))
    }))
}

/// `phi_a(z, w_a + q1) phi_b(z, w_b + q2) = phi_{a+b}(z, w_a + w_b + q1 + q2)
/// (E1(z) + E1(w_a + q1) + E1(w_b + q2) - E1(z + w_a + w_b + q1 + q2))`
/// with `w_a + w_b` summed as given rather than reduced.
fn indexed_product(p: &EllipticParams, rng: &mut impl Rng, k: usize) -> Result<f64> {
    let n = p.n();
    let modes: Vec<ModeIndex> = ModeIndex::all(n).collect();
    max_of((0..k).map(|_| {
        let x = admissible_points(p, rng, 3, |x| {
            let mut out = vec![x[0]];
            for &a in &modes {
                let wa = p.omega(a);
                out.push(wa + x[1]);
                out.push(wa + x[2]);
                for &b in &modes {
                    let w = wa + p.omega(b) + x[1] + x[2];
                    out.push(w);
                    out.push(w + x[0]);
                }
            }
            out
        })?;
        let (z, q1, q2) = (x[0], x[1], x[2]);
        let mut worst = 0.0f64;
        for &a in &modes {
            let ua = p.omega(a) + q1;
            let lhs_a = p.phi_mode(z, ua, a)?;
            for &b in &modes {
                let ub = p.omega(b) + q2;
                let lhs = lhs_a * p.phi_mode(z, ub, b)?;
                let u = ua + ub;
                // phi_{a+b} at the unreduced label: exp(2 pi i (a2 + b2) z / N) phi(z, u).
                let ab2 = (a.a2() + b.a2()) as f64;
                let mode = (2.0 * PI * I * ab2 * z / n as f64).exp() * p.phi(z, u)?;
                let rhs = mode * (p.e1(z)? + p.e1(ua)? + p.e1(ub)? - p.e1(z + u)?);
                worst = worst.max(rel(lhs, rhs));
            }
        }
        Ok(worst)
    }))
}

/// `theta`, `E1` and `phi` at `z + a + b tau` against their values at `z`
/// times the quasi-periodicity factors, for `|a|, |b| <= 3`.
fn reduction_invisible(p: &EllipticParams, rng: &mut impl Rng, k: usize) -> Result<f64> {
    let tau = p.tau();
    max_of((0..k).map(|_| {
        let x = admissible_points(p, rng, 2, |x| vec![x[0], x[1], x[0] + x[1]])?;
        let (z, q) = (x[0], x[1]);
        let a = rng.random_range(-3i32..=3);
        let b = rng.random_range(-3i32..=3);
        let (af, bf) = (a as f64, b as f64);
        let w = z + af + tau * bf;
        let sign = if (a + b).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        let theta =
            sign * (-PI * I * bf * bf * tau - 2.0 * PI * I * bf * z).exp() * p.theta(z, 0)?;
        let e1 = p.e1(z)? - 2.0 * PI * I * bf;
        let phi = (-2.0 * PI * I * bf * q).exp() * p.phi(z, q)?;
        Ok(rel(theta, p.theta(w, 0)?)
            .max(rel(e1, p.e1(w)?))
            .max(rel(phi, p.phi(w, q)?)))
    }))
}
