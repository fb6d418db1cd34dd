//! Integrability diagnostics evaluated on single states.

use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::{CMatrix, C64};

use super::state::ModelState;

/// Default finite-difference step for Lax residuals.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Spectral sample points closer than this to the lattice are moved.
pub const SPECTRAL_EXCLUSION: f64 = 0.02;

/// `z` itself if it keeps [`SPECTRAL_EXCLUSION`] from the lattice, otherwise
/// the first point of a fixed spiral around `z` that does.
pub fn admissible_point(params: &EllipticParams, z: C64) -> C64 {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut k = 0;
    let mut w = z;
    while params.is_near_lattice(w, SPECTRAL_EXCLUSION) {
        k += 1;
        let r = 0.01 * k as f64;
        w = z + C64::from_polar(r, golden * k as f64);
    }
    w
}

/// `0.17 + 0.13 i Im(tau)`, `0.31 + 0.42 i Im(tau)`, `-0.23 + 0.27 i Im(tau)`,
/// each moved off the lattice if needed.
pub fn default_spectral_points(params: &EllipticParams) -> Vec<C64> {
    let t = params.tau().im;
    [(0.17, 0.13), (0.31, 0.42), (-0.23, 0.27)]
        .into_iter()
        .map(|(x, y)| admissible_point(params, C64::new(x, y * t)))
        .collect()
}

/// `tr L^k(z)` for `k = 1..=kmax`, one row per sample point.
pub fn spectral_invariants(
    params: &EllipticParams,
    state: &ModelState,
    z_samples: &[C64],
    kmax: usize,
) -> Result<Vec<Vec<C64>>> {
    z_samples
        .iter()
        .map(|&z| {
            let l = state.lax(params, z)?;
            let mut p = l.clone();
            let mut row = Vec::with_capacity(kmax);
            for k in 1..=kmax {
                if k > 1 {
                    p = &p * &l;
                }
                row.push(p.trace());
            }
            Ok(row)
        })
        .collect()
}

/// Largest relative change `|I - I0| / |I0|` over all entries of two
/// invariant tables (absolute change where `I0 = 0`).
pub fn invariant_drift(initial: &[Vec<C64>], current: &[Vec<C64>]) -> f64 {
    initial
        .iter()
        .flatten()
        .zip(current.iter().flatten())
        .map(|(a, b)| {
            let d = (b - a).norm();
            if a.norm() > 0.0 {
                d / a.norm()
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

/// `|| dL/dt - [L, M] - (mu-term) ||_F` with `dL/dt` from the fourth-order
/// central difference along the family's flow. With `qdot = None` the state
/// moves on the constraint surface and the `mu`-term vanishes; otherwise
/// positions move with `qdot` while spins keep their equations of motion.
pub fn lax_residual(
    params: &EllipticParams,
    state: &ModelState,
    qdot: Option<&[C64]>,
    z: C64,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let x = state.to_vec();
    let mut r = state.rate(params)?;
    let extra = match qdot {
        None => None,
        Some(v) => {
            let m = match state.positions() {
                Some(q) => q.len(),
                None => {
                    return Err(Error::DimensionMismatch(format!(
                        "family {} has no positions to move off the constraint",
                        state.family()
                    )))
                }
            };
            if v.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "expected {m} velocities, got {}",
                    v.len()
                )));
            }
            r[..m].copy_from_slice(v);
            Some(state.mu_term(params, v, z)?)
        }
    };
    let at = |k: f64| -> Result<CMatrix> {
        let y: Vec<C64> = x.iter().zip(&r).map(|(a, b)| a + b * (k * h)).collect();
        state.with_values(&y)?.lax(params, z)
    };
    let ldot = ((at(1.0)? - at(-1.0)?) * C64::new(8.0, 0.0) - at(2.0)? + at(-2.0)?)
        / C64::new(12.0 * h, 0.0);
    let l = state.lax(params, z)?;
    let m = state.m_matrix(params, z)?;
    let mut res = ldot - (&l * &m - &m * &l);
    if let Some(e) = extra {
        res -= e;
    }
    Ok(res.norm())
}

/// `sigma_2 / sigma_1` of the full spin matrix for the block families.
pub fn rank_gap(state: &ModelState) -> Option<f64> {
    if state.positions().is_none() || state.n() == 1 {
        return None;
    }
    let s = state.spin_matrix();
    let mut sv: Vec<f64> = s
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    match sv.as_slice() {
        [s1, s2, ..] if *s1 > 0.0 => Some(s2 / s1),
        _ => None,
    }
}

/// Weights of the first-derivative stencil at offset 0 on the nodes `x`.
pub(crate) fn derivative_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let denom: f64 = (0..x.len())
                .filter(|&k| k != j)
                .map(|k| x[j] - x[k])
                .product();
            let num: f64 = (0..x.len())
                .filter(|&m| m != j)
                .map(|m| {
                    (0..x.len())
                        .filter(|&k| k != j && k != m)
                        .map(|k| -x[k])
                        .product::<f64>()
                })
                .sum();
            num / denom
        })
        .collect()
}
