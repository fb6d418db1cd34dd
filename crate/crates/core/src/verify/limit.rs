use rand::Rng;

use super::{
    admissible_points, log_slope, rel, rel_matrix, suite_rng, Case, Criterion, VerifyReport,
    EXCLUSION_RADIUS,
};
use crate::elliptic::EllipticParams;
use crate::error::Result;
use crate::models::multitop::{nm_eom, nm_qddot, MultiTopState};
use crate::models::nonrel::{nonrel_multitop_eom, nonrel_rank1_eom, spin_cm_eom};
use crate::models::rank1::{rank1_eom, Rank1State};
use crate::models::sample::{
    complex_normal_matrix, random_nonrel_multitop, random_nonrel_rank1, random_spin_cm,
};
use crate::models::spin_rs::{rs_eom, SpinRsState};
use crate::models::top::{top_eom, TopState};
use crate::models::{
    apply_op, block, f_coeffs_jet, i_coeffs_at, j_eta_q_coeffs, j_q_prime_coeffs, set_block,
    trace_over_n,
};
use crate::sine_algebra::ModeIndex;
use crate::{CMatrix, C64};

/// Steps of the three-point fit for the `J^{eta,q}` expansion.
const EXPANSION_ETAS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Deformations at which the rescaled relativistic flows are compared with
/// their non-relativistic limits.
const LIMIT_ETAS: [f64; 2] = [1e-2, 1e-3];
/// Step of the fourth-order stencil for `d/d eta` at `eta = 0`.
const ETA_STEP: f64 = 2e-4;

/// Convergence orders in `eta`: the second-order expansion of `J^{eta,q}`
/// (expected order 3), spin equations of motion of the four relativistic
/// families rescaled by `1/eta` against their limits (order 1) with the
/// accelerations rescaled by `1/eta^2` (order at least 1), and the
/// reflection symmetry of `d/d eta I_alpha^{eta,q}` at `eta = 0`. Only the
/// curve of `params` is used.
pub fn limit_suite(params: &EllipticParams, seed: u64) -> VerifyReport {
    let mut rng = suite_rng(seed);
    let mut report = VerifyReport::new("limit", seed, params);
    let order1 = Criterion::Near {
        target: 1.0,
        tolerance: 0.1,
    };
    let at_least1 = Criterion::AtLeast { minimum: 0.9 };

    report.push(Case::from_result(
        "J^{eta,q} second-order expansion, Richardson order, N = 2",
        params.with_n(2).and_then(|p| expansion_slope(&p, &mut rng)),
        Criterion::Near {
            target: 3.0,
            tolerance: 0.2,
        },
    ));

    let limits: [(&str, LimitFn); 4] = [
        ("spin RS -> spin CM, M = 3", spin_rs_limit),
        ("top -> non-relativistic top, N = 3", top_limit),
        ("GL(NM) tops, N = 2, M = 2", multitop_limit),
        ("rank-one tops, N = 2, M = 2", rank1_limit),
    ];
    for (name, f) in limits {
        match f(params, &mut rng) {
            Ok(errors) => {
                let (s, a) = slopes(&errors);
                report.push(Case::new(
                    format!("{name}: spin EOM order in eta"),
                    s,
                    order1,
                ));
                if let Some(a) = a {
                    report.push(Case::new(
                        format!("{name}: acceleration order in eta"),
                        a,
                        at_least1,
                    ));
                }
            }
            Err(e) => report.push(Case::from_result(
                format!("{name}: spin EOM order in eta"),
                Err(e),
                order1,
            )),
        }
    }

    for n in [2, 3] {
        let measured = params.with_n(n).and_then(|p| eta_derivatives(&p, &mut rng));
        let (even, jet) = match measured {
            Ok((a, b)) => (Ok(a), Ok(b)),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        report.push(Case::from_result(
            format!("d/d eta I_(-alpha)^(eta,q) = d/d eta I_alpha^(eta,-q) at eta = 0, N = {n}"),
            even,
            Criterion::Below { tolerance: 1e-7 },
        ));
        report.push(Case::from_result(
            format!("d/d eta I_alpha^(eta,q) = N F'_alpha(Nq) at eta = 0, N = {n}"),
            jet,
            Criterion::Below { tolerance: 1e-7 },
        ));
    }
    report
}

/// Errors of the rescaled spin equations and, where the family has
/// positions, of the rescaled accelerations, one entry per `LIMIT_ETAS`.
type LimitErrors = Vec<(f64, Option<f64>)>;
type LimitFn = fn(&EllipticParams, &mut rand_chacha::ChaCha8Rng) -> Result<LimitErrors>;

fn slopes(errors: &LimitErrors) -> (f64, Option<f64>) {
    let s: Vec<f64> = errors.iter().map(|e| e.0).collect();
    let spin = log_slope(&LIMIT_ETAS, &s);
    let acc: Option<Vec<f64>> = errors.iter().map(|e| e.1).collect();
    (spin, acc.map(|a| log_slope(&LIMIT_ETAS, &a)))
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn column(x: &[C64]) -> CMatrix {
    CMatrix::from_column_slice(x.len(), 1, x)
}

fn scaled(x: &[C64], s: f64) -> CMatrix {
    column(x) * real(s)
}

fn expansion_slope(p: &EllipticParams, rng: &mut impl Rng) -> Result<f64> {
    let n = p.n();
    let q = admissible_points(p, rng, 1, |x| {
        ModeIndex::all(n)
            .flat_map(|a| EXPANSION_ETAS.iter().map(move |&e| (a, e)))
            .map(|(a, e)| p.omega(a) + x[0] + e)
            .chain(ModeIndex::all(n).map(|a| p.omega(a) + x[0]))
            .collect()
    })?[0];
    let s = complex_normal_matrix(n, n, rng);
    let j = apply_op(&s, &j_eta_q_coeffs(p, q, false)?)?;
    let jp = apply_op(&s, &j_q_prime_coeffs(p, q)?)?;
    let residuals = EXPANSION_ETAS
        .iter()
        .map(|&eta| {
            let pe = p.with_eta(real(eta))?;
            let full = apply_op(&s, &j_eta_q_coeffs(&pe, q, true)?)?;
            Ok((full - &j * real(eta) - &jp * real(0.5 * eta * eta)).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(log_slope(&EXPANSION_ETAS, &residuals))
}

fn spin_rs_limit(
    params: &EllipticParams,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<LimitErrors> {
    let p = params.with_n(1)?;
    let cm = random_spin_cm(&p, 3, rng, EXCLUSION_RADIUS)?;
    let limit = spin_cm_eom(&p, &cm)?;
    LIMIT_ETAS
        .iter()
        .map(|&eta| {
            let pe = p.with_eta(real(eta))?;
            let mut s = cm.s.clone();
            for (i, v) in cm.v.iter().enumerate() {
                s[(i, i)] = v * eta;
            }
            let e = rs_eom(&pe, &SpinRsState::new(cm.q.clone(), s)?)?;
            let qddot: Vec<C64> = (0..cm.m()).map(|i| e.sdot[(i, i)]).collect();
            Ok((
                rel_matrix(&limit.sdot, &(e.sdot * real(1.0 / eta))),
                Some(rel_matrix(
                    &column(&limit.vdot),
                    &scaled(&qddot, 1.0 / (eta * eta)),
                )),
            ))
        })
        .collect()
}

fn top_limit(params: &EllipticParams, rng: &mut rand_chacha::ChaCha8Rng) -> Result<LimitErrors> {
    let p = params.with_n(3)?;
    let n = p.n();
    let mut s = complex_normal_matrix(n, n, rng);
    let t = trace_over_n(&s);
    s -= CMatrix::identity(n, n) * t;
    let top = TopState::new(s)?;
    let limit = top_eom(&p, &top, false)?;
    LIMIT_ETAS
        .iter()
        .map(|&eta| {
            let sdot = top_eom(&p.with_eta(real(eta))?, &top, true)?;
            Ok((rel_matrix(&limit, &(sdot * real(1.0 / eta))), None))
        })
        .collect()
}

fn multitop_limit(
    params: &EllipticParams,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<LimitErrors> {
    let p = params.with_n(2)?;
    let n = p.n();
    let st = random_nonrel_multitop(&p, 2, rng, EXCLUSION_RADIUS)?;
    let limit = nonrel_multitop_eom(&p, &st)?;
    LIMIT_ETAS
        .iter()
        .map(|&eta| {
            let pe = p.with_eta(real(eta))?;
            let mut s = st.s.clone();
            for (i, v) in st.v.iter().enumerate() {
                let b = block(&s, n, i, i) + CMatrix::identity(n, n) * (v * eta);
                set_block(&mut s, n, i, i, &b);
            }
            let rel_st = MultiTopState::new(n, st.q.clone(), s)?;
            let sdot = nm_eom(&pe, &rel_st)?.sdot;
            let qddot = nm_qddot(&pe, &rel_st)?;
            Ok((
                rel_matrix(&limit.sdot, &(sdot * real(1.0 / eta))),
                Some(rel_matrix(
                    &column(&limit.vdot),
                    &scaled(&qddot, 1.0 / (eta * eta)),
                )),
            ))
        })
        .collect()
}

/// The relativistic rank-one flow fixes `qdot_i = rho^i xi^i / N`, so the
/// comparison runs on data with `rho^i xi^i = 0` and vanishing velocities.
fn rank1_limit(params: &EllipticParams, rng: &mut rand_chacha::ChaCha8Rng) -> Result<LimitErrors> {
    let p = params.with_n(2)?;
    let n = p.n();
    let mut st = random_nonrel_rank1(&p, 2, rng, EXCLUSION_RADIUS)?;
    st.v.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    let limit = nonrel_rank1_eom(&p, &st)?;
    let r1 = Rank1State::new(n, st.q.clone(), st.xi.clone(), st.rho.clone())?;
    LIMIT_ETAS
        .iter()
        .map(|&eta| {
            let e = rank1_eom(&p.with_eta(real(eta))?, &r1)?;
            let spin = (0..st.m())
                .map(|i| rel_matrix(&limit.diag_dot[i], &(&e.diag_dot[i] * real(1.0 / eta))))
                .fold(0.0, f64::max);
            Ok((
                spin,
                Some(rel_matrix(
                    &column(&limit.vdot),
                    &scaled(&e.qddot, 1.0 / (eta * eta)),
                )),
            ))
        })
        .collect()
}

/// Worst residuals of the reflection relation and of the analytic
/// derivative, over five random `q`.
fn eta_derivatives(p: &EllipticParams, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let n = p.n();
    let nf = n as f64;
    let h = ETA_STEP;
    let d_eta = |q: C64| -> Result<Vec<C64>> {
        let at = |e: f64| i_coeffs_at(p, q, real(e));
        let (a, b, c, d) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
        Ok(ModeIndex::all(n)
            .map(|k| (8.0 * (a.get(k) - b.get(k)) - c.get(k) + d.get(k)) / (12.0 * h))
            .collect())
    };
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let q = admissible_points(p, rng, 1, |x| {
            [-2.0, -1.0, 0.0, 1.0, 2.0]
                .iter()
                .flat_map(|&k| [(x[0] + k * h) * nf, (-x[0] + k * h) * nf])
                .collect()
        })?[0];
        let plus = d_eta(q)?;
        let minus = d_eta(-q)?;
        let jet = &f_coeffs_jet(p, q)?[1];
        for alpha in ModeIndex::all(n) {
            worst.0 = worst
                .0
                .max(rel(plus[alpha.neg().flat()], minus[alpha.flat()]));
            worst.1 = worst.1.max(rel(jet.get(alpha) * nf, plus[alpha.flat()]));
        }
    }
    Ok(worst)
}
