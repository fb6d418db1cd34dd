use rand::Rng;

use super::{max_of, rel_matrix, suite_rng, Case, Criterion, VerifyReport, EXCLUSION_RADIUS};
use crate::dynamics::{
    default_spectral_points, integrate, DiagnosticsConfig, IntegratorConfig, ModelState,
};
use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::models::multitop::{nm_eom, nm_lax, nm_m, nm_qddot, MultiTopState};
use crate::models::rank1::{rank1_embed, rank1_eom};
use crate::models::sample::{random_rank1, random_spin_rs, random_top};
use crate::models::spin_rs::{rs_eom, rs_lax, rs_m};
use crate::models::top::{top_eom, top_lax, top_m};
use crate::models::{block, trace_over_n};
use crate::{CMatrix, C64};

const SEEDS: usize = 20;

/// Degenerations of the `GL(NM)` tops: `N = 1` against spin
/// Ruijsenaars-Schneider (`M = 3`), `M = 1` against the relativistic top
/// (`N = 3`, `M`-matrices modulo scalars), the rank-one reduction against
/// the diagonal blocks of the full flow (`N = 2`, `M = 2, 3`), and both
/// degenerations along integrated trajectories. The curve and `eta` come
/// from `params`.
pub fn reduction_suite(params: &EllipticParams, seed: u64) -> VerifyReport {
    let mut rng = suite_rng(seed);
    let mut report = VerifyReport::new("reduction", seed, params);
    let below = |tolerance| Criterion::Below { tolerance };
    let p1 = params.with_n(1);
    let p2 = params.with_n(2);
    let p3 = params.with_n(3);
    report.push(Case::from_result(
        format!("N = 1 tops = spin RS (Lax, M, EOM), M = 3, {SEEDS} seeds"),
        p1.clone().and_then(|p| n1_states(&p, &mut rng)),
        below(1e-13),
    ));
    report.push(Case::from_result(
        format!("M = 1 tops = top (Lax, EOM, M mod scalars), N = 3, {SEEDS} seeds"),
        p3.clone().and_then(|p| m1_states(&p, &mut rng)),
        below(1e-13),
    ));
    for m in [2, 3] {
        report.push(Case::from_result(
            format!("rank-one EOM = diagonal blocks of full EOM, N = 2, M = {m}, {SEEDS} seeds"),
            p2.clone().and_then(|p| rank1_blocks(&p, m, &mut rng)),
            below(1e-10),
        ));
    }
    report.push(Case::from_result(
        "N = 1 tops = spin RS along t in [0, 1], M = 3",
        p1.and_then(|p| n1_trajectory(&p, &mut rng)),
        below(1e-12),
    ));
    report.push(Case::from_result(
        "M = 1 tops = top along t in [0, 1], N = 3",
        p3.and_then(|p| m1_trajectory(&p, &mut rng)),
        below(1e-12),
    ));
    report
}

fn n1_states(p: &EllipticParams, rng: &mut impl Rng) -> Result<f64> {
    let zs = default_spectral_points(p);
    max_of((0..SEEDS).map(|_| {
        let rs = random_spin_rs(p, 3, rng, EXCLUSION_RADIUS)?;
        let nm = MultiTopState::new(1, rs.q.clone(), rs.s.clone())?;
        let mut worst = 0.0f64;
        for &z in &zs {
            worst = worst.max(rel_matrix(&rs_lax(p, &rs, z)?, &nm_lax(p, &nm, z)?));
            worst = worst.max(rel_matrix(&rs_m(p, &rs, z)?, &nm_m(p, &nm, z)?));
        }
        let (a, b) = (rs_eom(p, &rs)?, nm_eom(p, &nm)?);
        worst = worst.max(rel_matrix(&a.sdot, &b.sdot));
        worst = worst.max(rel_matrix(&column(&a.qdot), &column(&b.qdot)));
        Ok(worst)
    }))
}

fn m1_states(p: &EllipticParams, rng: &mut impl Rng) -> Result<f64> {
    let zs = default_spectral_points(p);
    let n = p.n();
    max_of((0..SEEDS).map(|_| {
        let top = random_top(p, rng);
        let q = super::cell_point(p, rng);
        let nm = MultiTopState::new(n, vec![q], top.s.clone())?;
        let mut worst = 0.0f64;
        for &z in &zs {
            worst = worst.max(rel_matrix(&top_lax(p, &top, z)?, &nm_lax(p, &nm, z)?));
            let diff = nm_m(p, &nm, z)? - top_m(p, &top, z)?;
            let scalar = CMatrix::identity(n, n) * trace_over_n(&diff);
            let scale = top_m(p, &top, z)?
                .iter()
                .map(|x| x.norm())
                .fold(1.0, f64::max);
            worst = worst.max((diff - scalar).iter().map(|x| x.norm()).fold(0.0, f64::max) / scale);
        }
        worst = worst.max(rel_matrix(&top_eom(p, &top, true)?, &nm_eom(p, &nm)?.sdot));
        Ok(worst)
    }))
}

fn rank1_blocks(p: &EllipticParams, m: usize, rng: &mut impl Rng) -> Result<f64> {
    let n = p.n();
    max_of((0..SEEDS).map(|_| {
        let r1 = random_rank1(p, m, rng, EXCLUSION_RADIUS)?;
        let full = rank1_embed(&r1)?;
        let reduced = rank1_eom(p, &r1)?;
        let sdot = nm_eom(p, &full)?.sdot;
        let mut worst = 0.0f64;
        for i in 0..m {
            worst = worst.max(rel_matrix(&block(&sdot, n, i, i), &reduced.diag_dot[i]));
        }
        worst = worst.max(rel_matrix(
            &column(&nm_qddot(p, &full)?),
            &column(&reduced.qddot),
        ));
        Ok(worst)
    }))
}

fn horizon() -> IntegratorConfig {
    IntegratorConfig {
        dt: 1e-3,
        steps: 1000,
        record_every: 10,
    }
}

fn run(p: &EllipticParams, st: &ModelState) -> Result<Vec<Vec<C64>>> {
    let traj =
        integrate(p, st, &horizon(), &DiagnosticsConfig::none()).map_err(|e| e.error().clone())?;
    Ok(traj.states.iter().map(ModelState::to_vec).collect())
}

/// Largest difference over all records relative to `max(1, |x|)` at that
/// record.
fn trajectory_gap(a: &[Vec<C64>], b: &[Vec<C64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(
            "trajectories have different record counts".into(),
        ));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| rel_matrix(&column(x), &column(y)))
        .fold(0.0, f64::max))
}

fn n1_trajectory(p: &EllipticParams, rng: &mut impl Rng) -> Result<f64> {
    let rs = random_spin_rs(p, 3, rng, EXCLUSION_RADIUS)?;
    let nm = MultiTopState::new(1, rs.q.clone(), rs.s.clone())?;
    trajectory_gap(
        &run(p, &ModelState::SpinRs(rs))?,
        &run(p, &ModelState::Multitop(nm))?,
    )
}

fn m1_trajectory(p: &EllipticParams, rng: &mut impl Rng) -> Result<f64> {
    let top = random_top(p, rng);
    let q = super::cell_point(p, rng);
    let nm = MultiTopState::new(p.n(), vec![q], top.s.clone())?;
    let a = run(p, &ModelState::Top(top))?;
    // Drop the position, which the top does not carry.
    let b: Vec<Vec<C64>> = run(p, &ModelState::Multitop(nm))?
        .into_iter()
        .map(|x| x[1..].to_vec())
        .collect();
    trajectory_gap(&a, &b)
}

fn column(x: &[C64]) -> CMatrix {
    CMatrix::from_column_slice(x.len(), 1, x)
}
