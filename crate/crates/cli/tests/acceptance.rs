//! Acceptance battery. Runs every criterion at its stated settings, prints
//! one PASS/FAIL line each and exits non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use elliptic_tops::dynamics::{
    default_spectral_points, integrate, lax_residual, DiagnosticsConfig, IntegratorConfig,
    ModelState,
};
use elliptic_tops::elliptic::EllipticParams;
use elliptic_tops::models::multitop::{nm_eom, nm_sdot_offdiag_grouped};
use elliptic_tops::models::rank1::rank1_embed;
use elliptic_tops::models::sample::{
    complex_normal, random_multitop, random_rank1, random_spin_rs, random_top,
};
use elliptic_tops::verify::{
    fourier_suite, identity_suite, limit_suite, reduction_suite, VerifyReport, EXCLUSION_RADIUS,
};
use elliptic_tops::{CMatrix, Result, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const SEEDS: u64 = 20;
const FD_STEP: f64 = 1e-6;
const LAX_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn params(tau: C64, n: usize) -> EllipticParams {
    EllipticParams::new(tau, n, C64::new(0.21, 0.07)).unwrap()
}

fn square(n: usize) -> EllipticParams {
    params(C64::new(0.0, 1.0), n)
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED.wrapping_mul(1_000_003).wrapping_add(tag))
}

/// Case count when everything passes, otherwise the failing cases.
fn summarize(reports: &[VerifyReport]) -> Outcome {
    let pass = reports.iter().all(VerifyReport::passed);
    let failures: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.failures()
                .map(move |c| format!("{}: {} ({:e})", r.suite, c.description, c.measured))
        })
        .collect();
    let cases: usize = reports.iter().map(|r| r.cases.len()).sum();
    if pass {
        Outcome::new(true, format!("{cases} cases"))
    } else {
        Outcome::new(false, failures.join("; "))
    }
}

fn max_lax(p: &EllipticParams, st: &ModelState, v: Option<&[C64]>) -> Result<f64> {
    let mut worst = 0.0f64;
    for z in default_spectral_points(p) {
        worst = worst.max(lax_residual(p, st, v, z, FD_STEP)?);
    }
    Ok(worst)
}

/// `|dL/dt - [L, M]|` along an off-constraint motion, without the
/// mu-term.
fn residual_without_mu(p: &EllipticParams, st: &ModelState, v: &[C64], z: C64) -> Result<f64> {
    let x = st.to_vec();
    let mut r = st.rate(p)?;
    r[..v.len()].copy_from_slice(v);
    let at = |k: f64| -> Result<CMatrix> {
        let y: Vec<C64> = x
            .iter()
            .zip(&r)
            .map(|(a, b)| a + b * (k * FD_STEP))
            .collect();
        st.with_values(&y)?.lax(p, z)
    };
    let ldot = ((at(1.0)? - at(-1.0)?) * C64::new(8.0, 0.0) - at(2.0)? + at(-2.0)?)
        / C64::new(12.0 * FD_STEP, 0.0);
    let l = st.lax(p, z)?;
    let m = st.m_matrix(p, z)?;
    Ok((ldot - (&l * &m - &m * &l)).norm())
}

fn random_velocities(m: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..m).map(|_| complex_normal(rng)).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let reports: Vec<VerifyReport> = [C64::new(0.0, 1.0), C64::new(0.3, 0.8)]
        .into_iter()
        .map(|tau| identity_suite(&params(tau, 1), SEED, 200))
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let s = summarize(&reports);
    Outcome::new(
        s.pass && secs < 5.0,
        format!("{}, {secs:.2} s (limit 5 s)", s.detail),
    )
}

fn criterion_2() -> Outcome {
    summarize(&[fourier_suite(&square(1), &[2, 3, 4, 5], SEED)])
}

fn criterion_3() -> Outcome {
    let p = square(1);
    let run = || -> Result<(f64, f64, f64)> {
        let (mut on, mut with_mu, mut without_mu) = (0.0f64, 0.0f64, f64::INFINITY);
        for m in [2, 3] {
            for seed in 0..SEEDS {
                let mut g = rng(300 + 10 * m as u64 + seed);
                let st = ModelState::SpinRs(random_spin_rs(&p, m, &mut g, EXCLUSION_RADIUS)?);
                on = on.max(max_lax(&p, &st, None)?);
                let v = random_velocities(m, &mut g);
                with_mu = with_mu.max(max_lax(&p, &st, Some(&v))?);
                for z in default_spectral_points(&p) {
                    without_mu = without_mu.min(residual_without_mu(&p, &st, &v, z)?);
                }
            }
        }
        Ok((on, with_mu, without_mu))
    };
    match run() {
        Ok((on, with_mu, without_mu)) => Outcome::new(
            on < LAX_TOL && with_mu < LAX_TOL && without_mu > 1e-3,
            format!(
                "on-constraint {on:.2e}, with mu {with_mu:.2e} (< {LAX_TOL:e}); without mu min {without_mu:.2e} (> 1e-3)"
            ),
        ),
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn criterion_4() -> Outcome {
    let run = || -> Result<(f64, f64)> {
        let (mut lax, mut trace) = (0.0f64, 0.0f64);
        for n in [2, 3] {
            let p = square(n);
            for seed in 0..SEEDS {
                let top = random_top(&p, &mut rng(400 + 10 * n as u64 + seed));
                let tr0 = top.s.trace();
                let st = ModelState::Top(top);
                lax = lax.max(max_lax(&p, &st, None)?);
                let cfg = IntegratorConfig::new(1e-3, 1000, 10)?;
                let traj = integrate(&p, &st, &cfg, &DiagnosticsConfig::none())
                    .map_err(|e| e.error().clone())?;
                for s in &traj.states {
                    trace = trace.max((s.spin_matrix().trace() - tr0).norm());
                }
            }
        }
        Ok((lax, trace))
    };
    match run() {
        Ok((lax, trace)) => Outcome::new(
            lax < LAX_TOL && trace < 1e-13,
            format!("Lax {lax:.2e} (< {LAX_TOL:e}), tr S drift {trace:.2e} (< 1e-13)"),
        ),
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

const BLOCK_SIZES: [(usize, usize); 3] = [(2, 2), (2, 3), (3, 2)];

fn criterion_5() -> Outcome {
    let run = || -> Result<(f64, f64, f64)> {
        let (mut on, mut with_mu, mut forms) = (0.0f64, 0.0f64, 0.0f64);
        for (n, m) in BLOCK_SIZES {
            let p = square(n);
            for seed in 0..SEEDS {
                let mut g = rng(500 + 100 * n as u64 + 10 * m as u64 + seed);
                let nm = random_multitop(&p, m, &mut g, EXCLUSION_RADIUS)?;
                let full = nm_eom(&p, &nm)?.sdot;
                let mut off = full.clone();
                for i in 0..m {
                    off.view_mut((i * n, i * n), (n, n))
                        .fill(C64::new(0.0, 0.0));
                }
                let grouped = nm_sdot_offdiag_grouped(&p, &nm)?;
                forms = forms.max((off - grouped).norm() / full.norm().max(1.0));
                let st = ModelState::Multitop(nm);
                on = on.max(max_lax(&p, &st, None)?);
                let v = random_velocities(m, &mut g);
                with_mu = with_mu.max(max_lax(&p, &st, Some(&v))?);
            }
        }
        Ok((on, with_mu, forms))
    };
    match run() {
        Ok((on, with_mu, forms)) => Outcome::new(
            on < LAX_TOL && with_mu < LAX_TOL && forms < 1e-12,
            format!(
                "on-constraint {on:.2e}, with mu0 {with_mu:.2e} (< {LAX_TOL:e}); EOM forms {forms:.2e} (< 1e-12)"
            ),
        ),
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn reduction_cases(keep: impl Fn(&str) -> bool) -> VerifyReport {
    let mut r = reduction_suite(&square(1), SEED);
    r.cases.retain(|c| keep(&c.description));
    r
}

fn criterion_6() -> Outcome {
    let r = reduction_cases(|d| d.starts_with("N = 1") || d.starts_with("M = 1"));
    if r.cases.len() != 4 {
        return Outcome::new(false, "expected four degeneration cases");
    }
    summarize(&[r])
}

fn criterion_7() -> Outcome {
    let r = reduction_cases(|d| d.starts_with("rank-one"));
    let blocks = summarize(&[r]);
    let run = || -> Result<f64> {
        let mut gap = 0.0f64;
        for m in [2, 3] {
            let p = square(2);
            for seed in 0..SEEDS {
                let r1 = random_rank1(
                    &p,
                    m,
                    &mut rng(700 + 10 * m as u64 + seed),
                    EXCLUSION_RADIUS,
                )?;
                let st = ModelState::Multitop(rank1_embed(&r1)?);
                let cfg = IntegratorConfig::new(1e-3, 100, 1)?;
                let traj = integrate(&p, &st, &cfg, &DiagnosticsConfig::none())
                    .map_err(|e| e.error().clone())?;
                gap = gap.max(traj.max_rank_gap().unwrap_or(f64::NAN));
            }
        }
        Ok(gap)
    };
    match run() {
        Ok(gap) => Outcome::new(
            blocks.pass && gap < 1e-8,
            format!("blocks: {}; rank gap {gap:.2e} (< 1e-8)", blocks.detail),
        ),
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn criterion_8() -> Outcome {
    summarize(&[limit_suite(&square(1), SEED)])
}

fn sampled(family: &str, n: usize, m: usize) -> Result<(EllipticParams, ModelState)> {
    let p = square(n);
    let g = &mut rng(900);
    let st = match family {
        "spin-rs" => ModelState::SpinRs(random_spin_rs(&p, m, g, EXCLUSION_RADIUS)?),
        "top" => ModelState::Top(random_top(&p, g)),
        "multitop" => ModelState::Multitop(random_multitop(&p, m, g, EXCLUSION_RADIUS)?),
        _ => ModelState::Rank1(random_rank1(&p, m, g, EXCLUSION_RADIUS)?),
    };
    Ok((p, st))
}

fn step_halving_ratio() -> Result<f64> {
    let (p, st) = sampled("spin-rs", 1, 2)?;
    let end = |dt: f64| -> Result<Vec<C64>> {
        let steps = (1.0 / dt).round() as usize;
        let cfg = IntegratorConfig::new(dt, steps, steps)?;
        let traj =
            integrate(&p, &st, &cfg, &DiagnosticsConfig::none()).map_err(|e| e.error().clone())?;
        Ok(traj.final_state().to_vec())
    };
    let (a, b, c) = (end(2e-3)?, end(1e-3)?, end(5e-4)?);
    let diff = |x: &[C64], y: &[C64]| {
        x.iter()
            .zip(y)
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max)
    };
    Ok(diff(&a, &b) / diff(&b, &c))
}

fn criterion_9() -> Outcome {
    let mut runs = vec![
        ("spin-rs", 1, 2),
        ("spin-rs", 1, 3),
        ("top", 2, 1),
        ("top", 3, 1),
    ];
    for (n, m) in BLOCK_SIZES {
        runs.push(("multitop", n, m));
        runs.push(("rank1", n, m));
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (family, n, m) in runs {
        let drift = sampled(family, n, m).and_then(|(p, st)| {
            let cfg = IntegratorConfig::new(1e-3, 1000, 10)?;
            let diag = DiagnosticsConfig {
                lax_residual: false,
                ..DiagnosticsConfig::standard(&p)
            };
            let traj = integrate(&p, &st, &cfg, &diag).map_err(|e| e.error().clone())?;
            Ok(traj.max_invariant_drift().unwrap_or(f64::NAN))
        });
        match drift {
            Ok(d) => {
                pass &= d < 1e-6;
                parts.push(format!("{family}({n},{m}) {d:.1e}"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{family}({n},{m}) error: {e}"));
            }
        }
    }
    let ratio = step_halving_ratio();
    let ratio_ok = matches!(ratio, Ok(r) if (r - 16.0).abs() <= 2.0);
    Outcome::new(
        pass && ratio_ok,
        format!(
            "drift (< 1e-6): {}; step-halving ratio {:?} (16 +/- 2)",
            parts.join(", "),
            ratio.map(|r| (r * 100.0).round() / 100.0)
        ),
    )
}

fn verify_all(out: &Path) -> std::io::Result<(Option<i32>, Vec<u8>)> {
    let o = Command::new(env!("CARGO_BIN_EXE_elliptic-tops"))
        .args([
            "verify",
            "--all",
            "--seed",
            "42",
            "--tau",
            "0,1",
            "--eta",
            "0.21,0.07",
            "--out",
        ])
        .arg(out)
        .output()?;
    Ok((o.status.code(), o.stdout))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (ra, rb) = match (verify_all(&a), verify_all(&b)) {
        (Ok(x), Ok(y)) => (x, y),
        _ => return Outcome::new(false, "could not start the binary"),
    };
    let mut identical = ra.1 == rb.1;
    for suite in elliptic_tops::verify::SUITES {
        let f = format!("{suite}.json");
        identical &= matches!(
            (fs::read(a.join(&f)), fs::read(b.join(&f))),
            (Ok(x), Ok(y)) if x == y
        );
    }
    Outcome::new(
        ra.0 == Some(0) && rb.0 == Some(0) && identical,
        format!(
            "exit codes {:?}, {:?}; reports and stdout identical: {identical}",
            ra.0, rb.0
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("identity battery", criterion_1),
        ("Fourier formulas", criterion_2),
        ("spin RS Lax equation", criterion_3),
        ("relativistic top Lax equation", criterion_4),
        ("interacting tops Lax equation", criterion_5),
        ("N = 1 and M = 1 degenerations", criterion_6),
        ("rank-one reduction", criterion_7),
        ("non-relativistic limits", criterion_8),
        ("conservation and RK4 order", criterion_9),
        ("end-to-end determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {:>2} {name} [{:.1} s]: {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
