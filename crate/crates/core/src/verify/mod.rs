//! Verification suites. Each suite draws its own random cases from a
//! `ChaCha8` stream seeded by the caller and returns a [`VerifyReport`] of
//! measured residuals against fixed tolerances. Evaluation failures are
//! recorded as failing cases rather than returned as errors.

mod fourier;
mod identity;
mod limit;
mod reduction;

pub use fourier::fourier_suite;
pub use identity::identity_suite;
pub use limit::limit_suite;
pub use reduction::reduction_suite;

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Random arguments keep this distance from every singular locus.
pub const EXCLUSION_RADIUS: f64 = 0.02;

/// Names accepted by [`run_suite`].
pub const SUITES: [&str; 4] = ["identity", "fourier", "reduction", "limit"];

/// How a measured value is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Criterion {
    /// `measured < tolerance`.
    Below { tolerance: f64 },
    /// `|measured - target| <= tolerance`.
    Near { target: f64, tolerance: f64 },
    /// `measured >= minimum`.
    AtLeast { minimum: f64 },
}

impl Criterion {
    pub fn accepts(self, measured: f64) -> bool {
        if !measured.is_finite() {
            return false;
        }
        match self {
            Criterion::Below { tolerance } => measured < tolerance,
            Criterion::Near { target, tolerance } => (measured - target).abs() <= tolerance,
            Criterion::AtLeast { minimum } => measured >= minimum,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Below { tolerance } => write!(f, "< {tolerance:.1e}"),
            Criterion::Near { target, tolerance } => write!(f, "{target} +/- {tolerance}"),
            Criterion::AtLeast { minimum } => write!(f, ">= {minimum}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub description: String,
    /// `NaN` (serialized as `null`) when evaluation failed.
    pub measured: f64,
    pub criterion: Criterion,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Case {
    pub fn new(description: impl Into<String>, measured: f64, criterion: Criterion) -> Self {
        Self {
            description: description.into(),
            measured,
            criterion,
            pass: criterion.accepts(measured),
            error: None,
        }
    }

    pub fn below(description: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::new(description, measured, Criterion::Below { tolerance })
    }

    pub fn near(
        description: impl Into<String>,
        measured: f64,
        target: f64,
        tolerance: f64,
    ) -> Self {
        Self::new(description, measured, Criterion::Near { target, tolerance })
    }

    /// A case fed by a fallible measurement.
    pub fn from_result(
        description: impl Into<String>,
        measured: Result<f64>,
        criterion: Criterion,
    ) -> Self {
        match measured {
            Ok(v) => Self::new(description, v, criterion),
            Err(e) => Self {
                description: description.into(),
                measured: f64::NAN,
                criterion,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub tau: [f64; 2],
    pub eta: [f64; 2],
    pub n: usize,
}

impl From<&EllipticParams> for ParamsEcho {
    fn from(p: &EllipticParams) -> Self {
        Self {
            tau: [p.tau().re, p.tau().im],
            eta: [p.eta().re, p.eta().im],
            n: p.n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub params: ParamsEcho,
    pub cases: Vec<Case>,
}

impl VerifyReport {
    pub fn new(suite: &str, seed: u64, params: &EllipticParams) -> Self {
        Self {
            suite: suite.to_string(),
            seed,
            params: params.into(),
            cases: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub(crate) fn push(&mut self, case: Case) {
        self.cases.push(case);
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(
            f,
            "suite {} (seed {}, tau = {}{:+}i, eta = {}{:+}i, N = {})",
            self.suite, self.seed, p.tau[0], p.tau[1], p.eta[0], p.eta[1], p.n
        )?;
        let width = self
            .cases
            .iter()
            .map(|c| c.description.len())
            .max()
            .unwrap_or(0);
        for c in &self.cases {
            let status = if c.pass { "PASS" } else { "FAIL" };
            write!(
                f,
                "  {status}  {:<width$}  {:>11.3e}  {}",
                c.description, c.measured, c.criterion
            )?;
            if let Some(e) = &c.error {
                write!(f, "  ({e})")?;
            }
            writeln!(f)?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "  {} of {} cases passed",
            self.cases.len() - failed,
            self.cases.len()
        )
    }
}

/// Runs one suite by name with its standard settings. `fourier_n` restricts
/// the Fourier suite to one basis size; by default it covers `N = 2..=5`.
pub fn run_suite(
    name: &str,
    params: &EllipticParams,
    seed: u64,
    fourier_n: Option<usize>,
) -> Result<VerifyReport> {
    match name {
        "identity" => Ok(identity_suite(params, seed, 200)),
        "fourier" => {
            let ns = fourier_n.map_or_else(|| vec![2, 3, 4, 5], |n| vec![n]);
            Ok(fourier_suite(params, &ns, seed))
        }
        "reduction" => Ok(reduction_suite(params, seed)),
        "limit" => Ok(limit_suite(params, seed)),
        other => Err(Error::InvalidParameter(format!(
            "unknown suite '{other}', expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

pub(crate) fn suite_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in `[-1/2, 1/2) x [-Im tau / 2, Im tau / 2)`.
pub(crate) fn cell_point(params: &EllipticParams, rng: &mut impl Rng) -> C64 {
    let t = params.tau().im;
    C64::new(rng.random::<f64>() - 0.5, (rng.random::<f64>() - 0.5) * t)
}

const MAX_DRAWS: usize = 10_000;

/// `k` cell points such that every argument listed by `singular` keeps
/// [`EXCLUSION_RADIUS`] from the lattice.
pub(crate) fn admissible_points(
    params: &EllipticParams,
    rng: &mut impl Rng,
    k: usize,
    singular: impl Fn(&[C64]) -> Vec<C64>,
) -> Result<Vec<C64>> {
    for _ in 0..MAX_DRAWS {
        let x: Vec<C64> = (0..k).map(|_| cell_point(params, rng)).collect();
        if singular(&x)
            .iter()
            .all(|&z| !params.is_near_lattice(z, EXCLUSION_RADIUS))
        {
            return Ok(x);
        }
    }
    Err(Error::InvalidParameter(
        "no admissible random arguments found".into(),
    ))
}

pub(crate) fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(1.0)
}

/// Largest entry-wise difference relative to `max(1, max |a_ij|)`.
pub(crate) fn rel_matrix(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let scale = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Least-squares slope of `log e` against `log h`.
pub(crate) fn log_slope(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub(crate) fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut m = 0.0f64;
    for v in values {
        let v = v?;
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        m = m.max(v);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria() {
        assert!(Criterion::Below { tolerance: 1.0 }.accepts(0.5));
        assert!(!Criterion::Below { tolerance: 1.0 }.accepts(f64::NAN));
        assert!(Criterion::Near {
            target: 3.0,
            tolerance: 0.2
        }
        .accepts(2.85));
        assert!(!Criterion::Near {
            target: 3.0,
            tolerance: 0.2
        }
        .accepts(3.25));
        assert!(Criterion::AtLeast { minimum: 0.9 }.accepts(2.0));
    }

    #[test]
    fn slope_of_power_law() {
        let h = [1e-2, 5e-3, 2.5e-3];
        let e: Vec<f64> = h.iter().map(|x| 7.0 * x * x * x).collect();
        assert!((log_slope(&h, &e) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn report_passes_iff_all_cases_pass() {
        let p = EllipticParams::new(C64::new(0.0, 1.0), 2, C64::new(0.21, 0.07)).unwrap();
        let mut r = VerifyReport::new("x", 1, &p);
        r.push(Case::below("a", 1e-14, 1e-12));
        assert!(r.passed());
        r.push(Case::from_result(
            "b",
            Err(Error::NonFinite),
            Criterion::Below { tolerance: 1.0 },
        ));
        assert!(!r.passed());
        let text = r.to_string();
        assert!(text.contains("FAIL") && text.contains("1 of 2"));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"measured\":null"));
    }

    #[test]
    fn unknown_suite_is_rejected() {
        let p = EllipticParams::new(C64::new(0.0, 1.0), 1, C64::new(0.21, 0.07)).unwrap();
        assert!(matches!(
            run_suite("nope", &p, 0, None),
            Err(Error::InvalidParameter(_))
        ));
    }
}
