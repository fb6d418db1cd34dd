//! Run configuration for `simulate`. Complex numbers are `[re, im]` pairs;
//! matrices are lists of rows.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use elliptic_tops::dynamics::{
    default_spectral_points, DiagnosticsConfig, Family, IntegratorConfig, ModelState,
    DEFAULT_FD_STEP,
};
use elliptic_tops::elliptic::EllipticParams;
use elliptic_tops::models::sample::{
    random_multitop, random_nonrel_multitop, random_nonrel_rank1, random_rank1, random_spin_cm,
    random_spin_rs, random_top,
};
use elliptic_tops::models::{
    MultiTopState, NonrelMultiTopState, NonrelRank1State, Rank1State, SpinCmState, SpinRsState,
    TopState,
};
use elliptic_tops::verify::EXCLUSION_RADIUS;
use elliptic_tops::{CMatrix, C64};
use nalgebra::{DVector, RowDVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Pair = [f64; 2];

pub const DEFAULT_TAU: Pair = [0.0, 1.0];
pub const DEFAULT_ETA: Pair = [0.21, 0.07];
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Family,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Pair>,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(default)]
    pub output: Output,
}

/// Either a sampling seed or explicit initial values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrator {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_steps() -> usize {
    1000
}

fn default_record_every() -> usize {
    10
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            steps: default_steps(),
            record_every: default_record_every(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    /// Defaults to three fixed points scaled to the curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_points: Option<Vec<Pair>>,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_true")]
    pub lax_residual: bool,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_kmax() -> usize {
    3
}

fn default_true() -> bool {
    true
}

fn default_fd_step() -> f64 {
    DEFAULT_FD_STEP
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            spectral_points: None,
            kmax: default_kmax(),
            lax_residual: true,
            fd_step: default_fd_step(),
        }
    }
}

/// Relative paths are taken relative to the `--out` directory. The echo
/// keeps them relative, so re-running it with the same `--out` overwrites
/// the same files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved: Option<PathBuf>,
}

/// Values given on the command line; each one overrides the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tau: Option<C64>,
    pub eta: Option<C64>,
    pub seed: Option<u64>,
}

/// Everything a run needs, plus the fully explicit config that reproduces
/// it.
#[derive(Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub params: EllipticParams,
    pub state: ModelState,
    pub integrator: IntegratorConfig,
    pub diagnostics: DiagnosticsConfig,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub resolved: PathBuf,
}

/// Parses a config, naming the line, column and field of the first error.
pub fn parse(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        anyhow!(
            "line {}, column {}, field `{}`: {}",
            inner.line(),
            inner.column(),
            path,
            inner
        )
    })
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn c(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn matrix(rows: &[Vec<Pair>], field: &str) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        bail!("initial.{field} must be a non-empty square matrix");
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j])))
}

fn rows_of(s: &CMatrix) -> Vec<Vec<Pair>> {
    (0..s.nrows())
        .map(|i| (0..s.ncols()).map(|j| pair(s[(i, j)])).collect())
        .collect()
}

fn list(v: &[C64]) -> Vec<Pair> {
    v.iter().copied().map(pair).collect()
}

fn forced_n(family: Family) -> Option<usize> {
    matches!(family, Family::SpinRs | Family::SpinCm).then_some(1)
}

fn forced_m(family: Family) -> Option<usize> {
    matches!(family, Family::Top | Family::NonrelTop).then_some(1)
}

fn fields_used(family: Family) -> &'static [&'static str] {
    match family {
        Family::SpinRs | Family::Multitop => &["q", "s"],
        Family::Top | Family::NonrelTop => &["s"],
        Family::Rank1 => &["q", "xi", "rho"],
        Family::SpinCm | Family::NonrelMultitop => &["q", "v", "s"],
        Family::NonrelRank1 => &["q", "v", "xi", "rho"],
    }
}

impl Initial {
    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, set) in [
            ("q", self.q.is_some()),
            ("v", self.v.is_some()),
            ("s", self.s.is_some()),
            ("xi", self.xi.is_some()),
            ("rho", self.rho.is_some()),
        ] {
            if set {
                out.push(name);
            }
        }
        out
    }

    fn is_explicit(&self) -> bool {
        !self.present().is_empty()
    }

    /// Dimensions implied by explicit data, as `(N, M)`.
    fn implied(&self, family: Family) -> (Option<usize>, Option<usize>) {
        let m = self.q.as_ref().map(Vec::len);
        let n = match (&self.xi, &self.s, m) {
            (Some(xi), _, _) => xi.first().map(Vec::len),
            (None, Some(s), _) if forced_m(family).is_some() => Some(s.len()),
            (None, Some(s), Some(m)) if m > 0 => Some(s.len() / m),
            _ => None,
        };
        (n, m)
    }

    fn of_state(state: &ModelState) -> Self {
        let mut out = Initial::default();
        let vecs = |x: &[DVector<C64>]| -> Vec<Vec<Pair>> {
            x.iter()
                .map(|v| v.iter().copied().map(pair).collect())
                .collect()
        };
        let rvecs = |x: &[RowDVector<C64>]| -> Vec<Vec<Pair>> {
            x.iter()
                .map(|v| v.iter().copied().map(pair).collect())
                .collect()
        };
        match state {
            ModelState::SpinRs(s) => {
                out.q = Some(list(&s.q));
                out.s = Some(rows_of(&s.s));
            }
            ModelState::Top(s) | ModelState::NonrelTop(s) => out.s = Some(rows_of(&s.s)),
            ModelState::Multitop(s) => {
                out.q = Some(list(&s.q));
                out.s = Some(rows_of(&s.s));
            }
            ModelState::Rank1(s) => {
                out.q = Some(list(&s.q));
                out.xi = Some(vecs(&s.xi));
                out.rho = Some(rvecs(&s.rho));
            }
            ModelState::SpinCm(s) => {
                out.q = Some(list(&s.q));
                out.v = Some(list(&s.v));
                out.s = Some(rows_of(&s.s));
            }
            ModelState::NonrelMultitop(s) => {
                out.q = Some(list(&s.q));
                out.v = Some(list(&s.v));
                out.s = Some(rows_of(&s.s));
            }
            ModelState::NonrelRank1(s) => {
                out.q = Some(list(&s.q));
                out.v = Some(list(&s.v));
                out.xi = Some(vecs(&s.xi));
                out.rho = Some(rvecs(&s.rho));
            }
        }
        out
    }
}

fn explicit_state(family: Family, n: usize, init: &Initial) -> Result<ModelState> {
    let need = |name: &str| anyhow!("initial.{name} is required for family {family}");
    let q = || -> Result<Vec<C64>> {
        Ok(init
            .q
            .as_ref()
            .ok_or_else(|| need("q"))?
            .iter()
            .copied()
            .map(c)
            .collect())
    };
    let v = || -> Result<Vec<C64>> {
        Ok(init
            .v
            .as_ref()
            .ok_or_else(|| need("v"))?
            .iter()
            .copied()
            .map(c)
            .collect())
    };
    let s = || matrix(init.s.as_ref().ok_or_else(|| need("s"))?, "s");
    let xi = || -> Result<Vec<DVector<C64>>> {
        Ok(init
            .xi
            .as_ref()
            .ok_or_else(|| need("xi"))?
            .iter()
            .map(|x| DVector::from_iterator(x.len(), x.iter().copied().map(c)))
            .collect())
    };
    let rho = || -> Result<Vec<RowDVector<C64>>> {
        Ok(init
            .rho
            .as_ref()
            .ok_or_else(|| need("rho"))?
            .iter()
            .map(|x| RowDVector::from_iterator(x.len(), x.iter().copied().map(c)))
            .collect())
    };
    Ok(match family {
        Family::SpinRs => ModelState::SpinRs(SpinRsState::new(q()?, s()?)?),
        Family::Top => ModelState::Top(TopState::new(s()?)?),
        Family::NonrelTop => ModelState::NonrelTop(TopState::new(s()?)?),
        Family::Multitop => ModelState::Multitop(MultiTopState::new(n, q()?, s()?)?),
        Family::Rank1 => ModelState::Rank1(Rank1State::new(n, q()?, xi()?, rho()?)?),
        Family::SpinCm => ModelState::SpinCm(SpinCmState::new(q()?, v()?, s()?)?),
        Family::NonrelMultitop => {
            ModelState::NonrelMultitop(NonrelMultiTopState::new(n, q()?, v()?, s()?)?)
        }
        Family::NonrelRank1 => {
            ModelState::NonrelRank1(NonrelRank1State::new(n, q()?, v()?, xi()?, rho()?)?)
        }
    })
}

fn sampled_state(
    family: Family,
    params: &EllipticParams,
    m: usize,
    seed: u64,
) -> Result<ModelState> {
    let rng = &mut ChaCha8Rng::seed_from_u64(seed);
    let r = EXCLUSION_RADIUS;
    Ok(match family {
        Family::SpinRs => ModelState::SpinRs(random_spin_rs(params, m, rng, r)?),
        Family::Top => ModelState::Top(random_top(params, rng)),
        Family::NonrelTop => ModelState::NonrelTop(random_top(params, rng)),
        Family::Multitop => ModelState::Multitop(random_multitop(params, m, rng, r)?),
        Family::Rank1 => ModelState::Rank1(random_rank1(params, m, rng, r)?),
        Family::SpinCm => ModelState::SpinCm(random_spin_cm(params, m, rng, r)?),
        Family::NonrelMultitop => {
            ModelState::NonrelMultitop(random_nonrel_multitop(params, m, rng, r)?)
        }
        Family::NonrelRank1 => ModelState::NonrelRank1(random_nonrel_rank1(params, m, rng, r)?),
    })
}

fn dimension(
    what: &str,
    family: Family,
    forced: Option<usize>,
    given: Option<usize>,
    implied: Option<usize>,
) -> Result<usize> {
    if let (Some(f), Some(g)) = (forced, given) {
        if f != g {
            bail!("family {family} requires {what} = {f}, got {what} = {g}");
        }
    }
    let d = forced
        .or(given)
        .or(implied)
        .ok_or_else(|| anyhow!("{what} is required for family {family}"))?;
    if d == 0 {
        bail!("{what} must be at least 1");
    }
    Ok(d)
}

fn place(out_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

pub fn resolve(cfg: &RunConfig, over: &Overrides, out_dir: &Path) -> Result<Resolved> {
    let family = cfg.family;
    let init = &cfg.initial;
    if init.seed.is_some() && init.is_explicit() {
        bail!("initial: give either a seed or explicit values, not both");
    }
    if let Some(extra) = init
        .present()
        .into_iter()
        .find(|f| !fields_used(family).contains(f))
    {
        bail!("initial.{extra} is not used by family {family}");
    }
    let (implied_n, implied_m) = init.implied(family);
    let n = dimension("N", family, forced_n(family), cfg.n, implied_n)?;
    let m = dimension("M", family, forced_m(family), cfg.m, implied_m)?;
    let tau = over.tau.unwrap_or(c(cfg.tau.unwrap_or(DEFAULT_TAU)));
    let eta = over.eta.unwrap_or(c(cfg.eta.unwrap_or(DEFAULT_ETA)));
    let params = EllipticParams::new(tau, n, eta)?;

    let state = if init.is_explicit() {
        explicit_state(family, n, init)?
    } else {
        let seed = over.seed.or(init.seed).unwrap_or(DEFAULT_SEED);
        sampled_state(family, &params, m, seed)?
    };
    if state.n() != n || state.m() != m {
        bail!(
            "initial data has N = {}, M = {} but the config asks for N = {n}, M = {m}",
            state.n(),
            state.m()
        );
    }

    let it = cfg.integrator;
    let integrator = IntegratorConfig::new(it.dt, it.steps, it.record_every)?;
    let d = &cfg.diagnostics;
    if !(d.fd_step > 0.0) || !d.fd_step.is_finite() {
        bail!("diagnostics.fd_step must be positive, got {}", d.fd_step);
    }
    let z_samples = match &d.spectral_points {
        Some(zs) => zs.iter().copied().map(c).collect(),
        None => default_spectral_points(&params),
    };
    for &z in &z_samples {
        params.ensure_off_lattice(z, "spectral point")?;
    }
    let diagnostics = DiagnosticsConfig {
        z_samples: z_samples.clone(),
        kmax: d.kmax,
        lax_residual: d.lax_residual,
        fd_step: d.fd_step,
    };

    let named = |given: &Option<PathBuf>, default: &str| {
        given.clone().unwrap_or_else(|| PathBuf::from(default))
    };
    let csv_name = named(&cfg.output.csv, "trajectory.csv");
    let json_name = named(&cfg.output.json, "trajectory.json");
    let resolved_name = named(&cfg.output.resolved, "config.resolved.json");
    let csv = place(out_dir, &csv_name);
    let json = place(out_dir, &json_name);
    let resolved = place(out_dir, &resolved_name);
    let output = Output {
        csv: Some(csv_name),
        json: Some(json_name),
        resolved: Some(resolved_name),
    };
    let config = RunConfig {
        family,
        n: Some(n),
        m: Some(m),
        tau: Some(pair(tau)),
        eta: Some(pair(eta)),
        initial: Initial::of_state(&state),
        integrator: it,
        diagnostics: Diagnostics {
            spectral_points: Some(list(&z_samples)),
            ..d.clone()
        },
        output,
    };
    Ok(Resolved {
        config,
        params,
        state,
        integrator,
        diagnostics,
        csv,
        json,
        resolved,
    })
}
