//! Fixed-step classical Runge-Kutta integration with per-record
//! diagnostics.

use serde::{Deserialize, Serialize};

use super::diagnostics::{
    default_spectral_points, derivative_weights, invariant_drift, lax_residual, rank_gap,
    spectral_invariants, DEFAULT_FD_STEP,
};
use super::state::{Family, ModelState};
use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::C64;

/// Largest trace defect accepted in the initial data of the
/// non-relativistic families.
pub const INITIAL_CONSTRAINT_TOL: f64 = 1e-12;

/// Nodes of the stencil used to recover velocities from recorded positions.
const DRIFT_STENCIL: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, steps: usize, record_every: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            steps,
            record_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter(
                "record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Which diagnostics to evaluate at each record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub z_samples: Vec<C64>,
    pub kmax: usize,
    pub lax_residual: bool,
    pub fd_step: f64,
}

impl DiagnosticsConfig {
    /// Three default spectral points, `k <= 3`, Lax residual at the first
    /// point with the default step.
    pub fn standard(params: &EllipticParams) -> Self {
        Self {
            z_samples: default_spectral_points(params),
            kmax: 3,
            lax_residual: true,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn none() -> Self {
        Self {
            z_samples: Vec::new(),
            kmax: 0,
            lax_residual: false,
            fd_step: DEFAULT_FD_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `tr L^k(z_j)`, indexed `[j][k - 1]`.
    pub invariants: Vec<Vec<C64>>,
    pub invariant_drift: Option<f64>,
    pub lax_residual: Option<f64>,
    /// `max_i |qdot_i - (constraint velocity)_i|` with `qdot` recovered from
    /// the recorded positions, or the trace defect for the
    /// non-relativistic families.
    pub constraint_drift: Option<f64>,
    pub rank_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub family: Family,
    pub times: Vec<f64>,
    pub states: Vec<ModelState>,
    pub diagnostics: Vec<Diagnostics>,
}

#[derive(Debug, thiserror::Error)]
pub enum IntegrateError {
    #[error("invalid initial data: {0}")]
    InvalidInitial(Error),
    /// `partial` holds every record up to and including the last good state.
    #[error("integration stopped at t = {time}: {error}")]
    Runtime {
        time: f64,
        error: Error,
        partial: Box<Trajectory>,
    },
}

impl IntegrateError {
    pub fn error(&self) -> &Error {
        match self {
            IntegrateError::InvalidInitial(e) => e,
            IntegrateError::Runtime { error, .. } => error,
        }
    }
}

fn finite(x: &[C64]) -> Result<()> {
    if x.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn axpy(x: &[C64], a: f64, k: &[C64]) -> Vec<C64> {
    x.iter().zip(k).map(|(x, k)| x + k * a).collect()
}

/// One classical RK4 step.
pub fn rk4_step(params: &EllipticParams, state: &ModelState, dt: f64) -> Result<ModelState> {
    let x = state.to_vec();
    let rate = |y: &[C64]| -> Result<Vec<C64>> {
        let r = state.with_values(y)?.rate(params)?;
        finite(&r)?;
        Ok(r)
    };
    let k1 = rate(&x)?;
    let k2 = rate(&axpy(&x, dt / 2.0, &k1))?;
    let k3 = rate(&axpy(&x, dt / 2.0, &k2))?;
    let k4 = rate(&axpy(&x, dt, &k3))?;
    let next: Vec<C64> = (0..x.len())
        .map(|i| x[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0))
        .collect();
    finite(&next)?;
    state.with_values(&next)
}

fn evaluate(
    params: &EllipticParams,
    state: &ModelState,
    cfg: &DiagnosticsConfig,
    initial: Option<&[Vec<C64>]>,
) -> Result<Diagnostics> {
    let relativistic = state.family().is_relativistic();
    let mut d = Diagnostics::default();
    if relativistic && cfg.kmax > 0 && !cfg.z_samples.is_empty() {
        d.invariants = spectral_invariants(params, state, &cfg.z_samples, cfg.kmax)?;
        d.invariant_drift = Some(initial.map_or(0.0, |i0| invariant_drift(i0, &d.invariants)));
    }
    if relativistic && cfg.lax_residual {
        let z = cfg
            .z_samples
            .first()
            .copied()
            .unwrap_or_else(|| default_spectral_points(params)[0]);
        d.lax_residual = Some(lax_residual(params, state, None, z, cfg.fd_step)?);
    }
    d.constraint_drift = state.trace_defect();
    d.rank_gap = rank_gap(state);
    Ok(d)
}

/// Integrate `cfg.steps` steps of size `cfg.dt`, recording the initial
/// state, every `record_every`-th step and the final step.
pub fn integrate(
    params: &EllipticParams,
    initial: &ModelState,
    cfg: &IntegratorConfig,
    diag: &DiagnosticsConfig,
) -> std::result::Result<Trajectory, IntegrateError> {
    cfg.validate().map_err(IntegrateError::InvalidInitial)?;
    if let Some(t) = initial.trace_defect() {
        if t > INITIAL_CONSTRAINT_TOL {
            return Err(IntegrateError::InvalidInitial(Error::ConstraintViolated(
                format!("diagonal trace defect {t:e} exceeds {INITIAL_CONSTRAINT_TOL:e}"),
            )));
        }
    }
    let check = initial.rate(params).and_then(|r| finite(&r).map(|_| r));
    check.map_err(IntegrateError::InvalidInitial)?;
    let d0 = evaluate(params, initial, diag, None).map_err(IntegrateError::InvalidInitial)?;
    let i0 = d0.invariants.clone();
    let mut traj = Trajectory {
        family: initial.family(),
        times: vec![0.0],
        states: vec![initial.clone()],
        diagnostics: vec![d0],
    };
    let mut state = initial.clone();
    let mut last_recorded = 0;
    for step in 1..=cfg.steps {
        let t_prev = (step - 1) as f64 * cfg.dt;
        let stepped = rk4_step(params, &state, cfg.dt);
        let next = match stepped {
            Ok(s) => s,
            Err(error) => {
                if last_recorded != step - 1 {
                    traj.times.push(t_prev);
                    traj.diagnostics
                        .push(evaluate(params, &state, diag, Some(&i0)).unwrap_or_default());
                    traj.states.push(state);
                }
                fill_constraint_drift(&mut traj);
                return Err(IntegrateError::Runtime {
                    time: t_prev,
                    error,
                    partial: Box::new(traj),
                });
            }
        };
        state = next;
        if step % cfg.record_every == 0 || step == cfg.steps {
            let t = step as f64 * cfg.dt;
            match evaluate(params, &state, diag, Some(&i0)) {
                Ok(d) => {
                    traj.times.push(t);
                    traj.states.push(state.clone());
                    traj.diagnostics.push(d);
                    last_recorded = step;
                }
                Err(error) => {
                    traj.times.push(t);
                    traj.states.push(state);
                    traj.diagnostics.push(Diagnostics::default());
                    fill_constraint_drift(&mut traj);
                    return Err(IntegrateError::Runtime {
                        time: t,
                        error,
                        partial: Box::new(traj),
                    });
                }
            }
        }
    }
    fill_constraint_drift(&mut traj);
    Ok(traj)
}

/// Velocities from a nine-node stencil over the uniformly spaced leading
/// records, compared with the constraint velocities of each record.
fn fill_constraint_drift(traj: &mut Trajectory) {
    if !traj.family.has_velocity_constraint() || traj.times.len() < 2 {
        return;
    }
    let spacing = traj.times[1] - traj.times[0];
    let uniform = 1 + traj
        .times
        .windows(2)
        .take_while(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing)
        .count();
    if uniform < DRIFT_STENCIL {
        return;
    }
    for j in 0..uniform {
        let start = j
            .saturating_sub(DRIFT_STENCIL / 2)
            .min(uniform - DRIFT_STENCIL);
        let nodes: Vec<f64> = (start..start + DRIFT_STENCIL)
            .map(|k| k as f64 - j as f64)
            .collect();
        let w = derivative_weights(&nodes);
        let target = traj.states[j].constrained_velocities().unwrap_or_default();
        let mut worst: f64 = 0.0;
        for (i, v) in target.iter().enumerate() {
            let qdot: C64 = (0..DRIFT_STENCIL)
                .map(|k| {
                    traj.states[start + k]
                        .positions()
                        .map_or(C64::new(0.0, 0.0), |q| q[i])
                        * w[k]
                })
                .sum::<C64>()
                / spacing;
            worst = worst.max((qdot - v).norm());
        }
        traj.diagnostics[j].constraint_drift = Some(worst);
    }
}

/// Flat export table: `t`, the state columns as `<name>_re`, `<name>_im`,
/// then the diagnostics present for this family and configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryTable {
    pub family: Family,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &ModelState {
        self.states
            .last()
            .expect("trajectories hold at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectories hold at least the initial time")
    }

    fn max_of(&self, f: impl Fn(&Diagnostics) -> Option<f64>) -> Option<f64> {
        self.diagnostics.iter().filter_map(f).reduce(f64::max)
    }

    pub fn max_invariant_drift(&self) -> Option<f64> {
        self.max_of(|d| d.invariant_drift)
    }

    pub fn max_lax_residual(&self) -> Option<f64> {
        self.max_of(|d| d.lax_residual)
    }

    pub fn max_constraint_drift(&self) -> Option<f64> {
        self.max_of(|d| d.constraint_drift)
    }

    pub fn max_rank_gap(&self) -> Option<f64> {
        self.max_of(|d| d.rank_gap)
    }

    pub fn table(&self) -> TrajectoryTable {
        let first = &self.diagnostics[0];
        let mut columns = vec!["t".to_string()];
        for c in self.states[0].columns() {
            columns.push(format!("{c}_re"));
            columns.push(format!("{c}_im"));
        }
        for (j, row) in first.invariants.iter().enumerate() {
            for k in 1..=row.len() {
                columns.push(format!("trL{k}_z{j}_re"));
                columns.push(format!("trL{k}_z{j}_im"));
            }
        }
        let with_drift = first.invariant_drift.is_some();
        let with_lax = first.lax_residual.is_some();
        let with_constraint =
            self.family.has_velocity_constraint() || first.constraint_drift.is_some();
        let with_rank = first.rank_gap.is_some();
        for (flag, name) in [
            (with_drift, "invariant_drift"),
            (with_lax, "lax_residual"),
            (with_constraint, "constraint_drift"),
            (with_rank, "rank_gap"),
        ] {
            if flag {
                columns.push(name.to_string());
            }
        }
        let n_inv = first.invariants.iter().map(Vec::len).sum::<usize>();
        let rows = self
            .times
            .iter()
            .zip(&self.states)
            .zip(&self.diagnostics)
            .map(|((t, s), d)| {
                let mut row = vec![Some(*t)];
                for c in s.to_vec() {
                    row.push(Some(c.re));
                    row.push(Some(c.im));
                }
                let inv: Vec<C64> = d.invariants.iter().flatten().copied().collect();
                for k in 0..n_inv {
                    row.push(inv.get(k).map(|c| c.re));
                    row.push(inv.get(k).map(|c| c.im));
                }
                for (flag, v) in [
                    (with_drift, d.invariant_drift),
                    (with_lax, d.lax_residual),
                    (with_constraint, d.constraint_drift),
                    (with_rank, d.rank_gap),
                ] {
                    if flag {
                        row.push(v);
                    }
                }
                row
            })
            .collect();
        TrajectoryTable {
            family: self.family,
            columns,
            rows,
        }
    }
}
