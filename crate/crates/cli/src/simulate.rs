use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use elliptic_tops::dynamics::{integrate, Family, IntegrateError, Trajectory, TrajectoryTable};
use serde::Serialize;

use crate::config::{self, Overrides};
use crate::Failure;

#[derive(Debug, Serialize)]
struct Summary {
    records: usize,
    final_time: f64,
    max_invariant_drift: Option<f64>,
    max_lax_residual: Option<f64>,
    max_constraint_drift: Option<f64>,
    max_rank_gap: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Document<'a> {
    family: Family,
    /// `complete`, or `stopped` when a singularity ended the run early.
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    summary: Summary,
    columns: &'a [String],
    rows: &'a [Vec<Option<f64>>],
}

fn summary(traj: &Trajectory) -> Summary {
    Summary {
        records: traj.times.len(),
        final_time: traj.final_time(),
        max_invariant_drift: traj.max_invariant_drift(),
        max_lax_residual: traj.max_lax_residual(),
        max_constraint_drift: traj.max_constraint_drift(),
        max_rank_gap: traj.max_rank_gap(),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    Ok(())
}

/// Shortest round-trip decimal, so re-reading the CSV recovers every bit.
fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

pub fn write_csv(path: &Path, table: &TrajectoryTable) -> Result<()> {
    ensure_parent(path)?;
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| cell(*x)))?;
    }
    w.flush()?;
    Ok(())
}

fn write_outputs(
    res: &config::Resolved,
    traj: &Trajectory,
    error: Option<String>,
) -> Result<Summary> {
    let table = traj.table();
    write_csv(&res.csv, &table)?;
    let doc = Document {
        family: traj.family,
        status: if error.is_some() {
            "stopped"
        } else {
            "complete"
        },
        error,
        summary: summary(traj),
        columns: &table.columns,
        rows: &table.rows,
    };
    ensure_parent(&res.json)?;
    fs::write(&res.json, serde_json::to_string_pretty(&doc)? + "\n")
        .with_context(|| format!("cannot write {}", res.json.display()))?;
    Ok(doc.summary)
}

fn show(name: &str, x: Option<f64>) {
    if let Some(v) = x {
        println!("  {name:<22} {v:.3e}");
    }
}

pub fn run(path: &Path, over: &Overrides, out_dir: &Path) -> Result<(), Failure> {
    let cfg = config::load(path).map_err(Failure::Config)?;
    let res = config::resolve(&cfg, over, out_dir).map_err(Failure::Config)?;
    let echo = serde_json::to_string_pretty(&res.config).map_err(|e| Failure::Config(e.into()))?;
    ensure_parent(&res.resolved)
        .and_then(|_| {
            fs::write(&res.resolved, echo + "\n")
                .with_context(|| format!("cannot write {}", res.resolved.display()))
        })
        .map_err(Failure::Config)?;

    match integrate(&res.params, &res.state, &res.integrator, &res.diagnostics) {
        Ok(traj) => {
            let s = write_outputs(&res, &traj, None).map_err(Failure::Config)?;
            println!(
                "{}: {} records to t = {}",
                traj.family, s.records, s.final_time
            );
            show("max invariant drift", s.max_invariant_drift);
            show("max Lax residual", s.max_lax_residual);
            show("max constraint drift", s.max_constraint_drift);
            show("max rank gap", s.max_rank_gap);
            println!("wrote {} and {}", res.csv.display(), res.json.display());
            Ok(())
        }
        Err(IntegrateError::InvalidInitial(e)) => Err(Failure::Config(anyhow::anyhow!(
            "invalid initial data: {e}"
        ))),
        Err(IntegrateError::Runtime {
            time,
            error,
            partial,
        }) => {
            let msg = format!("integration stopped at t = {time}: {error}");
            write_outputs(&res, &partial, Some(msg.clone())).map_err(Failure::Config)?;
            Err(Failure::Runtime(msg))
        }
    }
}
