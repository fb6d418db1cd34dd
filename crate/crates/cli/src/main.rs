//! `elliptic-tops`: verification suites, trajectory simulation and tables of
//! the elliptic functions.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or config error,
//! 3 singularity during a simulation (the partial trajectory is written).

mod config;
mod simulate;
mod tabulate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use elliptic_tops::elliptic::EllipticParams;
use elliptic_tops::verify::{run_suite, SUITES};
use elliptic_tops::C64;

use config::{Overrides, DEFAULT_ETA, DEFAULT_SEED, DEFAULT_TAU};

#[derive(Debug)]
pub enum Failure {
    Verification,
    Config(anyhow::Error),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

/// Locale-independent `re,im`.
fn parse_complex(s: &str) -> Result<C64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected re,im, got '{s}'"))?;
    let part = |x: &str| -> Result<f64, String> {
        let v: f64 = x
            .trim()
            .parse()
            .map_err(|_| format!("'{x}' is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("'{x}' is not finite"))
        }
    };
    Ok(C64::new(part(re)?, part(im)?))
}

fn parse_index(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected a1,a2, got '{s}'"))?;
    let int = |x: &str| {
        x.trim()
            .parse::<i64>()
            .map_err(|_| format!("'{x}' is not an integer"))
    };
    Ok((int(a)?, int(b)?))
}

#[derive(Debug, Parser)]
#[command(name = "elliptic-tops", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Modular parameter as re,im (default 0,1).
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    tau: Option<C64>,
    /// Deformation parameter eta as re,im (default 0.21,0.07).
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    eta: Option<C64>,
    /// Seed for random cases and sampled initial data (default 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for reports and outputs.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification suites and write one JSON report per suite.
    Verify {
        /// Run every suite.
        #[arg(long, conflicts_with = "suite")]
        all: bool,
        /// Suite to run; repeat for several.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: Vec<String>,
        /// Matrix size for the Fourier suite (default: 2 to 5).
        #[arg(long = "N")]
        n: Option<usize>,
    },
    /// Integrate a model from a JSON run config.
    Simulate { config: PathBuf },
    /// Tabulate a special function on a grid as CSV.
    Tabulate {
        #[arg(value_enum)]
        function: tabulate::Function,
        /// x0,x1,nx,y0,y1,ny for z = x + i y, endpoints included.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Second argument of phi, f and phi_mode, as re,im.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.23,0.31")]
        u: C64,
        /// Mode index a1,a2 of phi_mode.
        #[arg(long, value_parser = parse_index, allow_hyphen_values = true, default_value = "0,0")]
        alpha: (i64, i64),
        /// Matrix size for phi_mode.
        #[arg(long = "N", default_value_t = 1)]
        n: usize,
        /// Output file (default <out>/<function>.csv).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn params(g: &Global, n: usize) -> anyhow::Result<EllipticParams> {
    let c = |p: [f64; 2]| C64::new(p[0], p[1]);
    let tau = g.tau.unwrap_or(c(DEFAULT_TAU));
    let eta = g.eta.unwrap_or(c(DEFAULT_ETA));
    EllipticParams::new(tau, n, eta).context("bad curve parameters")
}

fn verify(g: &Global, all: bool, suites: &[String], n: Option<usize>) -> Result<(), Failure> {
    let names: Vec<String> = if all || suites.is_empty() {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        suites.to_vec()
    };
    let p = params(g, 1).map_err(Failure::Config)?;
    if n == Some(0) {
        return Err(Failure::Config(anyhow::anyhow!("--N must be at least 1")));
    }
    std::fs::create_dir_all(&g.out)
        .with_context(|| format!("cannot create {}", g.out.display()))
        .map_err(Failure::Config)?;
    let seed = g.seed.unwrap_or(DEFAULT_SEED);
    let mut failed = Vec::new();
    for name in &names {
        let report = run_suite(name, &p, seed, n).map_err(|e| Failure::Config(e.into()))?;
        println!("{report}");
        let path = g.out.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Config(e.into()))?;
        std::fs::write(&path, text + "\n")
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::Config)?;
        if !report.passed() {
            failed.push(name.clone());
        }
    }
    if failed.is_empty() {
        println!("{0} of {0} suites passed", names.len());
        Ok(())
    } else {
        println!("failed suites: {}", failed.join(", "));
        Err(Failure::Verification)
    }
}

fn tabulate_cmd(
    g: &Global,
    req: tabulate::Request,
    n: usize,
    output: Option<PathBuf>,
) -> anyhow::Result<()> {
    if n == 0 {
        bail!("--N must be at least 1");
    }
    let p = params(g, n)?;
    let out = output.unwrap_or_else(|| g.out.join(format!("{}.csv", req.function.name())));
    let rows = tabulate::run(&p, &req, &out)?;
    println!("wrote {rows} rows to {}", out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Verify { all, suite, n } => verify(g, all, &suite, n),
        Command::Simulate { config } => {
            let over = Overrides {
                tau: g.tau,
                eta: g.eta,
                seed: g.seed,
            };
            simulate::run(Path::new(&config), &over, &g.out)
        }
        Command::Tabulate {
            function,
            grid,
            u,
            alpha,
            n,
            output,
        } => {
            let req = tabulate::Grid::parse(&grid).map(|grid| tabulate::Request {
                function,
                grid,
                u,
                alpha,
            });
            req.and_then(|req| tabulate_cmd(g, req, n, output))
                .map_err(Failure::Config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Verification => {}
                Failure::Config(e) => eprintln!("error: {e:#}"),
                Failure::Runtime(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("0,1"), Ok(C64::new(0.0, 1.0)));
        assert_eq!(parse_complex(" -0.3 , 8e-1"), Ok(C64::new(-0.3, 0.8)));
        assert!(parse_complex("0.3").is_err());
        assert!(parse_complex("0,5;1").is_err());
        assert!(parse_complex("nan,1").is_err());
        assert_eq!(parse_index("-1,2"), Ok((-1, 2)));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
