use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use elliptic_tops::elliptic::EllipticParams;
use elliptic_tops::sine_algebra::ModeIndex;
use elliptic_tops::{Error, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Function {
    Theta,
    E1,
    E2,
    Phi,
    F,
    PhiMode,
}

impl Function {
    pub fn name(self) -> &'static str {
        match self {
            Function::Theta => "theta",
            Function::E1 => "e1",
            Function::E2 => "e2",
            Function::Phi => "phi",
            Function::F => "f",
            Function::PhiMode => "phi_mode",
        }
    }
}

/// Rectangular grid `x0..=x1` by `y0..=y1` of points `z = x + i y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x: (f64, f64, usize),
    pub y: (f64, f64, usize),
}

impl Grid {
    /// `x0,x1,nx,y0,y1,ny`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            bail!("grid must be x0,x1,nx,y0,y1,ny, got '{s}'");
        }
        let real = |k: usize| -> Result<f64> {
            let v: f64 = parts[k]
                .parse()
                .with_context(|| format!("bad grid bound '{}'", parts[k]))?;
            if !v.is_finite() {
                bail!("grid bound '{}' is not finite", parts[k]);
            }
            Ok(v)
        };
        let count = |k: usize| -> Result<usize> {
            let v: usize = parts[k]
                .parse()
                .with_context(|| format!("bad grid count '{}'", parts[k]))?;
            if v == 0 {
                bail!("grid counts must be at least 1");
            }
            Ok(v)
        };
        Ok(Self {
            x: (real(0)?, real(1)?, count(2)?),
            y: (real(3)?, real(4)?, count(5)?),
        })
    }

    fn axis((a, b, n): (f64, f64, usize)) -> Vec<f64> {
        if n == 1 {
            return vec![a];
        }
        (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect()
    }

    /// Row-major in `x`, then `y`.
    pub fn points(&self) -> Vec<C64> {
        let ys = Self::axis(self.y);
        Self::axis(self.x)
            .into_iter()
            .flat_map(|x| ys.iter().map(move |&y| C64::new(x, y)))
            .collect()
    }
}

pub struct Request {
    pub function: Function,
    pub grid: Grid,
    pub u: C64,
    pub alpha: (i64, i64),
}

/// `None` marks a pole.
fn value(p: &EllipticParams, req: &Request, z: C64) -> Result<Option<C64>, Error> {
    let v = match req.function {
        Function::Theta => p.theta(z, 0),
        Function::E1 => p.e1(z),
        Function::E2 => p.e2(z),
        Function::Phi => p.phi(z, req.u),
        Function::F => p.f(z, req.u),
        Function::PhiMode => p.phi_mode(z, req.u, ModeIndex::new(req.alpha.0, req.alpha.1, p.n())),
    };
    match v {
        Ok(v) => Ok(Some(v)),
        Err(Error::PoleProximity { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Values of the requested function over the grid; columns `z_re`, `z_im`,
/// `value_re`, `value_im`, `flag` where `flag` is `ok` or `pole`.
pub fn run(p: &EllipticParams, req: &Request, out: &Path) -> Result<usize> {
    if matches!(
        req.function,
        Function::Phi | Function::F | Function::PhiMode
    ) {
        p.ensure_off_lattice(req.u, "u")?;
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w =
        csv::Writer::from_path(out).with_context(|| format!("cannot write {}", out.display()))?;
    w.write_record(["z_re", "z_im", "value_re", "value_im", "flag"])?;
    let points = req.grid.points();
    for &z in &points {
        let (re, im, flag) = match value(p, req, z)? {
            Some(v) => (format!("{:e}", v.re), format!("{:e}", v.im), "ok"),
            None => (String::new(), String::new(), "pole"),
        };
        w.write_record([
            format!("{:e}", z.re),
            format!("{:e}", z.im),
            re,
            im,
            flag.into(),
        ])?;
    }
    w.flush()?;
    Ok(points.len())
}
