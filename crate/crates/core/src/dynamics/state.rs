//! A single state type covering every model family, with a stable flat
//! layout used by the integrator and by trajectory export.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticParams;
use crate::error::{Error, Result};
use crate::models::multitop::{nm_eom, nm_lax, nm_m, nm_mu_term};
use crate::models::nonrel::{max_diag_trace, nonrel_multitop_eom, nonrel_rank1_eom, spin_cm_eom};
use crate::models::rank1::{rank1_embed, rank1_eom};
use crate::models::spin_rs::{rs_eom, rs_lax, rs_m, rs_mu_term};
use crate::models::top::{top_eom, top_lax, top_m};
use crate::models::{
    MultiTopState, NonrelMultiTopState, NonrelRank1State, Rank1State, SpinCmState, SpinRsState,
    TopState,
};
use crate::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SpinRs,
    Top,
    Multitop,
    Rank1,
    SpinCm,
    NonrelTop,
    NonrelMultitop,
    NonrelRank1,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::SpinRs,
        Family::Top,
        Family::Multitop,
        Family::Rank1,
        Family::SpinCm,
        Family::NonrelTop,
        Family::NonrelMultitop,
        Family::NonrelRank1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::SpinRs => "spin-rs",
            Family::Top => "top",
            Family::Multitop => "multitop",
            Family::Rank1 => "rank1",
            Family::SpinCm => "spin-cm",
            Family::NonrelTop => "nonrel-top",
            Family::NonrelMultitop => "nonrel-multitop",
            Family::NonrelRank1 => "nonrel-rank1",
        }
    }

    /// Families with a Lax pair implemented (the relativistic ones).
    pub fn is_relativistic(self) -> bool {
        matches!(
            self,
            Family::SpinRs | Family::Top | Family::Multitop | Family::Rank1
        )
    }

    /// Families whose particle velocities are tied to the spins.
    pub fn has_velocity_constraint(self) -> bool {
        matches!(self, Family::SpinRs | Family::Multitop | Family::Rank1)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model family '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelState {
    SpinRs(SpinRsState),
    Top(TopState),
    Multitop(MultiTopState),
    Rank1(Rank1State),
    SpinCm(SpinCmState),
    NonrelTop(TopState),
    NonrelMultitop(NonrelMultiTopState),
    NonrelRank1(NonrelRank1State),
}

fn push_matrix(out: &mut Vec<C64>, s: &CMatrix, n: usize) {
    let m = s.nrows() / n;
    for bi in 0..m {
        for bj in 0..m {
            for a in 0..n {
                for b in 0..n {
                    out.push(s[(bi * n + a, bj * n + b)]);
                }
            }
        }
    }
}

fn read_matrix(x: &mut impl Iterator<Item = C64>, size: usize, n: usize) -> CMatrix {
    let m = size / n;
    let mut s = CMatrix::zeros(size, size);
    for bi in 0..m {
        for bj in 0..m {
            for a in 0..n {
                for b in 0..n {
                    s[(bi * n + a, bj * n + b)] = x.next().unwrap();
                }
            }
        }
    }
    s
}

fn matrix_names(out: &mut Vec<String>, size: usize, n: usize, blocked: bool) {
    let m = size / n;
    for bi in 0..m {
        for bj in 0..m {
            for a in 0..n {
                for b in 0..n {
                    out.push(if blocked {
                        format!("S_{bi}_{bj}_{a}_{b}")
                    } else {
                        format!("S_{}_{}", bi * n + a, bj * n + b)
                    });
                }
            }
        }
    }
}

fn take(x: &mut impl Iterator<Item = C64>, k: usize) -> Vec<C64> {
    x.take(k).collect()
}

fn vectors(
    x: &mut impl Iterator<Item = C64>,
    n: usize,
    m: usize,
) -> (Vec<DVector<C64>>, Vec<RowDVector<C64>>) {
    let xi = (0..m).map(|_| DVector::from_vec(take(x, n))).collect();
    let rho = (0..m).map(|_| RowDVector::from_vec(take(x, n))).collect();
    (xi, rho)
}

fn outer(xi: &[DVector<C64>], rho: &[RowDVector<C64>]) -> CMatrix {
    let x = DVector::from_iterator(
        xi.iter().map(|v| v.len()).sum(),
        xi.iter().flat_map(|v| v.iter().copied()),
    );
    let r = RowDVector::from_iterator(
        rho.iter().map(|v| v.len()).sum(),
        rho.iter().flat_map(|v| v.iter().copied()),
    );
    x * r
}

impl ModelState {
    pub fn family(&self) -> Family {
        match self {
            ModelState::SpinRs(_) => Family::SpinRs,
            ModelState::Top(_) => Family::Top,
            ModelState::Multitop(_) => Family::Multitop,
            ModelState::Rank1(_) => Family::Rank1,
            ModelState::SpinCm(_) => Family::SpinCm,
            ModelState::NonrelTop(_) => Family::NonrelTop,
            ModelState::NonrelMultitop(_) => Family::NonrelMultitop,
            ModelState::NonrelRank1(_) => Family::NonrelRank1,
        }
    }

    /// Size `N` of the spin blocks (1 for the particle models).
    pub fn n(&self) -> usize {
        match self {
            ModelState::SpinRs(_) | ModelState::SpinCm(_) => 1,
            ModelState::Top(s) | ModelState::NonrelTop(s) => s.n(),
            ModelState::Multitop(s) => s.n,
            ModelState::Rank1(s) => s.n,
            ModelState::NonrelMultitop(s) => s.n,
            ModelState::NonrelRank1(s) => s.n,
        }
    }

    /// Number of particles `M` (1 for the tops).
    pub fn m(&self) -> usize {
        self.positions().map_or(1, <[C64]>::len)
    }

    pub fn positions(&self) -> Option<&[C64]> {
        match self {
            ModelState::SpinRs(s) => Some(&s.q),
            ModelState::Top(_) | ModelState::NonrelTop(_) => None,
            ModelState::Multitop(s) => Some(&s.q),
            ModelState::Rank1(s) => Some(&s.q),
            ModelState::SpinCm(s) => Some(&s.q),
            ModelState::NonrelMultitop(s) => Some(&s.q),
            ModelState::NonrelRank1(s) => Some(&s.q),
        }
    }

    /// Full spin matrix; the rank-one families return `xi rho`.
    pub fn spin_matrix(&self) -> CMatrix {
        match self {
            ModelState::SpinRs(s) => s.s.clone(),
            ModelState::Top(s) | ModelState::NonrelTop(s) => s.s.clone(),
            ModelState::Multitop(s) => s.s.clone(),
            ModelState::Rank1(s) => outer(&s.xi, &s.rho),
            ModelState::SpinCm(s) => s.s.clone(),
            ModelState::NonrelMultitop(s) => s.s.clone(),
            ModelState::NonrelRank1(s) => outer(&s.xi, &s.rho),
        }
    }

    /// Velocities implied by the constraint (`S_ii`, `tr S^ii / N`,
    /// `rho^i xi^i / N`) for the families that have one.
    pub fn constrained_velocities(&self) -> Option<Vec<C64>> {
        match self {
            ModelState::SpinRs(s) => Some(s.qdot()),
            ModelState::Multitop(s) => Some(s.qdot()),
            ModelState::Rank1(s) => Some(s.qdot()),
            _ => None,
        }
    }

    /// Largest `|tr S^ii|` for the non-relativistic families.
    pub fn trace_defect(&self) -> Option<f64> {
        match self {
            ModelState::SpinCm(s) => {
                Some((0..s.m()).map(|i| s.s[(i, i)].norm()).fold(0.0, f64::max))
            }
            ModelState::NonrelMultitop(s) => Some(max_diag_trace(&s.s, s.n)),
            ModelState::NonrelRank1(s) => Some(
                (0..s.m())
                    .map(|i| (&s.rho[i] * &s.xi[i])[(0, 0)].norm())
                    .fold(0.0, f64::max),
            ),
            _ => None,
        }
    }

    /// Column names of [`ModelState::to_vec`], in the same order.
    pub fn columns(&self) -> Vec<String> {
        let mut out = Vec::new();
        let m = self.m();
        let n = self.n();
        let family = self.family();
        if self.positions().is_some() {
            out.extend((0..m).map(|i| format!("q_{i}")));
        }
        if matches!(
            family,
            Family::SpinCm | Family::NonrelMultitop | Family::NonrelRank1
        ) {
            out.extend((0..m).map(|i| format!("v_{i}")));
        }
        match family {
            Family::SpinRs | Family::SpinCm => matrix_names(&mut out, m, 1, false),
            Family::Top | Family::NonrelTop => matrix_names(&mut out, n, n, false),
            Family::Multitop | Family::NonrelMultitop => matrix_names(&mut out, n * m, n, true),
            Family::Rank1 | Family::NonrelRank1 => {
                for i in 0..m {
                    out.extend((0..n).map(|a| format!("xi_{i}_{a}")));
                }
                for i in 0..m {
                    out.extend((0..n).map(|a| format!("rho_{i}_{a}")));
                }
            }
        }
        out
    }

    /// Flat layout: positions, velocities (if stored), then spins. Block
    /// matrices are laid out block by block, each block row-major; rank-one
    /// data lists every `xi^i` and then every `rho^i`.
    pub fn to_vec(&self) -> Vec<C64> {
        let mut out = Vec::new();
        match self {
            ModelState::SpinRs(s) => {
                out.extend(&s.q);
                push_matrix(&mut out, &s.s, 1);
            }
            ModelState::Top(s) | ModelState::NonrelTop(s) => push_matrix(&mut out, &s.s, s.n()),
            ModelState::Multitop(s) => {
                out.extend(&s.q);
                push_matrix(&mut out, &s.s, s.n);
            }
            ModelState::Rank1(s) => {
                out.extend(&s.q);
                s.xi.iter().for_each(|v| out.extend(v.iter()));
                s.rho.iter().for_each(|v| out.extend(v.iter()));
            }
            ModelState::SpinCm(s) => {
                out.extend(&s.q);
                out.extend(&s.v);
                push_matrix(&mut out, &s.s, 1);
            }
            ModelState::NonrelMultitop(s) => {
                out.extend(&s.q);
                out.extend(&s.v);
                push_matrix(&mut out, &s.s, s.n);
            }
            ModelState::NonrelRank1(s) => {
                out.extend(&s.q);
                out.extend(&s.v);
                s.xi.iter().for_each(|v| out.extend(v.iter()));
                s.rho.iter().for_each(|v| out.extend(v.iter()));
            }
        }
        out
    }

    /// A state of the same family and shape holding the values `x`.
    pub fn with_values(&self, x: &[C64]) -> Result<ModelState> {
        let len = self.to_vec().len();
        if x.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "flat state has {} entries, expected {len}",
                x.len()
            )));
        }
        let (n, m) = (self.n(), self.m());
        let mut it = x.iter().copied();
        let it = &mut it;
        Ok(match self {
            ModelState::SpinRs(_) => ModelState::SpinRs(SpinRsState {
                q: take(it, m),
                s: read_matrix(it, m, 1),
            }),
            ModelState::Top(_) => ModelState::Top(TopState {
                s: read_matrix(it, n, n),
            }),
            ModelState::NonrelTop(_) => ModelState::NonrelTop(TopState {
                s: read_matrix(it, n, n),
            }),
            ModelState::Multitop(_) => ModelState::Multitop(MultiTopState {
                n,
                q: take(it, m),
                s: read_matrix(it, n * m, n),
            }),
            ModelState::Rank1(_) => {
                let q = take(it, m);
                let (xi, rho) = vectors(it, n, m);
                ModelState::Rank1(Rank1State { n, q, xi, rho })
            }
            ModelState::SpinCm(_) => ModelState::SpinCm(SpinCmState {
                q: take(it, m),
                v: take(it, m),
                s: read_matrix(it, m, 1),
            }),
            ModelState::NonrelMultitop(_) => ModelState::NonrelMultitop(NonrelMultiTopState {
                n,
                q: take(it, m),
                v: take(it, m),
                s: read_matrix(it, n * m, n),
            }),
            ModelState::NonrelRank1(_) => {
                let q = take(it, m);
                let v = take(it, m);
                let (xi, rho) = vectors(it, n, m);
                ModelState::NonrelRank1(NonrelRank1State { n, q, v, xi, rho })
            }
        })
    }

    /// Time derivative of [`ModelState::to_vec`] under the family's
    /// equations of motion.
    pub fn rate(&self, params: &EllipticParams) -> Result<Vec<C64>> {
        let mut out = Vec::new();
        match self {
            ModelState::SpinRs(s) => {
                let e = rs_eom(params, s)?;
                out.extend(e.qdot);
                push_matrix(&mut out, &e.sdot, 1);
            }
            ModelState::Top(s) => push_matrix(&mut out, &top_eom(params, s, true)?, s.n()),
            ModelState::NonrelTop(s) => push_matrix(&mut out, &top_eom(params, s, false)?, s.n()),
            ModelState::Multitop(s) => {
                let e = nm_eom(params, s)?;
                out.extend(e.qdot);
                push_matrix(&mut out, &e.sdot, s.n);
            }
            ModelState::Rank1(s) => {
                let e = rank1_eom(params, s)?;
                out.extend(e.qdot);
                e.xidot.iter().for_each(|v| out.extend(v.iter()));
                e.rhodot.iter().for_each(|v| out.extend(v.iter()));
            }
            ModelState::SpinCm(s) => {
                let e = spin_cm_eom(params, s)?;
                out.extend(e.qdot);
                out.extend(e.vdot);
                push_matrix(&mut out, &e.sdot, 1);
            }
            ModelState::NonrelMultitop(s) => {
                let e = nonrel_multitop_eom(params, s)?;
                out.extend(e.qdot);
                out.extend(e.vdot);
                push_matrix(&mut out, &e.sdot, s.n);
            }
            ModelState::NonrelRank1(s) => {
                let e = nonrel_rank1_eom(params, s)?;
                out.extend(e.qdot);
                out.extend(e.vdot);
                e.xidot.iter().for_each(|v| out.extend(v.iter()));
                e.rhodot.iter().for_each(|v| out.extend(v.iter()));
            }
        }
        Ok(out)
    }

    fn no_lax(&self) -> Error {
        Error::InvalidParameter(format!(
            "no Lax pair implemented for family {}",
            self.family()
        ))
    }

    pub fn lax(&self, params: &EllipticParams, z: C64) -> Result<CMatrix> {
        match self {
            ModelState::SpinRs(s) => rs_lax(params, s, z),
            ModelState::Top(s) => top_lax(params, s, z),
            ModelState::Multitop(s) => nm_lax(params, s, z),
            ModelState::Rank1(s) => nm_lax(params, &rank1_embed(s)?, z),
            _ => Err(self.no_lax()),
        }
    }

    pub fn m_matrix(&self, params: &EllipticParams, z: C64) -> Result<CMatrix> {
        match self {
            ModelState::SpinRs(s) => rs_m(params, s, z),
            ModelState::Top(s) => top_m(params, s, z),
            ModelState::Multitop(s) => nm_m(params, s, z),
            ModelState::Rank1(s) => nm_m(params, &rank1_embed(s)?, z),
            _ => Err(self.no_lax()),
        }
    }

    /// Additional term of the off-constraint Lax equation for velocities
    /// `qdot`; zero for the top.
    pub fn mu_term(&self, params: &EllipticParams, qdot: &[C64], z: C64) -> Result<CMatrix> {
        match self {
            ModelState::SpinRs(s) => rs_mu_term(params, s, qdot, z),
            ModelState::Top(s) => Ok(CMatrix::zeros(s.n(), s.n())),
            ModelState::Multitop(s) => nm_mu_term(params, s, qdot, z),
            ModelState::Rank1(s) => nm_mu_term(params, &rank1_embed(s)?, qdot, z),
            _ => Err(self.no_lax()),
        }
    }
}
