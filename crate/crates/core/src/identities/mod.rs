//! Residual checks of the bilinear, Virasoro and second-derivative identities
//! satisfied by the deformed tau function, all evaluated by finite differences.

mod hirota;
mod lemma;
mod pq22;
mod prop1;
mod virasoro;

pub use hirota::{check_corollary_ratios, check_hirota, hirota_all, ratios_all, HirotaKind, RatioKind};
pub use lemma::{check_second_derivative_lemma, lemma_all, LemmaRelation};
pub use pq22::{check_equation as pq22_check_equation, check_pq22_system, Pq22Equation, PQ22_STEPS};
pub use prop1::{check_prop1, prop1_members, Prop1Members};
pub use virasoro::check_virasoro;

use serde::Serialize;

use crate::diffops::Functional;
use crate::error::{Error, Result};
use crate::tau::{tau_eval, BlockSpec, Precision, TauPoint};

/// Denominator floor of the relative residual.
pub const REL_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub id: String,
    pub config: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub fd_error: f64,
    pub tolerance: f64,
    /// Base finite-difference step.
    pub step: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub intermediates: Vec<(String, f64)>,
}

impl ResidualReport {
    pub fn new(id: impl Into<String>, config: &str, lhs: f64, rhs: f64, fd_error: f64, tolerance: f64, step: f64) -> Self {
        let abs_residual = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs()).max(REL_FLOOR);
        let rel_residual = abs_residual / scale;
        let fd_ratio = if fd_error.is_finite() { fd_error / scale / tolerance } else { 1.0 };
        let status = if !rel_residual.is_finite() {
            Status::Fail
        } else if lhs.abs().max(rhs.abs()) < REL_FLOOR {
            Status::Indeterminate
        } else if rel_residual <= tolerance * fd_ratio.max(1.0) {
            Status::Pass
        } else {
            Status::Fail
        };
        ResidualReport {
            id: id.into(),
            config: config.to_string(),
            lhs,
            rhs,
            abs_residual,
            rel_residual,
            fd_error,
            tolerance,
            step,
            status,
            intermediates: Vec::new(),
        }
    }

    pub fn indeterminate(mut self) -> Self {
        self.status = Status::Indeterminate;
        self
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.intermediates.push((name.to_string(), v));
        self
    }

    /// Residual below tolerance, ignoring the finite-difference allowance.
    pub fn strict_pass(&self) -> bool {
        self.rel_residual <= self.tolerance
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// A tau point together with its block structure.
#[derive(Debug, Clone, Serialize)]
pub struct Problem {
    pub name: String,
    pub point: TauPoint,
    pub blocks: BlockSpec,
    #[serde(skip)]
    pub precision: Precision,
}

impl Problem {
    pub fn new(name: impl Into<String>, point: TauPoint, blocks: BlockSpec) -> Result<Self> {
        if blocks.m.len() != point.q() || blocks.n.len() != point.p() {
            return Err(Error::Invalid("block spec does not match point".into()));
        }
        Ok(Problem { name: name.into(), point, blocks, precision: Precision::Double })
    }

    pub fn n_particles(&self) -> usize {
        self.blocks.size()
    }

    pub fn log_tau(&self) -> LogTau<'_> {
        LogTau { blocks: &self.blocks, precision: self.precision }
    }

    /// sum a_i m_i + sum b_j n_j at a point.
    pub fn sigma(&self, x: &TauPoint) -> f64 {
        let sa: f64 = x.a.iter().zip(&self.blocks.m).map(|(a, &m)| a * m as f64).sum();
        let sb: f64 = x.b.iter().zip(&self.blocks.n).map(|(b, &n)| b * n as f64).sum();
        sa + sb
    }

    /// <alpha, m> + <beta, n> at a point.
    pub fn tilt_pairing(&self, x: &TauPoint) -> f64 {
        let sa: f64 = x.def.alpha.iter().zip(&self.blocks.m).map(|(a, &m)| a * m as f64).sum();
        let sb: f64 = x.def.beta.iter().zip(&self.blocks.n).map(|(b, &n)| b * n as f64).sum();
        sa + sb
    }

    pub fn require_bounded(&self) -> Result<()> {
        if self.point.e.is_bounded() {
            Ok(())
        } else {
            Err(Error::Invalid("identity needs a bounded set E".into()))
        }
    }
}

/// log |tau| for fixed block sizes.
pub struct LogTau<'a> {
    pub blocks: &'a BlockSpec,
    pub precision: Precision,
}

impl Functional for LogTau<'_> {
    fn eval(&self, pt: &TauPoint) -> Result<f64> {
        let d = tau_eval(pt, self.blocks, self.precision)?.det;
        if d.sign == 0 {
            return Err(Error::NumericalGuard("tau vanishes on the stencil".into()));
        }
        Ok(d.logmag)
    }
}

/// Shifted tau normalized by the unshifted tau at a fixed reference point:
/// x -> tau_shifted(x) / tau(x0).
pub struct TauRatio {
    pub blocks: BlockSpec,
    pub log_ref: f64,
    pub precision: Precision,
}

impl TauRatio {
    pub fn new(pr: &Problem, row_shift: &[i64], col_shift: &[i64], log_ref: f64) -> Result<Self> {
        Ok(TauRatio { blocks: pr.blocks.shifted(row_shift, col_shift)?, log_ref, precision: pr.precision })
    }
}

impl Functional for TauRatio {
    fn eval(&self, pt: &TauPoint) -> Result<f64> {
        let d = tau_eval(pt, &self.blocks, self.precision)?.det;
        Ok(if d.sign == 0 { 0.0 } else { d.sign as f64 * (d.logmag - self.log_ref).exp() })
    }
}

pub(crate) fn unit(len: usize, i: usize, s: i64) -> Vec<i64> {
    let mut v = vec![0; len];
    v[i] += s;
    v
}

pub(crate) fn pair(len: usize, i: usize, j: usize) -> Vec<i64> {
    let mut v = vec![0; len];
    v[i] += 1;
    v[j] -= 1;
    v
}

pub(crate) fn neg(v: &[i64]) -> Vec<i64> {
    v.iter().map(|x| -x).collect()
}
