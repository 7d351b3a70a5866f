//! Run configuration: the ensemble, the set E, optional tilts and chain settings.

use std::path::Path;

use nibm::identities::Problem;
use nibm::montecarlo::ChainConfig;
use nibm::{normalize, validate, BlockSpec, Deformation, EnsembleSpec, IntervalUnion, Precision, TauPoint, ValidatedSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn real_line() -> IntervalUnion {
    IntervalUnion::real_line()
}

/// Keys q, p, m, n, a, b, t describe the ensemble; `intervals` is a list of
/// [lo, hi] pairs with "-inf"/"inf" sentinels (default: the real line).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub q: usize,
    pub p: usize,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: f64,
    #[serde(default = "real_line")]
    pub intervals: IntervalUnion,
    /// Quadratic tilts of the normalized weights, one per starting point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    /// One per ending point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainConfig>,
}

impl RunConfig {
    /// Inline JSON when the argument starts with '{', otherwise a file path.
    pub fn load(arg: &str) -> Result<(Self, String), CliError> {
        let (text, source) = if arg.trim_start().starts_with('{') {
            (arg.to_string(), "inline".to_string())
        } else {
            let text = std::fs::read_to_string(Path::new(arg)).map_err(|e| CliError::Usage(format!("reading {arg}: {e}")))?;
            (text, arg.to_string())
        };
        let cfg = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        Ok((cfg, source))
    }

    pub fn spec(&self) -> EnsembleSpec {
        EnsembleSpec {
            q: self.q,
            p: self.p,
            m: self.m.clone(),
            n: self.n.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            t: self.t,
        }
    }

    pub fn validated(&self) -> Result<ValidatedSpec, CliError> {
        Ok(validate(&self.spec())?)
    }

    /// The tau point in normalized coordinates, with the configured tilts.
    pub fn problem(&self, precision: Precision) -> Result<Problem, CliError> {
        let spec = self.validated()?;
        let np = normalize(&spec, &self.intervals)?;
        let mut pt = TauPoint::from_normalized(&np);
        if self.alpha.is_some() || self.beta.is_some() {
            let alpha = self.alpha.clone().unwrap_or_else(|| vec![0.0; self.q]);
            let beta = self.beta.clone().unwrap_or_else(|| vec![0.0; self.p]);
            pt.def = Deformation::with_tilts(self.q, self.p, &alpha, &beta)?;
        }
        let mut pr = Problem::new("config", pt, BlockSpec::new(&spec.m, &spec.n)?)?;
        pr.precision = precision;
        Ok(pr)
    }
}
