//! Core problem types, validation and the space-time normalization.

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the supplied last coordinate when projecting onto the sum-zero plane.
pub const SUM_ZERO_TOL: f64 = 1e-9;

/// Finite union of closed intervals with strictly increasing endpoints.
/// The first component may start at -inf and the last may end at +inf.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    comps: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// Builds the union from components in any order. Components must be disjoint and non-touching.
    pub fn new(mut comps: Vec<(f64, f64)>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::Invalid("empty interval union".into()));
        }
        for &(lo, hi) in &comps {
            if lo.is_nan() || hi.is_nan() || !(lo < hi) {
                return Err(Error::Invalid(format!("bad interval [{lo}, {hi}]")));
            }
            if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::Invalid(format!("bad interval [{lo}, {hi}]")));
            }
        }
        comps.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for w in comps.windows(2) {
            if !(w[0].1 < w[1].0) {
                return Err(Error::Invalid(format!(
                    "intervals [{}, {}] and [{}, {}] touch or overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(IntervalUnion { comps })
    }

    pub fn real_line() -> Self {
        IntervalUnion { comps: vec![(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.comps
    }

    pub fn is_bounded(&self) -> bool {
        self.comps[0].0.is_finite() && self.comps[self.comps.len() - 1].1.is_finite()
    }

    pub fn left_infinite(&self) -> bool {
        self.comps[0].0 == f64::NEG_INFINITY
    }

    pub fn right_infinite(&self) -> bool {
        self.comps[self.comps.len() - 1].1 == f64::INFINITY
    }

    /// Finite endpoints in increasing order.
    pub fn endpoints(&self) -> Vec<f64> {
        self.comps.iter().flat_map(|&(a, b)| [a, b]).filter(|x| x.is_finite()).collect()
    }

    /// Replaces the finite endpoints (same count, same order) and revalidates.
    pub fn with_endpoints(&self, pts: &[f64]) -> Result<Self> {
        let mut it = pts.iter();
        let mut comps = Vec::with_capacity(self.comps.len());
        for &(a, b) in &self.comps {
            let lo = if a.is_finite() { *it.next().ok_or_else(|| Error::Invalid("endpoint count".into()))? } else { a };
            let hi = if b.is_finite() { *it.next().ok_or_else(|| Error::Invalid("endpoint count".into()))? } else { b };
            comps.push((lo, hi));
        }
        if it.next().is_some() {
            return Err(Error::Invalid("endpoint count".into()));
        }
        IntervalUnion::new(comps)
    }

    pub fn scaled(&self, s: f64) -> Self {
        debug_assert!(s > 0.0);
        IntervalUnion { comps: self.comps.iter().map(|&(a, b)| (a * s, b * s)).collect() }
    }

    /// Reflection x -> -x.
    pub fn reflected(&self) -> Self {
        let mut comps: Vec<_> = self.comps.iter().map(|&(a, b)| (-b, -a)).collect();
        comps.reverse();
        IntervalUnion { comps }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.comps.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Largest finite |x| attained at an endpoint, or +inf when unbounded.
    pub fn max_abs(&self) -> f64 {
        if !self.is_bounded() {
            return f64::INFINITY;
        }
        self.comps[0].0.abs().max(self.comps[self.comps.len() - 1].1.abs())
    }

    pub fn is_subset_of(&self, other: &IntervalUnion) -> bool {
        self.comps.iter().all(|&(a, b)| other.comps.iter().any(|&(c, d)| c <= a && b <= d))
    }
}

fn bound_to_json(x: f64) -> serde_json::Value {
    if x == f64::INFINITY {
        serde_json::Value::String("inf".into())
    } else if x == f64::NEG_INFINITY {
        serde_json::Value::String("-inf".into())
    } else {
        serde_json::json!(x)
    }
}

fn bound_from_json<E: de::Error>(v: &serde_json::Value) -> std::result::Result<f64, E> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| E::custom("bad number")),
        serde_json::Value::String(s) => match s.as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => Err(E::custom(format!("unknown bound {s:?}"))),
        },
        _ => Err(E::custom("interval bound must be a number or \"-inf\"/\"inf\"")),
    }
}

impl Serialize for IntervalUnion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.comps.len()))?;
        for &(a, b) in &self.comps {
            seq.serialize_element(&[bound_to_json(a), bound_to_json(b)])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntervalUnion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<[serde_json::Value; 2]> = Vec::deserialize(d)?;
        let mut comps = Vec::with_capacity(raw.len());
        for [a, b] in &raw {
            comps.push((bound_from_json::<D::Error>(a)?, bound_from_json::<D::Error>(b)?));
        }
        IntervalUnion::new(comps).map_err(de::Error::custom)
    }
}

/// The diffusion problem: q starting points with multiplicities m, p ending points with multiplicities n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub q: usize,
    pub p: usize,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: f64,
}

/// An [`EnsembleSpec`] whose invariants have been checked and whose last
/// coordinates have been projected onto the sum-zero plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedSpec(EnsembleSpec);

impl ValidatedSpec {
    pub fn get(&self) -> &EnsembleSpec {
        &self.0
    }

    pub fn n_particles(&self) -> usize {
        self.0.m.iter().sum()
    }
}

impl std::ops::Deref for ValidatedSpec {
    type Target = EnsembleSpec;
    fn deref(&self) -> &EnsembleSpec {
        &self.0
    }
}

fn project_last(v: &mut [f64], name: &'static str) -> Result<()> {
    let k = v.len();
    let head: f64 = v[..k - 1].iter().sum();
    let last = -head;
    let scale = v.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    if (v[k - 1] - last).abs() > SUM_ZERO_TOL * scale {
        return Err(Error::Invalid(format!("{name} does not sum to zero (last entry {} vs {last})", v[k - 1])));
    }
    v[k - 1] = last;
    Ok(())
}

fn check_increasing(v: &[f64], name: &'static str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(name));
    }
    if v.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::NotIncreasing(name));
    }
    Ok(())
}

pub fn validate(spec: &EnsembleSpec) -> Result<ValidatedSpec> {
    let mut s = spec.clone();
    if s.q == 0 || s.p == 0 {
        return Err(Error::Invalid("p and q must be positive".into()));
    }
    if s.m.len() != s.q || s.a.len() != s.q {
        return Err(Error::Invalid(format!("m and a must have length q={}", s.q)));
    }
    if s.n.len() != s.p || s.b.len() != s.p {
        return Err(Error::Invalid(format!("n and b must have length p={}", s.p)));
    }
    let nm: usize = s.m.iter().sum();
    let nn: usize = s.n.iter().sum();
    if nm != nn {
        return Err(Error::MultiplicityMismatch(nm, nn));
    }
    if nm == 0 {
        return Err(Error::Invalid("N must be at least 1".into()));
    }
    if !(s.t > 0.0 && s.t < 1.0) {
        return Err(Error::TimeOutOfRange(s.t));
    }
    check_increasing(&s.a, "a")?;
    check_increasing(&s.b, "b")?;
    project_last(&mut s.a, "a")?;
    project_last(&mut s.b, "b")?;
    check_increasing(&s.a, "a")?;
    check_increasing(&s.b, "b")?;
    Ok(ValidatedSpec(s))
}

/// Problem after the change of variables that turns the transition densities into unit Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedProblem {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub e: IntervalUnion,
}

pub fn scale_factors(t: f64) -> Result<(f64, f64, f64)> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::TimeOutOfRange(t));
    }
    Ok((
        (2.0 * (1.0 - t) / t).sqrt(),
        (2.0 * t / (1.0 - t)).sqrt(),
        (2.0 / (t * (1.0 - t))).sqrt(),
    ))
}

pub fn normalize(spec: &ValidatedSpec, e: &IntervalUnion) -> Result<NormalizedProblem> {
    let (sa, sb, se) = scale_factors(spec.t)?;
    Ok(NormalizedProblem {
        a: spec.a.iter().map(|x| x * sa).collect(),
        b: spec.b.iter().map(|x| x * sb).collect(),
        e: e.scaled(se),
    })
}

/// Inverse of [`normalize`] for fixed t: returns (a, b, E).
pub fn denormalize(np: &NormalizedProblem, t: f64) -> Result<(Vec<f64>, Vec<f64>, IntervalUnion)> {
    let (sa, sb, se) = scale_factors(t)?;
    Ok((
        np.a.iter().map(|x| x / sa).collect(),
        np.b.iter().map(|x| x / sb).collect(),
        np.e.scaled(1.0 / se),
    ))
}

/// Finite-time deformation parameters: (t1, t2, beta) per ending family, (s1, s2, alpha) per starting family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deformation {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Deformation {
    pub fn zero(q: usize, p: usize) -> Self {
        Deformation {
            t1: vec![0.0; p],
            t2: vec![0.0; p],
            s1: vec![0.0; q],
            s2: vec![0.0; q],
            alpha: vec![0.0; q],
            beta: vec![0.0; p],
        }
    }

    pub fn with_tilts(q: usize, p: usize, alpha: &[f64], beta: &[f64]) -> Result<Self> {
        if alpha.len() != q || beta.len() != p {
            return Err(Error::Invalid("alpha/beta length".into()));
        }
        let mut d = Self::zero(q, p);
        d.alpha = alpha.to_vec();
        d.beta = beta.to_vec();
        Ok(d)
    }

    pub fn check_shape(&self, q: usize, p: usize) -> Result<()> {
        if self.s1.len() != q || self.s2.len() != q || self.alpha.len() != q {
            return Err(Error::Invalid(format!("deformation: s1, s2, alpha need length q={q}")));
        }
        if self.t1.len() != p || self.t2.len() != p || self.beta.len() != p {
            return Err(Error::Invalid(format!("deformation: t1, t2, beta need length p={p}")));
        }
        Ok(())
    }

    /// Whether the linear conditions sum(alpha) = sum(beta) = 0 hold.
    pub fn tilts_sum_zero(&self, tol: f64) -> bool {
        self.alpha.iter().sum::<f64>().abs() <= tol && self.beta.iter().sum::<f64>().abs() <= tol
    }
}

/// JSON problem file: an ensemble plus the set E.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub q: usize,
    pub p: usize,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: f64,
    pub intervals: IntervalUnion,
}

impl ProblemConfig {
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
}
