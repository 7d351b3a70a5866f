//! Block moment matrices, tau functions and the probability P(E).

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::domain::{normalize, Deformation, IntervalUnion, NormalizedProblem, ValidatedSpec};
use crate::error::{Error, Result};
use crate::linalg::{cond1, lu, Matrix, SignedLogDet};
use crate::moments::{moments, ScaledMoments};

pub const MAX_N_DOUBLE: usize = 12;
pub const MAX_N_DD: usize = 20;
/// Above this estimated condition number the determinant is recomputed in double-double.
pub const COND_SWITCH: f64 = 1e12;
/// Above this the double-double result is refused.
pub const COND_LIMIT: f64 = 1e24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Double LU, escalating to double-double when ill-conditioned.
    #[default]
    Double,
    /// Always double-double LU.
    Dd,
}

/// Block sizes: m rows per starting family, n columns per ending family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockSpec {
    pub m: Vec<usize>,
    pub n: Vec<usize>,
}

impl BlockSpec {
    pub fn new(m: &[usize], n: &[usize]) -> Result<Self> {
        let (sm, sn): (usize, usize) = (m.iter().sum(), n.iter().sum());
        if sm != sn {
            return Err(Error::MultiplicityMismatch(sm, sn));
        }
        Ok(BlockSpec { m: m.to_vec(), n: n.to_vec() })
    }

    pub fn size(&self) -> usize {
        self.m.iter().sum()
    }

    /// Shifted block sizes m + row_shift, n + col_shift.
    pub fn shifted(&self, row_shift: &[i64], col_shift: &[i64]) -> Result<Self> {
        if row_shift.len() != self.m.len() || col_shift.len() != self.n.len() {
            return Err(Error::InvalidShift("shift length".into()));
        }
        let apply = |v: &[usize], s: &[i64]| -> Result<Vec<usize>> {
            v.iter()
                .zip(s)
                .map(|(&x, &d)| {
                    let y = x as i64 + d;
                    if y < 0 {
                        Err(Error::InvalidShift(format!("multiplicity {x} shifted by {d} is negative")))
                    } else {
                        Ok(y as usize)
                    }
                })
                .collect()
        };
        let m = apply(&self.m, row_shift)?;
        let n = apply(&self.n, col_shift)?;
        let (sm, sn): (usize, usize) = (m.iter().sum(), n.iter().sum());
        if sm != sn {
            return Err(Error::InvalidShift(format!("totals differ after shift ({sm} != {sn})")));
        }
        Ok(BlockSpec { m, n })
    }
}

/// A point in the full coordinate space of the tau function (normalized variables).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauPoint {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub def: Deformation,
    pub e: IntervalUnion,
}

impl TauPoint {
    pub fn new(a: &[f64], b: &[f64], e: IntervalUnion) -> Self {
        TauPoint { a: a.to_vec(), b: b.to_vec(), def: Deformation::zero(a.len(), b.len()), e }
    }

    pub fn from_normalized(np: &NormalizedProblem) -> Self {
        Self::new(&np.a, &np.b, np.e.clone())
    }

    pub fn q(&self) -> usize {
        self.a.len()
    }

    pub fn p(&self) -> usize {
        self.b.len()
    }

    pub fn with_e(&self, e: IntervalUnion) -> Self {
        TauPoint { e, ..self.clone() }
    }

    /// Linear tilt of block (alpha, beta).
    pub fn tilt(&self, al: usize, be: usize) -> f64 {
        self.a[al] + self.b[be] + self.def.t1[be] - self.def.s1[al]
    }

    /// Quadratic coefficient of block (alpha, beta).
    pub fn gamma(&self, al: usize, be: usize) -> f64 {
        1.0 - 2.0 * (self.def.alpha[al] + self.def.beta[be] + self.def.t2[be] - self.def.s2[al])
    }
}

/// Block matrix stored as exp(offset) * diag(row scale) * `entries`, entries in double-double.
#[derive(Debug, Clone)]
pub struct ScaledMatrix {
    pub entries: Matrix<Dd>,
    /// log of the factor pulled out of each row
    pub row_log: Vec<f64>,
    /// log of the factor pulled out of each column
    pub col_log: Vec<f64>,
}

impl ScaledMatrix {
    pub fn log_offset(&self) -> f64 {
        self.row_log.iter().sum::<f64>() + self.col_log.iter().sum::<f64>()
    }

    /// Unscaled matrix; entries may overflow.
    pub fn to_plain(&self) -> Matrix<f64> {
        let n = self.entries.n;
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v = self.entries.get(i, j).to_f64();
                m.set(i, j, if v == 0.0 { 0.0 } else { v * (self.row_log[i] + self.col_log[j]).exp() });
            }
        }
        m
    }
}

fn block_moments(pt: &TauPoint, bs: &BlockSpec) -> Result<Vec<Vec<Option<ScaledMoments>>>> {
    let mut out = Vec::with_capacity(bs.m.len());
    for (al, &ma) in bs.m.iter().enumerate() {
        let mut row = Vec::with_capacity(bs.n.len());
        for (be, &nb) in bs.n.iter().enumerate() {
            if ma == 0 || nb == 0 {
                row.push(None);
                continue;
            }
            row.push(Some(moments(ma + nb - 2, pt.tilt(al, be), pt.gamma(al, be), &pt.e)?));
        }
        out.push(row);
    }
    Ok(out)
}

fn check_shape(pt: &TauPoint, bs: &BlockSpec) -> Result<()> {
    if bs.m.len() != pt.q() || bs.n.len() != pt.p() {
        return Err(Error::Invalid(format!(
            "block spec ({}, {}) does not match point ({}, {})",
            bs.m.len(),
            bs.n.len(),
            pt.q(),
            pt.p()
        )));
    }
    pt.def.check_shape(pt.q(), pt.p())
}

/// Assembles the moment matrix in log-scaled double-double form, with rows and
/// columns equilibrated by exact powers of two.
pub fn build_scaled(pt: &TauPoint, bs: &BlockSpec) -> Result<ScaledMatrix> {
    check_shape(pt, bs)?;
    let n = bs.size();
    let mom = block_moments(pt, bs)?;
    let mut entries = Matrix::<Dd>::zeros(n);
    let mut row_log = vec![0.0; n];
    let mut r0 = 0;
    for (al, &ma) in bs.m.iter().enumerate() {
        let shift = mom[al].iter().flatten().map(|m| m.log_scale).fold(f64::NEG_INFINITY, f64::max);
        let mut c0 = 0;
        for (be, &nb) in bs.n.iter().enumerate() {
            if let Some(mm) = &mom[al][be] {
                let f = (Dd::from(mm.log_scale) - Dd::from(shift)).exp();
                for i in 0..ma {
                    for j in 0..nb {
                        entries.set(r0 + i, c0 + j, mm.values[i + j] * f);
                    }
                }
            }
            c0 += nb;
        }
        for i in 0..ma {
            row_log[r0 + i] = shift;
        }
        r0 += ma;
    }
    let mut col_log = vec![0.0; n];
    equilibrate(&mut entries, &mut row_log, &mut col_log);
    Ok(ScaledMatrix { entries, row_log, col_log })
}

fn pow2_exponent(x: f64) -> i32 {
    if x == 0.0 || !x.is_finite() { 0 } else { x.abs().log2().floor() as i32 }
}

fn equilibrate(m: &mut Matrix<Dd>, row_log: &mut [f64], col_log: &mut [f64]) {
    let n = m.n;
    let ln2 = std::f64::consts::LN_2;
    for i in 0..n {
        let mx = (0..n).map(|j| m.get(i, j).hi.abs()).fold(0.0, f64::max);
        let e = pow2_exponent(mx);
        if e != 0 {
            for j in 0..n {
                m.set(i, j, m.get(i, j).ldexp(-e));
            }
            row_log[i] += e as f64 * ln2;
        }
    }
    for j in 0..n {
        let mx = (0..n).map(|i| m.get(i, j).hi.abs()).fold(0.0, f64::max);
        let e = pow2_exponent(mx);
        if e != 0 {
            for i in 0..n {
                m.set(i, j, m.get(i, j).ldexp(-e));
            }
            col_log[j] += e as f64 * ln2;
        }
    }
}

/// Plain N x N moment matrix (entries may overflow for large tilts).
pub fn build_matrix(pt: &TauPoint, bs: &BlockSpec) -> Result<Matrix<f64>> {
    Ok(build_scaled(pt, bs)?.to_plain())
}

/// Which backend produced a determinant and how well conditioned the scaled matrix was.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauEval {
    pub det: SignedLogDet,
    pub cond: f64,
    pub used_dd: bool,
}

/// Determinant of a scaled matrix with the conditioning guard.
pub fn det_scaled(sm: &ScaledMatrix, precision: Precision) -> Result<TauEval> {
    let n = sm.entries.n;
    if n == 0 {
        return Ok(TauEval { det: SignedLogDet::ONE, cond: 1.0, used_dd: false });
    }
    if n > MAX_N_DD {
        return Err(Error::TooLarge { n, max: MAX_N_DD, backend: "double-double" });
    }
    if precision == Precision::Double {
        if n > MAX_N_DOUBLE {
            return Err(Error::TooLarge { n, max: MAX_N_DOUBLE, backend: "double" });
        }
        let m = sm.entries.to_f64();
        let f = lu(&m)?;
        let d = f.log_det();
        if d.sign != 0 {
            let c = cond1(&m, &f);
            if c <= COND_SWITCH {
                return Ok(TauEval { det: d.scale_log(sm.log_offset()), cond: c, used_dd: false });
            }
        }
    }
    let f = lu(&sm.entries)?;
    let d = f.log_det();
    if d.sign == 0 {
        return Ok(TauEval { det: SignedLogDet::ZERO, cond: f64::INFINITY, used_dd: true });
    }
    let c = cond1(&sm.entries, &f);
    if c > COND_LIMIT {
        return Err(Error::NumericalGuard(format!("condition number {c:.3e} exceeds {COND_LIMIT:.0e}")));
    }
    Ok(TauEval { det: d.scale_log(sm.log_offset()), cond: c, used_dd: true })
}

pub fn tau_eval(pt: &TauPoint, bs: &BlockSpec, precision: Precision) -> Result<TauEval> {
    if bs.size() == 0 {
        check_shape(pt, bs)?;
        return Ok(TauEval { det: SignedLogDet::ONE, cond: 1.0, used_dd: false });
    }
    det_scaled(&build_scaled(pt, bs)?, precision)
}

/// tau^E_{m,n} at the given point, as sign and log-magnitude.
pub fn tau_e(pt: &TauPoint, bs: &BlockSpec) -> Result<SignedLogDet> {
    Ok(tau_eval(pt, bs, Precision::Double)?.det)
}

/// tau with block sizes m + row_shift, n + col_shift.
pub fn tau_shifted(pt: &TauPoint, bs: &BlockSpec, row_shift: &[i64], col_shift: &[i64]) -> Result<SignedLogDet> {
    tau_e(pt, &bs.shifted(row_shift, col_shift)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityReport {
    /// Clamped to [0, 1].
    pub probability: f64,
    pub raw: f64,
    pub log_tau_e: f64,
    pub log_tau_r: f64,
    pub normalized: NormalizedProblem,
}

/// P(all particles in E at time t) = tau^E / tau^R at zero deformation, in normalized variables.
pub fn probability(spec: &ValidatedSpec, e: &IntervalUnion) -> Result<ProbabilityReport> {
    probability_with(spec, e, Precision::Double)
}

pub fn probability_with(spec: &ValidatedSpec, e: &IntervalUnion, precision: Precision) -> Result<ProbabilityReport> {
    let np = normalize(spec, e)?;
    let bs = BlockSpec::new(&spec.m, &spec.n)?;
    let pt = TauPoint::from_normalized(&np);
    let te = tau_eval(&pt, &bs, precision)?.det;
    let tr = tau_eval(&pt.with_e(IntervalUnion::real_line()), &bs, precision)?.det;
    if tr.sign == 0 {
        return Err(Error::NumericalGuard("tau over the real line vanishes (degenerate configuration)".into()));
    }
    let raw = te.div(&tr)?.value();
    Ok(ProbabilityReport {
        probability: raw.clamp(0.0, 1.0),
        raw,
        log_tau_e: te.logmag,
        log_tau_r: tr.logmag,
        normalized: np,
    })
}
