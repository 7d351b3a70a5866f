//! Bilinear identities between tau and its block-shifted neighbours, and the
//! ratio identities that follow from them.

use serde::Serialize;

use super::{neg, pair, unit, Problem, ResidualReport, TauRatio};
use crate::diffops::{fd, Coordinate, FdConfig, FdValue, Functional};
use crate::error::{Error, Result};

/// Which bilinear identity. `TT*` pair two ending families, `SS*` two
/// starting families, the mixed ones a starting family with an ending family.
/// The digit is the order of the Schur polynomial on the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HirotaKind {
    TT0,
    TT1,
    SS0,
    SS1,
    ST0,
    ST1,
    TS1,
}

impl HirotaKind {
    pub const ALL: [HirotaKind; 7] =
        [HirotaKind::TT0, HirotaKind::TT1, HirotaKind::SS0, HirotaKind::SS1, HirotaKind::ST0, HirotaKind::ST1, HirotaKind::TS1];

    fn tag(&self) -> &'static str {
        match self {
            HirotaKind::TT0 => "tt0",
            HirotaKind::TT1 => "tt1",
            HirotaKind::SS0 => "ss0",
            HirotaKind::SS1 => "ss1",
            HirotaKind::ST0 => "st0",
            HirotaKind::ST1 => "st1",
            HirotaKind::TS1 => "ts1",
        }
    }

    fn mixed(&self) -> bool {
        matches!(self, HirotaKind::ST0 | HirotaKind::ST1 | HirotaKind::TS1)
    }

    fn same_ending(&self) -> bool {
        matches!(self, HirotaKind::TT0 | HirotaKind::TT1)
    }
}

/// The two shifted block structures (+, -) of an identity.
fn shifts(pr: &Problem, kind: HirotaKind, i: usize, j: usize) -> Result<[(Vec<i64>, Vec<i64>); 2]> {
    let (q, p) = (pr.point.q(), pr.point.p());
    let zq = vec![0; q];
    let zp = vec![0; p];
    let check = |ok: bool| if ok { Ok(()) } else { Err(Error::InvalidShift(format!("indices ({i}, {j}) invalid for {kind:?}"))) };
    let out = if kind.same_ending() {
        check(i < p && j < p && i != j)?;
        let s = pair(p, i, j);
        [(zq.clone(), s.clone()), (zq, neg(&s))]
    } else if kind.mixed() {
        check(i < q && j < p)?;
        [(unit(q, i, 1), unit(p, j, 1)), (unit(q, i, -1), unit(p, j, -1))]
    } else {
        check(i < q && j < q && i != j)?;
        // A = m - e_i + e_j first, B = m + e_i - e_j second
        let s = pair(q, j, i);
        [(s.clone(), zp.clone()), (neg(&s), zp)]
    };
    for (r, c) in &out {
        pr.blocks.shifted(r, c)?;
    }
    Ok(out)
}

fn lhs_dirs(kind: HirotaKind, i: usize, j: usize) -> [Coordinate; 2] {
    use Coordinate::*;
    match kind {
        HirotaKind::TT0 => [T1(i), T1(j)],
        HirotaKind::TT1 => [T2(i), T1(j)],
        HirotaKind::SS0 => [S1(i), S1(j)],
        HirotaKind::SS1 => [S2(i), S1(j)],
        HirotaKind::ST0 => [S1(i), T1(j)],
        HirotaKind::ST1 => [S1(i), T2(j)],
        HirotaKind::TS1 => [T1(j), S2(i)],
    }
}

/// r_a * D r_b - r_b * D r_a
fn wronskian(ra: &TauRatio, rb: &TauRatio, pr: &Problem, dir: Coordinate) -> Result<FdValue> {
    let cfg = FdConfig::order(1);
    let da = fd(ra, &pr.point, &[dir], cfg)?;
    let db = fd(rb, &pr.point, &[dir], cfg)?;
    let (va, vb) = (ra.eval(&pr.point)?, rb.eval(&pr.point)?);
    Ok(FdValue { value: va * db.value - vb * da.value, error: (va * db.error).abs() + (vb * da.error).abs() })
}

/// Checks one bilinear identity in the form divided by tau^2:
/// d^2 log tau = (combination of shifted taus) / tau^2.
pub fn check_hirota(pr: &Problem, kind: HirotaKind, i: usize, j: usize, tol: f64) -> Result<ResidualReport> {
    let [(rp, cp), (rm, cm)] = shifts(pr, kind, i, j)?;
    let f = pr.log_tau();
    let x0 = &pr.point;
    let log_ref = f.eval(x0)?;
    let plus = TauRatio::new(pr, &rp, &cp, log_ref)?;
    let minus = TauRatio::new(pr, &rm, &cm, log_ref)?;
    let cfg = FdConfig::order(2);
    let lhs = fd(&f, x0, &lhs_dirs(kind, i, j), cfg)?;
    use Coordinate::*;
    let rhs = match kind {
        HirotaKind::TT0 | HirotaKind::SS0 => {
            FdValue { value: plus.eval(x0)? * minus.eval(x0)?, error: 0.0 }
        }
        HirotaKind::ST0 => FdValue { value: -plus.eval(x0)? * minus.eval(x0)?, error: 0.0 },
        // tau_- d tau_+ - tau_+ d tau_-
        HirotaKind::TT1 => wronskian(&minus, &plus, pr, T1(i))?,
        // tau_B d tau_A - tau_A d tau_B with A first
        HirotaKind::SS1 => wronskian(&minus, &plus, pr, S1(i))?,
        HirotaKind::ST1 => {
            let w = wronskian(&minus, &plus, pr, T1(j))?;
            FdValue { value: -w.value, error: w.error }
        }
        HirotaKind::TS1 => {
            let w = wronskian(&plus, &minus, pr, S1(i))?;
            FdValue { value: -w.value, error: w.error }
        }
    };
    let id = format!("hirota.{}[{},{}]", kind.tag(), i + 1, j + 1);
    Ok(ResidualReport::new(id, &pr.name, lhs.value, rhs.value, lhs.error + rhs.error, tol, cfg.h))
}

/// Every identity whose shifts are admissible for the problem.
pub fn hirota_all(pr: &Problem, tol: f64) -> Result<Vec<ResidualReport>> {
    let (q, p) = (pr.point.q(), pr.point.p());
    let mut out = Vec::new();
    for kind in HirotaKind::ALL {
        let (ni, nj) = if kind.same_ending() {
            (p, p)
        } else if kind.mixed() {
            (q, p)
        } else {
            (q, q)
        };
        for i in 0..ni {
            for j in 0..nj {
                match check_hirota(pr, kind, i, j, tol) {
                    Ok(r) => out.push(r),
                    Err(Error::InvalidShift(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(out)
}

/// The four ratio identities: a first derivative of the log of a ratio of
/// shifted taus against a ratio of second derivatives of log tau.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RatioKind {
    /// d/dt1_l log(tau_{n+e_l-e_l'} / tau_{n-e_l+e_l'})
    Ending,
    /// d/ds1_k log(tau_{m-e_k+e_k'} / tau_{m+e_k-e_k'})
    Starting,
    /// d/dt1_l log(tau_{m+e_k,n+e_l} / tau_{m-e_k,n-e_l})
    MixedT,
    /// d/ds1_k log(tau_{m-e_k,n-e_l} / tau_{m+e_k,n+e_l})
    MixedS,
}

impl RatioKind {
    pub const ALL: [RatioKind; 4] = [RatioKind::Ending, RatioKind::Starting, RatioKind::MixedT, RatioKind::MixedS];
}

/// Denominators below this make a ratio check indeterminate.
pub const RATIO_FLOOR: f64 = 1e-10;

/// Log-ratio of two shifted taus.
struct LogRatio {
    num: TauRatio,
    den: TauRatio,
}

impl Functional for LogRatio {
    fn eval(&self, pt: &crate::tau::TauPoint) -> Result<f64> {
        let (a, b) = (self.num.eval(pt)?, self.den.eval(pt)?);
        if a == 0.0 || b == 0.0 {
            return Err(Error::NumericalGuard("shifted tau vanishes".into()));
        }
        Ok((a / b).abs().ln())
    }
}

/// `i`, `j` are (l, l') for `Ending`, (k, k') for `Starting` and (k, l) for the mixed kinds.
pub fn check_corollary_ratios(pr: &Problem, kind: RatioKind, i: usize, j: usize, tol: f64) -> Result<ResidualReport> {
    use Coordinate::*;
    let f = pr.log_tau();
    let x0 = &pr.point;
    let log_ref = f.eval(x0)?;
    let (hk, dir, num_den, dirs) = match kind {
        RatioKind::Ending => (HirotaKind::TT0, T1(i), (0, 1), [[T2(i), T1(j)], [T1(i), T1(j)]]),
        RatioKind::Starting => (HirotaKind::SS0, S1(i), (0, 1), [[S2(i), S1(j)], [S1(i), S1(j)]]),
        RatioKind::MixedT => (HirotaKind::ST0, T1(j), (0, 1), [[T2(j), S1(i)], [T1(j), S1(i)]]),
        RatioKind::MixedS => (HirotaKind::ST0, S1(i), (1, 0), [[S2(i), T1(j)], [S1(i), T1(j)]]),
    };
    let sh = shifts(pr, hk, i, j)?;
    let num = TauRatio::new(pr, &sh[num_den.0].0, &sh[num_den.0].1, log_ref)?;
    let den = TauRatio::new(pr, &sh[num_den.1].0, &sh[num_den.1].1, log_ref)?;
    let cfg2 = FdConfig::order(2);
    let top = fd(&f, x0, &dirs[0], cfg2)?;
    let bottom = fd(&f, x0, &dirs[1], cfg2)?;
    let id = format!("ratio.{kind:?}[{},{}]", i + 1, j + 1).to_lowercase();
    if bottom.value.abs() < RATIO_FLOOR {
        return Ok(ResidualReport::new(id, &pr.name, f64::NAN, f64::NAN, f64::NAN, tol, cfg2.h)
            .with("denominator", bottom.value)
            .indeterminate());
    }
    let lhs = fd(&LogRatio { num, den }, x0, &[dir], FdConfig::order(1))?;
    let rhs = top.value / bottom.value;
    let rhs_err = (top.error + rhs.abs() * bottom.error) / bottom.value.abs();
    Ok(ResidualReport::new(id, &pr.name, lhs.value, rhs, lhs.error + rhs_err, tol, cfg2.h).with("denominator", bottom.value))
}

pub fn ratios_all(pr: &Problem, tol: f64) -> Result<Vec<ResidualReport>> {
    let (q, p) = (pr.point.q(), pr.point.p());
    let mut out = Vec::new();
    for kind in RatioKind::ALL {
        let (ni, nj, distinct) = match kind {
            RatioKind::Ending => (p, p, true),
            RatioKind::Starting => (q, q, true),
            _ => (q, p, false),
        };
        for i in 0..ni {
            for j in 0..nj {
                if distinct && i == j {
                    continue;
                }
                match check_corollary_ratios(pr, kind, i, j, tol) {
                    Ok(r) => out.push(r),
                    Err(Error::InvalidShift(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(out)
}
