//! Tilted Gaussian moments mu_k = int_E x^k exp(-gamma x^2/2 + c x) dx.
//!
//! Values are carried in log-scaled form: mu_k = exp(log_scale) * values[k],
//! where log_scale is the maximum of the exponent over E.

pub mod gauss;
pub mod quad;

use crate::dd::{Dd, PI};
use crate::domain::IntervalUnion;
use crate::error::{Error, Result};

/// Largest k the recurrence is asked for without a warning.
pub const DEFAULT_MAX_K: usize = 64;

/// Fallback to quadrature when the estimated relative error of the
/// double-double recurrence exceeds this.
const MAX_DD_ERROR: f64 = 1e-15;

/// Ratio of the double-double and double unit roundoffs.
const DD_OVER_F64: f64 = 1.2e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    Closed,
    Recurrence,
    Quadrature,
}

#[derive(Debug, Clone)]
pub struct ScaledMoments {
    pub log_scale: f64,
    pub values: Vec<Dd>,
    pub method: MomentMethod,
    /// Estimated relative error of `values` (recurrence paths only).
    pub est_error: f64,
}

impl ScaledMoments {
    pub fn scaled(&self, k: usize) -> f64 {
        self.values[k].to_f64()
    }

    /// mu_k as a plain double; may overflow to infinity.
    pub fn value(&self, k: usize) -> f64 {
        self.values[k].to_f64() * self.log_scale.exp()
    }

    /// (sign, log|mu_k|).
    pub fn signed_log(&self, k: usize) -> (f64, f64) {
        let v = self.values[k].to_f64();
        (v.signum() * (v != 0.0) as i32 as f64, v.abs().ln() + self.log_scale)
    }
}

fn phi(x: f64, c: f64, gamma: f64) -> f64 {
    -0.5 * gamma * x * x + c * x
}

fn phi_dd(x: f64, c: f64, gamma: f64) -> Dd {
    Dd::from_prod(x, x).mul_f64(-0.5 * gamma) + Dd::from_prod(c, x)
}

/// max over E of -gamma x^2/2 + c x.
fn peak_exponent(c: f64, gamma: f64, e: &IntervalUnion) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for &(lo, hi) in e.components() {
        for x in [lo, hi] {
            if x.is_finite() {
                best = best.max(phi(x, c, gamma));
            }
        }
        if gamma > 0.0 {
            let x0 = c / gamma;
            if lo <= x0 && x0 <= hi {
                best = best.max(c * c / (2.0 * gamma));
            }
        }
    }
    best
}

/// Full-line moments with gamma = 1, scaled by exp(c^2/2).
pub fn full_range_scaled(kmax: usize, c: f64) -> ScaledMoments {
    let cd = Dd::from(c);
    let mut v = Vec::with_capacity(kmax + 1);
    v.push((PI.mul_f64(2.0)).sqrt());
    if kmax >= 1 {
        v.push(cd * v[0]);
    }
    for k in 1..kmax {
        let next = cd * v[k] + v[k - 1].mul_f64(k as f64);
        v.push(next);
    }
    ScaledMoments { log_scale: 0.5 * c * c, values: v, method: MomentMethod::Closed, est_error: 0.0 }
}

/// int_R x^k e^{-x^2/2 + c x} dx by mu_{k+1} = c mu_k + k mu_{k-1}.
pub fn mu_full_range(k: usize, c: f64) -> f64 {
    full_range_scaled(k, c).value(k)
}

fn quadrature(kmax: usize, c: f64, gamma: f64, e: &IntervalUnion, s: f64) -> Result<ScaledMoments> {
    let dim = kmax + 1;
    let f = |x: f64, out: &mut [f64]| {
        let w = (phi(x, c, gamma) - s).exp();
        let mut p = w;
        for o in out.iter_mut() {
            *o = p;
            p *= x;
        }
    };
    let mut acc = vec![0.0; dim];
    for &(lo, hi) in e.components() {
        let (lo, hi) = truncate(lo, hi, c, gamma, kmax)?;
        if lo >= hi {
            continue;
        }
        let part = quad::adaptive(&f, lo, hi, dim, 1e-15);
        for k in 0..dim {
            acc[k] += part[k];
        }
    }
    Ok(ScaledMoments {
        log_scale: s,
        values: acc.into_iter().map(Dd::from).collect(),
        method: MomentMethod::Quadrature,
        est_error: 1e-14,
    })
}

/// Replaces infinite ends by points where the integrand is negligible.
fn truncate(lo: f64, hi: f64, c: f64, gamma: f64, kmax: usize) -> Result<(f64, f64)> {
    if lo.is_finite() && hi.is_finite() {
        return Ok((lo, hi));
    }
    if gamma <= 0.0 {
        return Err(Error::Divergent { gamma });
    }
    let x0 = c / gamma;
    let sigma = 1.0 / gamma.sqrt();
    let reach = sigma * (2.0 * (760.0 + kmax as f64 * (x0.abs() + 60.0 * sigma).ln().max(1.0))).sqrt();
    let l = if lo.is_finite() { lo } else { x0 - reach };
    let h = if hi.is_finite() { hi } else { x0 + reach };
    Ok((l.max(lo), h.min(hi)))
}

/// Moments mu_0..=mu_kmax over E.
///
/// For gamma > 0 the three-term recurrence
/// gamma mu_{k+1} = k mu_{k-1} + c mu_k - [x^k w]_E runs in double-double
/// from double-double seeds. A shadow run in double measures how much the
/// recurrence amplifies rounding; if the implied double-double error is too
/// large, or gamma <= 0, adaptive Gauss-Legendre quadrature is used instead.
pub fn moments(kmax: usize, c: f64, gamma: f64, e: &IntervalUnion) -> Result<ScaledMoments> {
    if !c.is_finite() || !gamma.is_finite() {
        return Err(Error::NonFinite("moment parameters"));
    }
    if gamma <= 0.0 && !e.is_bounded() {
        return Err(Error::Divergent { gamma });
    }
    let s = peak_exponent(c, gamma, e);
    if gamma <= 0.0 {
        return quadrature(kmax, c, gamma, e, s);
    }
    let r = recurrence(kmax, c, gamma, e, s);
    if r.est_error > MAX_DD_ERROR {
        if kmax > DEFAULT_MAX_K {
            eprintln!("warning: moment recurrence unstable at k={kmax}, using quadrature");
        }
        return quadrature(kmax, c, gamma, e, s);
    }
    Ok(r)
}

fn recurrence(kmax: usize, c: f64, gamma: f64, e: &IntervalUnion, s: f64) -> ScaledMoments {
    let kk = kmax + 1;
    let g = Dd::from(gamma);
    let cd = Dd::from(c);
    let sg = g.sqrt();
    let x0 = cd / g;
    let base = Dd::from_prod(c, c) / g.mul_f64(2.0) - Dd::from(s);

    let mut v0 = Dd::ZERO;
    for &(lo, hi) in e.components() {
        let ul = if lo.is_finite() { sg * (Dd::from(lo) - x0) } else { Dd::from(lo) };
        let uh = if hi.is_finite() { sg * (Dd::from(hi) - x0) } else { Dd::from(hi) };
        let (un, v) = gauss::segment(ul, uh);
        v0 += (base - un.sqr().mul_f64(0.5)).exp() * v / sg;
    }

    // boundary weights w(x) = exp(phi(x) - s) at finite endpoints, signed +hi / -lo
    let mut ends: Vec<(f64, Dd)> = Vec::new();
    for &(lo, hi) in e.components() {
        if hi.is_finite() {
            ends.push((hi, (phi_dd(hi, c, gamma) - Dd::from(s)).exp()));
        }
        if lo.is_finite() {
            ends.push((lo, -(phi_dd(lo, c, gamma) - Dd::from(s)).exp()));
        }
    }

    let mut vd = Vec::with_capacity(kk + 1);
    let mut vf = Vec::with_capacity(kk + 1);
    vd.push(v0);
    vf.push(v0.to_f64());
    let mut pw: Vec<Dd> = ends.iter().map(|e| e.1).collect();
    let inv_g = g.recip();
    for k in 0..kk {
        let mut bk = Dd::ZERO;
        let mut bkf = 0.0;
        for (i, &(x, _)) in ends.iter().enumerate() {
            bk += pw[i];
            bkf += pw[i].to_f64();
            pw[i] = pw[i].mul_f64(x);
        }
        let prev = if k > 0 { vd[k - 1].mul_f64(k as f64) } else { Dd::ZERO };
        let prevf = if k > 0 { vf[k - 1] * k as f64 } else { 0.0 };
        vd.push((prev + cd * vd[k] - bk) * inv_g);
        vf.push((prevf + c * vf[k] - bkf) / gamma);
    }

    let mut worst = 0.0f64;
    for k in 0..=kmax {
        let size = if k % 2 == 0 {
            vd[k].to_f64().abs()
        } else {
            (vd[k - 1].to_f64() * vd[k + 1].to_f64()).abs().sqrt()
        };
        if size > 0.0 {
            let dev = (vf[k] - vd[k].to_f64()).abs() / size;
            worst = worst.max(dev * DD_OVER_F64);
        } else if vd[k].to_f64() != 0.0 || !vf[k].is_finite() {
            worst = f64::INFINITY;
        }
    }
    if !worst.is_finite() || vd.iter().any(|x| !x.is_finite()) {
        worst = f64::INFINITY;
    }
    vd.truncate(kmax + 1);
    ScaledMoments { log_scale: s, values: vd, method: MomentMethod::Recurrence, est_error: worst.max(1e-30) }
}

/// mu_k as a plain double.
pub fn mu(k: usize, c: f64, gamma: f64, e: &IntervalUnion) -> Result<f64> {
    Ok(moments(k, c, gamma, e)?.value(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

    #[test]
    fn full_range_examples() {
        assert!((mu_full_range(0, 0.0) - SQRT_2PI).abs() < 1e-15);
        assert_eq!(mu_full_range(1, 0.0), 0.0);
        assert!((mu_full_range(2, 0.0) - SQRT_2PI).abs() < 1e-15);
        assert!((mu_full_range(0, 1.0) - 4.132_731_354_122_493).abs() < 1e-14);
    }

    #[test]
    fn half_line_and_unit_interval() {
        let e = IntervalUnion::interval(0.0, f64::INFINITY).unwrap();
        assert!((mu(0, 0.0, 1.0, &e).unwrap() - SQRT_2PI / 2.0).abs() < 1e-15);
        let e = IntervalUnion::interval(-1.0, 1.0).unwrap();
        assert!((mu(0, 0.0, 1.0, &e).unwrap() - 1.711_248_783_784_297_8).abs() < 1e-15);
    }

    #[test]
    fn divergent_rejected() {
        let e = IntervalUnion::interval(0.0, f64::INFINITY).unwrap();
        assert!(matches!(moments(3, 0.0, -0.5, &e), Err(Error::Divergent { .. })));
    }

    #[test]
    fn nonpositive_gamma_on_bounded_set_uses_quadrature() {
        let e = IntervalUnion::interval(-1.0, 2.0).unwrap();
        let m = moments(4, 0.3, -0.2, &e).unwrap();
        assert_eq!(m.method, MomentMethod::Quadrature);
        // gamma = 0, c = 0: int x^k = (2^{k+1} - (-1)^{k+1}) / (k+1)
        let m = moments(4, 0.0, 0.0, &e).unwrap();
        for k in 0..=4usize {
            let want = (2f64.powi(k as i32 + 1) - (-1f64).powi(k as i32 + 1)) / (k + 1) as f64;
            assert!((m.value(k) - want).abs() < 1e-13 * want.abs().max(1.0));
        }
    }

    #[test]
    fn symmetric_parity() {
        let e = IntervalUnion::new(vec![(-2.0, -0.5), (0.5, 2.0)]).unwrap();
        let m = moments(9, 0.0, 1.0, &e).unwrap();
        for k in (1..=9).step_by(2) {
            assert!(m.scaled(k).abs() <= 1e-13 * m.scaled(0));
        }
    }
}
