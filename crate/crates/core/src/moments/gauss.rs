//! Gaussian segment integrals in double-double.

use crate::dd::{Dd, PI};

/// Below this argument the Mills ratio is taken from the series complement,
/// above it from the continued fraction.
const CF_THRESHOLD: f64 = 4.0;

fn sqrt_half_pi() -> Dd {
    (PI.mul_f64(0.5)).sqrt()
}

/// S(x) = e^{x^2/2} * int_0^x e^{-t^2/2} dt = sum_n x^{2n+1} / (2n+1)!!.
pub fn scaled_half_integral(x: Dd) -> Dd {
    let x2 = x.sqr();
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        term = (term * x2).div_f64((2 * n + 1) as f64);
        sum += term;
        if term.hi.abs() <= 1e-34 * sum.hi.abs() || n > 2000 {
            break;
        }
    }
    sum
}

/// Mills ratio R(u) = e^{u^2/2} * int_u^inf e^{-t^2/2} dt for u >= 0.
pub fn mills_ratio(u: Dd) -> Dd {
    debug_assert!(u.hi >= 0.0);
    if u.hi < CF_THRESHOLD {
        return (u.sqr().mul_f64(0.5)).exp() * sqrt_half_pi() - scaled_half_integral(u);
    }
    let terms = if u.hi < 5.0 {
        240
    } else if u.hi < 8.0 {
        120
    } else {
        60
    };
    let mut t = u;
    for k in (1..=terms).rev() {
        t = u + Dd::from(k as f64) / t;
    }
    t.recip()
}

/// int_0^x e^{-t^2/2} dt, odd in x, x may be infinite.
fn half_integral(x: Dd) -> Dd {
    if x.hi == 0.0 {
        return Dd::ZERO;
    }
    let ax = x.abs();
    let v = if ax.hi == f64::INFINITY {
        sqrt_half_pi()
    } else if ax.hi <= 2.0 {
        (ax.sqr().mul_f64(-0.5)).exp() * scaled_half_integral(ax)
    } else {
        sqrt_half_pi() - (ax.sqr().mul_f64(-0.5)).exp() * mills_ratio(ax)
    };
    if x.hi < 0.0 { -v } else { v }
}

/// Returns (u*, v) with u* the point of [ul, uh] closest to zero and
/// v = e^{u*^2/2} * int_ul^uh e^{-t^2/2} dt. Endpoints may be infinite.
pub fn segment(ul: Dd, uh: Dd) -> (Dd, Dd) {
    if ul.hi <= 0.0 && uh.hi >= 0.0 {
        return (Dd::ZERO, half_integral(uh) - half_integral(ul));
    }
    // one-signed: reflect into the positive half-line
    let (near, far) = if ul.hi > 0.0 { (ul, uh) } else { (-uh, -ul) };
    let r_near = mills_ratio(near);
    let v = if far.hi == f64::INFINITY {
        r_near
    } else {
        let decay = ((far - near) * (far + near)).mul_f64(-0.5).exp();
        r_near - decay * mills_ratio(far)
    };
    let unear = if ul.hi > 0.0 { ul } else { uh };
    (unear, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    // erf(1/sqrt2) = 0.682689492137085897170465091264075844955825933453208781974788900...
    #[test]
    fn central_mass_one_sigma() {
        let (u, v) = segment(Dd::from(-1.0), Dd::from(1.0));
        assert_eq!(u.hi, 0.0);
        let want = 0.682_689_492_137_085_9 * (2.0 * std::f64::consts::PI).sqrt();
        assert!((v.to_f64() / want - 1.0).abs() < 1e-15);
    }

    #[test]
    fn continued_fraction_matches_series_at_switch() {
        let a = Dd::from(CF_THRESHOLD);
        let s = (a.sqr().mul_f64(0.5)).exp() * sqrt_half_pi() - scaled_half_integral(a);
        let c = mills_ratio(Dd::from(CF_THRESHOLD + 1e-300));
        assert!(((s - c) / s).to_f64().abs() < 1e-28);
    }

    #[test]
    fn full_line() {
        let (_, v) = segment(Dd::from(f64::NEG_INFINITY), Dd::from(f64::INFINITY));
        let want = (PI.mul_f64(2.0)).sqrt();
        assert!(((v - want) / want).to_f64().abs() < 1e-30);
    }
}
