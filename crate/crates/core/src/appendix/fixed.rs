//! Binary fixed-point numbers with a `BigInt` mantissa and 2048 fractional
//! bits. Every finite f64 of magnitude above 2^-1000 embeds exactly; products
//! and quotients are truncated at 2^-2048.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

pub const FRAC_BITS: u64 = 2048;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixed(BigInt);

/// x * 2^e without intermediate overflow or underflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn one() -> Self {
        Fixed(BigInt::from(1) << FRAC_BITS)
    }

    pub fn from_i64(v: i64) -> Self {
        Fixed(BigInt::from(v) << FRAC_BITS)
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value");
        if x == 0.0 {
            return Fixed::zero();
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let shift = FRAC_BITS as i64 + e;
        let m = BigInt::from(mant);
        let v = if shift >= 0 { m << shift as u64 } else { m >> (-shift) as u64 };
        Fixed(if x < 0.0 { -v } else { v })
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn signum(&self) -> i8 {
        match self.0.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Fixed(self.0.abs())
    }

    /// Top 64 bits of |self| and the binary exponent of their unit.
    fn split(&self) -> Option<(f64, i64)> {
        let mag = self.0.magnitude();
        let bits = mag.bits() as i64;
        if bits == 0 {
            return None;
        }
        let shift = bits - 64;
        let top = if shift > 0 { mag >> shift as u64 } else { mag << (-shift) as u64 };
        Some((top.to_f64().unwrap_or(f64::NAN), shift - FRAC_BITS as i64))
    }

    pub fn to_f64(&self) -> f64 {
        match self.split() {
            None => 0.0,
            Some((t, e)) => self.signum() as f64 * ldexp(t, e),
        }
    }

    /// ln |self|; -inf at zero.
    pub fn ln_abs(&self) -> f64 {
        match self.split() {
            None => f64::NEG_INFINITY,
            // Mantissa scaled into [1, 2) so the two terms do not cancel.
            Some((t, e)) => ldexp(t, -63).ln() + (e + 63) as f64 * std::f64::consts::LN_2,
        }
    }

    pub fn div(&self, o: &Fixed) -> Fixed {
        Fixed((&self.0 << FRAC_BITS) / &o.0)
    }

    pub fn div_i64(&self, d: i64) -> Fixed {
        Fixed(&self.0 / d)
    }

    pub fn mul_i64(&self, d: i64) -> Fixed {
        Fixed(&self.0 * d)
    }

    pub fn cmp_abs(&self, o: &Fixed) -> std::cmp::Ordering {
        self.0.magnitude().cmp(o.0.magnitude())
    }
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, o: &Fixed) -> Fixed {
        Fixed(&self.0 + &o.0)
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, o: &Fixed) -> Fixed {
        Fixed(&self.0 - &o.0)
    }
}

impl Mul for &Fixed {
    type Output = Fixed;
    fn mul(self, o: &Fixed) -> Fixed {
        Fixed((&self.0 * &o.0) >> FRAC_BITS)
    }
}

impl Neg for &Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-&self.0)
    }
}

/// Gaussian elimination with partial pivoting on [m | rhs]. Returns the pivots
/// (their product is det m) and the solution columns, or `None` if singular.
pub fn eliminate(mut m: Vec<Vec<Fixed>>, mut rhs: Vec<Vec<Fixed>>) -> Option<(Vec<Fixed>, i8, Vec<Vec<Fixed>>)> {
    let n = m.len();
    let w = rhs.first().map_or(0, |r| r.len());
    let mut pivots = Vec::with_capacity(n);
    let mut sign = 1i8;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].cmp_abs(&m[j][k]))?;
        if m[p][k].is_zero() {
            return None;
        }
        if p != k {
            m.swap(p, k);
            rhs.swap(p, k);
            sign = -sign;
        }
        let piv = m[k][k].clone();
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].div(&piv);
            for j in k + 1..n {
                let t = &f * &m[k][j];
                m[i][j] = &m[i][j] - &t;
            }
            for j in 0..w {
                let t = &f * &rhs[k][j];
                rhs[i][j] = &rhs[i][j] - &t;
            }
            m[i][k] = Fixed::zero();
        }
        pivots.push(piv);
    }
    for j in 0..w {
        for i in (0..n).rev() {
            let mut s = rhs[i][j].clone();
            for l in i + 1..n {
                let t = &m[i][l] * &rhs[l][j];
                s = &s - &t;
            }
            rhs[i][j] = s.div(&pivots[i]);
        }
    }
    Some((pivots, sign, rhs))
}
