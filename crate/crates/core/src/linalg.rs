//! Dense LU with partial pivoting over f64 and double-double.

use serde::Serialize;

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Sign and natural log of |det|. A zero determinant is (0, -inf).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLogDet {
    pub sign: i8,
    pub logmag: f64,
}

impl SignedLogDet {
    pub const ZERO: SignedLogDet = SignedLogDet { sign: 0, logmag: f64::NEG_INFINITY };
    pub const ONE: SignedLogDet = SignedLogDet { sign: 1, logmag: 0.0 };

    pub fn new(sign: i8, logmag: f64) -> Self {
        if sign == 0 { Self::ZERO } else { SignedLogDet { sign, logmag } }
    }

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 { Self::ZERO } else { SignedLogDet { sign: x.signum() as i8, logmag: x.abs().ln() } }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0 { 0.0 } else { self.sign as f64 * self.logmag.exp() }
    }

    pub fn mul(&self, o: &SignedLogDet) -> SignedLogDet {
        SignedLogDet::new(self.sign * o.sign, self.logmag + o.logmag)
    }

    pub fn div(&self, o: &SignedLogDet) -> Result<SignedLogDet> {
        if o.sign == 0 {
            return Err(Error::Singular);
        }
        Ok(SignedLogDet::new(self.sign * o.sign, self.logmag - o.logmag))
    }

    pub fn scale_log(&self, l: f64) -> SignedLogDet {
        SignedLogDet::new(self.sign, self.logmag + l)
    }
}

/// Arithmetic needed by the LU kernels.
pub trait Scalar: Copy + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn abs_f64(self) -> f64;
    fn to_f64(self) -> f64;
    fn from_f64(x: f64) -> Self;
    fn ln_abs(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn abs_f64(self) -> f64 {
        self.abs()
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn ln_abs(self) -> f64 {
        self.abs().ln()
    }
}

impl Scalar for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn one() -> Self {
        Dd::ONE
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn abs_f64(self) -> f64 {
        self.hi.abs()
    }
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn from_f64(x: f64) -> Self {
        Dd::from(x)
    }
    fn ln_abs(self) -> f64 {
        let a = self.abs();
        a.hi.ln() + a.lo / a.hi
    }
}

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T = f64> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("matrix is not square".into()));
        }
        Ok(Matrix { n, data: rows.iter().flatten().copied().collect() })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix { n: self.n, data: self.data.iter().map(|x| x.to_f64()).collect() }
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n).map(|j| (0..self.n).map(|i| self.get(i, j).abs_f64()).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// Packed LU factors with row permutation.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: i8,
    singular: bool,
}

pub fn lu<T: Scalar>(m: &Matrix<T>) -> Result<Lu<T>> {
    let n = m.n;
    if m.data.iter().any(|x| !x.to_f64().is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1i8;
    let mut singular = false;
    for k in 0..n {
        let mut p = k;
        let mut best = a.get(k, k).abs_f64();
        for i in k + 1..n {
            let v = a.get(i, k).abs_f64();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            singular = true;
            continue;
        }
        if p != k {
            for j in 0..n {
                a.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let piv = a.get(k, k);
        for i in k + 1..n {
            let f = a.get(i, k).div(piv);
            a.set(i, k, f);
            if f.abs_f64() == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let v = a.get(i, j).sub(f.mul(a.get(k, j)));
                a.set(i, j, v);
            }
        }
    }
    Ok(Lu { lu: a, perm, sign, singular })
}

impl<T: Scalar> Lu<T> {
    pub fn log_det(&self) -> SignedLogDet {
        if self.singular {
            return SignedLogDet::ZERO;
        }
        let n = self.lu.n;
        let mut sign = self.sign;
        let mut l = 0.0;
        for i in 0..n {
            let d = self.lu.get(i, i);
            if d.to_f64() < 0.0 {
                sign = -sign;
            }
            l += d.ln_abs();
        }
        SignedLogDet::new(sign, l)
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        if self.singular {
            return Err(Error::Singular);
        }
        let n = self.lu.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s.sub(self.lu.get(i, j).mul(x[j]));
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s.sub(self.lu.get(i, j).mul(x[j]));
            }
            x[i] = s.div(self.lu.get(i, i));
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix<T>> {
        let n = self.lu.n;
        let mut inv = Matrix::zeros(n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        Ok(inv)
    }
}

/// log|det| with sign by LU with partial pivoting.
pub fn log_det<T: Scalar>(m: &Matrix<T>) -> Result<SignedLogDet> {
    if m.n == 0 {
        return Ok(SignedLogDet::ONE);
    }
    Ok(lu(m)?.log_det())
}

/// 1-norm condition number from the explicit inverse; infinite when singular.
pub fn cond1<T: Scalar>(m: &Matrix<T>, f: &Lu<T>) -> f64 {
    match f.inverse() {
        Ok(inv) => m.norm1() * inv.norm1(),
        Err(_) => f64::INFINITY,
    }
}
