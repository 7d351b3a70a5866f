//! Reference computations shared by the integration tests. Nothing here calls
//! into the library's numerical code.
#![allow(dead_code)]

use std::f64::consts::PI;

const LEVELS: usize = 9;

/// Sum of w(t) f(x(t)) over the nodes t = k h, |t| <= 4, refined by halving h
/// until two levels agree to 1e-15 relative.
fn double_exponential(f: &dyn Fn(f64) -> f64, map: &dyn Fn(f64) -> (f64, f64)) -> f64 {
    let term = |t: f64| {
        let (x, w) = map(t);
        if w == 0.0 || !x.is_finite() || !w.is_finite() {
            0.0
        } else {
            let v = w * f(x);
            if v.is_finite() { v } else { 0.0 }
        }
    };
    let tmax = 4.0;
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += term(k as f64 * h) + term(-(k as f64) * h);
        k += 1;
    }
    let mut est = sum * h;
    for _ in 0..LEVELS {
        h /= 2.0;
        let mut k = 1;
        while k as f64 * h <= tmax {
            sum += term(k as f64 * h) + term(-(k as f64) * h);
            k += 2;
        }
        let next = sum * h;
        if (next - est).abs() <= 1e-15 * next.abs() {
            return next;
        }
        est = next;
    }
    est
}

/// ∫_lo^hi f, either end possibly infinite.
pub fn integrate(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let hp = PI / 2.0;
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            double_exponential(f, &|t| {
                let u = hp * t.sinh();
                let ch = u.cosh();
                (c + r * u.tanh(), r * hp * t.cosh() / (ch * ch))
            })
        }
        (true, false) => double_exponential(f, &|t| {
            let e = (hp * t.sinh()).exp();
            (lo + e, hp * t.cosh() * e)
        }),
        (false, true) => integrate(&|x| f(-x), -hi, f64::INFINITY),
        (false, false) => integrate(f, f64::NEG_INFINITY, 0.0) + integrate(f, 0.0, f64::INFINITY),
    }
}

/// ∫_E x^k exp(-gamma x^2/2 + c x), split at the peak of the exponential.
pub fn moment(k: u32, c: f64, gamma: f64, comps: &[(f64, f64)]) -> f64 {
    let f = move |x: f64| x.powi(k as i32) * (-0.5 * gamma * x * x + c * x).exp();
    let peak = c / gamma;
    comps
        .iter()
        .map(|&(lo, hi)| {
            if lo < peak && peak < hi {
                integrate(&f, lo, peak) + integrate(&f, peak, hi)
            } else {
                integrate(&f, lo, hi)
            }
        })
        .sum()
}

/// Laplace expansion along the first row.
pub fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, v)| *v).collect()).collect();
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            s * m[0][j] * cofactor_det(&minor)
        })
        .sum()
}

/// Coefficients of e^{-x^2/2} (d/dx)^j e^{x^2/2}: C(j, 2i) (2i-1)!! on x^{j-2i}.
pub fn hermite_closed_form(j: u64) -> Vec<u128> {
    let mut c = vec![0u128; j as usize + 1];
    let binom = |n: u64, k: u64| -> u128 { (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) };
    let mut dfact = 1u128;
    for i in 0..=j / 2 {
        if i > 0 {
            dfact *= (2 * i - 1) as u128;
        }
        c[(j - 2 * i) as usize] = binom(j, 2 * i) * dfact;
    }
    c
}

/// Deterministic pseudo-random numbers in [-1, 1) (SplitMix64).
pub struct Mix(pub u64);

impl Mix {
    pub fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn oracle_self_check() {
    let g = integrate(&|x| (-0.5 * x * x).exp(), f64::NEG_INFINITY, f64::INFINITY);
    assert!(rel(g, (2.0 * PI).sqrt()) < 1e-15);
    assert!(rel(integrate(&|x| x.exp(), 0.0, 1.0), std::f64::consts::E - 1.0) < 1e-15);
    assert_eq!(hermite_closed_form(4), vec![3, 0, 6, 0, 1]);
    assert_eq!(cofactor_det(&[vec![1.0, 2.0], vec![3.0, 4.0]]), -2.0);
}
