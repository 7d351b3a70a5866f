//! Gauss-Legendre rules and an adaptive vector integrator.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

type Rule = (Vec<f64>, Vec<f64>);

/// Nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    cache.lock().unwrap().insert(n, (x.clone(), w.clone()));
    (x, w)
}

const RULE: usize = 24;

fn rule(f: &dyn Fn(f64, &mut [f64]), lo: f64, hi: f64, dim: usize, out: &mut [f64], abs: &mut [f64]) {
    let (x, w) = gauss_legendre(RULE);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut buf = vec![0.0; dim];
    out.iter_mut().for_each(|v| *v = 0.0);
    abs.iter_mut().for_each(|v| *v = 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        f(mid + half * xi, &mut buf);
        for k in 0..dim {
            out[k] += wi * half * buf[k];
            abs[k] += wi * half * buf[k].abs();
        }
    }
}

/// Adaptive bisection on [lo, hi] of a vector integrand; each component is
/// accepted when the two-level difference is below `tol` times its absolute integral.
pub fn adaptive(f: &dyn Fn(f64, &mut [f64]), lo: f64, hi: f64, dim: usize, tol: f64) -> Vec<f64> {
    let mut total = vec![0.0; dim];
    let mut whole = vec![0.0; dim];
    let mut wabs = vec![0.0; dim];
    rule(f, lo, hi, dim, &mut whole, &mut wabs);
    let scale = wabs.clone();
    let mut stack = vec![(lo, hi, whole, 0u32)];
    let (mut l, mut la, mut r, mut ra) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    while let Some((a, b, est, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        rule(f, a, m, dim, &mut l, &mut la);
        rule(f, m, b, dim, &mut r, &mut ra);
        let ok = (0..dim).all(|k| {
            let s = l[k] + r[k];
            (s - est[k]).abs() <= tol * scale[k].max(f64::MIN_POSITIVE)
        });
        if ok || depth >= 48 {
            for k in 0..dim {
                total[k] += l[k] + r[k];
            }
        } else {
            stack.push((a, m, l.clone(), depth + 1));
            stack.push((m, b, r.clone(), depth + 1));
        }
    }
    total
}
