//! Three representations of the undeformed tau integral: the double
//! determinant integral, the moment determinant, and the sum over
//! permutations of products of Vandermonde blocks.

use rayon::prelude::*;
use serde::Serialize;

use super::{Problem, ResidualReport};
use crate::error::{Error, Result};
use crate::linalg::{log_det, Matrix};
use crate::moments::quad::gauss_legendre;
use crate::tau::tau_e;

pub const PROP1_MAX_N: usize = 3;
/// Nodes per component and dimension.
pub const PROP1_NODES: usize = 64;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Prop1Members {
    pub double_det: f64,
    pub moment_det: f64,
    pub vandermonde: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn multinomial(parts: &[usize]) -> f64 {
    factorial(parts.iter().sum()) / parts.iter().map(|&k| factorial(k)).product::<f64>()
}

/// All permutations of 0..n with their signs.
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let inv = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let s = if inv % 2 == 0 { 1.0 } else { -1.0 };
            (p, s)
        })
        .collect()
}

fn vandermonde(x: &[f64]) -> f64 {
    let mut v = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            v *= x[j] - x[i];
        }
    }
    v
}

/// (family index, power) for each row of the confluent system.
fn rows(sizes: &[usize]) -> Vec<(usize, usize)> {
    sizes.iter().enumerate().flat_map(|(f, &k)| (0..k).map(move |i| (f, i))).collect()
}

fn small_det(rows_: &[(usize, usize)], coef: &[f64], x: &[f64]) -> Result<f64> {
    let n = x.len();
    let data: Vec<Vec<f64>> =
        rows_.iter().map(|&(f, i)| x.iter().map(|&xj| xj.powi(i as i32) * (coef[f] * xj).exp()).collect()).collect();
    let d = log_det(&Matrix::from_rows(&data)?)?;
    debug_assert_eq!(data.len(), n);
    Ok(d.value())
}

pub fn prop1_members(pr: &Problem) -> Result<Prop1Members> {
    let n = pr.n_particles();
    if n == 0 || n > PROP1_MAX_N {
        return Err(Error::TooLarge { n, max: PROP1_MAX_N, backend: "tensor quadrature" });
    }
    pr.require_bounded()?;
    let x0 = &pr.point;
    let d = &x0.def;
    if d.alpha.iter().chain(&d.beta).chain(&d.t1).chain(&d.t2).chain(&d.s1).chain(&d.s2).any(|v| *v != 0.0) {
        return Err(Error::Invalid("representation check is stated at zero deformation".into()));
    }
    let (gx, gw) = gauss_legendre(PROP1_NODES);
    let mut nodes = Vec::new();
    for &(lo, hi) in x0.e.components() {
        let (h, mid) = (0.5 * (hi - lo), 0.5 * (hi + lo));
        for (xi, wi) in gx.iter().zip(&gw) {
            let x = mid + h * xi;
            nodes.push((x, h * wi * (-0.5 * x * x).exp()));
        }
    }
    let psi_rows = rows(&pr.blocks.m);
    let phi_rows = rows(&pr.blocks.n);
    let perms = permutations(n);
    let k = nodes.len();
    let total = k.pow(n as u32);
    let (m, nn) = (&pr.blocks.m, &pr.blocks.n);

    let integrand = |idx: usize| -> Result<(f64, f64)> {
        let mut x = vec![0.0; n];
        let mut w = 1.0;
        let mut r = idx;
        for xi in x.iter_mut() {
            let (v, wt) = nodes[r % k];
            *xi = v;
            w *= wt;
            r /= k;
        }
        let dd = small_det(&psi_rows, &x0.a, &x)? * small_det(&phi_rows, &x0.b, &x)?;
        // starting side: blocks of consecutive variables
        let mut left = 1.0;
        let mut off = 0;
        for (al, &ma) in m.iter().enumerate() {
            let blk = &x[off..off + ma];
            left *= vandermonde(blk) * blk.iter().map(|&y| (x0.a[al] * y).exp()).product::<f64>();
            off += ma;
        }
        let mut right = 0.0;
        for (s, sg) in &perms {
            let mut t = *sg;
            let mut off = 0;
            for (be, &nb) in nn.iter().enumerate() {
                let blk: Vec<f64> = (off..off + nb).map(|i| x[s[i]]).collect();
                t *= vandermonde(&blk) * blk.iter().map(|&y| (x0.b[be] * y).exp()).product::<f64>();
                off += nb;
            }
            right += t;
        }
        Ok((w * dd, w * left * right))
    };
    let parts: Vec<(f64, f64)> = (0..k)
        .into_par_iter()
        .map(|first| {
            let mut acc = (0.0, 0.0);
            let stride = total / k;
            for rest in 0..stride {
                let (a, b) = integrand(first + k * rest)?;
                acc.0 += a;
                acc.1 += b;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let (s1, s3) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = factorial(n);
    let tau = tau_e(x0, &pr.blocks)?;
    Ok(Prop1Members {
        double_det: nf * s1,
        moment_det: nf * nf * tau.value(),
        vandermonde: multinomial(m) * multinomial(nn) * s3,
    })
}

/// Pairwise residual reports between the three members.
pub fn check_prop1(pr: &Problem, tol: f64) -> Result<Vec<ResidualReport>> {
    let mm = prop1_members(pr)?;
    let mk = |id: &str, a: f64, b: f64| ResidualReport::new(format!("prop1.{id}"), &pr.name, a, b, 0.0, tol, 0.0);
    Ok(vec![
        mk("double_det-moment_det", mm.double_det, mm.moment_det),
        mk("double_det-vandermonde", mm.double_det, mm.vandermonde),
        mk("moment_det-vandermonde", mm.moment_det, mm.vandermonde),
    ])
}
