//! Second time-derivatives of log tau expressed through the operators
//! A_j, B_j, Â_j, B̂_j at zero times.

use serde::Serialize;

use super::{Problem, ResidualReport};
use crate::diffops::{apply_chain, fd, Coordinate, FdConfig, Operators};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LemmaRelation {
    /// s1_j s1_k
    L1,
    /// t1_j t1_k
    L2,
    /// s1_j t1_k
    L3,
    /// s1_k s2_j
    L4,
    /// t1_k t2_j
    L5,
    /// s1_k t2_j
    L6,
    /// s2_j t1_k
    L7,
}

impl LemmaRelation {
    pub const ALL: [LemmaRelation; 7] =
        [LemmaRelation::L1, LemmaRelation::L2, LemmaRelation::L3, LemmaRelation::L4, LemmaRelation::L5, LemmaRelation::L6, LemmaRelation::L7];

    /// Index ranges (j, k) as (q or p).
    fn ranges(&self, q: usize, p: usize) -> (usize, usize) {
        match self {
            LemmaRelation::L1 | LemmaRelation::L4 => (q, q),
            LemmaRelation::L2 | LemmaRelation::L5 => (p, p),
            LemmaRelation::L3 | LemmaRelation::L7 => (q, p),
            LemmaRelation::L6 => (p, q),
        }
    }
}

pub fn check_second_derivative_lemma(pr: &Problem, rel: LemmaRelation, j: usize, k: usize, tol: f64) -> Result<ResidualReport> {
    use Coordinate::*;
    use LemmaRelation::*;
    pr.require_bounded()?;
    let x = &pr.point;
    let (q, p) = (x.q(), x.p());
    let (rj, rk) = rel.ranges(q, p);
    if j >= rj || k >= rk {
        return Err(Error::Invalid(format!("indices ({j}, {k}) out of range for {rel:?}")));
    }
    let f = pr.log_tau();
    let ops = Operators::for_point(x);
    let cfg = FdConfig::order(2);
    let (qf, pf) = (q as f64, p as f64);
    let nn = pr.n_particles() as f64;
    let (m, n) = (&pr.blocks.m, &pr.blocks.n);
    let am = pr.tilt_pairing(x);
    let sg = pr.sigma(x);
    let (dirs, chain, sign, constant) = match rel {
        L1 => (
            [S1(j), S1(k)],
            vec![ops.a(j), ops.a(k)],
            1.0,
            m[j] as f64 / qf + m[k] as f64 / qf - nn / (qf * qf) + 2.0 * am / (qf * qf),
        ),
        L2 => (
            [T1(j), T1(k)],
            vec![ops.b(j), ops.b(k)],
            1.0,
            n[j] as f64 / pf + n[k] as f64 / pf - nn / (pf * pf) + 2.0 * am / (pf * pf),
        ),
        L3 => (
            [S1(j), T1(k)],
            vec![ops.a(j), ops.b(k)],
            -1.0,
            -(m[j] as f64) / pf - n[k] as f64 / qf + nn / (pf * qf) - 2.0 * am / (pf * qf),
        ),
        L4 => ([S1(k), S2(j)], vec![ops.a_hat(j).minus_identity(1.0 / qf), ops.a(k)], 1.0, 2.0 * sg / (qf * qf)),
        L5 => ([T1(k), T2(j)], vec![ops.b_hat(j).minus_identity(1.0 / pf), ops.b(k)], 1.0, 2.0 * sg / (pf * pf)),
        L6 => ([S1(k), T2(j)], vec![ops.b_hat(j).minus_identity(1.0 / pf), ops.a(k)], -1.0, -2.0 * sg / (pf * qf)),
        L7 => ([S2(j), T1(k)], vec![ops.a_hat(j).minus_identity(1.0 / qf), ops.b(k)], -1.0, -2.0 * sg / (pf * qf)),
    };
    let lhs = fd(&f, x, &dirs, cfg)?;
    let op = apply_chain(&chain, &f, x, cfg)?;
    let rhs = sign * op.value + constant;
    let id = format!("lemma.{}[{},{}]", format!("{rel:?}").to_lowercase(), j + 1, k + 1);
    Ok(ResidualReport::new(id, &pr.name, lhs.value, rhs, lhs.error + op.error, tol, cfg.h))
}

pub fn lemma_all(pr: &Problem, tol: f64) -> Result<Vec<ResidualReport>> {
    let (q, p) = (pr.point.q(), pr.point.p());
    let mut out = Vec::new();
    for rel in LemmaRelation::ALL {
        let (rj, rk) = rel.ranges(q, p);
        for j in 0..rj {
            for k in 0..rk {
                out.push(check_second_derivative_lemma(pr, rel, j, k, tol)?);
            }
        }
    }
    Ok(out)
}
