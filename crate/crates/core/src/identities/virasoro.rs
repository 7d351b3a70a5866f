//! Boundary Virasoro constraints for k = -1 and k = 0, divided by tau.

use super::{Problem, ResidualReport};
use crate::diffops::{fd, Coordinate, FdConfig, FdValue, Operators};
use crate::error::{Error, Result};

pub fn check_virasoro(pr: &Problem, k: i32, tol: f64) -> Result<ResidualReport> {
    pr.require_bounded()?;
    let x = &pr.point;
    let (q, p) = (x.q(), x.p());
    let f = pr.log_tau();
    let ops = Operators::for_point(x);
    let cfg = FdConfig::order(1);
    let d = |c: Coordinate| fd(&f, x, &[c], cfg);
    let mut rhs = FdValue { value: 0.0, error: 0.0 };
    let mut add = |w: f64, v: FdValue| {
        rhs.value += w * v.value;
        rhs.error += (w * v.error).abs();
    };
    let lhs = match k {
        -1 => {
            for l in 0..q {
                add(1.0 - 2.0 * x.def.alpha[l], d(Coordinate::S1(l))?);
            }
            for l in 0..p {
                add(2.0 * x.def.beta[l], d(Coordinate::T1(l))?);
            }
            rhs.value += pr.sigma(x);
            ops.b_minus1().apply(&f, x, cfg)?
        }
        0 => {
            for l in 0..q {
                add(-x.a[l], d(Coordinate::S1(l))?);
                add(1.0 - 2.0 * x.def.alpha[l], d(Coordinate::S2(l))?);
            }
            for l in 0..p {
                add(x.b[l], d(Coordinate::T1(l))?);
                add(2.0 * x.def.beta[l], d(Coordinate::T2(l))?);
            }
            let sq: usize = pr.blocks.m.iter().chain(&pr.blocks.n).map(|v| v * v).sum();
            rhs.value += 0.5 * sq as f64;
            ops.b_zero().apply(&f, x, cfg)?
        }
        _ => return Err(Error::Invalid(format!("Virasoro constraint k={k} not supported (only -1, 0)"))),
    };
    Ok(ResidualReport::new(format!("virasoro[{k}]"), &pr.name, lhs.value, rhs.value, lhs.error + rhs.error, tol, cfg.h))
}
