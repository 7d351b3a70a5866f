//! The six third-order equations for log tau when p = q = 2, on the locus
//! alpha = beta = 0, t = s = 0.

use serde::Serialize;

use super::{Problem, ResidualReport, REL_FLOOR};
use crate::diffops::{bracket, Applied, FdConfig, FdValue, Functional, Operators};
use crate::error::{Error, Result};
use crate::tau::TauPoint;

/// Base steps of the calibration sweep; the smallest residual is reported.
pub const PQ22_STEPS: [f64; 3] = [1e-2, 2e-2, 4e-2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pq22Equation {
    /// Mixed pair (A_j, B_k).
    AB(usize, usize),
    /// Pair (A_1, A_2).
    A,
    /// Pair (B_1, B_2).
    B,
}

impl Pq22Equation {
    pub const ALL: [Pq22Equation; 6] = [
        Pq22Equation::AB(0, 0),
        Pq22Equation::AB(0, 1),
        Pq22Equation::AB(1, 0),
        Pq22Equation::AB(1, 1),
        Pq22Equation::A,
        Pq22Equation::B,
    ];

    fn id(&self) -> String {
        match self {
            Pq22Equation::AB(j, k) => format!("pq22.g_ab[{},{}]", j + 1, k + 1),
            Pq22Equation::A => "pq22.g_a[1,2]".into(),
            Pq22Equation::B => "pq22.g_b[1,2]".into(),
        }
    }
}

struct Sum<'a> {
    parts: Vec<(f64, &'a dyn Functional)>,
    extra: &'a dyn Fn(&TauPoint) -> f64,
}

impl Functional for Sum<'_> {
    fn eval(&self, pt: &TauPoint) -> Result<f64> {
        let mut s = (self.extra)(pt);
        for (w, g) in &self.parts {
            s += w * g.eval(pt)?;
        }
        Ok(s)
    }
}

fn add(a: FdValue, b: FdValue, sb: f64) -> FdValue {
    FdValue { value: a.value + sb * b.value, error: a.error + b.error }
}

/// Evaluates (lhs, rhs, c) for one equation at one step size.
fn evaluate(pr: &Problem, eq: Pq22Equation, cfg: FdConfig) -> Result<(FdValue, FdValue, f64)> {
    let x0 = &pr.point;
    let ops = Operators::for_point(x0);
    let (q, p) = (2.0, 2.0);
    let nn = pr.n_particles() as f64;
    let (m, n) = (&pr.blocks.m, &pr.blocks.n);
    let f = pr.log_tau();
    let b0m1 = ops.b0_hat().minus_identity(1.0);

    // (first operator U, second operator V, direction of U's tilt, direction of V's tilt, constant of c)
    let (u, v, xu, xv, du, dv, cc, wu, wv, wd) = match eq {
        Pq22Equation::AB(j, k) => (
            ops.a_locus(j),
            ops.b_locus(k),
            ops.x_dir(j),
            ops.y_dir(k),
            ops.da(j),
            ops.db(k),
            m[j] as f64 / p + n[k] as f64 / q - nn / (p * q),
            (1.0 / p, 2.0 / q),
            (1.0 / q, 2.0 / p),
            2.0 / (p * q),
        ),
        Pq22Equation::A => (
            ops.a_locus(0),
            ops.a_locus(1),
            ops.x_dir(0),
            ops.x_dir(1),
            ops.da(0),
            ops.da(1),
            m[0] as f64 / q + m[1] as f64 / q - nn / (q * q),
            (1.0 / q, 2.0 / q),
            (1.0 / q, 2.0 / q),
            2.0 / (q * q),
        ),
        Pq22Equation::B => (
            ops.b_locus(0),
            ops.b_locus(1),
            ops.y_dir(0),
            ops.y_dir(1),
            ops.db(0),
            ops.db(1),
            n[0] as f64 / p + n[1] as f64 / p - nn / (p * p),
            (1.0 / p, 2.0 / p),
            (1.0 / p, 2.0 / p),
            2.0 / (p * p),
        ),
    };

    // c = U V f + const
    let vf = Applied { op: &v, inner: &f, cfg };
    let uvf = Applied { op: &u, inner: &vf, cfg };
    let cconst = move |_: &TauPoint| cc;
    let c = Sum { parts: vec![(1.0, &uvf)], extra: &cconst };
    let c0 = c.eval(x0)?;

    let sig = |x: &TauPoint| pr.sigma(x);
    let uf = Applied { op: &u, inner: &f, cfg };
    let b0_uf = Applied { op: &b0m1, inner: &uf, cfg };
    let b0_vf = Applied { op: &b0m1, inner: &vf, cfg };
    let du_f = Applied { op: &du, inner: &f, cfg };
    let dv_f = Applied { op: &dv, inner: &f, cfg };
    let sig_term = move |x: &TauPoint| wd * sig(x);

    match eq {
        Pq22Equation::AB(..) => {
            // {U Y, c}_U - {V X, c}_V
            let yf = Applied { op: &xv, inner: &f, cfg };
            let u_yf = Applied { op: &u, inner: &yf, cfg };
            let xf = Applied { op: &xu, inner: &f, cfg };
            let v_xf = Applied { op: &v, inner: &xf, cfg };
            let lhs = add(bracket(&u_yf, &c, &u, x0, cfg)?, bracket(&v_xf, &c, &v, x0, cfg)?, -1.0);
            let f1 = Sum { parts: vec![(wu.0, &b0_uf), (wu.1, &dv_f)], extra: &sig_term };
            let f2 = Sum { parts: vec![(wv.0, &b0_vf), (wv.1, &du_f)], extra: &sig_term };
            let g1 = bracket(&f1, &c, &u, x0, cfg)?;
            let g2 = bracket(&f2, &c, &v, x0, cfg)?;
            let base = (2.0 / q - 2.0 / p) * c0 * c0;
            let rhs = FdValue { value: base - g1.value + g2.value, error: g1.error + g2.error };
            Ok((lhs, rhs, c0))
        }
        Pq22Equation::A | Pq22Equation::B => {
            // {V X_u, c}_V + {U X_v, c}_U with u = first index, v = second
            let xuf = Applied { op: &xu, inner: &f, cfg };
            let xvf = Applied { op: &xv, inner: &f, cfg };
            let v_xuf = Applied { op: &v, inner: &xuf, cfg };
            let u_xvf = Applied { op: &u, inner: &xvf, cfg };
            let lhs = add(bracket(&v_xuf, &c, &v, x0, cfg)?, bracket(&u_xvf, &c, &u, x0, cfg)?, 1.0);
            // F1 pairs with V, F2 with U
            let f1 = Sum { parts: vec![(wu.0, &b0_vf), (wu.1, &du_f)], extra: &sig_term };
            let f2 = Sum { parts: vec![(wv.0, &b0_uf), (wv.1, &dv_f)], extra: &sig_term };
            let g1 = bracket(&f1, &c, &v, x0, cfg)?;
            let g2 = bracket(&f2, &c, &u, x0, cfg)?;
            let base = (4.0 / q) * c0 * c0;
            let rhs = FdValue { value: base - g1.value - g2.value, error: g1.error + g2.error };
            Ok((lhs, rhs, c0))
        }
    }
}

/// All six equations, each with the step calibration sweep.
pub fn check_pq22_system(pr: &Problem, tol: f64) -> Result<Vec<ResidualReport>> {
    if pr.point.q() != 2 || pr.point.p() != 2 {
        return Err(Error::Invalid("the six-equation system needs p = q = 2".into()));
    }
    pr.require_bounded()?;
    let d = &pr.point.def;
    if d.alpha.iter().chain(&d.beta).chain(&d.t1).chain(&d.t2).chain(&d.s1).chain(&d.s2).any(|v| *v != 0.0) {
        return Err(Error::Invalid("the six-equation system is evaluated on the locus (zero deformation)".into()));
    }
    Pq22Equation::ALL.iter().map(|&eq| check_equation(pr, eq, tol, &PQ22_STEPS)).collect()
}

pub fn check_equation(pr: &Problem, eq: Pq22Equation, tol: f64, steps: &[f64]) -> Result<ResidualReport> {
    let mut best: Option<ResidualReport> = None;
    for &h in steps {
        let cfg = FdConfig { h, levels: 1 };
        let (lhs, rhs, c0) = evaluate(pr, eq, cfg)?;
        let mut r = ResidualReport::new(eq.id(), &pr.name, lhs.value, rhs.value, lhs.error + rhs.error, tol, h).with("c", c0);
        if c0.abs() < REL_FLOOR {
            r = r.indeterminate();
        }
        if best.as_ref().is_none_or(|b| r.rel_residual < b.rel_residual) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Invalid("empty step sweep".into()))
}
