//! Finite differences over tau-point coordinates and first-order operators
//! with affine coefficients, composed by nesting.
//!
//! Free-coordinate convention: a, b, alpha, beta are parameterized by their
//! first q-1 (resp. p-1) entries; moving a free entry moves the last one by
//! the opposite amount. Time coordinates and endpoints are all independent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tau::TauPoint;

/// Default base steps for first, second and third order derivatives.
pub const DEFAULT_STEPS: [f64; 3] = [1e-3, 5e-3, 2e-2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Coordinate {
    A(usize),
    B(usize),
    Alpha(usize),
    Beta(usize),
    T1(usize),
    T2(usize),
    S1(usize),
    S2(usize),
    /// k-th finite endpoint of E
    C(usize),
}

impl Coordinate {
    fn touches_gamma(&self) -> bool {
        matches!(self, Coordinate::Alpha(_) | Coordinate::Beta(_) | Coordinate::T2(_) | Coordinate::S2(_))
    }
}

/// Current value of a coordinate at a point.
pub fn coord_value(pt: &TauPoint, c: Coordinate) -> Result<f64> {
    let bad = || Error::Invalid(format!("coordinate {c:?} out of range"));
    Ok(match c {
        Coordinate::A(i) => *pt.a.get(i).ok_or_else(bad)?,
        Coordinate::B(i) => *pt.b.get(i).ok_or_else(bad)?,
        Coordinate::Alpha(i) => *pt.def.alpha.get(i).ok_or_else(bad)?,
        Coordinate::Beta(i) => *pt.def.beta.get(i).ok_or_else(bad)?,
        Coordinate::T1(i) => *pt.def.t1.get(i).ok_or_else(bad)?,
        Coordinate::T2(i) => *pt.def.t2.get(i).ok_or_else(bad)?,
        Coordinate::S1(i) => *pt.def.s1.get(i).ok_or_else(bad)?,
        Coordinate::S2(i) => *pt.def.s2.get(i).ok_or_else(bad)?,
        Coordinate::C(k) => *pt.e.endpoints().get(k).ok_or_else(bad)?,
    })
}

fn move_free(v: &mut [f64], i: usize, d: f64, c: Coordinate) -> Result<()> {
    if i + 1 >= v.len() {
        return Err(Error::Invalid(format!("{c:?} is a derived coordinate")));
    }
    let last = v.len() - 1;
    v[i] += d;
    v[last] -= d;
    Ok(())
}

fn move_time(v: &mut [f64], i: usize, d: f64, c: Coordinate) -> Result<()> {
    let x = v.get_mut(i).ok_or_else(|| Error::Invalid(format!("coordinate {c:?} out of range")))?;
    *x += d;
    Ok(())
}

/// Point displaced by eps * sum_i w_i e_{coord_i}.
pub fn moved(pt: &TauPoint, dir: &[(Coordinate, f64)], eps: f64) -> Result<TauPoint> {
    let mut x = pt.clone();
    let mut ends: Option<Vec<f64>> = None;
    for &(c, w) in dir {
        let d = eps * w;
        match c {
            Coordinate::A(i) => move_free(&mut x.a, i, d, c)?,
            Coordinate::B(i) => move_free(&mut x.b, i, d, c)?,
            Coordinate::Alpha(i) => move_free(&mut x.def.alpha, i, d, c)?,
            Coordinate::Beta(i) => move_free(&mut x.def.beta, i, d, c)?,
            Coordinate::T1(i) => move_time(&mut x.def.t1, i, d, c)?,
            Coordinate::T2(i) => move_time(&mut x.def.t2, i, d, c)?,
            Coordinate::S1(i) => move_time(&mut x.def.s1, i, d, c)?,
            Coordinate::S2(i) => move_time(&mut x.def.s2, i, d, c)?,
            Coordinate::C(k) => {
                let e = ends.get_or_insert_with(|| pt.e.endpoints());
                move_time(e, k, d, c)?;
            }
        }
    }
    if let Some(e) = ends {
        x.e = pt.e.with_endpoints(&e)?;
    }
    Ok(x)
}

/// Scalar function of a tau point.
pub trait Functional {
    fn eval(&self, pt: &TauPoint) -> Result<f64>;
}

impl<F: Fn(&TauPoint) -> Result<f64>> Functional for F {
    fn eval(&self, pt: &TauPoint) -> Result<f64> {
        self(pt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdConfig {
    /// Base step, scaled by max(1, |coordinate|).
    pub h: f64,
    /// Richardson levels (0 = plain central difference).
    pub levels: usize,
}

impl FdConfig {
    pub fn order(k: usize) -> Self {
        FdConfig { h: DEFAULT_STEPS[k.clamp(1, 3) - 1], levels: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdValue {
    pub value: f64,
    /// Difference between the last two Richardson levels.
    pub error: f64,
}

/// Directional derivative of g along `dir` with Richardson extrapolation.
pub fn directional(g: &dyn Functional, pt: &TauPoint, dir: &[(Coordinate, f64)], cfg: FdConfig) -> Result<FdValue> {
    let norm = dir.iter().map(|d| d.1.abs()).fold(0.0, f64::max);
    if norm == 0.0 {
        return Ok(FdValue { value: 0.0, error: 0.0 });
    }
    let mut scale = 1.0f64;
    for &(c, w) in dir {
        if w != 0.0 {
            scale = scale.max(coord_value(pt, c)?.abs());
        }
    }
    let mut eps = cfg.h * scale / norm;
    if !pt.e.is_bounded() && dir.iter().any(|(c, _)| c.touches_gamma()) {
        eps = eps.min(0.05 / norm);
    }
    if !(eps > 1e-300) {
        return Err(Error::NumericalGuard("finite-difference step underflow".into()));
    }
    let levels = cfg.levels;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels + 1);
    for i in 0..=levels {
        let e = eps / (1u64 << i) as f64;
        let fp = g.eval(&moved(pt, dir, e)?)?;
        let fm = g.eval(&moved(pt, dir, -e)?)?;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite("finite-difference stencil"));
        }
        let mut row = vec![(fp - fm) / (2.0 * e)];
        for j in 1..=i {
            let f = 4f64.powi(j as i32);
            let v = row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (f - 1.0);
            row.push(v);
        }
        table.push(row);
    }
    let value = table[levels][levels];
    let error = if levels == 0 { f64::NAN } else { (value - table[levels - 1][levels - 1]).abs() };
    Ok(FdValue { value, error })
}

/// Affine coefficient: constant + factor * (value of `coord`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coef {
    pub constant: f64,
    pub linear: Option<(f64, Coordinate)>,
}

impl Coef {
    pub fn c(v: f64) -> Self {
        Coef { constant: v, linear: None }
    }

    pub fn lin(constant: f64, factor: f64, coord: Coordinate) -> Self {
        Coef { constant, linear: Some((factor, coord)) }
    }

    pub fn at(&self, pt: &TauPoint) -> Result<f64> {
        Ok(match self.linear {
            None => self.constant,
            Some((f, c)) => self.constant + f * coord_value(pt, c)?,
        })
    }
}

/// X g = sum_i coef_i(x) dg/dx_i + shift * g.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct FirstOrder {
    pub terms: Vec<(Coef, Coordinate)>,
    pub shift: f64,
}

impl FirstOrder {
    pub fn partial(c: Coordinate) -> Self {
        FirstOrder { terms: vec![(Coef::c(1.0), c)], shift: 0.0 }
    }

    pub fn push(mut self, coef: Coef, c: Coordinate) -> Self {
        self.terms.push((coef, c));
        self
    }

    pub fn plus(mut self, other: &FirstOrder, factor: f64) -> Self {
        for &(k, c) in &other.terms {
            let k = Coef { constant: k.constant * factor, linear: k.linear.map(|(f, x)| (f * factor, x)) };
            self.terms.push((k, c));
        }
        self.shift += factor * other.shift;
        self
    }

    pub fn minus_identity(mut self, s: f64) -> Self {
        self.shift -= s;
        self
    }

    pub fn direction(&self, pt: &TauPoint) -> Result<Vec<(Coordinate, f64)>> {
        let mut out: Vec<(Coordinate, f64)> = Vec::with_capacity(self.terms.len());
        for (k, c) in &self.terms {
            let w = k.at(pt)?;
            match out.iter_mut().find(|d| d.0 == *c) {
                Some(d) => d.1 += w,
                None => out.push((*c, w)),
            }
        }
        Ok(out)
    }

    pub fn apply(&self, g: &dyn Functional, pt: &TauPoint, cfg: FdConfig) -> Result<FdValue> {
        let mut r = directional(g, pt, &self.direction(pt)?, cfg)?;
        if self.shift != 0.0 {
            r.value += self.shift * g.eval(pt)?;
        }
        Ok(r)
    }
}

/// X applied to an inner functional, itself a functional.
pub struct Applied<'a> {
    pub op: &'a FirstOrder,
    pub inner: &'a dyn Functional,
    pub cfg: FdConfig,
}

impl Functional for Applied<'_> {
    fn eval(&self, pt: &TauPoint) -> Result<f64> {
        Ok(self.op.apply(self.inner, pt, self.cfg)?.value)
    }
}

/// Product of first-order operators, applied right to left: X1 (X2 (... g)).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorExpr {
    pub factors: Vec<FirstOrder>,
}

pub const MAX_DEPTH: usize = 3;

impl OperatorExpr {
    pub fn new(factors: Vec<FirstOrder>) -> Result<Self> {
        if factors.is_empty() || factors.len() > MAX_DEPTH {
            return Err(Error::Invalid(format!("composition depth {} not in 1..=3", factors.len())));
        }
        Ok(OperatorExpr { factors })
    }

    pub fn depth(&self) -> usize {
        self.factors.len()
    }

    pub fn apply(&self, g: &dyn Functional, pt: &TauPoint, cfg: FdConfig) -> Result<FdValue> {
        apply_chain(&self.factors, g, pt, cfg)
    }
}

/// ops[0](ops[1](...(ops[k-1] g))) at pt, with one step size for every layer.
pub fn apply_chain(ops: &[FirstOrder], g: &dyn Functional, pt: &TauPoint, cfg: FdConfig) -> Result<FdValue> {
    match ops.len() {
        0 => Ok(FdValue { value: g.eval(pt)?, error: 0.0 }),
        1 => ops[0].apply(g, pt, cfg),
        _ => {
            let inner = ChainTail { ops: &ops[1..], g, cfg };
            ops[0].apply(&inner, pt, cfg)
        }
    }
}

struct ChainTail<'a> {
    ops: &'a [FirstOrder],
    g: &'a dyn Functional,
    cfg: FdConfig,
}

impl Functional for ChainTail<'_> {
    fn eval(&self, pt: &TauPoint) -> Result<f64> {
        Ok(apply_chain(self.ops, self.g, pt, self.cfg)?.value)
    }
}

/// Mixed partial derivative along the listed coordinates (at most three).
pub fn fd(g: &dyn Functional, at: &TauPoint, dirs: &[Coordinate], cfg: FdConfig) -> Result<FdValue> {
    if dirs.len() > MAX_DEPTH {
        return Err(Error::Invalid("at most three directions".into()));
    }
    let ops: Vec<FirstOrder> = dirs.iter().map(|&c| FirstOrder::partial(c)).collect();
    apply_chain(&ops, g, at, cfg)
}

/// {F, G}_X = G X(F) - F X(G).
pub fn bracket(f: &dyn Functional, g: &dyn Functional, x: &FirstOrder, pt: &TauPoint, cfg: FdConfig) -> Result<FdValue> {
    let xf = x.apply(f, pt, cfg)?;
    let xg = x.apply(g, pt, cfg)?;
    let fv = f.eval(pt)?;
    let gv = g.eval(pt)?;
    Ok(FdValue { value: gv * xf.value - fv * xg.value, error: (gv * xf.error).abs() + (fv * xg.error).abs() })
}

/// The operators of the integrable structure for a given (q, p) and number of finite endpoints.
#[derive(Debug, Clone, Copy)]
pub struct Operators {
    pub q: usize,
    pub p: usize,
    pub n_end: usize,
}

impl Operators {
    pub fn for_point(pt: &TauPoint) -> Self {
        Operators { q: pt.q(), p: pt.p(), n_end: pt.e.endpoints().len() }
    }

    /// sum_i d/dc_i
    pub fn b_minus1(&self) -> FirstOrder {
        let mut x = FirstOrder::default();
        for k in 0..self.n_end {
            x = x.push(Coef::c(1.0), Coordinate::C(k));
        }
        x
    }

    /// sum_i c_i d/dc_i
    pub fn b_zero(&self) -> FirstOrder {
        let mut x = FirstOrder::default();
        for k in 0..self.n_end {
            x = x.push(Coef::lin(0.0, 1.0, Coordinate::C(k)), Coordinate::C(k));
        }
        x
    }

    fn a_core(&self, j: usize, full: bool) -> FirstOrder {
        let (q, p) = (self.q as f64, self.p);
        let mut x = FirstOrder::default();
        if j + 1 < self.q {
            x = x.push(Coef::c(-1.0), Coordinate::A(j));
        }
        for l in 0..self.q - 1 {
            let k = if full { Coef::lin(1.0 / q, -2.0 / q, Coordinate::Alpha(l)) } else { Coef::c(1.0 / q) };
            x = x.push(k, Coordinate::A(l));
        }
        if full {
            for l in 0..p - 1 {
                x = x.push(Coef::lin(0.0, -2.0 / q, Coordinate::Beta(l)), Coordinate::B(l));
            }
        }
        x.plus(&self.b_minus1(), 1.0 / q)
    }

    fn b_core(&self, j: usize, full: bool) -> FirstOrder {
        let (p, q) = (self.p as f64, self.q);
        let mut x = FirstOrder::default();
        if j + 1 < self.p {
            x = x.push(Coef::c(-1.0), Coordinate::B(j));
        }
        for l in 0..self.p - 1 {
            let k = if full { Coef::lin(1.0 / p, -2.0 / p, Coordinate::Beta(l)) } else { Coef::c(1.0 / p) };
            x = x.push(k, Coordinate::B(l));
        }
        if full {
            for l in 0..q - 1 {
                x = x.push(Coef::lin(0.0, -2.0 / p, Coordinate::Alpha(l)), Coordinate::A(l));
            }
        }
        x.plus(&self.b_minus1(), 1.0 / p)
    }

    /// A_j, including the alpha/beta terms.
    pub fn a(&self, j: usize) -> FirstOrder {
        self.a_core(j, true)
    }

    pub fn b(&self, j: usize) -> FirstOrder {
        self.b_core(j, true)
    }

    /// A_j restricted to the locus alpha = beta = 0.
    pub fn a_locus(&self, j: usize) -> FirstOrder {
        self.a_core(j, false)
    }

    pub fn b_locus(&self, j: usize) -> FirstOrder {
        self.b_core(j, false)
    }

    /// B_0 - sum a_l d/da_l - sum b_l d/db_l over free coordinates.
    pub fn b0_hat(&self) -> FirstOrder {
        let mut x = self.b_zero();
        for l in 0..self.q - 1 {
            x = x.push(Coef::lin(0.0, -1.0, Coordinate::A(l)), Coordinate::A(l));
        }
        for l in 0..self.p - 1 {
            x = x.push(Coef::lin(0.0, -1.0, Coordinate::B(l)), Coordinate::B(l));
        }
        x
    }

    pub fn a_hat(&self, j: usize) -> FirstOrder {
        let q = self.q as f64;
        let mut x = FirstOrder::default();
        if j + 1 < self.q {
            x = x.push(Coef::c(-1.0), Coordinate::Alpha(j));
        }
        for l in 0..self.q - 1 {
            x = x.push(Coef::lin(1.0 / q, -2.0 / q, Coordinate::Alpha(l)), Coordinate::Alpha(l));
        }
        for l in 0..self.p - 1 {
            x = x.push(Coef::lin(0.0, -2.0 / q, Coordinate::Beta(l)), Coordinate::Beta(l));
        }
        x.plus(&self.b0_hat(), 1.0 / q)
    }

    pub fn b_hat(&self, j: usize) -> FirstOrder {
        let p = self.p as f64;
        let mut x = FirstOrder::default();
        if j + 1 < self.p {
            x = x.push(Coef::c(-1.0), Coordinate::Beta(j));
        }
        for l in 0..self.p - 1 {
            x = x.push(Coef::lin(1.0 / p, -2.0 / p, Coordinate::Beta(l)), Coordinate::Beta(l));
        }
        for l in 0..self.q - 1 {
            x = x.push(Coef::lin(0.0, -2.0 / p, Coordinate::Alpha(l)), Coordinate::Alpha(l));
        }
        x.plus(&self.b0_hat(), 1.0 / p)
    }

    /// -(1 - delta_{j,q-1}) d/dalpha_j + (1/q) sum_l d/dalpha_l
    pub fn x_dir(&self, j: usize) -> FirstOrder {
        let mut x = FirstOrder::default();
        if j + 1 < self.q {
            x = x.push(Coef::c(-1.0), Coordinate::Alpha(j));
        }
        for l in 0..self.q - 1 {
            x = x.push(Coef::c(1.0 / self.q as f64), Coordinate::Alpha(l));
        }
        x
    }

    pub fn y_dir(&self, k: usize) -> FirstOrder {
        let mut x = FirstOrder::default();
        if k + 1 < self.p {
            x = x.push(Coef::c(-1.0), Coordinate::Beta(k));
        }
        for l in 0..self.p - 1 {
            x = x.push(Coef::c(1.0 / self.p as f64), Coordinate::Beta(l));
        }
        x
    }

    /// (1 - delta_{j,q-1}) d/da_j - (1/q) sum_l d/da_l
    pub fn da(&self, j: usize) -> FirstOrder {
        let mut x = FirstOrder::default();
        if j + 1 < self.q {
            x = x.push(Coef::c(1.0), Coordinate::A(j));
        }
        for l in 0..self.q - 1 {
            x = x.push(Coef::c(-1.0 / self.q as f64), Coordinate::A(l));
        }
        x
    }

    pub fn db(&self, k: usize) -> FirstOrder {
        let mut x = FirstOrder::default();
        if k + 1 < self.p {
            x = x.push(Coef::c(1.0), Coordinate::B(k));
        }
        for l in 0..self.p - 1 {
            x = x.push(Coef::c(-1.0 / self.p as f64), Coordinate::B(l));
        }
        x
    }
}
