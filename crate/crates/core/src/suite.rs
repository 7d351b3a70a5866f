//! Named configuration sets and the bundled verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{Deformation, IntervalUnion};
use crate::error::Result;
use crate::identities::{
    check_pq22_system, check_prop1, check_virasoro, hirota_all, lemma_all, ratios_all, Problem, ResidualReport, Status,
};
use crate::tau::{BlockSpec, TauPoint};

pub const STANDARD_SEEDS: [u64; 3] = [11, 23, 37];
pub const TILT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub virasoro: f64,
    pub hirota: f64,
    pub ratios: f64,
    pub lemma: f64,
    pub pq22: f64,
    pub prop1_n2: f64,
    pub prop1_n3: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { virasoro: 1e-5, hirota: 1e-5, ratios: 1e-4, lemma: 5e-5, pq22: 1e-3, prop1_n2: 1e-8, prop1_n3: 1e-7 }
    }
}

impl Tolerances {
    /// Every tolerance replaced by `tol`.
    pub fn uniform(tol: f64) -> Self {
        Tolerances { virasoro: tol, hirota: tol, ratios: tol, lemma: tol, pq22: tol, prop1_n2: tol, prop1_n3: tol }
    }
}

/// Union of one or two intervals inside [-2.5, 2.5], drawn from `seed`.
pub fn seeded_set(seed: u64) -> IntervalUnion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = -2.5 + rng.random::<f64>();
    let hi = 1.5 + rng.random::<f64>();
    if rng.random::<bool>() {
        let cut = lo + (hi - lo) * (0.35 + 0.3 * rng.random::<f64>());
        let gap = 0.2 + 0.3 * rng.random::<f64>();
        IntervalUnion::new(vec![(lo, cut), (cut + gap, hi)]).expect("valid seeded set")
    } else {
        IntervalUnion::interval(lo, hi).expect("valid seeded set")
    }
}

fn tilts(k: usize, pattern: i32) -> Vec<f64> {
    match (k, pattern) {
        (2, 1) => vec![TILT, -TILT],
        (2, -1) => vec![-TILT, TILT],
        _ => vec![0.0; k],
    }
}

/// A problem with starting points `a`, ending points `b` and tilt patterns (0, +, -).
#[allow(clippy::too_many_arguments)]
pub fn make_problem(
    name: impl Into<String>,
    m: &[usize],
    n: &[usize],
    a: &[f64],
    b: &[f64],
    e: IntervalUnion,
    alpha_pattern: i32,
    beta_pattern: i32,
) -> Result<Problem> {
    let mut pt = TauPoint::new(a, b, e);
    pt.def = Deformation::with_tilts(a.len(), b.len(), &tilts(a.len(), alpha_pattern), &tilts(b.len(), beta_pattern))?;
    Problem::new(name, pt, BlockSpec::new(m, n)?)
}

const SHAPES: [(&[usize], &[usize]); 4] = [(&[1, 1], &[1, 1]), (&[2, 1], &[1, 2]), (&[2, 2], &[2, 2]), (&[1, 1], &[2])];

fn points(k: usize) -> Vec<f64> {
    match k {
        1 => vec![0.0],
        _ => vec![-0.8, 0.8],
    }
}

/// Standard set: p, q <= 2, N <= 4, three seeded bounded sets, tilts in {0, ±0.05}.
pub fn standard_configs() -> Result<Vec<Problem>> {
    let mut out = Vec::new();
    for (si, &seed) in STANDARD_SEEDS.iter().enumerate() {
        let e = seeded_set(seed);
        for (k, (m, n)) in SHAPES.iter().enumerate() {
            let pat = [0, 1, -1][(si + k) % 3];
            let name = format!("std.s{seed}.m{m:?}.n{n:?}.tilt{pat:+}").replace(' ', "");
            let b: Vec<f64> = points(n.len()).iter().map(|v| v * 0.6).collect();
            out.push(make_problem(name, m, n, &points(m.len()), &b, e.clone(), pat, -pat)?);
        }
    }
    Ok(out)
}

/// p = q = 2 configurations on the locus for the lemma (N = 2, 3) and the six-equation system.
pub fn locus_configs() -> Result<Vec<Problem>> {
    Ok(vec![
        make_problem("locus.n2", &[1, 1], &[1, 1], &[-1.0, 1.0], &[-0.5, 0.5], IntervalUnion::interval(-2.0, 2.0)?, 0, 0)?,
        make_problem(
            "locus.n3",
            &[2, 1],
            &[1, 2],
            &[-0.7, 0.7],
            &[-0.4, 0.4],
            IntervalUnion::new(vec![(-1.5, 0.3), (0.8, 2.2)])?,
            0,
            0,
        )?,
    ])
}

/// Untilted configurations for the three-way representation check.
pub fn prop1_configs() -> Result<Vec<Problem>> {
    Ok(vec![
        make_problem("prop1.n2", &[1, 1], &[2], &[-1.0, 1.0], &[0.0], IntervalUnion::interval(-1.0, 1.0)?, 0, 0)?,
        make_problem("prop1.n3", &[2, 1], &[1, 2], &[-0.5, 0.5], &[-0.3, 0.3], IntervalUnion::interval(-1.2, 1.5)?, 0, 0)?,
    ])
}

pub fn virasoro_reports(pr: &Problem, tol: f64) -> Result<Vec<ResidualReport>> {
    Ok(vec![check_virasoro(pr, -1, tol)?, check_virasoro(pr, 0, tol)?])
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub reports: Vec<ResidualReport>,
    pub passed: usize,
    pub failed: usize,
    pub indeterminate: usize,
}

impl SuiteResult {
    /// Counts use the plain tolerance (no finite-difference allowance).
    pub fn new(suite: &str, reports: Vec<ResidualReport>) -> Self {
        let indeterminate = reports.iter().filter(|r| r.status == Status::Indeterminate).count();
        let passed = reports.iter().filter(|r| r.status != Status::Indeterminate && r.strict_pass()).count();
        let failed = reports.len() - passed - indeterminate;
        SuiteResult { suite: suite.to_string(), reports, passed, failed, indeterminate }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Quick suite: Virasoro and Hirota on the standard set, ratios and the lemma
/// on the locus configurations, the representation check at N = 2.
pub fn desk_suite(tol: &Tolerances) -> Result<SuiteResult> {
    let mut reports = Vec::new();
    for pr in standard_configs()? {
        reports.extend(virasoro_reports(&pr, tol.virasoro)?);
        reports.extend(hirota_all(&pr, tol.hirota)?);
    }
    for pr in locus_configs()? {
        reports.extend(ratios_all(&pr, tol.ratios)?);
        reports.extend(lemma_all(&pr, tol.lemma)?);
    }
    reports.extend(check_prop1(&prop1_configs()?[0], tol.prop1_n2)?);
    Ok(SuiteResult::new("desk", reports))
}

/// Desk suite plus ratios on the standard set, the N = 3 representation check
/// and the six-equation system on both locus configurations.
pub fn full_suite(tol: &Tolerances) -> Result<SuiteResult> {
    let mut reports = desk_suite(tol)?.reports;
    for pr in standard_configs()? {
        reports.extend(ratios_all(&pr, tol.ratios)?);
    }
    reports.extend(check_prop1(&prop1_configs()?[1], tol.prop1_n3)?);
    for pr in locus_configs()? {
        reports.extend(check_pq22_system(&pr, tol.pq22)?);
    }
    Ok(SuiteResult::new("full", reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_sets_are_bounded_and_stable() {
        for s in STANDARD_SEEDS {
            let e = seeded_set(s);
            assert!(e.is_bounded());
            assert_eq!(e, seeded_set(s));
        }
    }

    #[test]
    fn standard_set_shape_limits() {
        let c = standard_configs().unwrap();
        assert_eq!(c.len(), 12);
        for pr in &c {
            assert!(pr.n_particles() <= 4 && pr.point.p() <= 2 && pr.point.q() <= 2);
            assert!(pr.point.def.alpha.iter().chain(&pr.point.def.beta).all(|v| [0.0, TILT, -TILT].contains(v)));
        }
    }
}
