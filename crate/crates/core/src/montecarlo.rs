//! Random-walk Metropolis sampling of the fixed-time joint density of the
//! particles, used as an independent check of the determinant probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{normalize, IntervalUnion, NormalizedProblem, ValidatedSpec};
use crate::error::{Error, Result};
use crate::linalg::{log_det, Matrix};

pub const TARGET_ACCEPTANCE: f64 = 0.3;
pub const ACCEPTANCE_RANGE: (f64, f64) = (0.05, 0.8);
pub const BATCHES: usize = 50;
pub const MIN_ESS: f64 = 100.0;
const TUNE_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub chains: usize,
    /// Sweeps per chain, burn-in included. One sweep proposes a move for every coordinate.
    pub steps: usize,
    pub burn_in: usize,
    pub proposal_scale: f64,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { chains: 4, steps: 100_000, burn_in: 5_000, proposal_scale: 1.0, seed: 0x5eed }
    }
}

impl ChainConfig {
    pub fn check(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::Invalid("at least two chains are needed".into()));
        }
        if self.steps <= self.burn_in {
            return Err(Error::Invalid("steps must exceed burn-in".into()));
        }
        if self.steps - self.burn_in < BATCHES {
            return Err(Error::Invalid(format!("need at least {BATCHES} post burn-in sweeps")));
        }
        if !(self.proposal_scale > 0.0) {
            return Err(Error::Invalid("proposal scale must be positive".into()));
        }
        Ok(())
    }
}

/// Density proportional to |prod e^{-x_i^2/2} det[x_j^k e^{ã_α x_j}] det[x_j^k e^{b̃_β x_j}]| on R^N.
#[derive(Debug, Clone)]
pub struct Target {
    rows_a: Vec<(f64, i32)>,
    rows_b: Vec<(f64, i32)>,
}

fn confluent_rows(mult: &[usize], coef: &[f64]) -> Vec<(f64, i32)> {
    mult.iter().zip(coef).flat_map(|(&k, &c)| (0..k as i32).map(move |i| (c, i))).collect()
}

fn log_block_det(rows: &[(f64, i32)], x: &[f64]) -> (i8, f64) {
    let n = x.len();
    let mut m = Matrix::<f64>::zeros(n);
    for (i, &(c, k)) in rows.iter().enumerate() {
        for (j, &xj) in x.iter().enumerate() {
            m.set(i, j, xj.powi(k) * (c * xj).exp());
        }
    }
    match log_det(&m) {
        Ok(d) => (d.sign, d.logmag),
        Err(_) => (0, f64::NEG_INFINITY),
    }
}

impl Target {
    pub fn new(spec: &ValidatedSpec) -> Result<Self> {
        let np = normalize(spec, &IntervalUnion::real_line())?;
        Ok(Self::from_normalized(spec, &np))
    }

    pub fn from_normalized(spec: &ValidatedSpec, np: &NormalizedProblem) -> Self {
        Target { rows_a: confluent_rows(&spec.m, &np.a), rows_b: confluent_rows(&spec.n, &np.b) }
    }

    pub fn dim(&self) -> usize {
        self.rows_a.len()
    }

    /// (sign, log |weight|) at x.
    pub fn log_weight(&self, x: &[f64]) -> (i8, f64) {
        let (sa, la) = log_block_det(&self.rows_a, x);
        let (sb, lb) = log_block_det(&self.rows_b, x);
        let gauss: f64 = x.iter().map(|v| -0.5 * v * v).sum();
        (sa * sb, la + lb + gauss)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainTrace {
    pub chain: usize,
    /// (sweep, proposal scale, window acceptance) during burn-in.
    pub tuning: Vec<(usize, f64, f64)>,
    pub proposal_scale: f64,
    pub acceptance: f64,
    pub sign_flips: u64,
}

/// Runs one chain and hands every post burn-in state to `visit` along with the weight sign.
fn run_chain(target: &Target, cfg: &ChainConfig, chain: usize, mut visit: impl FnMut(&[f64], i8)) -> Result<ChainTrace> {
    let n = target.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);
    let mut x: Vec<f64> = (0..n).map(|i| i as f64 - 0.5 * (n as f64 - 1.0) + 0.1 * rng.random::<f64>()).collect();
    let (mut sign, mut lw) = target.log_weight(&x);
    if sign == 0 || !lw.is_finite() {
        return Err(Error::Sampler("zero weight at the starting state".into()));
    }
    let mut sigma = cfg.proposal_scale;
    let mut tuning = Vec::new();
    let (mut acc_window, mut acc_total, mut proposals) = (0u64, 0u64, 0u64);
    let mut flips = 0u64;
    let mut prop = x.clone();
    for sweep in 0..cfg.steps {
        for i in 0..n {
            let dx: f64 = rng.sample(StandardNormal);
            prop.copy_from_slice(&x);
            prop[i] += sigma * dx;
            let (s, l) = target.log_weight(&prop);
            let u: f64 = rng.random();
            if s != 0 && l.is_finite() && u.ln() < l - lw {
                x.copy_from_slice(&prop);
                if s != sign {
                    flips += 1;
                }
                sign = s;
                lw = l;
                if sweep < cfg.burn_in {
                    acc_window += 1;
                } else {
                    acc_total += 1;
                }
            }
            if sweep >= cfg.burn_in {
                proposals += 1;
            }
        }
        if sweep < cfg.burn_in && (sweep + 1) % TUNE_WINDOW == 0 {
            let rate = acc_window as f64 / (TUNE_WINDOW * n) as f64;
            sigma *= (rate - TARGET_ACCEPTANCE).exp();
            tuning.push((sweep + 1, sigma, rate));
            acc_window = 0;
        }
        if sweep >= cfg.burn_in {
            visit(&x, sign);
        }
    }
    let acceptance = acc_total as f64 / proposals.max(1) as f64;
    let trace = ChainTrace { chain, tuning, proposal_scale: sigma, acceptance, sign_flips: flips };
    if !(ACCEPTANCE_RANGE.0..=ACCEPTANCE_RANGE.1).contains(&acceptance) {
        return Err(Error::Sampler(format!(
            "acceptance {acceptance:.3} outside [{}, {}] after tuning; trace {:?}",
            ACCEPTANCE_RANGE.0, ACCEPTANCE_RANGE.1, trace.tuning
        )));
    }
    Ok(trace)
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRun {
    pub dim: usize,
    /// Post burn-in states per chain, every `thin`-th sweep.
    pub states: Vec<Vec<Vec<f64>>>,
    pub thin: usize,
    pub traces: Vec<ChainTrace>,
}

impl SampleRun {
    pub fn sign_flips(&self) -> u64 {
        self.traces.iter().map(|t| t.sign_flips).sum()
    }
}

/// Runs all chains, keeping every `thin`-th post burn-in state.
pub fn sample(spec: &ValidatedSpec, cfg: &ChainConfig, thin: usize) -> Result<SampleRun> {
    cfg.check()?;
    let thin = thin.max(1);
    let target = Target::new(spec)?;
    let out: Vec<(Vec<Vec<f64>>, ChainTrace)> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let mut states = Vec::new();
            let mut k = 0usize;
            let tr = run_chain(&target, cfg, c, |x, _| {
                if k.is_multiple_of(thin) {
                    states.push(x.to_vec());
                }
                k += 1;
            })?;
            Ok((states, tr))
        })
        .collect::<Result<_>>()?;
    let (states, traces) = out.into_iter().unzip();
    Ok(SampleRun { dim: target.dim(), states, thin, traces })
}

struct Series {
    /// Sign-weighted statistic.
    vals: Vec<f64>,
    signs: Vec<f64>,
    /// Centre of mass, for the convergence diagnostic.
    com: Vec<f64>,
    trace: ChainTrace,
}

fn chain_series(target: &Target, cfg: &ChainConfig, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<Vec<Series>> {
    (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let len = cfg.steps - cfg.burn_in;
            let (mut vals, mut signs, mut com) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
            let trace = run_chain(target, cfg, c, |x, s| {
                vals.push(s as f64 * f(x));
                signs.push(s as f64);
                com.push(x.iter().sum::<f64>() / x.len() as f64);
            })?;
            Ok(Series { vals, signs, com, trace })
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Between/within variance ratio with every chain split in half.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| {
            let h = c.len() / 2;
            [&c[..h], &c[h..2 * h]]
        })
        .collect();
    let n = halves[0].len() as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = halves.iter().map(|h| variance(h)).sum::<f64>() / halves.len() as f64;
    let b = n * variance(&means);
    if w == 0.0 {
        return if b == 0.0 { 1.0 } else { f64::INFINITY };
    }
    (((n - 1.0) / n * w + b / n) / w).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub p_hat: f64,
    /// Batch-means standard error.
    pub std_error: f64,
    pub ess: f64,
    pub sign_flips: u64,
    pub samples: usize,
    pub r_hat: f64,
    pub acceptance: Vec<f64>,
}

impl Estimate {
    /// Smallest difference the run can resolve: max(std_error, 1/samples).
    pub fn resolution(&self) -> f64 {
        self.std_error.max(1.0 / self.samples as f64)
    }

    /// |p_hat - p| within `k` resolutions.
    pub fn agrees_with(&self, p: f64, k: f64) -> bool {
        (self.p_hat - p).abs() <= k * self.resolution()
    }
}

/// Mean, batch-means standard error and ESS of a statistic pooled over chains.
pub fn batch_means(chains: &[Vec<f64>]) -> (f64, f64, f64) {
    let mut bm = Vec::new();
    let mut all = 0.0;
    let mut count = 0usize;
    for c in chains {
        let size = c.len() / BATCHES;
        for b in 0..BATCHES {
            bm.push(mean(&c[b * size..(b + 1) * size]));
        }
        all += c[..size * BATCHES].iter().sum::<f64>();
        count += size * BATCHES;
    }
    let m = all / count as f64;
    let var_bm = variance(&bm);
    let se = (var_bm / bm.len() as f64).sqrt();
    let pooled: f64 = chains.iter().flat_map(|c| c.iter()).map(|x| (x - m) * (x - m)).sum::<f64>() / (count as f64 - 1.0);
    let ess = if se == 0.0 { count as f64 } else { (pooled / (se * se)).min(count as f64) };
    (m, se, ess)
}

/// Fraction of post burn-in states with every coordinate in `e` (sign weighted).
pub fn estimate_probability(spec: &ValidatedSpec, e: &IntervalUnion, cfg: &ChainConfig) -> Result<Estimate> {
    cfg.check()?;
    let target = Target::new(spec)?;
    let (_, _, se) = crate::domain::scale_factors(spec.t)?;
    let en = e.scaled(se);
    let inside = move |x: &[f64]| if x.iter().all(|&v| en.contains(v)) { 1.0 } else { 0.0 };
    let series = chain_series(&target, cfg, &inside)?;
    let flips: u64 = series.iter().map(|s| s.trace.sign_flips).sum();
    if flips > 0 {
        return Err(Error::Sampler(format!("{flips} sign flips of the weight observed")));
    }
    let vals: Vec<Vec<f64>> = series.iter().map(|s| s.vals.clone()).collect();
    let signs: Vec<Vec<f64>> = series.iter().map(|s| s.signs.clone()).collect();
    let com: Vec<Vec<f64>> = series.iter().map(|s| s.com.clone()).collect();
    let (num, se_num, ess) = batch_means(&vals);
    let (den, _, _) = batch_means(&signs);
    let samples = vals.iter().map(Vec::len).sum();
    if ess < MIN_ESS {
        return Err(Error::Sampler(format!("effective sample size {ess:.1} below {MIN_ESS}")));
    }
    Ok(Estimate {
        p_hat: (num / den).clamp(0.0, 1.0),
        std_error: se_num / den.abs(),
        ess,
        sign_flips: flips,
        samples,
        r_hat: split_rhat(&com),
        acceptance: series.iter().map(|s| s.trace.acceptance).collect(),
    })
}
