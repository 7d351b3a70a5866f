mod common;

use common::integrate;
use nibm::montecarlo::{batch_means, estimate_probability, sample, split_rhat, ChainConfig, Target};
use nibm::{probability, validate, EnsembleSpec, IntervalUnion, ValidatedSpec};

fn spec(m: &[usize], n: &[usize], a: &[f64], b: &[f64], t: f64) -> ValidatedSpec {
    validate(&EnsembleSpec { q: m.len(), p: n.len(), m: m.to_vec(), n: n.to_vec(), a: a.to_vec(), b: b.to_vec(), t }).unwrap()
}

fn cfg(steps: usize, seed: u64) -> ChainConfig {
    ChainConfig { chains: 4, steps, burn_in: 2_000, proposal_scale: 1.0, seed }
}

#[test]
fn single_particle_is_standard_normal() {
    let s = spec(&[1], &[1], &[0.0], &[0.0], 0.5);
    let run = sample(&s, &cfg(60_000, 1), 1).unwrap();
    let xs: Vec<Vec<f64>> = run.states.iter().map(|c| c.iter().map(|x| x[0]).collect()).collect();
    let (mu, _, ess) = batch_means(&xs);
    let sq: Vec<Vec<f64>> = xs.iter().map(|c| c.iter().map(|x| (x - mu) * (x - mu)).collect()).collect();
    let (var, _, _) = batch_means(&sq);
    assert!(ess >= 1e4, "ess {ess}");
    assert!(mu.abs() < 3.0 * var.sqrt() / ess.sqrt(), "mean {mu}");
    assert!((var - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn max_particle_dominates_min() {
    let s = spec(&[1, 1], &[1, 1], &[-1.0, 1.0], &[-0.5, 0.5], 0.5);
    let run = sample(&s, &cfg(20_000, 2), 5).unwrap();
    let (mut hi, mut lo) = (Vec::new(), Vec::new());
    for x in run.states.iter().flatten() {
        hi.push(x[0].max(x[1]));
        lo.push(x[0].min(x[1]));
    }
    let cdf = |v: &[f64], t: f64| v.iter().filter(|&&u| u <= t).count() as f64 / v.len() as f64;
    for k in -30..=30 {
        let t = k as f64 / 10.0;
        assert!(cdf(&hi, t) <= cdf(&lo, t));
    }
    assert!(hi.iter().sum::<f64>() > lo.iter().sum::<f64>());
}

#[test]
fn no_sign_flips_over_a_million_sweeps() {
    let s = spec(&[1, 1], &[1, 1], &[-1.0, 1.0], &[-0.5, 0.5], 0.5);
    let c = ChainConfig { chains: 2, steps: 500_000, burn_in: 5_000, proposal_scale: 1.0, seed: 3 };
    let run = sample(&s, &c, 1_000).unwrap();
    assert_eq!(run.sign_flips(), 0);
}

#[test]
fn weight_is_symmetric_in_the_particles() {
    let s = spec(&[2, 1], &[1, 2], &[-0.5, 0.5], &[-0.3, 0.3], 0.4);
    let t = Target::new(&s).unwrap();
    let (s1, l1) = t.log_weight(&[-0.4, 0.2, 1.1]);
    let (s2, l2) = t.log_weight(&[1.1, -0.4, 0.2]);
    assert_eq!(s1, s2);
    assert!((l1 - l2).abs() < 1e-12);
}

#[test]
fn same_seed_same_chains() {
    let s = spec(&[1, 1], &[2], &[-1.0, 1.0], &[0.0], 0.5);
    let e = IntervalUnion::interval(-1.0, 1.5).unwrap();
    let a = estimate_probability(&s, &e, &cfg(10_000, 9)).unwrap();
    let b = estimate_probability(&s, &e, &cfg(10_000, 9)).unwrap();
    assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert_eq!(sample(&s, &cfg(3_000, 9), 7).unwrap().states, sample(&s, &cfg(3_000, 9), 7).unwrap().states);
    let c = estimate_probability(&s, &e, &cfg(10_000, 10)).unwrap();
    assert_ne!(a.p_hat.to_bits(), c.p_hat.to_bits());
}

#[test]
fn half_line_is_one_half() {
    let s = spec(&[1], &[1], &[0.0], &[0.0], 0.5);
    let e = IntervalUnion::new(vec![(0.0, f64::INFINITY)]).unwrap();
    let est = estimate_probability(&s, &e, &ChainConfig::default()).unwrap();
    assert!(est.agrees_with(0.5, 3.0), "{est:?}");
}

#[test]
fn single_particle_interval_matches_determinant_and_quadrature() {
    let s = spec(&[1], &[1], &[0.0], &[0.0], 0.5);
    let e = IntervalUnion::interval(-0.3, 0.3).unwrap();
    let p = probability(&s, &e).unwrap().probability;
    // transition density e^{-(x-y)^2/t} / sqrt(pi t): the bridge has variance t(1-t)/2
    let sd = (0.125f64).sqrt();
    let g = |x: f64| (-0.5 * (x / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let q = integrate(&g, -0.3, 0.3);
    assert!((p - q).abs() < 1e-12, "{p} vs {q}");
    let est = estimate_probability(&s, &e, &ChainConfig::default()).unwrap();
    assert!(est.agrees_with(p, 3.0), "{est:?} vs {p}");
    assert!(est.std_error <= 0.01);
}

#[test]
fn two_particles_match_determinant() {
    let s = spec(&[1, 1], &[1, 1], &[-1.0, 1.0], &[-0.5, 0.5], 0.5);
    let e = IntervalUnion::interval(-1.0, 1.2).unwrap();
    let p = probability(&s, &e).unwrap().probability;
    let est = estimate_probability(&s, &e, &ChainConfig::default()).unwrap();
    assert_eq!(est.sign_flips, 0);
    assert!(est.agrees_with(p, 3.0), "{est:?} vs {p}");
    assert!(est.r_hat < 1.05);
}

#[test]
fn config_parsing_rejects_unknown_keys() {
    let c: ChainConfig = serde_json::from_str(r#"{"chains": 3, "seed": 5}"#).unwrap();
    assert_eq!((c.chains, c.seed, c.steps), (3, 5, ChainConfig::default().steps));
    assert!(serde_json::from_str::<ChainConfig>(r#"{"chain": 3}"#).is_err());
    let bad = ChainConfig { chains: 1, ..ChainConfig::default() };
    assert!(bad.check().is_err());
}

#[test]
fn rhat_flags_separated_chains() {
    let a: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
    let b: Vec<f64> = a.iter().map(|v| v + 5.0).collect();
    assert!(split_rhat(&[a.clone(), a.clone()]) < 1.01);
    assert!(split_rhat(&[a, b]) > 2.0);
}
