mod common;

use common::{moment, rel, Mix};
use nibm::diffops::{apply_chain, fd, Coordinate, FdConfig, FirstOrder, Operators};
use nibm::identities::Problem;
use nibm::suite::make_problem;
use nibm::{tau_e, BlockSpec, IntervalUnion, TauPoint};

fn single(e: &[(f64, f64)]) -> (TauPoint, BlockSpec) {
    let pt = TauPoint::new(&[0.3], &[-0.2], IntervalUnion::new(e.to_vec()).unwrap());
    (pt, BlockSpec::new(&[1], &[1]).unwrap())
}

#[test]
fn time_derivative_is_first_moment() {
    let comps = [(-1.0, 0.5), (1.0, 2.0)];
    let (pt, bs) = single(&comps);
    let tau = |x: &TauPoint| Ok(tau_e(x, &bs)?.value());
    let d = fd(&tau, &pt, &[Coordinate::T1(0)], FdConfig::order(1)).unwrap();
    let want = moment(1, 0.1, 1.0, &comps);
    assert!(rel(d.value, want) < 1e-8, "{} vs {want}", d.value);
}

#[test]
fn halving_the_step_reduces_the_error() {
    let comps = [(-1.0, 1.5)];
    let (pt, bs) = single(&comps);
    let tau = |x: &TauPoint| Ok(tau_e(x, &bs)?.value());
    let want = moment(1, 0.1, 1.0, &comps);
    let err = |h: f64| (fd(&tau, &pt, &[Coordinate::T1(0)], FdConfig { h, levels: 0 }).unwrap().value - want).abs();
    for h in [0.1, 0.05, 0.025] {
        assert!(err(h) / err(h / 2.0) >= 3.0, "h={h}");
    }
}

fn random_problem(rng: &mut Mix, k: usize) -> Problem {
    let a = 0.5 + 0.4 * rng.next();
    let b = 0.4 + 0.3 * rng.next();
    let lo = -2.0 + 0.3 * rng.next();
    let e = IntervalUnion::new(vec![(lo, -0.2 + 0.2 * rng.next()), (0.5, 2.0 + 0.3 * rng.next())]).unwrap();
    make_problem(format!("rand{k}"), &[1, 1], &[1, 1], &[-a, a], &[-b, b], e, 0, 0).unwrap()
}

#[test]
fn sum_rules() {
    let mut rng = Mix(17);
    for k in 0..5 {
        let pr = random_problem(&mut rng, k);
        let f = pr.log_tau();
        let ops = Operators::for_point(&pr.point);
        let cfg = FdConfig::order(1);
        let b = ops.b_minus1().apply(&f, &pr.point, cfg).unwrap().value;
        let sa = ops.a_locus(0).plus(&ops.a_locus(1), 1.0).apply(&f, &pr.point, cfg).unwrap().value;
        let sb = ops.b_locus(0).plus(&ops.b_locus(1), 1.0).apply(&f, &pr.point, cfg).unwrap().value;
        assert!(rel(sa, b) < 1e-8 && rel(sb, b) < 1e-8, "{sa} {sb} {b}");
    }
}

#[test]
fn free_coordinate_matches_time_derivatives() {
    let mut rng = Mix(29);
    let pr = random_problem(&mut rng, 0);
    let f = pr.log_tau();
    let cfg = FdConfig::order(1);
    let da = fd(&f, &pr.point, &[Coordinate::A(0)], cfg).unwrap().value;
    let ds = FirstOrder::partial(Coordinate::S1(1)).plus(&FirstOrder::partial(Coordinate::S1(0)), -1.0);
    let rhs = ds.apply(&f, &pr.point, cfg).unwrap().value;
    assert!(rel(da, rhs) < 1e-7, "{da} vs {rhs}");
}

#[test]
fn locus_operators_commute() {
    let mut rng = Mix(5);
    let pr = random_problem(&mut rng, 0);
    let f = pr.log_tau();
    let ops = Operators::for_point(&pr.point);
    let cfg = FdConfig::order(2);
    let scale = apply_chain(&[ops.a_locus(0), ops.a_locus(0)], &f, &pr.point, cfg).unwrap().value.abs();
    for (j, k) in [(0, 0), (0, 1), (1, 0)] {
        let ab = apply_chain(&[ops.a_locus(j), ops.b_locus(k)], &f, &pr.point, cfg).unwrap();
        let ba = apply_chain(&[ops.b_locus(k), ops.a_locus(j)], &f, &pr.point, cfg).unwrap();
        assert!((ab.value - ba.value).abs() < 1e-7 * scale.max(1.0), "({j},{k}) {} {}", ab.value, ba.value);
    }
}

#[test]
fn boundary_operators_on_endpoint_functions() {
    let pt = TauPoint::new(&[0.0], &[0.0], IntervalUnion::interval(0.7, 1.9).unwrap());
    let ops = Operators::for_point(&pt);
    let cfg = FdConfig::order(1);
    let sum = |x: &TauPoint| Ok(x.e.endpoints().iter().sum::<f64>());
    let prod = |x: &TauPoint| Ok(x.e.endpoints().iter().product::<f64>());
    assert!((ops.b_minus1().apply(&sum, &pt, cfg).unwrap().value - 2.0).abs() < 1e-12);
    assert!((ops.b_zero().apply(&prod, &pt, cfg).unwrap().value - 2.0 * 0.7 * 1.9).abs() < 1e-12);
}
