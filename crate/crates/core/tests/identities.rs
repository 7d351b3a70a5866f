use nibm::diffops::{fd, Coordinate, FdConfig};
use nibm::identities::*;
use nibm::identities::Status;
use nibm::suite::{make_problem, standard_configs, virasoro_reports};
use nibm::{tau_e, IntervalUnion};

fn set(c: &[(f64, f64)]) -> IntervalUnion {
    IntervalUnion::new(c.to_vec()).unwrap()
}

fn base() -> Problem {
    make_problem("base", &[1, 1], &[1, 1], &[-1.0, 1.0], &[-0.5, 0.5], set(&[(-2.0, 2.0)]), 0, 0).unwrap()
}

fn assert_below(r: &ResidualReport, tol: f64) {
    assert_eq!(r.status, Status::Pass, "{r:?}");
    assert!(r.rel_residual < tol, "{} rel={:e} >= {tol:e}", r.id, r.rel_residual);
}

#[test]
fn hirota_examples() {
    let pr = base();
    assert_below(&check_hirota(&pr, HirotaKind::TT0, 0, 1, 1e-6).unwrap(), 1e-6);
    assert_below(&check_hirota(&pr, HirotaKind::TT1, 0, 1, 1e-5).unwrap(), 1e-5);
    assert_below(&check_hirota(&pr, HirotaKind::ST0, 0, 0, 1e-6).unwrap(), 1e-6);
}

#[test]
fn hirota_product_of_shifted_taus() {
    // tau^2 d^2 log tau / dt1 dt1' against tau_{n+e1-e2} tau_{n-e1+e2}, written out directly
    let pr = base();
    let d2 = fd(&pr.log_tau(), &pr.point, &[Coordinate::T1(0), Coordinate::T1(1)], FdConfig::order(2)).unwrap();
    let t = tau_e(&pr.point, &pr.blocks).unwrap().value();
    let plus = tau_e(&pr.point, &pr.blocks.shifted(&[0, 0], &[1, -1]).unwrap()).unwrap().value();
    let minus = tau_e(&pr.point, &pr.blocks.shifted(&[0, 0], &[-1, 1]).unwrap()).unwrap().value();
    let ratio = plus * minus / (t * t);
    assert!((d2.value - ratio).abs() < 1e-6 * ratio.abs(), "{} vs {ratio}", d2.value);
}

#[test]
fn ratio_examples() {
    let pr = base();
    assert_below(&check_corollary_ratios(&pr, RatioKind::Ending, 0, 1, 1e-5).unwrap(), 1e-5);
    assert_below(&check_corollary_ratios(&pr, RatioKind::Starting, 0, 1, 1e-5).unwrap(), 1e-5);
}

#[test]
fn both_sides_below_floor_is_indeterminate() {
    let r = ResidualReport::new("x", "c", 1e-10, -3e-11, 0.0, 1e-5, 1e-3);
    assert_eq!(r.status, Status::Indeterminate);
    assert!(r.passed());
}

#[test]
fn coinciding_points_trip_the_guard() {
    // a = b = 0 with two singleton blocks makes the moment matrix rank one
    let mut pr = base();
    pr.point.a = vec![0.0, 0.0];
    pr.point.b = vec![0.0, 0.0];
    let err = check_corollary_ratios(&pr, RatioKind::Ending, 0, 1, 1e-5).unwrap_err();
    assert!(err.is_numerical(), "{err:?}");
}

#[test]
fn virasoro_examples() {
    let e = set(&[(-1.0, 0.5), (1.0, 2.0)]);
    let pr = make_problem("v", &[1, 1], &[1, 1], &[-1.0, 1.0], &[-0.5, 0.5], e.clone(), 0, 0).unwrap();
    assert_below(&check_virasoro(&pr, -1, 1e-6).unwrap(), 1e-6);
    assert_below(&check_virasoro(&pr, 0, 1e-6).unwrap(), 1e-6);
    let mut tilted = pr.clone();
    tilted.point.def.alpha = vec![0.05, -0.05];
    tilted.point.def.beta = vec![0.02, -0.02];
    assert_below(&check_virasoro(&tilted, -1, 1e-5).unwrap(), 1e-5);
    assert_below(&check_virasoro(&tilted, 0, 1e-5).unwrap(), 1e-5);
}

#[test]
fn virasoro_needs_bounded_set() {
    let pr = make_problem("u", &[1], &[1], &[0.0], &[0.0], IntervalUnion::real_line(), 0, 0).unwrap();
    assert!(check_virasoro(&pr, -1, 1e-5).is_err());
}

#[test]
fn lemma_examples() {
    let pr = make_problem("l", &[1, 1], &[1, 1], &[-1.0, 1.0], &[-0.5, 0.5], set(&[(-1.0, 0.5), (1.0, 2.0)]), 0, 0).unwrap();
    assert_below(&check_second_derivative_lemma(&pr, LemmaRelation::L1, 0, 1, 1e-5).unwrap(), 1e-5);
    assert_below(&check_second_derivative_lemma(&pr, LemmaRelation::L3, 0, 1, 1e-5).unwrap(), 1e-5);
    assert_below(&check_second_derivative_lemma(&pr, LemmaRelation::L4, 0, 1, 5e-5).unwrap(), 5e-5);
}

#[test]
fn pq22_examples() {
    let pr = base();
    let reports = check_pq22_system(&pr, 1e-3).unwrap();
    assert_eq!(reports.len(), 6);
    for id in ["pq22.g_a[1,2]", "pq22.g_b[1,2]", "pq22.g_ab[1,1]"] {
        let r = reports.iter().find(|r| r.id == id).unwrap();
        assert_below(r, 1e-3);
        assert!(r.intermediates.iter().any(|(k, _)| k == "c"));
    }
}

#[test]
fn pq22_refinement_does_not_degrade() {
    let pr = base();
    for eq in Pq22Equation::ALL {
        let coarse = pq22_check_at(&pr, eq, 4e-2);
        let fine = pq22_check_at(&pr, eq, 2e-2);
        assert!(fine <= coarse || fine < 1e-3, "{eq:?}: {fine:e} vs {coarse:e}");
    }
}

fn pq22_check_at(pr: &Problem, eq: Pq22Equation, h: f64) -> f64 {
    nibm::identities::pq22_check_equation(pr, eq, 1e-3, &[h]).unwrap().rel_residual
}

#[test]
fn pq22_rejects_other_shapes() {
    let pr = make_problem("x", &[1], &[1], &[0.0], &[0.0], set(&[(-1.0, 1.0)]), 0, 0).unwrap();
    assert!(check_pq22_system(&pr, 1e-3).is_err());
}

#[test]
fn prop1_members_agree() {
    let n1 = make_problem("n1", &[1], &[1], &[0.0], &[0.0], set(&[(-1.0, 1.0)]), 0, 0).unwrap();
    for r in check_prop1(&n1, 1e-13).unwrap() {
        assert_below(&r, 1e-13);
    }
    let n2 = make_problem("n2", &[1, 1], &[2], &[-1.0, 1.0], &[0.0], set(&[(-1.0, 1.0)]), 0, 0).unwrap();
    for r in check_prop1(&n2, 1e-8).unwrap() {
        assert_below(&r, 1e-8);
    }
    let n3 = make_problem("n3", &[1, 1, 1], &[3], &[-1.0, 0.2, 0.8], &[0.0], set(&[(-1.0, 1.2)]), 0, 0).unwrap();
    for r in check_prop1(&n3, 1e-7).unwrap() {
        assert_below(&r, 1e-7);
    }
}

#[test]
fn prop1_moment_member_is_scaled_tau() {
    let pr = make_problem("n2", &[1, 1], &[2], &[-1.0, 1.0], &[0.0], set(&[(-1.0, 1.0)]), 0, 0).unwrap();
    let m = prop1_members(&pr).unwrap();
    assert_eq!(m.moment_det, 4.0 * tau_e(&pr.point, &pr.blocks).unwrap().value());
}

#[test]
fn prop1_size_limit() {
    let pr = make_problem("n4", &[2, 2], &[2, 2], &[-1.0, 1.0], &[-0.5, 0.5], set(&[(-1.0, 1.0)]), 0, 0).unwrap();
    assert!(check_prop1(&pr, 1e-7).is_err());
}

#[test]
fn every_hirota_pair_on_the_standard_set() {
    for pr in standard_configs().unwrap() {
        for r in hirota_all(&pr, 1e-5).unwrap() {
            assert_below(&r, 1e-5);
        }
        for r in virasoro_reports(&pr, 1e-5).unwrap() {
            assert_below(&r, 1e-5);
        }
    }
}
