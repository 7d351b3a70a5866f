use nibm::domain::{denormalize, scale_factors};
use nibm::{normalize, validate, EnsembleSpec, Error, IntervalUnion};
use proptest::prelude::*;

fn spec(m: &[usize], n: &[usize], a: &[f64], b: &[f64], t: f64) -> EnsembleSpec {
    EnsembleSpec { q: m.len(), p: n.len(), m: m.to_vec(), n: n.to_vec(), a: a.to_vec(), b: b.to_vec(), t }
}

#[test]
fn validate_accepts_two_starting_points() {
    let v = validate(&spec(&[1, 1], &[2], &[-1.0, 1.0], &[0.0], 0.5)).unwrap();
    assert_eq!(v.n_particles(), 2);
}

#[test]
fn validate_rejects_bad_input() {
    assert_eq!(validate(&spec(&[1, 1], &[2], &[1.0, -1.0], &[0.0], 0.5)).unwrap_err(), Error::NotIncreasing("a"));
    assert_eq!(
        validate(&spec(&[1, 1], &[1, 1, 1], &[-1.0, 1.0], &[-1.0, 0.0, 1.0], 0.5)).unwrap_err(),
        Error::MultiplicityMismatch(2, 3)
    );
    assert!(matches!(validate(&spec(&[1], &[1], &[0.0], &[0.0], 1.0)), Err(Error::TimeOutOfRange(_))));
    assert!(validate(&spec(&[1, 1], &[2], &[-1.0, 2.0], &[0.0], 0.5)).is_err());
}

#[test]
fn last_coordinate_is_projected() {
    let v = validate(&spec(&[1, 1], &[2], &[-1.0, 1.0 + 1e-14], &[0.0], 0.5)).unwrap();
    assert_eq!(v.a[1], 1.0);
}

#[test]
fn normalization_examples() {
    let v = validate(&spec(&[1, 1], &[2], &[-1.0, 1.0], &[0.0], 0.5)).unwrap();
    let np = normalize(&v, &IntervalUnion::real_line()).unwrap();
    assert!((np.a[1] - 2f64.sqrt()).abs() < 1e-15);
    let v = validate(&spec(&[1, 1], &[2], &[-1.0, 1.0], &[0.0], 0.25)).unwrap();
    let np = normalize(&v, &IntervalUnion::real_line()).unwrap();
    assert!((np.a[1] - 6f64.sqrt()).abs() < 1e-15);
}

#[test]
fn interval_union_rejects_touching_components() {
    assert!(IntervalUnion::new(vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
    assert!(IntervalUnion::new(vec![(0.0, 1.5), (1.0, 2.0)]).is_err());
    let e = IntervalUnion::new(vec![(2.0, 3.0), (0.0, 1.0)]).unwrap();
    assert_eq!(e.components(), &[(0.0, 1.0), (2.0, 3.0)]);
}

proptest! {
    #[test]
    fn product_and_round_trip(a in 0.01f64..3.0, b in 0.01f64..3.0, t in 0.01f64..0.99, lo in -3.0f64..0.0, w in 0.1f64..3.0) {
        let v = validate(&spec(&[1, 2], &[2, 1], &[-a, a], &[-b, b], t)).unwrap();
        let e = IntervalUnion::interval(lo, lo + w).unwrap();
        let np = normalize(&v, &e).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = 2.0 * v.a[i] * v.b[j];
                prop_assert!((np.a[i] * np.b[j] - want).abs() <= 1e-14 * want.abs());
            }
        }
        let (a2, b2, e2) = denormalize(&np, t).unwrap();
        for (x, y) in a2.iter().chain(&b2).zip(v.a.iter().chain(&v.b)) {
            prop_assert!((x - y).abs() <= 1e-14 * y.abs());
        }
        for (x, y) in e2.endpoints().iter().zip(e.endpoints()) {
            prop_assert!((x - y).abs() <= 1e-14 * y.abs().max(1.0));
        }
        let (sa, sb, _) = scale_factors(t).unwrap();
        prop_assert!((sa * sb - 2.0).abs() < 1e-14);
    }
}
