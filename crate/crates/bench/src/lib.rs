//! Benchmark fixtures shared by the criterion targets.

use nibm::identities::Problem;
use nibm::{BlockSpec, IntervalUnion, TauPoint};

/// Two starting and two ending points with multiplicities `m`, `n` on a two-component set.
pub fn problem(m: &[usize], n: &[usize]) -> Problem {
    let e = IntervalUnion::new(vec![(-1.5, 0.3), (0.8, 2.2)]).expect("valid set");
    let pt = TauPoint::new(&[-0.7, 0.7], &[-0.4, 0.4], e);
    Problem::new("bench", pt, BlockSpec::new(m, n).expect("valid blocks")).expect("valid problem")
}
