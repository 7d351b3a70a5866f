//! Equation and unknown counts of the elimination producing a single PDE,
//! and the smallest differentiation order K* at which equations outnumber
//! unknowns.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Upper limit of the K* scan; the quadratic is positive long before this.
const KSTAR_SCAN_LIMIT: i128 = 1 << 20;

/// (x^2 - 3x + 4) K^2 + (-x^2 + 3x + 4) K - 2x (x^2 - 2x - 1)
pub fn kstar_polynomial(x: i128, k: i128) -> i128 {
    (x * x - 3 * x + 4) * k * k + (-x * x + 3 * x + 4) * k - 2 * x * (x * x - 2 * x - 1)
}

/// Smallest K >= 1 with a positive polynomial value, for x = p + q >= 2.
pub fn kstar(x: u64) -> Result<u64> {
    if x < 2 {
        return Err(Error::Invalid(format!("x = {x} must be at least 2")));
    }
    let xi = x as i128;
    (1..KSTAR_SCAN_LIMIT)
        .find(|&k| kstar_polynomial(xi, k) > 0)
        .map(|k| k as u64)
        .ok_or_else(|| Error::Invalid(format!("no K below {KSTAR_SCAN_LIMIT} for x = {x}")))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Counts are serialized as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Census {
    pub p: u64,
    pub q: u64,
    pub x: u64,
    pub k: u64,
    #[serde(serialize_with = "decimal")]
    pub m: BigUint,
    #[serde(serialize_with = "decimal")]
    pub equations: BigUint,
    #[serde(serialize_with = "decimal")]
    pub unknown_bound: BigUint,
    /// equations > unknown_bound
    pub balanced: bool,
}

pub fn census(p: u64, q: u64, k: u64) -> Result<Census> {
    if p == 0 || q == 0 {
        return Err(Error::Invalid("p and q must be positive".into()));
    }
    let x = p + q;
    let m = BigUint::from(x * (x - 1) / 2);
    let equations = &m * binomial(x + k - 1, k);
    let unknown_bound = BigUint::from(x - 2) * binomial(x + k + 1, k + 2);
    let balanced = equations > unknown_bound;
    Ok(Census { p, q, x, k, m, equations, unknown_bound, balanced })
}

/// One CSV row per x: x, K*, M, equations, bound (with p = floor(x/2), q = x - p).
pub fn kstar_csv(xs: impl IntoIterator<Item = u64>) -> Result<String> {
    let mut s = String::from("x,kstar,M,equations,bound\n");
    for x in xs {
        let k = kstar(x)?;
        let p = x / 2;
        let c = census(p.max(1), x - p.max(1), k)?;
        s.push_str(&format!("{x},{k},{},{},{}\n", c.m, c.equations, c.unknown_bound));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 5), BigUint::ZERO);
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
    }

    #[test]
    fn x_below_two_rejected() {
        assert!(kstar(1).is_err());
    }
}
