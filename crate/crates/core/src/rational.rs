//! Rational helpers shared by every module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact scalar used throughout the crate.
pub type Q = BigRational;

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `n!/(n-k)!`, zero when `k > n`.
pub fn falling(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    ((n - k + 1)..=n).fold(BigInt::one(), |acc, m| acc * BigInt::from(m))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for m in 0..k {
        acc = acc * BigInt::from(n - m) / BigInt::from(m + 1);
    }
    acc
}

/// Generalized binomial coefficient `r (r-1) ... (r-n+1) / n!` for rational `r`.
pub fn binomial_q(r: &Q, n: usize) -> Q {
    let mut acc = Q::one();
    for m in 0..n {
        acc = acc * (r - int(m as i64)) / int(m as i64 + 1);
    }
    acc
}

/// Renders `p/q`, or `p` when the denominator is one.
pub fn fmt_q(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p`, `-p` or `p/q` with integer `p`, `q`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

pub fn is_integer(q: &Q) -> bool {
    q.denom().is_one()
}

pub fn is_nonnegative_integer(q: &Q) -> bool {
    is_integer(q) && !q.is_negative()
}
