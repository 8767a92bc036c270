//! Truncated formal power series in one variable over the rationals.
//!
//! A series of order `N` stores the coefficients of `x^0 ..= x^N`. All
//! arithmetic is exact modulo `x^(N+1)`, and operands must share their order.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{binomial_q, factorial, fmt_q, int, Q};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("substituted series must have zero constant term")]
    NonzeroConstant,
    #[error("series must have constant term 1")]
    ConstantNotOne,
    #[error("series with zero constant term is not invertible")]
    NotInvertible,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncSeries {
    coeffs: Vec<Q>,
}

impl TruncSeries {
    pub fn zero(order: usize) -> Self {
        TruncSeries {
            coeffs: vec![Q::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Q::one(), order)
    }

    pub fn constant(c: Q, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `c x^k`; the zero series when `k` exceeds the order.
    pub fn monomial(k: usize, c: Q, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    /// The variable `x` itself.
    pub fn x(order: usize) -> Self {
        Self::monomial(1, Q::one(), order)
    }

    /// Coefficients beyond `order` are dropped, missing ones are zero.
    pub fn from_coeffs(mut coeffs: Vec<Q>, order: usize) -> Self {
        coeffs.resize(order + 1, Q::zero());
        TruncSeries { coeffs }
    }

    pub fn from_ints(coeffs: &[i64], order: usize) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect(), order)
    }

    /// `sum x^n/n!` truncated.
    pub fn exp_x(order: usize) -> Self {
        Self::from_coeffs(
            (0..=order)
                .map(|n| Q::new(1.into(), factorial(n)))
                .collect(),
            order,
        )
    }

    /// Series from exponential coefficients: `sum c_n x^n / n!`.
    pub fn from_egf(coeffs: &[Q], order: usize) -> Self {
        Self::from_coeffs(
            coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c / Q::from_integer(factorial(n)))
                .collect(),
            order,
        )
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    /// Coefficient of `x^k`; zero above the order.
    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient, `None` for zero.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Same series at another order (dropping or zero-padding).
    pub fn with_order(&self, order: usize) -> Self {
        Self::from_coeffs(self.coeffs.clone(), order)
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order() == other.order() {
            Ok(())
        } else {
            Err(SeriesError::OrderMismatch(self.order(), other.order()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        Ok(TruncSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        Ok(TruncSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, c: &Q) -> Self {
        TruncSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&int(-1))
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let n = self.order();
        let mut out = vec![Q::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Ok(TruncSeries { coeffs: out })
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(self.order()), |acc, _| {
            acc.mul(self).expect("same order")
        })
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let n = self.order();
        let mut inv = vec![Q::zero(); n + 1];
        inv[0] = Q::one() / c0;
        for k in 1..=n {
            let mut acc = Q::zero();
            for i in 1..=k {
                acc += &self.coeffs[i] * &inv[k - i];
            }
            inv[k] = -acc / c0;
        }
        Ok(TruncSeries { coeffs: inv })
    }

    /// Truncated quotient `self / other`.
    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        self.mul(&other.inverse()?)
    }

    /// `self ∘ s`; `s` must have zero constant term.
    pub fn compose(&self, s: &Self) -> Result<Self, SeriesError> {
        self.check(s)?;
        if !s.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        // Horner: f0 + s (f1 + s (f2 + ...))
        let n = self.order();
        let mut acc = Self::zero(n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(s)?;
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// `self^r` through the binomial series in `self - 1`.
    pub fn binom_pow(&self, r: &Q) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::ConstantNotOne);
        }
        let n = self.order();
        let u = self.sub(&Self::one(n))?;
        let outer = Self::from_coeffs((0..=n).map(|k| binomial_q(r, k)).collect(), n);
        outer.compose(&u)
    }

    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        // n g_n = sum_{k=1}^n k f_k g_{n-k}
        let n = self.order();
        let mut g = vec![Q::zero(); n + 1];
        g[0] = Q::one();
        for m in 1..=n {
            let mut acc = Q::zero();
            for k in 1..=m {
                if !self.coeffs[k].is_zero() {
                    acc += int(k as i64) * &self.coeffs[k] * &g[m - k];
                }
            }
            g[m] = acc / int(m as i64);
        }
        Ok(TruncSeries { coeffs: g })
    }

    pub fn log(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::ConstantNotOne);
        }
        let n = self.order();
        if n == 0 {
            return Ok(Self::zero(0));
        }
        let q = self.derive().div(&self.with_order(n - 1))?;
        Ok(q.integrate())
    }

    /// Formal derivative; the order drops by one (order 0 stays at 0).
    pub fn derive(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Self::zero(0);
        }
        TruncSeries {
            coeffs: (1..=n).map(|k| &self.coeffs[k] * int(k as i64)).collect(),
        }
    }

    /// Antiderivative with zero constant term; the order rises by one.
    pub fn integrate(&self) -> Self {
        let mut coeffs = vec![Q::zero()];
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / int(k as i64 + 1)),
        );
        TruncSeries { coeffs }
    }

    /// Exponential coefficients `n! [x^n] self`.
    pub fn egf_coeffs(&self) -> Vec<Q> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * Q::from_integer(factorial(n)))
            .collect()
    }

    /// Terms in increasing degree with an order tail, e.g. `1 - x + 1/2 x^2 + O(x^3)`.
    pub fn render(&self, var: &str) -> String {
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            let mag = c.abs();
            let power = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            match (k, mag.is_one()) {
                (0, _) => out.push_str(&fmt_q(&mag)),
                (_, true) => out.push_str(&power),
                _ => out.push_str(&format!("{} {power}", fmt_q(&mag))),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        format!("{out} + O({var}^{})", self.order() + 1)
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{binomial, frac};
    use proptest::prelude::*;

    fn s(c: &[i64], n: usize) -> TruncSeries {
        TruncSeries::from_ints(c, n)
    }

    #[test]
    fn rendering() {
        assert_eq!(s(&[1, -1, 0, 3], 4).render("x"), "1 - x + 3 x^3 + O(x^5)");
        assert_eq!(s(&[0, -2, 1], 2).render("t"), "-2 t + t^2 + O(t^3)");
        assert_eq!(s(&[], 1).render("x"), "0 + O(x^2)");
    }

    #[test]
    fn products() {
        assert_eq!(s(&[1, 1], 2).mul(&s(&[1, -1], 2)).unwrap(), s(&[1, 0, -1], 2));
        let geo = s(&[1; 6], 5);
        assert_eq!(geo.mul(&s(&[1, -1], 5)).unwrap(), TruncSeries::one(5));
        assert_eq!(
            s(&[1], 2).mul(&s(&[1], 3)),
            Err(SeriesError::OrderMismatch(2, 3))
        );
    }

    #[test]
    fn composition() {
        let f = s(&[3, -1, 2, 5], 4);
        assert_eq!(f.compose(&TruncSeries::x(4)).unwrap(), f);
        let sq = s(&[0, 0, 1], 4);
        assert_eq!(sq.compose(&s(&[0, 1, 1], 4)).unwrap(), s(&[0, 0, 1, 2, 1], 4));
        assert_eq!(sq.compose(&s(&[1, 1], 4)), Err(SeriesError::NonzeroConstant));
    }

    #[test]
    fn central_binomials_from_rational_power() {
        let base = s(&[1, -4], 3);
        assert_eq!(base.binom_pow(&frac(-1, 2)).unwrap(), s(&[1, 2, 6, 20], 3));
        assert_eq!(s(&[1, 1], 3).binom_pow(&int(2)).unwrap(), s(&[1, 2, 1], 3));
        assert_eq!(s(&[2, 1], 3).binom_pow(&int(2)), Err(SeriesError::ConstantNotOne));
    }

    #[test]
    fn three_quarter_power_satisfies_its_differential_equation() {
        let g = s(&[1, -4], 8).binom_pow(&frac(-3, 4)).unwrap();
        assert_eq!(&g.coeffs()[..3], &[int(1), int(3), frac(21, 2)]);
        // (1 - 4x) g' = 3 g
        let lhs = s(&[1, -4], 7).mul(&g.derive()).unwrap();
        assert_eq!(lhs, g.with_order(7).scale(&int(3)));
    }

    #[test]
    fn exp_and_log() {
        assert_eq!(TruncSeries::zero(4).exp().unwrap(), TruncSeries::one(4));
        assert_eq!(TruncSeries::x(4).exp().unwrap(), TruncSeries::exp_x(4));
        let g = s(&[1, -4], 6).binom_pow(&frac(-3, 4)).unwrap();
        let l = g.log().unwrap();
        assert_eq!(&l.coeffs()[..4], &[int(0), int(3), int(6), int(16)]);
        // binom_pow agrees with exp(r log t)
        let via_exp = s(&[1, -4], 6).log().unwrap().scale(&frac(-3, 4)).exp().unwrap();
        assert_eq!(via_exp, g);
        assert_eq!(TruncSeries::x(3).exp().unwrap().log().unwrap(), TruncSeries::x(3));
        assert_eq!(s(&[1, 1], 2).exp(), Err(SeriesError::NonzeroConstant));
        assert_eq!(s(&[2, 1], 2).log(), Err(SeriesError::ConstantNotOne));
    }

    #[test]
    fn calculus() {
        assert_eq!(s(&[0, 0, 1], 2).derive(), s(&[0, 2], 1));
        let e = TruncSeries::exp_x(6);
        assert_eq!(e.derive(), e.with_order(5));
        let harmonic = s(&[1; 6], 5).integrate();
        assert_eq!(harmonic.order(), 6);
        for n in 1..=6 {
            assert_eq!(harmonic.coeff(n), frac(1, n as i64));
        }
        assert_eq!(harmonic.coeff(0), Q::zero());
    }

    #[test]
    fn central_binomials_to_high_order() {
        let c = s(&[1, -4], 12).binom_pow(&frac(-1, 2)).unwrap();
        for n in 0..=12 {
            assert_eq!(c.coeff(n), Q::from_integer(binomial(2 * n, n)));
        }
    }

    #[test]
    fn division_and_inverse() {
        let g = s(&[1, 3, 5], 5);
        assert_eq!(g.mul(&g.inverse().unwrap()).unwrap(), TruncSeries::one(5));
        assert_eq!(s(&[0, 1], 3).inverse(), Err(SeriesError::NotInvertible));
        let q = s(&[2, 1], 5).div(&g).unwrap();
        assert_eq!(q.mul(&g).unwrap(), s(&[2, 1], 5));
    }

    const N: usize = 8;

    fn arb_series() -> impl Strategy<Value = TruncSeries> {
        prop::collection::vec(-5i64..=5, N + 1).prop_map(|c| TruncSeries::from_ints(&c, N))
    }

    fn arb_nilpotent() -> impl Strategy<Value = TruncSeries> {
        prop::collection::vec(-3i64..=3, N).prop_map(|mut c| {
            c.insert(0, 0);
            TruncSeries::from_ints(&c, N)
        })
    }

    fn arb_unit() -> impl Strategy<Value = TruncSeries> {
        prop::collection::vec(-3i64..=3, N).prop_map(|mut c| {
            c.insert(0, 1);
            TruncSeries::from_ints(&c, N)
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(f in arb_series(), g in arb_series(), h in arb_series()) {
            prop_assert_eq!(f.mul(&g.mul(&h).unwrap()).unwrap(), f.mul(&g).unwrap().mul(&h).unwrap());
            prop_assert_eq!(
                f.mul(&g.add(&h).unwrap()).unwrap(),
                f.mul(&g).unwrap().add(&f.mul(&h).unwrap()).unwrap()
            );
            prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
        }

        #[test]
        fn composition_is_associative(f in arb_series(), s1 in arb_nilpotent(), t in arb_nilpotent()) {
            let lhs = f.compose(&s1).unwrap().compose(&t).unwrap();
            let rhs = f.compose(&s1.compose(&t).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn opposite_powers_cancel(t in arb_unit(), p in -4i64..=4, q in 1i64..=4) {
            let r = frac(p, q);
            let prod = t.binom_pow(&r).unwrap().mul(&t.binom_pow(&-r.clone()).unwrap()).unwrap();
            prop_assert_eq!(prod, TruncSeries::one(N));
        }

        #[test]
        fn exp_log_inverse(t in arb_unit()) {
            prop_assert_eq!(t.log().unwrap().exp().unwrap(), t);
        }

        #[test]
        fn derive_undoes_integrate(f in arb_series()) {
            prop_assert_eq!(f.integrate().derive(), f);
        }
    }
}
