//! Truncated power series in several named variables.
//!
//! Truncation is per variable: a series with orders `(M, N)` in `(λ, x)`
//! keeps `λ^m x^n` for `m <= M`, `n <= N`. This is the quotient ring by
//! `(λ^(M+1), x^(N+1))`, so products and substitutions of series with zero
//! constant term are exact inside the box. The bivariate case stands in
//! for double generating functions and one-parameter families; three
//! variables carry two independent group parameters.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{fmt_q, Q};
use crate::report::Report;
use crate::series::TruncSeries;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MultiSeriesError {
    #[error("variable sets differ: {0:?} vs {1:?}")]
    VarMismatch(Vec<String>, Vec<String>),
    #[error("truncation orders differ: {0:?} vs {1:?}")]
    OrderMismatch(Vec<usize>, Vec<usize>),
    #[error("unknown variable {0}")]
    UnknownVar(String),
    #[error("substituted series must have zero constant term")]
    NonzeroConstant,
    #[error("orders must list one entry per variable")]
    Shape,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSeries {
    vars: Vec<String>,
    orders: Vec<usize>,
    /// Row-major, the last variable varies fastest.
    coeffs: Vec<Q>,
}

impl MultiSeries {
    pub fn zero<S: AsRef<str>>(vars: &[S], orders: &[usize]) -> Self {
        assert_eq!(vars.len(), orders.len(), "one order per variable");
        let size = orders.iter().map(|o| o + 1).product();
        MultiSeries {
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
            orders: orders.to_vec(),
            coeffs: vec![Q::zero(); size],
        }
    }

    /// Builds from a row-major coefficient list of the exact box size.
    pub fn from_flat<S: AsRef<str>>(
        vars: &[S],
        orders: &[usize],
        coeffs: Vec<Q>,
    ) -> Result<Self, MultiSeriesError> {
        if vars.len() != orders.len() {
            return Err(MultiSeriesError::Shape);
        }
        let mut s = Self::zero(vars, orders);
        if coeffs.len() != s.coeffs.len() {
            return Err(MultiSeriesError::Shape);
        }
        s.coeffs = coeffs;
        Ok(s)
    }

    pub fn one_like(&self) -> Self {
        self.constant_like(Q::one())
    }

    pub fn zero_like(&self) -> Self {
        Self::zero(&self.vars, &self.orders)
    }

    pub fn constant_like(&self, c: Q) -> Self {
        let mut s = self.zero_like();
        s.coeffs[0] = c;
        s
    }

    /// `c` times the monomial with the given exponents (zero if outside the box).
    pub fn monomial<S: AsRef<str>>(vars: &[S], orders: &[usize], exps: &[usize], c: Q) -> Self {
        let mut s = Self::zero(vars, orders);
        s.set(exps, c);
        s
    }

    /// The named variable as a series.
    pub fn var<S: AsRef<str>>(vars: &[S], orders: &[usize], name: &str) -> Result<Self, MultiSeriesError> {
        let s = Self::zero(vars, orders);
        let idx = s.index_of(name)?;
        let mut exps = vec![0; vars.len()];
        exps[idx] = 1;
        let mut s = s;
        s.set(&exps, Q::one());
        Ok(s)
    }

    /// Embeds a univariate series as a series in `var` within the given space.
    pub fn from_univariate<S: AsRef<str>>(
        f: &TruncSeries,
        var: &str,
        vars: &[S],
        orders: &[usize],
    ) -> Result<Self, MultiSeriesError> {
        let mut s = Self::zero(vars, orders);
        let idx = s.index_of(var)?;
        let mut exps = vec![0; vars.len()];
        for (k, c) in f.coeffs().iter().enumerate() {
            exps[idx] = k;
            s.set(&exps, c.clone());
        }
        Ok(s)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn flat_coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn index_of(&self, name: &str) -> Result<usize, MultiSeriesError> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| MultiSeriesError::UnknownVar(name.to_string()))
    }

    fn offset(&self, exps: &[usize]) -> Option<usize> {
        let mut off = 0;
        for (e, o) in exps.iter().zip(&self.orders) {
            if e > o {
                return None;
            }
            off = off * (o + 1) + e;
        }
        Some(off)
    }

    fn exps_of(&self, mut off: usize) -> Vec<usize> {
        let mut exps = vec![0; self.orders.len()];
        for (slot, o) in exps.iter_mut().zip(&self.orders).rev() {
            *slot = off % (o + 1);
            off /= o + 1;
        }
        exps
    }

    /// Coefficient of the monomial with the given exponents; zero outside the box.
    pub fn get(&self, exps: &[usize]) -> Q {
        self.offset(exps)
            .map(|o| self.coeffs[o].clone())
            .unwrap_or_else(Q::zero)
    }

    /// Sets a coefficient; writes outside the box are dropped.
    pub fn set(&mut self, exps: &[usize], c: Q) {
        if let Some(o) = self.offset(exps) {
            self.coeffs[o] = c;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn constant_term(&self) -> &Q {
        &self.coeffs[0]
    }

    /// Nonzero terms with their exponent vectors.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &Q)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(o, c)| (self.exps_of(o), c))
    }

    fn check(&self, other: &Self) -> Result<(), MultiSeriesError> {
        if self.vars != other.vars {
            return Err(MultiSeriesError::VarMismatch(self.vars.clone(), other.vars.clone()));
        }
        if self.orders != other.orders {
            return Err(MultiSeriesError::OrderMismatch(
                self.orders.clone(),
                other.orders.clone(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MultiSeriesError> {
        self.check(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MultiSeriesError> {
        self.check(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = self.clone();
        for a in out.coeffs.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MultiSeriesError> {
        self.check(other)?;
        let lhs: Vec<(Vec<usize>, &Q)> = self.terms().collect();
        let rhs: Vec<(Vec<usize>, &Q)> = other.terms().collect();
        let mut out = self.zero_like();
        let mut exps = vec![0; self.orders.len()];
        for (ea, a) in &lhs {
            'pair: for (eb, b) in &rhs {
                for (k, slot) in exps.iter_mut().enumerate() {
                    *slot = ea[k] + eb[k];
                    if *slot > self.orders[k] {
                        continue 'pair;
                    }
                }
                let o = out.offset(&exps).expect("inside box");
                out.coeffs[o] += *a * *b;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(self.one_like(), |acc, _| acc.mul(self).expect("same space"))
    }

    /// Part of the series of degree exactly `degree` in `var`, with that
    /// variable's exponent reset to zero.
    pub fn slice(&self, var: &str, degree: usize) -> Result<Self, MultiSeriesError> {
        let idx = self.index_of(var)?;
        let mut out = self.zero_like();
        for (mut e, c) in self.terms() {
            if e[idx] == degree {
                e[idx] = 0;
                out.set(&e, c.clone());
            }
        }
        Ok(out)
    }

    /// Replaces `var` by `replacement`, which lives in the same space and has
    /// zero constant term.
    pub fn substitute(&self, var: &str, replacement: &Self) -> Result<Self, MultiSeriesError> {
        self.check(replacement)?;
        if !replacement.constant_term().is_zero() {
            return Err(MultiSeriesError::NonzeroConstant);
        }
        let idx = self.index_of(var)?;
        let mut acc = self.zero_like();
        for m in (0..=self.orders[idx]).rev() {
            acc = acc.mul(replacement)?.add(&self.slice(var, m)?)?;
        }
        Ok(acc)
    }

    /// Re-expresses the series in a larger (or reordered) variable space.
    /// Every variable of `self` must be present; coefficients outside the
    /// new box are dropped.
    pub fn embed<S: AsRef<str>>(&self, vars: &[S], orders: &[usize]) -> Result<Self, MultiSeriesError> {
        let mut out = Self::zero(vars, orders);
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| out.index_of(v))
            .collect::<Result<_, _>>()?;
        let mut target = vec![0; vars.len()];
        for (e, c) in self.terms() {
            target.iter_mut().for_each(|t| *t = 0);
            for (k, &dst) in map.iter().enumerate() {
                target[dst] = e[k];
            }
            out.set(&target, c.clone());
        }
        Ok(out)
    }

    /// Same variables with smaller (or larger, zero-padded) orders.
    pub fn with_orders(&self, orders: &[usize]) -> Self {
        self.embed(&self.vars, orders).expect("same variables")
    }

    /// Converts a one-variable series to [`TruncSeries`].
    pub fn to_univariate(&self) -> Result<TruncSeries, MultiSeriesError> {
        if self.vars.len() != 1 {
            return Err(MultiSeriesError::Shape);
        }
        Ok(TruncSeries::from_coeffs(self.coeffs.clone(), self.orders[0]))
    }

    /// Coefficient of `var^degree` as a series in the remaining variables.
    pub fn coeff_series(&self, var: &str, degree: usize) -> Result<Self, MultiSeriesError> {
        let idx = self.index_of(var)?;
        let rest_vars: Vec<&String> = self.vars.iter().enumerate().filter(|(k, _)| *k != idx).map(|(_, v)| v).collect();
        let rest_orders: Vec<usize> = self.orders.iter().enumerate().filter(|(k, _)| *k != idx).map(|(_, o)| *o).collect();
        let mut out = Self::zero(&rest_vars, &rest_orders);
        for (mut e, c) in self.terms() {
            if e[idx] == degree {
                e.remove(idx);
                out.set(&e, c.clone());
            }
        }
        Ok(out)
    }

    /// Compares every coefficient of the box; mismatch locations are exponent vectors.
    pub fn compare(&self, expected: &Self) -> Result<Report, MultiSeriesError> {
        self.check(expected)?;
        let mut r = Report::default();
        for (o, (a, e)) in self.coeffs.iter().zip(&expected.coeffs).enumerate() {
            r.compare(self.exps_of(o), e, a);
        }
        Ok(r)
    }
}

impl TruncSeries {
    /// `self ∘ s` for a multivariate `s` with zero constant term.
    pub fn substitute_into(&self, s: &MultiSeries) -> Result<MultiSeries, MultiSeriesError> {
        if !s.constant_term().is_zero() {
            return Err(MultiSeriesError::NonzeroConstant);
        }
        let mut acc = s.zero_like();
        for c in self.coeffs().iter().rev() {
            acc = acc.mul(s)?;
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }
}

impl fmt::Display for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (e, c) in self.terms() {
            let mono: Vec<String> = e
                .iter()
                .zip(&self.vars)
                .filter(|(k, _)| **k > 0)
                .map(|(k, v)| if *k == 1 { v.clone() } else { format!("{v}^{k}") })
                .collect();
            parts.push(if mono.is_empty() {
                fmt_q(c)
            } else {
                format!("{} {}", fmt_q(c), mono.join(" "))
            });
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    const V: [&str; 2] = ["l", "x"];

    #[test]
    fn indexing_round_trips() {
        let mut s = MultiSeries::zero(&V, &[2, 3]);
        s.set(&[2, 1], int(5));
        s.set(&[3, 0], int(9));
        assert_eq!(s.get(&[2, 1]), int(5));
        assert!(s.get(&[3, 0]).is_zero());
        assert_eq!(s.terms().collect::<Vec<_>>(), vec![(vec![2, 1], &int(5))]);
    }

    #[test]
    fn box_truncated_product() {
        let l = MultiSeries::var(&V, &[1, 2], "l").unwrap();
        let x = MultiSeries::var(&V, &[1, 2], "x").unwrap();
        let one = l.one_like();
        let a = one.add(&l).unwrap().add(&x).unwrap();
        let sq = a.mul(&a).unwrap();
        // (1 + l + x)^2 without l^2
        assert_eq!(sq.get(&[0, 0]), int(1));
        assert_eq!(sq.get(&[1, 1]), int(2));
        assert_eq!(sq.get(&[0, 2]), int(1));
        assert!(sq.get(&[2, 0]).is_zero());
    }

    #[test]
    fn substitution_and_embedding() {
        // geometric series in l, then l -> l + t
        let vars = ["l", "t"];
        let g = TruncSeries::from_ints(&[1; 7], 6);
        let sum = MultiSeries::var(&vars, &[3, 3], "l")
            .unwrap()
            .add(&MultiSeries::var(&vars, &[3, 3], "t").unwrap())
            .unwrap();
        let direct = g.substitute_into(&sum).unwrap();
        // [l^2 t^3] (l + t)^5 = C(5, 2)
        assert_eq!(direct.get(&[2, 3]), int(10));
        let via_sub = MultiSeries::from_univariate(&g, "l", &vars, &[3, 3])
            .unwrap()
            .substitute("l", &sum)
            .unwrap();
        assert_eq!(via_sub.get(&[1, 1]), int(2));
        // a lift truncated at l^3 cannot see (l + t)^5
        assert!(via_sub.get(&[2, 3]).is_zero());
        let embedded = via_sub.embed(&["t", "z", "l"], &[3, 1, 3]).unwrap();
        assert_eq!(embedded.get(&[1, 0, 1]), int(2));
        assert_eq!(embedded.coeff_series("z", 0).unwrap().vars(), &["t", "l"]);
    }

    #[test]
    fn errors() {
        let a = MultiSeries::zero(&V, &[1, 1]);
        let b = MultiSeries::zero(&["l", "y"], &[1, 1]);
        assert!(matches!(a.add(&b), Err(MultiSeriesError::VarMismatch(..))));
        let c = MultiSeries::zero(&V, &[1, 2]);
        assert!(matches!(a.mul(&c), Err(MultiSeriesError::OrderMismatch(..))));
        assert_eq!(
            a.substitute("x", &a.one_like()),
            Err(MultiSeriesError::NonzeroConstant)
        );
        assert!(matches!(a.slice("q", 0), Err(MultiSeriesError::UnknownVar(_))));
    }
}
