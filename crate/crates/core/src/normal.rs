//! Elements of the Heisenberg-Weyl algebra in the normal-order basis.
//!
//! Every element is a finite rational combination of the words
//! `(a+)^i a^j`. The product of two basis words is
//!
//! ```text
//! (a+)^i1 a^j1 (a+)^i2 a^j2 = sum_k k! C(j1,k) C(i2,k) (a+)^(i1+i2-k) a^(j1+j2-k)
//! ```
//!
//! with `k` running over `0..=min(j1, i2)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::rational::{binomial, factorial, fmt_q, Q};

/// A generator of the algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    /// Annihilation operator `a`.
    A,
    /// Creation operator `a+`.
    ADag,
}

/// Finite combination of normal-ordered words; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalForm {
    terms: BTreeMap<(u32, u32), Q>,
}

/// Grading degree `i - j` of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Excess {
    Homogeneous(i64),
    /// The zero element; homogeneous of every degree, so no single excess applies.
    Zero,
    Inhomogeneous,
}

impl Excess {
    pub fn value(self) -> Option<i64> {
        match self {
            Excess::Homogeneous(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_homogeneous(self) -> bool {
        matches!(self, Excess::Homogeneous(_))
    }
}

impl fmt::Display for Excess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Excess::Homogeneous(e) => write!(f, "{e}"),
            Excess::Zero => f.write_str("not homogeneous (zero element)"),
            Excess::Inhomogeneous => f.write_str("not homogeneous"),
        }
    }
}

impl NormalForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::word(0, 0)
    }

    pub fn a() -> Self {
        Self::word(0, 1)
    }

    pub fn a_dag() -> Self {
        Self::word(1, 0)
    }

    /// The basis word `(a+)^i a^j`.
    pub fn word(i: u32, j: u32) -> Self {
        Self::term(i, j, Q::one())
    }

    pub fn term(i: u32, j: u32, coeff: Q) -> Self {
        let mut f = Self::zero();
        f.add_term(i, j, coeff);
        f
    }

    pub fn scalar(c: Q) -> Self {
        Self::term(0, 0, c)
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Q)>>(terms: I) -> Self {
        let mut f = Self::zero();
        for ((i, j), c) in terms {
            f.add_term(i, j, c);
        }
        f
    }

    pub fn add_term(&mut self, i: u32, j: u32, coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_insert_with(Q::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Q {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in key order `(i, j)` ascending.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &Q)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    /// Terms in display order: total degree descending, then `(i, j)` descending.
    pub fn terms_display_order(&self) -> Vec<(u32, u32, &Q)> {
        let mut v: Vec<_> = self.terms().collect();
        v.sort_by(|x, y| {
            (y.0 + y.1)
                .cmp(&(x.0 + x.1))
                .then_with(|| (y.0, y.1).cmp(&(x.0, x.1)))
        });
        v
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        NormalForm {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    /// Normal form of `self * other`.
    pub fn product(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                let c = c1 * c2;
                for k in 0..=j1.min(i2) {
                    let weight = factorial(k as usize)
                        * binomial(j1 as usize, k as usize)
                        * binomial(i2 as usize, k as usize);
                    out.add_term(i1 + i2 - k, j1 + j2 - k, &c * Q::from_integer(weight));
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc.product(self))
    }

    pub fn excess(&self) -> Excess {
        let mut degrees = self.terms.keys().map(|&(i, j)| i as i64 - j as i64);
        match degrees.next() {
            None => Excess::Zero,
            Some(e) if degrees.all(|d| d == e) => Excess::Homogeneous(e),
            Some(_) => Excess::Inhomogeneous,
        }
    }

    /// Largest number of creation operators in a term.
    pub fn max_creation(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    /// Largest number of annihilation operators in a term.
    pub fn max_annihilation(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    /// Largest `i - j` over the terms (0 for the zero element).
    pub fn max_raise(&self) -> i64 {
        self.terms
            .keys()
            .map(|&(i, j)| i as i64 - j as i64)
            .max()
            .unwrap_or(0)
    }

    /// Largest `j - i` over the terms (0 for the zero element).
    pub fn max_lower(&self) -> i64 {
        self.terms
            .keys()
            .map(|&(i, j)| j as i64 - i as i64)
            .max()
            .unwrap_or(0)
    }

    /// Textual rendering, e.g. `(a+)^3 a^2 + 4 (a+)^2 a^1 + 2 (a+)^1`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (n, (i, j, c)) in self.terms_display_order().into_iter().enumerate() {
            let negative = c.is_negative();
            match (n, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let mag = c.abs();
            let mut parts = Vec::new();
            if i > 0 {
                parts.push(format!("(a+)^{i}"));
            }
            if j > 0 {
                parts.push(format!("a^{j}"));
            }
            if parts.is_empty() {
                out.push_str(&fmt_q(&mag));
            } else {
                if !mag.is_one() {
                    out.push_str(&fmt_q(&mag));
                    out.push(' ');
                }
                out.push_str(&parts.join(" "));
            }
        }
        out
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Add for &NormalForm {
    type Output = NormalForm;

    fn add(self, rhs: &NormalForm) -> NormalForm {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Sub for &NormalForm {
    type Output = NormalForm;

    fn sub(self, rhs: &NormalForm) -> NormalForm {
        self + &(-rhs)
    }
}

impl Neg for &NormalForm {
    type Output = NormalForm;

    fn neg(self) -> NormalForm {
        NormalForm {
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
}

impl Mul for &NormalForm {
    type Output = NormalForm;

    fn mul(self, rhs: &NormalForm) -> NormalForm {
        self.product(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for NormalForm {
            type Output = NormalForm;

            fn $m(self, rhs: NormalForm) -> NormalForm {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Normal form of a word, obtained by rewriting `a a+ -> a+ a + 1` until no
/// `a` stands left of an `a+`.
pub fn normalize_word(word: &[Letter]) -> NormalForm {
    let mut out = NormalForm::zero();
    let mut pending: Vec<(Vec<Letter>, Q)> = vec![(word.to_vec(), Q::one())];
    while let Some((w, c)) = pending.pop() {
        match w
            .windows(2)
            .position(|p| p == [Letter::A, Letter::ADag])
        {
            Some(p) => {
                let mut swapped = w.clone();
                swapped.swap(p, p + 1);
                let mut contracted = w;
                contracted.drain(p..p + 2);
                pending.push((swapped, c.clone()));
                pending.push((contracted, c));
            }
            None => {
                let i = w.iter().filter(|&&l| l == Letter::ADag).count() as u32;
                out.add_term(i, w.len() as u32 - i, c);
            }
        }
    }
    out
}

/// The "double dot" reordering: letters moved into normal order as if they
/// commuted, without commutator terms.
pub fn double_dot(word: &[Letter]) -> NormalForm {
    let i = word.iter().filter(|&&l| l == Letter::ADag).count() as u32;
    NormalForm::word(i, word.len() as u32 - i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;
    use Letter::{ADag, A};

    fn nf(terms: &[((u32, u32), i64)]) -> NormalForm {
        NormalForm::from_terms(terms.iter().map(|&(k, c)| (k, int(c))))
    }

    /// Applies a word, rightmost letter first, to the polynomial `x^k`
    /// represented densely; `a` differentiates, `a+` multiplies by `x`.
    fn act_on_monomial(word: &[Letter], k: usize) -> Vec<Q> {
        let mut p = vec![Q::zero(); k + word.len() + 1];
        p[k] = Q::one();
        for l in word.iter().rev() {
            p = match l {
                A => {
                    let mut d = vec![Q::zero(); p.len()];
                    for n in 1..p.len() {
                        d[n - 1] = &p[n] * int(n as i64);
                    }
                    d
                }
                ADag => {
                    let mut s = vec![Q::zero(); p.len()];
                    s[1..].clone_from_slice(&p[..p.len() - 1]);
                    s
                }
            };
        }
        p
    }

    fn act_nf_on_monomial(f: &NormalForm, k: usize, len: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); len];
        for (i, j, c) in f.terms() {
            let (i, j) = (i as usize, j as usize);
            if k >= j {
                out[k - j + i] += c * Q::from_integer(crate::rational::falling(k, j));
            }
        }
        out
    }

    fn word_of(f: &NormalForm) -> Vec<Letter> {
        let (i, j, _) = f.terms().next().unwrap();
        let mut w = vec![ADag; i as usize];
        w.extend(std::iter::repeat_n(A, j as usize));
        w
    }

    #[test]
    fn commutation_relation() {
        let got = &NormalForm::a() * &NormalForm::a_dag();
        assert_eq!(got, nf(&[((1, 1), 1), ((0, 0), 1)]));
        let comm = &got - &(&NormalForm::a_dag() * &NormalForm::a());
        assert_eq!(comm, NormalForm::one());
    }

    #[test]
    fn product_contracts_annihilators_against_right_creations() {
        // Oracle: act with the word a a (a+) (a+) on x^k, k <= 6, letter by letter.
        let expected = nf(&[((2, 2), 1), ((1, 1), 4), ((0, 0), 2)]);
        let got = &NormalForm::word(0, 2) * &NormalForm::word(2, 0);
        assert_eq!(got, expected);
        let w = [A, A, ADag, ADag];
        for k in 0..=6 {
            let len = k + w.len() + 1;
            assert_eq!(act_on_monomial(&w, k), act_nf_on_monomial(&got, k, len));
        }
    }

    #[test]
    fn formula_matches_differential_oracle_on_all_small_word_pairs() {
        for i1 in 0..3 {
            for j1 in 0..4 {
                for i2 in 0..4 {
                    for j2 in 0..3 {
                        let f = NormalForm::word(i1, j1);
                        let g = NormalForm::word(i2, j2);
                        let fg = &f * &g;
                        let mut w = word_of(&f);
                        w.extend(word_of(&g));
                        for k in 0..=6 {
                            let len = k + w.len() + 1;
                            assert_eq!(
                                act_on_monomial(&w, k),
                                act_nf_on_monomial(&fg, k, len),
                                "({i1},{j1})*({i2},{j2}) on x^{k}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn identity_is_neutral() {
        let f = nf(&[((3, 1), 2), ((2, 0), 3), ((0, 4), -1)]);
        assert_eq!(&NormalForm::one() * &f, f);
        assert_eq!(&f * &NormalForm::one(), f);
    }

    #[test]
    fn rewriting_words() {
        assert_eq!(normalize_word(&[A, ADag]), nf(&[((1, 1), 1), ((0, 0), 1)]));
        assert_eq!(
            normalize_word(&[ADag, A, ADag]),
            nf(&[((2, 1), 1), ((1, 0), 1)])
        );
        assert_eq!(normalize_word(&[]), NormalForm::one());
    }

    #[test]
    fn rewriting_agrees_with_iterated_products() {
        for len in 0..=6 {
            for mask in 0..(1u32 << len) {
                let w: Vec<Letter> = (0..len)
                    .map(|b| if mask >> b & 1 == 1 { ADag } else { A })
                    .collect();
                let prod = w.iter().fold(NormalForm::one(), |acc, l| match l {
                    A => &acc * &NormalForm::a(),
                    ADag => &acc * &NormalForm::a_dag(),
                });
                assert_eq!(normalize_word(&w), prod, "{w:?}");
            }
        }
    }

    #[test]
    fn excess_values() {
        assert_eq!(NormalForm::word(1, 1).excess(), Excess::Homogeneous(0));
        let omega = nf(&[((3, 1), 2), ((2, 0), 3)]);
        assert_eq!(omega.excess(), Excess::Homogeneous(2));
        assert_eq!(
            nf(&[((1, 1), 1), ((2, 1), 1)]).excess(),
            Excess::Inhomogeneous
        );
        assert_eq!(NormalForm::zero().excess(), Excess::Zero);
        assert!(!Excess::Zero.is_homogeneous());
    }

    #[test]
    fn example_operator_normal_form() {
        // (a+)^2 a a+ + a+ a (a+)^2
        let w1 = normalize_word(&[ADag, ADag, A, ADag]);
        let w2 = normalize_word(&[ADag, A, ADag, ADag]);
        assert_eq!(&w1 + &w2, nf(&[((3, 1), 2), ((2, 0), 3)]));
    }

    #[test]
    fn double_dot_ignores_commutators() {
        assert_eq!(double_dot(&[A, ADag, A]), NormalForm::word(1, 2));
    }

    #[test]
    fn rendering() {
        assert_eq!(normalize_word(&[A, ADag]).render(), "(a+)^1 a^1 + 1");
        let f = nf(&[((3, 2), 1), ((2, 1), 4), ((1, 0), 2)]);
        assert_eq!(f.render(), "(a+)^3 a^2 + 4 (a+)^2 a^1 + 2 (a+)^1");
        assert_eq!(NormalForm::zero().render(), "0");
        let g = NormalForm::from_terms([((0, 2), int(-1)), ((1, 0), crate::rational::frac(3, 2))]);
        assert_eq!(g.render(), "-a^2 + 3/2 (a+)^1");
    }

    fn arb_nf(max: u32) -> impl Strategy<Value = NormalForm> {
        prop::collection::vec(((0..=max, 0..=max), -3i64..=3), 0..4)
            .prop_map(|ts| NormalForm::from_terms(ts.into_iter().map(|(k, c)| (k, int(c)))))
    }

    fn arb_homogeneous() -> impl Strategy<Value = NormalForm> {
        (-2i64..=2, prop::collection::vec((0u32..=3, 1i64..=3), 1..3)).prop_map(|(e, ts)| {
            NormalForm::from_terms(ts.into_iter().map(|(j, c)| {
                let i = (j as i64 + e).max(0) as u32;
                let j = (i as i64 - e) as u32;
                ((i, j), int(c))
            }))
        })
    }

    proptest! {
        #[test]
        fn associativity(f in arb_nf(5), g in arb_nf(5), h in arb_nf(5)) {
            prop_assert_eq!(&f * &(&g * &h), &(&f * &g) * &h);
        }

        #[test]
        fn grading_is_additive(f in arb_homogeneous(), g in arb_homogeneous()) {
            let fg = &f * &g;
            let expected = f.excess().value().unwrap() + g.excess().value().unwrap();
            prop_assert!(fg.is_zero() || fg.excess() == Excess::Homogeneous(expected));
        }

        #[test]
        fn distributivity(f in arb_nf(3), g in arb_nf(3), h in arb_nf(3)) {
            prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        }
    }
}
