//! Substitutions with prefunctions and their one-parameter groups.
//!
//! A [`PrefSub`] is the operator `f ↦ g(λ,x) f(s(λ,x))` with a formal
//! parameter `λ`, where `g = 1` and `s = x` at `λ = 0`. For one-annihilator
//! operators `q(x) d/dx + v(x)` such a family is the exponential
//! `exp(λ (q d/dx + v))`; [`integrate_monomial`] gives it in closed form for
//! `q = α x^m`, `v = β x^(m-1)`.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::endomatrix::{exp_lambda, EndoError};
use crate::multiseries::{MultiSeries, MultiSeriesError};
use crate::normal::{Excess, NormalForm};
use crate::rational::{binomial, int, Q};
use crate::report::Report;
use crate::series::{SeriesError, TruncSeries};
use crate::stirling::{egf_extract, stirling_table, StirlingError};

const LAMBDA: &str = "lambda";
const THETA: &str = "theta";
const X: &str = "x";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OneParamError {
    #[error("series must live in the variables (lambda, x)")]
    Variables,
    #[error("g and s have different truncation orders")]
    OrderMismatch,
    #[error("prefunction is not 1 at lambda = 0")]
    PrefunctionStart,
    #[error("substitution is not x at lambda = 0")]
    SubstitutionStart,
    #[error("substitution has a nonzero x^0 coefficient at lambda^{0}")]
    SubstitutionValuation(usize),
    #[error("series of order {found} given, order {expected} required")]
    SeriesOrder { expected: usize, found: usize },
    #[error("lambda order {have} is too small, {need} required")]
    LambdaOrder { have: usize, need: usize },
    #[error("exponent m = {0} is unsupported, m >= 2 required")]
    ExponentTooSmall(u32),
    #[error("leading coefficient alpha is zero")]
    ZeroAlpha,
    #[error("operator out of scope: {0}")]
    OutOfScope(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    MultiSeries(#[from] MultiSeriesError),
    #[error(transparent)]
    Stirling(#[from] StirlingError),
    #[error(transparent)]
    Endo(#[from] EndoError),
}

/// `f ↦ g·(f∘s)` with `g, s` series in `(lambda, x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefSub {
    g: MultiSeries,
    s: MultiSeries,
}

impl PrefSub {
    pub fn new(g: MultiSeries, s: MultiSeries) -> Result<Self, OneParamError> {
        if g.vars() != [LAMBDA, X] || s.vars() != [LAMBDA, X] {
            return Err(OneParamError::Variables);
        }
        if g.orders() != s.orders() {
            return Err(OneParamError::OrderMismatch);
        }
        let x_order = g.orders()[1];
        let g0 = g.coeff_series(LAMBDA, 0)?.to_univariate()?;
        if g0 != TruncSeries::one(x_order) {
            return Err(OneParamError::PrefunctionStart);
        }
        let s0 = s.coeff_series(LAMBDA, 0)?.to_univariate()?;
        if x_order == 0 || s0 != TruncSeries::x(x_order) {
            return Err(OneParamError::SubstitutionStart);
        }
        if let Some(m) = (0..=g.orders()[0]).find(|&m| !s.get(&[m, 0]).is_zero()) {
            return Err(OneParamError::SubstitutionValuation(m));
        }
        Ok(PrefSub { g, s })
    }

    pub fn identity(lambda_order: usize, x_order: usize) -> Self {
        let orders = [lambda_order, x_order];
        PrefSub {
            g: MultiSeries::zero(&[LAMBDA, X], &orders).one_like(),
            s: MultiSeries::var(&[LAMBDA, X], &orders, X).expect("x is a variable"),
        }
    }

    pub fn g(&self) -> &MultiSeries {
        &self.g
    }

    pub fn s(&self) -> &MultiSeries {
        &self.s
    }

    pub fn lambda_order(&self) -> usize {
        self.g.orders()[0]
    }

    pub fn x_order(&self) -> usize {
        self.g.orders()[1]
    }

    /// Same substitution truncated to a smaller `λ`-order.
    pub fn truncate_lambda(&self, lambda_order: usize) -> Self {
        let orders = [lambda_order, self.x_order()];
        PrefSub {
            g: self.g.with_orders(&orders),
            s: self.s.with_orders(&orders),
        }
    }
}

/// A composite `U_λ ∘ V_θ`, with `g, s` series in `(lambda, theta, x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoParamSub {
    g: MultiSeries,
    s: MultiSeries,
}

impl TwoParamSub {
    pub fn g(&self) -> &MultiSeries {
        &self.g
    }

    pub fn s(&self) -> &MultiSeries {
        &self.s
    }
}

/// `U[f] = g·(f∘s)` as a series in `(lambda, x)`.
pub fn apply_prefsub(u: &PrefSub, f: &TruncSeries) -> Result<MultiSeries, OneParamError> {
    if f.order() != u.x_order() {
        return Err(OneParamError::SeriesOrder {
            expected: u.x_order(),
            found: f.order(),
        });
    }
    Ok(u.g.mul(&f.substitute_into(&u.s)?)?)
}

/// `h(θ, s(λ, x))` for `h` in `(lambda, x)` read with `θ` for its parameter.
fn substitute_x(h: &MultiSeries, s: &MultiSeries) -> MultiSeries {
    let [l, xo] = [s.orders()[0], s.orders()[1]];
    let th = h.orders()[0];
    let mut out = MultiSeries::zero(&[LAMBDA, THETA, X], &[l, th, xo]);
    let mut power = s.one_like();
    for k in 0..=xo {
        if k > 0 {
            power = power.mul(s).expect("same space");
        }
        for b in 0..=th {
            let c = h.get(&[b, k]);
            if c.is_zero() {
                continue;
            }
            for (e, p) in power.terms() {
                let at = [e[0], b, e[1]];
                out.set(&at, out.get(&at) + &c * p);
            }
        }
    }
    out
}

/// `U_λ ∘ V_θ`: prefunction `g_U · (g_V ∘ s_U)` and substitution `s_V ∘ s_U`.
pub fn compose_prefsub(u: &PrefSub, v: &PrefSub) -> Result<TwoParamSub, OneParamError> {
    if u.g.orders() != v.g.orders() {
        return Err(OneParamError::OrderMismatch);
    }
    let g_v = substitute_x(&v.g, &u.s);
    let s = substitute_x(&v.s, &u.s);
    let g_u = u.g.embed(&[LAMBDA, THETA, X], g_v.orders())?;
    Ok(TwoParamSub {
        g: g_u.mul(&g_v)?,
        s,
    })
}

/// `h(λ + θ, x)` in the box of `λ`- and `θ`-order `order`. Exact when the
/// `λ`-order of `h` is at least `2 * order`.
fn at_sum(h: &MultiSeries, order: usize) -> MultiSeries {
    let xo = h.orders()[1];
    let mut out = MultiSeries::zero(&[LAMBDA, THETA, X], &[order, order, xo]);
    for (e, c) in h.terms() {
        let (m, n) = (e[0], e[1]);
        for a in m.saturating_sub(order)..=m.min(order) {
            let w = Q::from_integer(binomial(m, a)) * c;
            out.set(&[a, m - a, n], w);
        }
    }
    out
}

/// Checks `U_λ ∘ U_θ = U_{λ+θ}` through `λ`- and `θ`-order `order`, using a
/// family computed to `λ`-order at least `2 * order`. Locations are
/// `(component, λ, θ, x)` with component 0 for `g` and 1 for `s`.
pub fn group_law_check(big: &PrefSub, order: usize) -> Result<Report, OneParamError> {
    if big.lambda_order() < 2 * order {
        return Err(OneParamError::LambdaOrder {
            have: big.lambda_order(),
            need: 2 * order,
        });
    }
    let u = big.truncate_lambda(order);
    let composed = compose_prefsub(&u, &u)?;
    let mut report = Report::default();
    for (comp, (lhs, full)) in [(&composed.g, &big.g), (&composed.s, &big.s)].into_iter().enumerate() {
        let mut part = lhs.compare(&at_sum(full, order))?;
        for m in &mut part.mismatches {
            m.at.insert(0, comp);
        }
        report.merge(part);
    }
    Ok(report)
}

/// Closed-form group of `α x^m d/dx + β x^(m-1)`: with
/// `w = 1 - α(m-1) λ x^(m-1)`, `s = x w^(-1/(m-1))` and `g = w^(-β/(α(m-1)))`.
pub fn integrate_monomial(
    alpha: &Q,
    m: u32,
    beta: &Q,
    lambda_order: usize,
    x_order: usize,
) -> Result<PrefSub, OneParamError> {
    if m < 2 {
        return Err(OneParamError::ExponentTooSmall(m));
    }
    if alpha.is_zero() {
        return Err(OneParamError::ZeroAlpha);
    }
    let e = (m - 1) as usize;
    let c = alpha * int(e as i64);
    let w = TruncSeries::from_coeffs(vec![Q::one(), -&c], lambda_order);
    let ws = w.binom_pow(&-Q::new(1.into(), e.into()))?;
    let wg = w.binom_pow(&-(beta / &c))?;
    PrefSub::new(lift_in_t(&wg, e, 0, x_order), lift_in_t(&ws, e, 1, x_order))
}

/// `x^shift · h(λ x^e)` as a `(lambda, x)` series.
fn lift_in_t(h: &TruncSeries, e: usize, shift: usize, x_order: usize) -> MultiSeries {
    let mut out = MultiSeries::zero(&[LAMBDA, X], &[h.order(), x_order]);
    for (p, c) in h.coeffs().iter().enumerate() {
        out.set(&[p, p * e + shift], c.clone());
    }
    out
}

/// Checks that the `λ`-coefficient of `U[x^j]` is `q (x^j)' + v x^j` for all
/// `j <= x_order`. Locations are `(j, n)` for the coefficient of `x^n`.
pub fn tangent_check(u: &PrefSub, q: &TruncSeries, v: &TruncSeries) -> Result<Report, OneParamError> {
    let xo = u.x_order();
    for f in [q, v] {
        if f.order() < xo {
            return Err(OneParamError::SeriesOrder {
                expected: xo,
                found: f.order(),
            });
        }
    }
    if u.lambda_order() == 0 {
        return Err(OneParamError::LambdaOrder { have: 0, need: 1 });
    }
    let mut report = Report::default();
    for j in 0..=xo {
        let image = apply_prefsub(u, &TruncSeries::monomial(j, Q::one(), xo))?;
        let tangent = image.coeff_series(LAMBDA, 1)?.to_univariate()?;
        for n in 0..=xo {
            let mut want = if n >= j { v.coeff(n - j) } else { Q::zero() };
            if j > 0 && n + 1 >= j {
                want += q.coeff(n + 1 - j) * int(j as i64);
            }
            report.compare(vec![j, n], &want, &tangent.coeff(n));
        }
    }
    Ok(report)
}

/// The substitution `f ↦ g(λx^e) f(x(1 + φ(λx^e)))` built from the
/// exponential generating functions of the Stirling table of `Ω`.
pub fn sheffer_prefsub(omega: &NormalForm, lambda_order: usize, x_order: usize) -> Result<PrefSub, OneParamError> {
    let e = match omega.excess() {
        Excess::Homogeneous(e) if e >= 0 => e as usize,
        other => return Err(OneParamError::OutOfScope(format!("excess is {other}"))),
    };
    if omega.max_annihilation() > 1 {
        return Err(OneParamError::OutOfScope("a term has more than one annihilator".into()));
    }
    let table = stirling_table(omega, lambda_order)?;
    let (g, phi) = egf_extract(&table, lambda_order)?;
    let mut s = lift_in_t(&phi, e, 1, x_order);
    s.set(&[0, 1], s.get(&[0, 1]) + Q::one());
    PrefSub::new(lift_in_t(&g, e, 0, x_order), s)
}

/// Compares [`sheffer_prefsub`] with the matrix exponential of `ρ_BF(Ω)` on
/// every monomial `x^k`, `k <= x_order`. Locations are `(k, λ, x)`.
pub fn prop2_bridge(omega: &NormalForm, lambda_order: usize, x_order: usize) -> Result<Report, OneParamError> {
    let u = sheffer_prefsub(omega, lambda_order, x_order)?;
    let exp = exp_lambda(omega, x_order, lambda_order)?;
    let mut report = Report::default();
    for k in 0..=x_order {
        let f = TruncSeries::monomial(k, Q::one(), x_order);
        let mut part = apply_prefsub(&u, &f)?.compare(&exp.apply_series(&f)?)?;
        for m in &mut part.mismatches {
            m.at.insert(0, k);
        }
        report.merge(part);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_normal_form;
    use crate::rational::frac;

    fn central_binomial(l: usize, x: usize) -> PrefSub {
        integrate_monomial(&int(2), 3, &int(3), l, x).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let id = PrefSub::identity(3, 5);
        let f = TruncSeries::from_ints(&[2, 0, -1, 4], 5);
        let out = apply_prefsub(&id, &f).unwrap();
        assert_eq!(out, MultiSeries::from_univariate(&f, X, &[LAMBDA, X], &[3, 5]).unwrap());
        let u = central_binomial(3, 5);
        let c = compose_prefsub(&u, &id).unwrap();
        assert_eq!(c.g(), &u.g().embed(&[LAMBDA, THETA, X], &[3, 3, 5]).unwrap());
        assert_eq!(c.s(), &u.s().embed(&[LAMBDA, THETA, X], &[3, 3, 5]).unwrap());
    }

    #[test]
    fn validation() {
        let id = PrefSub::identity(2, 3);
        let bad_g = id.g().scale(&int(2));
        assert_eq!(PrefSub::new(bad_g, id.s().clone()), Err(OneParamError::PrefunctionStart));
        let mut bad_s = id.s().clone();
        bad_s.set(&[1, 0], int(1));
        assert_eq!(
            PrefSub::new(id.g().clone(), bad_s),
            Err(OneParamError::SubstitutionValuation(1))
        );
        assert!(matches!(
            integrate_monomial(&int(1), 1, &int(0), 3, 3),
            Err(OneParamError::ExponentTooSmall(1))
        ));
        assert_eq!(
            integrate_monomial(&int(0), 2, &int(0), 3, 3),
            Err(OneParamError::ZeroAlpha)
        );
    }

    #[test]
    fn central_binomial_closed_form() {
        let u = central_binomial(4, 9);
        let one = apply_prefsub(&u, &TruncSeries::one(9)).unwrap();
        // (1 - 4t)^(-3/4) = 1 + 3t + 21/2 t^2 + 77/2 t^3 + ...
        assert_eq!(one.get(&[1, 2]), int(3));
        assert_eq!(one.get(&[2, 4]), frac(21, 2));
        assert_eq!(one.get(&[3, 6]), frac(77, 2));
        assert_eq!(one.get(&[1, 3]), int(0));
        // s = x (1 - 4t)^(-1/2) = x + 2 λ x^3 + 6 λ^2 x^5 + ...
        assert_eq!(u.s().get(&[1, 3]), int(2));
        assert_eq!(u.s().get(&[2, 5]), int(6));
    }

    #[test]
    fn tangent_of_x_squared() {
        let u = central_binomial(2, 8);
        let out = apply_prefsub(&u, &TruncSeries::monomial(2, Q::one(), 8)).unwrap();
        let lin = out.coeff_series(LAMBDA, 1).unwrap().to_univariate().unwrap();
        assert_eq!(lin, TruncSeries::monomial(4, int(7), 8));
    }

    #[test]
    fn tangent_checks() {
        let u = central_binomial(3, 10);
        let q = TruncSeries::monomial(3, int(2), 10);
        let v = TruncSeries::monomial(2, int(3), 10);
        assert!(tangent_check(&u, &q, &v).unwrap().passed());
        let z = TruncSeries::zero(6);
        assert!(tangent_check(&PrefSub::identity(2, 6), &z, &z).unwrap().passed());
        let mut g = u.g().clone();
        g.set(&[1, 2], int(4));
        let bent = PrefSub::new(g, u.s().clone()).unwrap();
        let r = tangent_check(&bent, &q, &v).unwrap();
        assert!(!r.passed());
        assert_eq!(r.mismatches[0].at, vec![0, 2]);
    }

    #[test]
    fn geometric_substitution() {
        let u = integrate_monomial(&int(1), 2, &int(0), 6, 8).unwrap();
        for p in 0..=6 {
            assert_eq!(u.s().get(&[p, p + 1]), int(1));
        }
        assert_eq!(u.g(), &u.g().one_like());
        assert!(group_law_check(&u, 3).unwrap().passed());
        let q = TruncSeries::monomial(2, int(1), 8);
        assert!(tangent_check(&u, &q, &TruncSeries::zero(8)).unwrap().passed());
        let w = integrate_monomial(&int(1), 2, &int(1), 6, 8).unwrap();
        for p in 0..=6 {
            assert_eq!(w.g().get(&[p, p]), int(1));
        }
        assert!(group_law_check(&w, 3).unwrap().passed());
    }

    #[test]
    fn group_law_central_binomial() {
        let big = central_binomial(8, 10);
        let r = group_law_check(&big, 4).unwrap();
        assert!(r.passed(), "{r}");
        assert!(matches!(
            group_law_check(&big, 5),
            Err(OneParamError::LambdaOrder { have: 8, need: 10 })
        ));
    }

    #[test]
    fn group_law_detects_perturbation() {
        let big = central_binomial(6, 8);
        let mut g = big.g().clone();
        g.set(&[2, 4], int(0));
        let bent = PrefSub::new(g, big.s().clone()).unwrap();
        assert!(!group_law_check(&bent, 3).unwrap().passed());
    }

    #[test]
    fn at_sum_matches_substitution() {
        let h = central_binomial(6, 6).g().clone();
        let vars = [LAMBDA, THETA, X];
        let wide = h.embed(&vars, &[6, 6, 6]).unwrap();
        let sum = MultiSeries::var(&vars, &[6, 6, 6], LAMBDA)
            .unwrap()
            .add(&MultiSeries::var(&vars, &[6, 6, 6], THETA).unwrap())
            .unwrap();
        let direct = wide.substitute(LAMBDA, &sum).unwrap().with_orders(&[3, 3, 6]);
        assert_eq!(at_sum(&h, 3), direct);
    }

    #[test]
    fn sheffer_form_matches_integration() {
        let omega = parse_normal_form("(a+)^2 a a+ + a+ a (a+)^2").unwrap();
        assert_eq!(sheffer_prefsub(&omega, 4, 9).unwrap(), central_binomial(4, 9));
    }

    #[test]
    fn bridge_cases() {
        for src in ["a+ a", "(a+)^2 a a+ + a+ a (a+)^2", "a+", "a+ a a+", "2 (a+)^3 a + (a+)^2"] {
            let omega = parse_normal_form(src).unwrap();
            let r = prop2_bridge(&omega, 5, 8).unwrap();
            assert!(r.passed(), "{src}: {r}");
        }
        let dilation = sheffer_prefsub(&parse_normal_form("a+ a").unwrap(), 4, 3).unwrap();
        for m in 0..=4 {
            let want = Q::new(1.into(), crate::rational::factorial(m));
            assert_eq!(dilation.s().get(&[m, 1]), want);
        }
        for src in ["a", "a+ a a a+ a+", "a + a+"] {
            let omega = parse_normal_form(src).unwrap();
            assert!(matches!(prop2_bridge(&omega, 3, 3), Err(OneParamError::OutOfScope(_))), "{src}");
        }
    }
}
