//! Row-finite matrices as endomorphisms of truncated series.
//!
//! A series `f = sum a_k x^k / d_k` is identified with its coordinate vector
//! `(a_k)` relative to a denominator sequence `d`. A matrix `M` acts by
//! `b_n = sum_k M[n,k] a_k`; the Bargmann-Fock representation sends `a` to
//! `d/dx` and `a+` to multiplication by `x`.
//!
//! Only the top-left `(N+1) x (N+1)` corner of a row-finite matrix is kept.
//! Each [`OpMatrix`] records two exactness bands: `exact_rows` is the number
//! of leading rows whose complete support lies inside the corner, and
//! `exact_cols` the same for columns. An entry `(n, k)` is known to equal the
//! entry of the infinite matrix whenever `n < exact_rows` or
//! `k < exact_cols`. Products propagate the bands conservatively.

use std::fmt::Debug;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exec::Exec;
use crate::multiseries::MultiSeries;
use crate::normal::{Excess, NormalForm};
use crate::rational::{factorial, falling, fmt_q, Q};
use crate::report::Report;
use crate::series::TruncSeries;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EndoError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("denominator sequences differ")]
    DenomMismatch,
    #[error("denominator {0} is zero")]
    ZeroDenominator(usize),
    #[error("custom denominators have length {found}, {expected} required")]
    DenomLength { expected: usize, found: usize },
    #[error("operator is {0}")]
    NotHomogeneous(Excess),
    #[error("series of order {found} applied to a matrix of dimension {dim}")]
    SeriesOrder { dim: usize, found: usize },
    #[error("entry array has {found} entries, {expected} required")]
    Shape { expected: usize, found: usize },
}

/// Denominators `d_n` of the basis `x^n / d_n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum DenomSeq {
    #[default]
    Ones,
    Factorial,
    Custom(Vec<Q>),
}

impl DenomSeq {
    pub fn get(&self, n: usize) -> Q {
        match self {
            DenomSeq::Ones => Q::one(),
            DenomSeq::Factorial => Q::from_integer(factorial(n)),
            DenomSeq::Custom(d) => d[n].clone(),
        }
    }

    /// Checks that the sequence covers `0..dim` with nonzero entries.
    pub fn validate(&self, dim: usize) -> Result<(), EndoError> {
        if let DenomSeq::Custom(d) = self {
            if d.len() != dim {
                return Err(EndoError::DenomLength {
                    expected: dim,
                    found: d.len(),
                });
            }
            if let Some(n) = d.iter().position(Zero::is_zero) {
                return Err(EndoError::ZeroDenominator(n));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            DenomSeq::Ones => "ones",
            DenomSeq::Factorial => "factorial",
            DenomSeq::Custom(_) => "custom",
        }
    }
}

/// Matrix entries: exact rationals or truncated series in a formal parameter.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn vanishes(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scaled(&self, c: &Q) -> Self;
    /// Rational coefficients, used for coefficientwise comparison.
    fn flat(&self) -> Vec<Q>;
}

impl Scalar for Q {
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scaled(&self, c: &Q) -> Self {
        self * c
    }
    fn flat(&self) -> Vec<Q> {
        vec![self.clone()]
    }
}

// Entries of one matrix always share their truncation order, so the
// order checks of the series arithmetic cannot fail here.
impl Scalar for TruncSeries {
    fn zero_like(&self) -> Self {
        TruncSeries::zero(self.order())
    }
    fn vanishes(&self) -> bool {
        TruncSeries::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other).expect("entries share one order")
    }
    fn minus(&self, other: &Self) -> Self {
        self.sub(other).expect("entries share one order")
    }
    fn times(&self, other: &Self) -> Self {
        self.mul(other).expect("entries share one order")
    }
    fn scaled(&self, c: &Q) -> Self {
        self.scale(c)
    }
    fn flat(&self) -> Vec<Q> {
        self.coeffs().to_vec()
    }
}

impl Scalar for MultiSeries {
    fn zero_like(&self) -> Self {
        MultiSeries::zero_like(self)
    }
    fn vanishes(&self) -> bool {
        MultiSeries::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other).expect("entries share one space")
    }
    fn minus(&self, other: &Self) -> Self {
        self.sub(other).expect("entries share one space")
    }
    fn times(&self, other: &Self) -> Self {
        self.mul(other).expect("entries share one space")
    }
    fn scaled(&self, c: &Q) -> Self {
        self.scale(c)
    }
    fn flat(&self) -> Vec<Q> {
        self.flat_coeffs().to_vec()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpMatrix<S = Q> {
    dim: usize,
    entries: Vec<S>,
    denoms: DenomSeq,
    exact_rows: usize,
    exact_cols: usize,
}

impl<S: Scalar> OpMatrix<S> {
    /// Row-major entries with explicit bands, which are clamped to `dim`.
    pub fn from_entries(
        dim: usize,
        entries: Vec<S>,
        denoms: DenomSeq,
        exact_rows: usize,
        exact_cols: usize,
    ) -> Result<Self, EndoError> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(EndoError::Shape {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        denoms.validate(dim)?;
        Ok(OpMatrix {
            dim,
            entries,
            denoms,
            exact_rows: exact_rows.min(dim),
            exact_cols: exact_cols.min(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest represented degree `N = dim - 1`.
    pub fn top_degree(&self) -> usize {
        self.dim - 1
    }

    pub fn denoms(&self) -> &DenomSeq {
        &self.denoms
    }

    pub fn exact_rows(&self) -> usize {
        self.exact_rows
    }

    pub fn exact_cols(&self) -> usize {
        self.exact_cols
    }

    /// True when every row of the corner is complete, i.e. the truncation is
    /// exact for all degrees up to `N`.
    pub fn rows_exact(&self) -> bool {
        self.exact_rows == self.dim
    }

    pub fn is_exact_at(&self, n: usize, k: usize) -> bool {
        n < self.exact_rows || k < self.exact_cols
    }

    pub fn with_bands(mut self, exact_rows: usize, exact_cols: usize) -> Self {
        self.exact_rows = exact_rows.min(self.dim);
        self.exact_cols = exact_cols.min(self.dim);
        self
    }

    pub fn get(&self, n: usize, k: usize) -> &S {
        &self.entries[n * self.dim + k]
    }

    pub fn set(&mut self, n: usize, k: usize, value: S) {
        self.entries[n * self.dim + k] = value;
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn row(&self, n: usize) -> &[S] {
        &self.entries[n * self.dim..(n + 1) * self.dim]
    }

    fn check(&self, other: &Self) -> Result<(), EndoError> {
        if self.dim != other.dim {
            return Err(EndoError::DimMismatch(self.dim, other.dim));
        }
        if self.denoms != other.denoms {
            return Err(EndoError::DenomMismatch);
        }
        Ok(())
    }

    /// Entrywise image, keeping shape and bands.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> OpMatrix<T> {
        OpMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
            denoms: self.denoms.clone(),
            exact_rows: self.exact_rows,
            exact_cols: self.exact_cols,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, EndoError> {
        self.zip(other, S::plus)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, EndoError> {
        self.zip(other, S::minus)
    }

    fn zip(&self, other: &Self, op: impl Fn(&S, &S) -> S) -> Result<Self, EndoError> {
        self.check(other)?;
        Ok(OpMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| op(a, b))
                .collect(),
            denoms: self.denoms.clone(),
            exact_rows: self.exact_rows.min(other.exact_rows),
            exact_cols: self.exact_cols.min(other.exact_cols),
        })
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.map(|e| e.scaled(c))
    }

    /// Highest column index with a nonzero entry in row `n`.
    fn row_reach(&self, n: usize) -> Option<usize> {
        self.row(n).iter().rposition(|e| !e.vanishes())
    }

    /// Highest row index with a nonzero entry in column `k`.
    fn col_reach(&self, k: usize) -> Option<usize> {
        (0..self.dim).rev().find(|&n| !self.get(n, k).vanishes())
    }

    /// Matrix product `self * other`, i.e. `Φ_self ∘ Φ_other`.
    pub fn compose(&self, other: &Self) -> Result<Self, EndoError> {
        self.compose_with(other, Exec::default())
    }

    /// Matrix product with an explicit execution strategy; rows of the
    /// result are independent work items.
    pub fn compose_with(&self, other: &Self, exec: Exec) -> Result<Self, EndoError> {
        self.check(other)?;
        let d = self.dim;
        let rows: Vec<Vec<S>> = exec.map_range(d, |n| {
            let zero = self.get(0, 0).zero_like();
            let mut out = vec![zero; d];
            for (m, a) in self.row(n).iter().enumerate() {
                if a.vanishes() {
                    continue;
                }
                for (k, b) in other.row(m).iter().enumerate() {
                    if !b.vanishes() {
                        out[k] = out[k].plus(&a.times(b));
                    }
                }
            }
            out
        });
        let exact_rows = (0..self.exact_rows)
            .take_while(|&n| self.row_reach(n).is_none_or(|m| m < other.exact_rows))
            .count();
        let exact_cols = (0..other.exact_cols)
            .take_while(|&k| other.col_reach(k).is_none_or(|m| m < self.exact_cols))
            .count();
        Ok(OpMatrix {
            dim: d,
            entries: rows.into_iter().flatten().collect(),
            denoms: self.denoms.clone(),
            exact_rows,
            exact_cols,
        })
    }

    /// Transposed matrix; the row and column bands swap.
    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let entries = (0..d * d)
            .map(|o| self.get(o % d, o / d).clone())
            .collect();
        OpMatrix {
            dim: d,
            entries,
            denoms: self.denoms.clone(),
            exact_rows: self.exact_cols,
            exact_cols: self.exact_rows,
        }
    }

    /// Compares the entries known to be exact in both matrices.
    /// Locations are `(n, k)`, extended by the coefficient index for series entries.
    pub fn agrees_on_band(&self, other: &Self) -> Result<Report, EndoError> {
        self.check(other)?;
        let mut report = Report::default();
        for n in 0..self.dim {
            for k in 0..self.dim {
                if !(self.is_exact_at(n, k) && other.is_exact_at(n, k)) {
                    continue;
                }
                let a = self.get(n, k).flat();
                let b = other.get(n, k).flat();
                let zero = Q::zero();
                for idx in 0..a.len().max(b.len()) {
                    let at = if a.len() == 1 && b.len() == 1 {
                        vec![n, k]
                    } else {
                        vec![n, k, idx]
                    };
                    report.compare(at, b.get(idx).unwrap_or(&zero), a.get(idx).unwrap_or(&zero));
                }
            }
        }
        Ok(report)
    }

    /// Top-left `d x d` block with bands clamped to `d`.
    pub fn leading(&self, d: usize) -> Self {
        let d = d.clamp(1, self.dim);
        let entries = (0..d * d)
            .map(|o| self.get(o / d, o % d).clone())
            .collect();
        let denoms = match &self.denoms {
            DenomSeq::Custom(v) => DenomSeq::Custom(v[..d].to_vec()),
            other => other.clone(),
        };
        OpMatrix {
            dim: d,
            entries,
            denoms,
            exact_rows: self.exact_rows.min(d),
            exact_cols: self.exact_cols.min(d),
        }
    }

    /// True when every nonzero entry satisfies `n - k = shift`.
    pub fn supported_on_line(&self, shift: i64) -> bool {
        (0..self.dim).all(|n| {
            (0..self.dim).all(|k| self.get(n, k).vanishes() || n as i64 - k as i64 == shift)
        })
    }
}

impl OpMatrix<Q> {
    pub fn identity(top_degree: usize, denoms: DenomSeq) -> Result<Self, EndoError> {
        let d = top_degree + 1;
        let mut entries = vec![Q::zero(); d * d];
        for n in 0..d {
            entries[n * d + n] = Q::one();
        }
        Self::from_entries(d, entries, denoms, d, d)
    }

    pub fn zero(top_degree: usize, denoms: DenomSeq) -> Result<Self, EndoError> {
        let d = top_degree + 1;
        Self::from_entries(d, vec![Q::zero(); d * d], denoms, d, d)
    }

    /// `Φ_M(f)` for an ordinary series `f` of order `N`. Coefficients of degree
    /// `n >= exact_rows` depend on the discarded tail of `f`.
    pub fn apply(&self, f: &TruncSeries) -> Result<TruncSeries, EndoError> {
        if f.order() != self.top_degree() {
            return Err(EndoError::SeriesOrder {
                dim: self.dim,
                found: f.order(),
            });
        }
        let a: Vec<Q> = (0..self.dim)
            .map(|k| f.coeff(k) * self.denoms.get(k))
            .collect();
        let coeffs = (0..self.dim)
            .map(|n| {
                let b: Q = self.row(n).iter().zip(&a).map(|(m, x)| m * x).sum();
                b / self.denoms.get(n)
            })
            .collect();
        Ok(TruncSeries::from_coeffs(coeffs, self.top_degree()))
    }

    /// Plain matrix-vector product in coordinates.
    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        (0..self.dim)
            .map(|n| self.row(n).iter().zip(v).map(|(m, x)| m * x).sum())
            .collect()
    }

    /// Comma-separated rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for n in 0..self.dim {
            let cells: Vec<String> = self.row(n).iter().map(fmt_q).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

impl OpMatrix<TruncSeries> {
    /// Truncation order of the parameter series in the entries.
    pub fn param_order(&self) -> usize {
        self.entries[0].order()
    }

    /// Applies the matrix to an ordinary series, giving a series in
    /// `(lambda, x)` of orders `(param_order, N)`.
    pub fn apply_series(&self, f: &TruncSeries) -> Result<MultiSeries, EndoError> {
        if f.order() != self.top_degree() {
            return Err(EndoError::SeriesOrder {
                dim: self.dim,
                found: f.order(),
            });
        }
        let l = self.param_order();
        let mut out = MultiSeries::zero(&["lambda", "x"], &[l, self.top_degree()]);
        for n in 0..self.dim {
            let dn = self.denoms.get(n);
            for k in 0..self.dim {
                let ak = f.coeff(k) * self.denoms.get(k);
                if ak.is_zero() {
                    continue;
                }
                for (m, c) in self.get(n, k).coeffs().iter().enumerate() {
                    if !c.is_zero() {
                        let prev = out.get(&[m, n]);
                        out.set(&[m, n], prev + c * &ak / &dn);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Coefficient matrix of `lambda^m`.
    pub fn param_coeff(&self, m: usize) -> OpMatrix<Q> {
        self.map(|e| e.coeff(m))
    }
}

/// Matrix of `ρ_BF(f)` on the basis `x^k / d_k`, `k <= N`.
pub fn rho_bf(f: &NormalForm, top_degree: usize, denoms: DenomSeq) -> Result<OpMatrix, EndoError> {
    let d = top_degree + 1;
    denoms.validate(d)?;
    let mut m = OpMatrix::zero(top_degree, denoms)?;
    let mut lift = 0i64;
    let mut drop = 0i64;
    for (i, j, c) in f.terms() {
        let shift = i as i64 - j as i64;
        lift = lift.max(shift);
        drop = drop.max(-shift);
        for k in j as usize..d {
            let n = k - j as usize + i as usize;
            if n >= d {
                break;
            }
            let w = c * Q::from_integer(falling(k, j as usize)) * m.denoms.get(n) / m.denoms.get(k);
            let prev = m.get(n, k).clone();
            m.set(n, k, prev + w);
        }
    }
    m.exact_rows = d.saturating_sub(drop as usize);
    m.exact_cols = d.saturating_sub(lift as usize);
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triangularity {
    StrictlyLower,
    Diagonal,
    StrictlyUpper,
    Other,
}

impl std::fmt::Display for Triangularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Triangularity::StrictlyLower => "strictly-lower",
            Triangularity::Diagonal => "diagonal",
            Triangularity::StrictlyUpper => "strictly-upper",
            Triangularity::Other => "none",
        })
    }
}

/// Shape of `ρ_BF(f)` read off its entries up to degree `N`. A matrix with no
/// nonzero entry in the corner is classified by the sign of the excess.
pub fn triangularity(f: &NormalForm, top_degree: usize) -> Result<Triangularity, EndoError> {
    let e = match f.excess() {
        Excess::Homogeneous(e) => e,
        other => return Err(EndoError::NotHomogeneous(other)),
    };
    let m = rho_bf(f, top_degree, DenomSeq::Ones)?;
    let (mut below, mut on, mut above) = (false, false, false);
    for n in 0..m.dim {
        for k in 0..m.dim {
            if !m.get(n, k).is_zero() {
                match n.cmp(&k) {
                    std::cmp::Ordering::Greater => below = true,
                    std::cmp::Ordering::Equal => on = true,
                    std::cmp::Ordering::Less => above = true,
                }
            }
        }
    }
    Ok(match (below, on, above) {
        (false, false, false) => match e.signum() {
            1 => Triangularity::StrictlyLower,
            0 => Triangularity::Diagonal,
            _ => Triangularity::StrictlyUpper,
        },
        (true, false, false) => Triangularity::StrictlyLower,
        (false, true, false) => Triangularity::Diagonal,
        (false, false, true) => Triangularity::StrictlyUpper,
        _ => Triangularity::Other,
    })
}

/// `sum_{m <= λ_order} λ^m ρ_BF(f)^m / m!` with series entries in `λ`.
pub fn exp_lambda(f: &NormalForm, top_degree: usize, lambda_order: usize) -> Result<OpMatrix<TruncSeries>, EndoError> {
    exp_lambda_with(f, top_degree, lambda_order, DenomSeq::Ones, Exec::default())
}

pub fn exp_lambda_with(
    f: &NormalForm,
    top_degree: usize,
    lambda_order: usize,
    denoms: DenomSeq,
    exec: Exec,
) -> Result<OpMatrix<TruncSeries>, EndoError> {
    if f.excess() == Excess::Inhomogeneous {
        return Err(EndoError::NotHomogeneous(Excess::Inhomogeneous));
    }
    let m = rho_bf(f, top_degree, denoms)?;
    let d = m.dim;
    let mut coeffs: Vec<Vec<Q>> = vec![Vec::with_capacity(lambda_order + 1); d * d];
    let mut power = OpMatrix::identity(top_degree, m.denoms.clone())?;
    let (mut rows, mut cols) = (d, d);
    for k in 0..=lambda_order {
        if k > 0 {
            power = power.compose_with(&m, exec)?;
        }
        rows = rows.min(power.exact_rows);
        cols = cols.min(power.exact_cols);
        let kfact = Q::from_integer(factorial(k));
        for (slot, e) in coeffs.iter_mut().zip(power.entries()) {
            slot.push(e / &kfact);
        }
    }
    let entries = exec.map_slice(&coeffs, |c| TruncSeries::from_coeffs(c.clone(), lambda_order));
    OpMatrix::from_entries(d, entries, m.denoms, rows, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_normal_form;
    use crate::rational::{frac, int};

    fn nf(s: &str) -> NormalForm {
        parse_normal_form(s).unwrap()
    }

    #[test]
    fn generators() {
        let a = rho_bf(&NormalForm::a(), 5, DenomSeq::Ones).unwrap();
        let ad = rho_bf(&NormalForm::a_dag(), 5, DenomSeq::Ones).unwrap();
        for n in 0..6 {
            for k in 0..6 {
                let want_a = if n + 1 == k { int(k as i64) } else { int(0) };
                let want_ad = if n == k + 1 { int(1) } else { int(0) };
                assert_eq!(a.get(n, k), &want_a);
                assert_eq!(ad.get(n, k), &want_ad);
            }
        }
        assert_eq!((a.exact_rows(), a.exact_cols()), (5, 6));
        assert_eq!((ad.exact_rows(), ad.exact_cols()), (6, 5));
        let num = rho_bf(&nf("a+ a"), 4, DenomSeq::Ones).unwrap();
        for k in 0..5 {
            assert_eq!(num.get(k, k), &int(k as i64));
        }
        assert!(num.rows_exact());
    }

    #[test]
    fn canonical_commutator_on_band() {
        let a = rho_bf(&NormalForm::a(), 8, DenomSeq::Ones).unwrap();
        let ad = rho_bf(&NormalForm::a_dag(), 8, DenomSeq::Ones).unwrap();
        let comm = a.compose(&ad).unwrap().sub(&ad.compose(&a).unwrap()).unwrap();
        let id = OpMatrix::identity(8, DenomSeq::Ones).unwrap();
        let r = comm.agrees_on_band(&id).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.checked > 0);
        // the corner entry (8,8) of the truncated product is corrupted
        assert!(!comm.is_exact_at(8, 8));
        assert_eq!(comm.get(8, 8), &int(-8));
    }

    #[test]
    fn compose_with_identity() {
        let m = rho_bf(&nf("2 (a+)^2 a + a - 1/3"), 6, DenomSeq::Factorial).unwrap();
        let id = OpMatrix::identity(6, DenomSeq::Factorial).unwrap();
        let p = m.compose(&id).unwrap();
        assert_eq!(p.entries(), m.entries());
        assert_eq!(p.exact_rows(), m.exact_rows());
        assert_eq!(p.exact_cols(), m.exact_cols());
    }

    #[test]
    fn homomorphism_small() {
        let pairs = [("a", "a+"), ("a a+ a", "(a+)^2 + a"), ("1/2 a^2", "a+ a - (a+)^3")];
        for (f, g) in pairs {
            let (f, g) = (nf(f), nf(g));
            let lhs = rho_bf(&f.product(&g), 10, DenomSeq::Ones).unwrap();
            let rhs = rho_bf(&f, 10, DenomSeq::Ones)
                .unwrap()
                .compose(&rho_bf(&g, 10, DenomSeq::Ones).unwrap())
                .unwrap();
            assert!(lhs.agrees_on_band(&rhs).unwrap().passed());
        }
    }

    #[test]
    fn apply_examples() {
        let a = rho_bf(&NormalForm::a(), 4, DenomSeq::Ones).unwrap();
        let x3 = TruncSeries::monomial(3, int(1), 4);
        assert_eq!(a.apply(&x3).unwrap(), TruncSeries::monomial(2, int(3), 4));
        let omega = rho_bf(&nf("(a+)^2 a a+ + a+ a (a+)^2"), 5, DenomSeq::Ones).unwrap();
        let out = omega.apply(&TruncSeries::x(5)).unwrap();
        assert_eq!(out, TruncSeries::monomial(3, int(5), 5));
        assert!(matches!(a.apply(&TruncSeries::x(3)), Err(EndoError::SeriesOrder { .. })));
    }

    #[test]
    fn denominators_conjugate() {
        let f = nf("a+ a a + 3 (a+)^2 a^2 - a");
        let custom = DenomSeq::Custom((0..7).map(|n| frac(n as i64 + 2, 3)).collect());
        let g = TruncSeries::from_ints(&[1, -2, 0, 5, 1, 0, 7], 6);
        let plain = rho_bf(&f, 6, DenomSeq::Ones).unwrap();
        for d in [DenomSeq::Factorial, custom] {
            let m = rho_bf(&f, 6, d.clone()).unwrap();
            assert_eq!(m.apply(&g).unwrap(), plain.apply(&g).unwrap());
            for n in 0..7 {
                for k in 0..7 {
                    assert_eq!(m.get(n, k), &(plain.get(n, k) * d.get(n) / d.get(k)));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_denominators() {
        let f = NormalForm::a();
        assert_eq!(
            rho_bf(&f, 2, DenomSeq::Custom(vec![int(1), int(0), int(2)])),
            Err(EndoError::ZeroDenominator(1))
        );
        assert!(matches!(
            rho_bf(&f, 2, DenomSeq::Custom(vec![int(1)])),
            Err(EndoError::DenomLength { expected: 3, found: 1 })
        ));
        let m = rho_bf(&f, 2, DenomSeq::Ones).unwrap();
        let p = rho_bf(&f, 2, DenomSeq::Factorial).unwrap();
        assert_eq!(m.compose(&p), Err(EndoError::DenomMismatch));
    }

    #[test]
    fn trichotomy() {
        assert_eq!(triangularity(&nf("a+ a"), 6).unwrap(), Triangularity::Diagonal);
        assert_eq!(triangularity(&nf("a"), 6).unwrap(), Triangularity::StrictlyUpper);
        assert_eq!(triangularity(&nf("a+ a a+"), 6).unwrap(), Triangularity::StrictlyLower);
        assert_eq!(triangularity(&nf("a^5"), 3).unwrap(), Triangularity::StrictlyUpper);
        assert!(matches!(
            triangularity(&nf("a + a+"), 4),
            Err(EndoError::NotHomogeneous(Excess::Inhomogeneous))
        ));
    }

    #[test]
    fn homogeneous_support_is_a_line() {
        for src in ["a+ a a+", "(a+)^2 a a+ + a+ a (a+)^2", "a^3 a+ + 2 a+ a^3", "a+ a - 5"] {
            let f = nf(src);
            let e = f.excess().value().unwrap();
            assert!(rho_bf(&f, 9, DenomSeq::Factorial).unwrap().supported_on_line(e), "{src}");
        }
        assert!(!rho_bf(&nf("a + a+"), 4, DenomSeq::Ones).unwrap().supported_on_line(1));
    }

    #[test]
    fn exponential_of_creation() {
        let e = exp_lambda(&NormalForm::a_dag(), 6, 6).unwrap();
        for n in 0..7 {
            let want = TruncSeries::monomial(n, Q::new(1.into(), factorial(n)), 6);
            assert_eq!(e.get(n, 0), &want);
        }
    }

    #[test]
    fn exponential_of_number_operator() {
        let e = exp_lambda(&nf("a+ a"), 4, 5).unwrap();
        for k in 0..5 {
            let coeffs: Vec<Q> = (0..6)
                .map(|m| Q::from_integer(num_bigint::BigInt::from(k).pow(m as u32)) / Q::from_integer(factorial(m)))
                .collect();
            assert_eq!(e.get(k, k), &TruncSeries::from_coeffs(coeffs, 5));
        }
        assert!(e.rows_exact());
    }

    #[test]
    fn exponential_of_central_binomial() {
        let n = 10;
        let e = exp_lambda(&nf("(a+)^2 a a+ + a+ a (a+)^2"), n, 5).unwrap();
        let out = e.apply_series(&TruncSeries::one(n)).unwrap();
        // (1 - 4 λ x^2)^(-3/4) in the box λ <= 5, x <= 10
        let t = TruncSeries::from_ints(&[1, -4], 5).binom_pow(&frac(-3, 4)).unwrap();
        let mut want = MultiSeries::zero(&["lambda", "x"], &[5, n]);
        for m in 0..=5 {
            if 2 * m <= n {
                want.set(&[m, 2 * m], t.coeff(m));
            }
        }
        assert!(out.compare(&want).unwrap().passed());
    }

    #[test]
    fn exponential_rejects_inhomogeneous() {
        assert!(exp_lambda(&nf("a + a+"), 3, 3).is_err());
    }

    #[test]
    fn group_law_with_two_parameters() {
        let l = 4;
        let f = nf("a+ a a+");
        let big = exp_lambda(&f, 5, 2 * l).unwrap();
        let vars = ["lambda", "theta"];
        let wide = [2 * l, 2 * l];
        let box_ = [l, l];
        let sum = MultiSeries::var(&vars, &wide, "lambda")
            .unwrap()
            .add(&MultiSeries::var(&vars, &wide, "theta").unwrap())
            .unwrap();
        let at = |v: &'static str| {
            big.map(move |s| {
                MultiSeries::from_univariate(&s.with_order(l), v, &vars, &box_).unwrap()
            })
        };
        let lhs = at("lambda").compose(&at("theta")).unwrap();
        let rhs = big.map(|s| {
            MultiSeries::from_univariate(s, "lambda", &vars, &wide)
                .unwrap()
                .substitute("lambda", &sum)
                .unwrap()
                .with_orders(&box_)
        });
        let r = lhs.agrees_on_band(&rhs).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.checked > 36 * 25 / 2);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = nf("(a+)^2 a a+ + a+ a (a+)^2 + 1/2 (a+)^3 a");
        let m = rho_bf(&f, 12, DenomSeq::Factorial).unwrap();
        let s = m.compose_with(&m, Exec::Sequential).unwrap();
        let p = m.compose_with(&m, Exec::Parallel).unwrap();
        assert_eq!(s, p);
        let es = exp_lambda_with(&f, 8, 4, DenomSeq::Ones, Exec::Sequential).unwrap();
        let ep = exp_lambda_with(&f, 8, 4, DenomSeq::Ones, Exec::Parallel).unwrap();
        assert_eq!(es, ep);
    }

    #[test]
    fn transpose_swaps_bands() {
        let m = rho_bf(&nf("a^2 + a+ a^3"), 6, DenomSeq::Ones).unwrap();
        let t = m.transpose();
        assert_eq!(t.exact_rows(), m.exact_cols());
        assert_eq!(t.get(1, 3), m.get(3, 1));
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn csv_output() {
        let m = rho_bf(&NormalForm::a(), 2, DenomSeq::Ones).unwrap();
        assert_eq!(m.to_csv(), "0,1,0\n0,0,2\n0,0,0\n");
    }
}
