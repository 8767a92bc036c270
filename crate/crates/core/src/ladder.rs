//! Ladder operators relative to bases and the expansion of endomorphisms.
//!
//! The space `V` with a countable basis is modelled by a working space
//! `V_W` of dimension `W = N + margin + 1`, in fixed working coordinates.
//! Bases are invertible `W x W` matrices whose columns are the basis
//! vectors. Raising operators send the top basis vector to zero; with that
//! convention the expansion recursion is an exact identity on `V_W`, and the
//! margin keeps the reported `P_0 .. P_N` free of truncation effects for
//! operators of bounded degree shift.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::endomatrix::{DenomSeq, EndoError, OpMatrix};
use crate::exec::Exec;
use crate::rational::{factorial, fmt_q, Q};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LadderError {
    #[error("basis matrix is singular")]
    Singular,
    #[error("basis matrix must be square and nonempty")]
    BasisShape,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("coefficient {0} is zero")]
    ZeroCoefficient(usize),
    #[error("lowering coefficients must start with 1")]
    BetaStart,
    #[error("{role} sequence has {found} values, {need} required")]
    TooShort { role: CoeffRole, need: usize, found: usize },
    #[error("expected a {expected} sequence, got {found}")]
    WrongRole { expected: CoeffRole, found: CoeffRole },
    #[error("b_0 is not a multiple of a_0")]
    NotProportional,
    #[error("top index {n} does not fit in working dimension {dim}")]
    TopIndex { n: usize, dim: usize },
    #[error("operator column {0} is outside its exact band")]
    InexactColumn(usize),
    #[error("operator has {have} exact rows, {need} required for continuity")]
    NotContinuous { have: usize, need: usize },
    #[error(transparent)]
    Endo(#[from] EndoError),
}

/// Invertible basis matrix; column `n` holds the coordinates of `e_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisMat {
    dim: usize,
    cols: Vec<Q>,
    inv: Vec<Q>,
}

/// Gauss-Jordan inverse of a row-major square matrix.
fn invert(m: &[Q], d: usize) -> Option<Vec<Q>> {
    let mut a = m.to_vec();
    let mut inv = vec![Q::zero(); d * d];
    for i in 0..d {
        inv[i * d + i] = Q::one();
    }
    for c in 0..d {
        let p = (c..d).find(|&r| !a[r * d + c].is_zero())?;
        if p != c {
            for k in 0..d {
                a.swap(p * d + k, c * d + k);
                inv.swap(p * d + k, c * d + k);
            }
        }
        let piv = a[c * d + c].clone();
        for k in 0..d {
            a[c * d + k] /= &piv;
            inv[c * d + k] /= &piv;
        }
        for r in 0..d {
            if r == c || a[r * d + c].is_zero() {
                continue;
            }
            let f = a[r * d + c].clone();
            for k in 0..d {
                let (sa, si) = (&a[c * d + k] * &f, &inv[c * d + k] * &f);
                a[r * d + k] -= sa;
                inv[r * d + k] -= si;
            }
        }
    }
    Some(inv)
}

impl BasisMat {
    /// Builds from the list of basis vectors, each given by its coordinates.
    pub fn from_columns(columns: Vec<Vec<Q>>) -> Result<Self, LadderError> {
        let d = columns.len();
        if d == 0 || columns.iter().any(|c| c.len() != d) {
            return Err(LadderError::BasisShape);
        }
        let mut cols = vec![Q::zero(); d * d];
        for (k, col) in columns.into_iter().enumerate() {
            for (n, c) in col.into_iter().enumerate() {
                cols[n * d + k] = c;
            }
        }
        let inv = invert(&cols, d).ok_or(LadderError::Singular)?;
        Ok(BasisMat { dim: d, cols, inv })
    }

    /// Diagonal basis `e_n = w_n x^n`.
    pub fn diagonal(weights: Vec<Q>) -> Result<Self, LadderError> {
        let d = weights.len();
        let columns = weights
            .into_iter()
            .enumerate()
            .map(|(n, w)| {
                let mut c = vec![Q::zero(); d];
                c[n] = w;
                c
            })
            .collect();
        Self::from_columns(columns)
    }

    /// The working coordinate basis itself, `x^n`.
    pub fn monomial(dim: usize) -> Self {
        Self::diagonal(vec![Q::one(); dim]).expect("identity is invertible")
    }

    /// `x^n / n!`.
    pub fn divided_powers(dim: usize) -> Self {
        Self::diagonal((0..dim).map(|n| Q::new(1.into(), factorial(n))).collect())
            .expect("nonzero diagonal")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, k: usize) -> Vec<Q> {
        (0..self.dim).map(|n| self.cols[n * self.dim + k].clone()).collect()
    }

    /// Coordinates relative to this basis of a working-coordinate vector.
    pub fn to_basis(&self, v: &[Q]) -> Vec<Q> {
        mat_vec(&self.inv, self.dim, v)
    }

    pub fn is_diagonal(&self) -> bool {
        self.nonzero_where(|n, k| n != k)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.nonzero_where(|n, k| n > k)
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.nonzero_where(|n, k| n < k)
    }

    fn nonzero_where(&self, bad: impl Fn(usize, usize) -> bool) -> bool {
        let d = self.dim;
        (0..d * d).all(|o| !bad(o / d, o % d) || self.cols[o].is_zero())
    }

    /// Exactness bands of the basis change as a truncated infinite matrix.
    fn bands(&self, lower: bool, upper: bool) -> (usize, usize) {
        let d = self.dim;
        match (self.is_diagonal(), lower, upper) {
            (true, _, _) => (d, d),
            (false, true, _) => (d, 0),
            (false, _, true) => (0, d),
            _ => (0, 0),
        }
    }

    /// Change of coordinates from this basis to working coordinates.
    pub fn matrix(&self) -> OpMatrix {
        let (r, c) = self.bands(self.is_lower_triangular(), self.is_upper_triangular());
        OpMatrix::from_entries(self.dim, self.cols.clone(), DenomSeq::Ones, r, c).expect("square")
    }

    /// Change of coordinates from working coordinates to this basis.
    pub fn inverse_matrix(&self) -> OpMatrix {
        let (r, c) = self.bands(self.is_lower_triangular(), self.is_upper_triangular());
        OpMatrix::from_entries(self.dim, self.inv.clone(), DenomSeq::Ones, r, c).expect("square")
    }
}

fn mat_vec(m: &[Q], d: usize, v: &[Q]) -> Vec<Q> {
    (0..d)
        .map(|n| (0..d).map(|k| &m[n * d + k] * &v[k]).sum())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffRole {
    /// Raising coefficients `α`: `R a_n = α_n a_{n+1}`.
    Alpha,
    /// Lowering coefficients `β`: `L b_n = β_n b_{n-1}`, with `β_0 = 1`.
    Beta,
}

impl fmt::Display for CoeffRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffRole::Alpha => "alpha",
            CoeffRole::Beta => "beta",
        })
    }
}

/// Nonzero coefficient sequence of a relative ladder operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffSeq {
    values: Vec<Q>,
    role: CoeffRole,
}

impl CoeffSeq {
    pub fn new(values: Vec<Q>, role: CoeffRole) -> Result<Self, LadderError> {
        if let Some(n) = values.iter().position(Zero::is_zero) {
            return Err(LadderError::ZeroCoefficient(n));
        }
        if role == CoeffRole::Beta && values.first().is_some_and(|b| !b.is_one()) {
            return Err(LadderError::BetaStart);
        }
        Ok(CoeffSeq { values, role })
    }

    pub fn ones(len: usize, role: CoeffRole) -> Self {
        CoeffSeq {
            values: vec![Q::one(); len],
            role,
        }
    }

    /// `β_0 = 1`, `β_n = n`: the lowering coefficients that turn the
    /// monomial basis into `x^n / n!`.
    pub fn naturals(len: usize) -> Self {
        let values = (0..len).map(|n| Q::from_integer(n.max(1).into())).collect();
        CoeffSeq {
            values,
            role: CoeffRole::Beta,
        }
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn role(&self) -> CoeffRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: usize) -> &Q {
        &self.values[n]
    }

    fn expect(&self, role: CoeffRole, need: usize) -> Result<(), LadderError> {
        if self.role != role {
            return Err(LadderError::WrongRole {
                expected: role,
                found: self.role,
            });
        }
        if self.values.len() < need {
            return Err(LadderError::TooShort {
                role,
                need,
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

/// `β↑`: `γ_n = β_{n+1}`, a raising sequence one shorter than `β`.
pub fn shift_up(beta: &CoeffSeq) -> CoeffSeq {
    CoeffSeq {
        values: beta.values.iter().skip(1).cloned().collect(),
        role: CoeffRole::Alpha,
    }
}

/// `α↓`: `γ_0 = 1`, `γ_n = α_{n-1}`, a lowering sequence one longer than `α`.
pub fn shift_down(alpha: &CoeffSeq) -> CoeffSeq {
    let mut values = vec![Q::one()];
    values.extend(alpha.values.iter().cloned());
    CoeffSeq {
        values,
        role: CoeffRole::Beta,
    }
}

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::new(vec![Q::one()])
    }

    /// `(c0 + c1 x)^n`.
    pub fn binomial_power(c0: &Q, c1: &Q, n: usize) -> Self {
        let mut p = Poly::one();
        for _ in 0..n {
            let mut next = vec![Q::zero(); p.coeffs.len() + 1];
            for (k, c) in p.coeffs.iter().enumerate() {
                next[k] += c * c0;
                next[k + 1] += c * c1;
            }
            p = Poly::new(next);
        }
        p
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// `P(M) = sum_m p_m M^m`.
    pub fn eval_matrix(&self, m: &OpMatrix) -> Result<OpMatrix, LadderError> {
        let d = m.top_degree();
        let mut acc = OpMatrix::zero(d, m.denoms().clone())?;
        let mut power = OpMatrix::identity(d, m.denoms().clone())?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                power = power.compose(m)?;
            }
            if !c.is_zero() {
                acc = acc.add(&power.scale(c))?;
            }
        }
        Ok(acc)
    }

    pub fn render(&self, var: &str) -> String {
        let terms: Vec<(usize, &Q)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (k, c)) in terms.into_iter().enumerate() {
            let neg = c < &Q::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            if mono.is_empty() {
                out.push_str(&fmt_q(&mag));
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{} {mono}", fmt_q(&mag)));
            }
        }
        out
    }

    pub fn to_latex(&self, var: &str) -> String {
        let terms: Vec<(usize, &Q)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (k, c)) in terms.into_iter().enumerate() {
            let neg = c < &Q::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{{{k}}}"),
            };
            let num = if mag.is_integer() {
                mag.numer().to_string()
            } else {
                format!("\\frac{{{}}}{{{}}}", mag.numer(), mag.denom())
            };
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => out.push_str(&num),
                (false, true) => out.push_str(&mono),
                (false, false) => out.push_str(&format!("{num} {mono}")),
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

/// The polynomials `P_0 .. P_N` of an expansion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PolySeq {
    polys: Vec<Poly>,
}

impl PolySeq {
    pub fn new(polys: Vec<Poly>) -> Self {
        PolySeq { polys }
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn get(&self, n: usize) -> &Poly {
        &self.polys[n]
    }

    /// One aligned LaTeX line per polynomial.
    pub fn to_latex(&self) -> String {
        let mut out = String::from("\\begin{aligned}\n");
        for (n, p) in self.polys.iter().enumerate() {
            out.push_str(&format!("P_{{{n}}}(x) &= {} \\\\\n", p.to_latex("x")));
        }
        out.push_str("\\end{aligned}\n");
        out
    }
}

/// Plain shift `e_n ↦ w_n e_{n+1}` (`lower = false`) or `e_n ↦ w_n e_{n-1}`
/// (`lower = true`) in basis coordinates, as a truncated infinite matrix.
fn shift_matrix(dim: usize, weights: &[Q], lower: bool) -> OpMatrix {
    let mut entries = vec![Q::zero(); dim * dim];
    for n in 0..dim {
        if lower && n > 0 {
            entries[(n - 1) * dim + n] = weights[n].clone();
        }
        if !lower && n + 1 < dim {
            entries[(n + 1) * dim + n] = weights[n].clone();
        }
    }
    let (rows, cols) = if lower { (dim - 1, dim) } else { (dim, dim - 1) };
    OpMatrix::from_entries(dim, entries, DenomSeq::Ones, rows, cols).expect("square")
}

fn conjugate(basis: &BasisMat, inner: &OpMatrix) -> Result<OpMatrix, LadderError> {
    Ok(basis.matrix().compose(inner)?.compose(&basis.inverse_matrix())?)
}

/// `L_{b,β}` in working coordinates; needs `β_0 .. β_{W-1}`.
pub fn lowering(b: &BasisMat, beta: &CoeffSeq) -> Result<OpMatrix, LadderError> {
    beta.expect(CoeffRole::Beta, b.dim())?;
    conjugate(b, &shift_matrix(b.dim(), beta.values(), true))
}

/// `R_{a,α}` in working coordinates with `a_{W-1} ↦ 0`; needs `α_0 .. α_{W-2}`.
pub fn raising(a: &BasisMat, alpha: &CoeffSeq) -> Result<OpMatrix, LadderError> {
    alpha.expect(CoeffRole::Alpha, a.dim() - 1)?;
    let mut w = alpha.values().to_vec();
    w.resize(a.dim(), Q::one());
    conjugate(a, &shift_matrix(a.dim(), &w, false))
}

/// Diagonal operator `[L_{e,β}, R_{e,α}]` on `e_0 .. e_N` by its closed formula;
/// needs `α_0 .. α_N` and `β_0 .. β_{N+1}`.
pub fn diagonal_op(alpha: &CoeffSeq, beta: &CoeffSeq, top: usize) -> Result<OpMatrix, LadderError> {
    alpha.expect(CoeffRole::Alpha, top + 1)?;
    beta.expect(CoeffRole::Beta, top + 2)?;
    let d = top + 1;
    let mut m = OpMatrix::zero(top, DenomSeq::Ones)?;
    for n in 0..d {
        let mut v = alpha.get(n) * beta.get(n + 1);
        if n > 0 {
            v -= alpha.get(n - 1) * beta.get(n);
        }
        m.set(n, n, v);
    }
    Ok(m)
}

/// Truncated convolution: coefficient list of `P(R) c` in coordinates of
/// the basis that `R` raises.
fn convolve_into(acc: &mut [Q], p: &[Q], c: &[Q]) {
    let w = acc.len();
    for (m, pm) in p.iter().enumerate() {
        if pm.is_zero() {
            continue;
        }
        for (j, cj) in c.iter().enumerate().take(w.saturating_sub(m)) {
            if !cj.is_zero() {
                acc[m + j] += pm * cj;
            }
        }
    }
}

/// Polynomials `P_0 .. P_N` with `φ = sum_n P_n(R_{a,α}) L_{b,β}^n` on
/// `b_0 .. b_N`. `φ` is given in working coordinates.
pub fn expand_endo(
    phi: &OpMatrix,
    a: &BasisMat,
    alpha: &CoeffSeq,
    b: &BasisMat,
    beta: &CoeffSeq,
    top: usize,
) -> Result<PolySeq, LadderError> {
    expand_endo_with(phi, a, alpha, b, beta, top, Exec::default())
}

pub fn expand_endo_with(
    phi: &OpMatrix,
    a: &BasisMat,
    alpha: &CoeffSeq,
    b: &BasisMat,
    beta: &CoeffSeq,
    top: usize,
    exec: Exec,
) -> Result<PolySeq, LadderError> {
    let w = phi.dim();
    for d in [a.dim(), b.dim()] {
        if d != w {
            return Err(LadderError::DimMismatch(w, d));
        }
    }
    if top >= w {
        return Err(LadderError::TopIndex { n: top, dim: w });
    }
    alpha.expect(CoeffRole::Alpha, w - 1)?;
    beta.expect(CoeffRole::Beta, top + 1)?;
    for n in 0..=top {
        if let Some(k) = b.column(n).iter().rposition(|c| !c.is_zero()) {
            if k >= phi.exact_cols() {
                return Err(LadderError::InexactColumn(k));
            }
        }
    }

    // a'_n = (prod_{i<n} α_i) a_n and b'_n = (prod_{i<=n} β_i)^(-1) b_n turn
    // the relative operators into plain ones.
    let mut a_scale = Vec::with_capacity(w);
    let mut acc = Q::one();
    for n in 0..w {
        a_scale.push(acc.clone());
        if n + 1 < w {
            acc *= alpha.get(n);
        }
    }
    let mut b_scale = Vec::with_capacity(top + 1);
    let mut acc = Q::one();
    for n in 0..=top {
        acc *= beta.get(n);
        b_scale.push(acc.recip());
    }
    let to_a_prime = |v: &[Q]| -> Vec<Q> {
        a.to_basis(v)
            .into_iter()
            .zip(&a_scale)
            .map(|(c, s)| c / s)
            .collect()
    };
    let b_prime = |n: usize| -> Vec<Q> { b.column(n).iter().map(|c| c * &b_scale[n]).collect() };

    let c: Vec<Vec<Q>> = exec.map_range(top + 1, |j| to_a_prime(&b_prime(j)));
    let f: Vec<Vec<Q>> = exec.map_range(top + 1, |n| to_a_prime(&phi.mul_vec(&b_prime(n))));

    let lambda = {
        let c0 = &c[0];
        if c0[1..].iter().any(|x| !x.is_zero()) || c0[0].is_zero() {
            return Err(LadderError::NotProportional);
        }
        c0[0].clone()
    };

    let mut polys: Vec<Vec<Q>> = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let mut v = f[n].clone();
        let mut sub = vec![Q::zero(); w];
        for (k, p) in polys.iter().enumerate() {
            convolve_into(&mut sub, p, &c[n - k]);
        }
        for (x, s) in v.iter_mut().zip(sub) {
            *x = (&*x - s) / &lambda;
        }
        polys.push(v);
    }
    Ok(PolySeq::new(polys.into_iter().map(Poly::new).collect()))
}

/// `sum_n P_n(R_{a,α}) L_{b,β}^n` as a working-coordinate matrix. It equals
/// the expanded operator on `b_0 .. b_N`, where `N + 1` is the length of `P`.
pub fn reconstruct(
    p: &PolySeq,
    a: &BasisMat,
    alpha: &CoeffSeq,
    b: &BasisMat,
    beta: &CoeffSeq,
) -> Result<OpMatrix, LadderError> {
    reconstruct_with(p, a, alpha, b, beta, Exec::default())
}

pub fn reconstruct_with(
    p: &PolySeq,
    a: &BasisMat,
    alpha: &CoeffSeq,
    b: &BasisMat,
    beta: &CoeffSeq,
    exec: Exec,
) -> Result<OpMatrix, LadderError> {
    let r = raising(a, alpha)?;
    let l = lowering(b, beta)?;
    sum_of_products(p, &r, &l, exec, false)
}

/// `sum_n P_n(raise) lower^n`, or `sum_n raise^n P_n(lower)` when `flip`.
fn sum_of_products(
    p: &PolySeq,
    raise: &OpMatrix,
    lower: &OpMatrix,
    exec: Exec,
    flip: bool,
) -> Result<OpMatrix, LadderError> {
    let top = raise.top_degree();
    let mut powers = vec![OpMatrix::identity(top, DenomSeq::Ones)?];
    let shifted = if flip { raise } else { lower };
    for n in 1..p.len() {
        let next = powers[n - 1].compose_with(shifted, exec)?;
        powers.push(next);
    }
    let evaluated = if flip { lower } else { raise };
    let terms: Vec<Result<OpMatrix, LadderError>> = exec.map_range(p.len(), |n| {
        let poly = p.get(n).eval_matrix(evaluated)?;
        Ok(if flip {
            powers[n].compose(&poly)?
        } else {
            poly.compose(&powers[n])?
        })
    });
    let mut acc = OpMatrix::zero(top, DenomSeq::Ones)?;
    for t in terms {
        acc = acc.add(&t?)?;
    }
    Ok(acc)
}

/// Compares `φ(b_n)` with `ψ(b_n)` for `n <= top`. Locations are
/// `(n, coordinate)`.
pub fn agree_on_span(phi: &OpMatrix, psi: &OpMatrix, b: &BasisMat, top: usize) -> Result<Report, LadderError> {
    if phi.dim() != psi.dim() || phi.dim() != b.dim() {
        return Err(LadderError::DimMismatch(phi.dim(), psi.dim()));
    }
    let mut report = Report::default();
    for n in 0..=top.min(b.dim() - 1) {
        let col = b.column(n);
        let (x, y) = (phi.mul_vec(&col), psi.mul_vec(&col));
        for (i, (u, v)) in x.iter().zip(&y).enumerate() {
            report.compare(vec![n, i], u, v);
        }
    }
    Ok(report)
}

/// Expansion of `φ` against `R_x = X` and `L = D` on the bases `x^n` and
/// `x^n / n!`, in working dimension `φ.dim()`.
pub fn km_expand(phi: &OpMatrix, top: usize) -> Result<PolySeq, LadderError> {
    let w = phi.dim();
    expand_endo(
        phi,
        &BasisMat::monomial(w),
        &CoeffSeq::ones(w, CoeffRole::Alpha),
        &BasisMat::divided_powers(w),
        &CoeffSeq::ones(w, CoeffRole::Beta),
        top,
    )
}

/// Transpose in the coordinates of the shared basis.
pub fn transpose_op(m: &OpMatrix) -> OpMatrix {
    m.transpose()
}

/// `<P|S> = sum_i P_i S_i`, diagonal on the basis.
pub fn pairing(p: &[Q], s: &[Q]) -> Result<Q, LadderError> {
    if p.len() != s.len() {
        return Err(LadderError::DimMismatch(p.len(), s.len()));
    }
    Ok(p.iter().zip(s).map(|(x, y)| x * y).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ContinuousMode {
    /// `ψ = sum_n R̂_{β↑}^n P_n(L̂_{α↓})`.
    #[default]
    Direct,
    /// `ψ = sum_n R̂_α^n P_n(L̂_β)`.
    Dual,
}

fn continuous_params(alpha: &CoeffSeq, beta: &CoeffSeq, mode: ContinuousMode) -> Result<(CoeffSeq, CoeffSeq), LadderError> {
    alpha.expect(CoeffRole::Alpha, 0)?;
    beta.expect(CoeffRole::Beta, 0)?;
    Ok(match mode {
        ContinuousMode::Direct => (alpha.clone(), beta.clone()),
        ContinuousMode::Dual => (shift_up(beta), shift_down(alpha)),
    })
}

/// `ψ` in the coordinates of `e`, with bands.
fn in_basis(psi: &OpMatrix, e: &BasisMat) -> Result<OpMatrix, LadderError> {
    if psi.dim() != e.dim() {
        return Err(LadderError::DimMismatch(psi.dim(), e.dim()));
    }
    Ok(e.inverse_matrix().compose(psi)?.compose(&e.matrix())?)
}

/// Expansion of a continuous endomorphism of the completion, given by its
/// working-coordinate matrix `ψ` whose rows `0 ..= N` must be complete in
/// the coordinates of `e`. The transpose is expanded and the result read
/// back through the duality pairing.
pub fn expand_continuous(
    psi: &OpMatrix,
    e: &BasisMat,
    alpha: &CoeffSeq,
    beta: &CoeffSeq,
    top: usize,
    mode: ContinuousMode,
) -> Result<PolySeq, LadderError> {
    let (alpha, beta) = continuous_params(alpha, beta, mode)?;
    let psi_e = in_basis(psi, e)?;
    if psi_e.exact_rows() <= top {
        return Err(LadderError::NotContinuous {
            have: psi_e.exact_rows(),
            need: top + 1,
        });
    }
    let w = psi.dim();
    let id = BasisMat::monomial(w);
    expand_endo(&psi_e.transpose(), &id, &alpha, &id, &beta, top)
}

/// `sum_n R̂^n P_n(L̂)` in the coordinates of `e` for the operators of `mode`.
pub fn reconstruct_continuous(
    p: &PolySeq,
    dim: usize,
    alpha: &CoeffSeq,
    beta: &CoeffSeq,
    mode: ContinuousMode,
) -> Result<OpMatrix, LadderError> {
    let (alpha, beta) = continuous_params(alpha, beta, mode)?;
    let id = BasisMat::monomial(dim);
    let raise = raising(&id, &shift_up(&beta))?;
    let lower = lowering(&id, &shift_down(&alpha))?;
    sum_of_products(p, &raise, &lower, Exec::default(), true)
}

/// Checks the continuous expansion on rows `0 ..= N` of `ψ` in the
/// coordinates of `e`. Locations are `(row, column)`.
pub fn verify_continuous(
    psi: &OpMatrix,
    e: &BasisMat,
    alpha: &CoeffSeq,
    beta: &CoeffSeq,
    p: &PolySeq,
    mode: ContinuousMode,
) -> Result<Report, LadderError> {
    let psi_e = in_basis(psi, e)?;
    let rebuilt = reconstruct_continuous(p, psi.dim(), alpha, beta, mode)?;
    let mut report = Report::default();
    for n in 0..p.len().min(psi.dim()) {
        for k in 0..psi.dim() {
            report.compare(vec![n, k], psi_e.get(n, k), rebuilt.get(n, k));
        }
    }
    Ok(report)
}
