//! JSON documents for every value the command line reads or writes.
//!
//! Rationals are written as strings `"p/q"`, or `"p"` for integers, so
//! arbitrarily large values survive any JSON reader. On input a rational
//! may also be a JSON integer or a `{"num": "p", "den": "q"}` object.
//! Top-level documents carry `"schema": 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::endomatrix::{DenomSeq, OpMatrix};
use crate::ladder::{BasisMat, CoeffRole, CoeffSeq, LadderError, PolySeq};
use crate::multiseries::MultiSeries;
use crate::normal::NormalForm;
use crate::oneparam::PrefSub;
use crate::rational::{fmt_q, parse_q, Q};
use crate::report::Report;
use crate::series::TruncSeries;
use crate::stirling::StirlingTable;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("invalid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("invalid rational {0:?}")]
    Rational(String),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Ladder(#[from] LadderError),
}

/// An exact rational written as `"p/q"`, or `"p"` when the denominator is 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Rational(pub String);

impl From<&Q> for Rational {
    fn from(q: &Q) -> Self {
        Rational(fmt_q(q))
    }
}

/// Numerator and denominator as decimal strings.
#[derive(Clone, Debug, Deserialize)]
pub struct Parts {
    pub num: String,
    pub den: String,
}

/// Accepted spellings of a rational on input.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RationalIn {
    Int(i64),
    Text(String),
    Parts(Parts),
}

impl RationalIn {
    pub fn to_q(&self) -> Result<Q, JsonError> {
        let text = match self {
            RationalIn::Parts(r) => format!("{}/{}", r.num, r.den),
            RationalIn::Int(n) => return Ok(Q::from_integer((*n).into())),
            RationalIn::Text(s) => s.clone(),
        };
        parse_q(&text).ok_or(JsonError::Rational(text))
    }
}

fn qs(v: &[Q]) -> Vec<Rational> {
    v.iter().map(Rational::from).collect()
}

fn read_qs(v: &[RationalIn]) -> Result<Vec<Q>, JsonError> {
    v.iter().map(RationalIn::to_q).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Series {
    pub var: String,
    pub order: usize,
    pub coeffs: Vec<Rational>,
}

pub fn series(f: &TruncSeries, var: &str) -> Series {
    Series {
        var: var.into(),
        order: f.order(),
        coeffs: qs(f.coeffs()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Term {
    pub exps: Vec<usize>,
    pub coeff: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct Multi {
    pub vars: Vec<String>,
    pub orders: Vec<usize>,
    pub terms: Vec<Term>,
}

pub fn multi(s: &MultiSeries) -> Multi {
    Multi {
        vars: s.vars().to_vec(),
        orders: s.orders().to_vec(),
        terms: s
            .terms()
            .map(|(exps, c)| Term {
                exps,
                coeff: c.into(),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalTerm {
    pub creation: u32,
    pub annihilation: u32,
    pub coeff: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct Normal {
    pub schema: u32,
    pub rendered: String,
    pub excess: String,
    pub terms: Vec<NormalTerm>,
}

pub fn normal_form(f: &NormalForm) -> Normal {
    Normal {
        schema: SCHEMA,
        rendered: f.render(),
        excess: f.excess().to_string(),
        terms: f
            .terms_display_order()
            .into_iter()
            .map(|(i, j, c)| NormalTerm {
                creation: i,
                annihilation: j,
                coeff: c.into(),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Stirling {
    pub schema: u32,
    pub operator: String,
    pub excess: i64,
    pub rows: Vec<Vec<Rational>>,
}

pub fn stirling(table: &StirlingTable, operator: &str) -> Stirling {
    Stirling {
        schema: SCHEMA,
        operator: operator.into(),
        excess: table.excess(),
        rows: table.rows().iter().map(|r| qs(r)).collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub at: Vec<usize>,
    pub expected: Rational,
    pub actual: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDoc {
    pub passed: bool,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

pub fn report(r: &Report) -> ReportDoc {
    ReportDoc {
        passed: r.passed(),
        checked: r.checked,
        mismatches: r
            .mismatches
            .iter()
            .map(|m| Mismatch {
                at: m.at.clone(),
                expected: (&m.expected).into(),
                actual: (&m.actual).into(),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Egf {
    pub schema: u32,
    pub operator: String,
    pub excess: i64,
    pub in_scope: bool,
    pub g: Series,
    pub phi: Series,
    pub check: ReportDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `g` and `φ` of a table with the report of the Sheffer-form check. The
/// check only counts as evidence when the operator is out of scope.
pub fn egf(operator: &str, table: &StirlingTable, in_scope: bool, g: &TruncSeries, phi: &TruncSeries, check: &Report) -> Egf {
    Egf {
        schema: SCHEMA,
        operator: operator.into(),
        excess: table.excess(),
        in_scope,
        g: series(g, "x"),
        phi: series(phi, "x"),
        check: report(check),
        note: (!in_scope).then(|| "out of proposition scope".to_string()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Denoms {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Rational>>,
}

fn denoms(d: &DenomSeq) -> Denoms {
    Denoms {
        kind: d.name().into(),
        values: match d {
            DenomSeq::Custom(v) => Some(qs(v)),
            _ => None,
        },
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Entry {
    Rational(Rational),
    Series(Vec<Rational>),
}

#[derive(Clone, Debug, Serialize)]
pub struct Matrix {
    pub schema: u32,
    pub dim: usize,
    pub denoms: Denoms,
    pub exact_rows: usize,
    pub exact_cols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param_order: Option<usize>,
    pub entries: Vec<Vec<Entry>>,
}

pub fn matrix(m: &OpMatrix) -> Matrix {
    Matrix {
        schema: SCHEMA,
        dim: m.dim(),
        denoms: denoms(m.denoms()),
        exact_rows: m.exact_rows(),
        exact_cols: m.exact_cols(),
        param: None,
        param_order: None,
        entries: (0..m.dim())
            .map(|n| m.row(n).iter().map(|q| Entry::Rational(q.into())).collect())
            .collect(),
    }
}

/// Matrix with entries that are series in `lambda`, each entry a coefficient list.
pub fn series_matrix(m: &OpMatrix<TruncSeries>) -> Matrix {
    Matrix {
        schema: SCHEMA,
        dim: m.dim(),
        denoms: denoms(m.denoms()),
        exact_rows: m.exact_rows(),
        exact_cols: m.exact_cols(),
        param: Some("lambda".into()),
        param_order: Some(m.param_order()),
        entries: (0..m.dim())
            .map(|n| m.row(n).iter().map(|s| Entry::Series(qs(s.coeffs()))).collect())
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Prefsub {
    pub schema: u32,
    pub lambda_order: usize,
    pub x_order: usize,
    pub g: Multi,
    pub s: Multi,
}

pub fn prefsub(u: &PrefSub) -> Prefsub {
    Prefsub {
        schema: SCHEMA,
        lambda_order: u.lambda_order(),
        x_order: u.x_order(),
        g: multi(u.g()),
        s: multi(u.s()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Basis {
    pub dim: usize,
    pub columns: Vec<Vec<Rational>>,
}

pub fn basis(b: &BasisMat) -> Basis {
    Basis {
        dim: b.dim(),
        columns: (0..b.dim()).map(|k| qs(&b.column(k))).collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Coeffs {
    pub role: String,
    pub values: Vec<Rational>,
}

pub fn coeff_seq(c: &CoeffSeq) -> Coeffs {
    Coeffs {
        role: c.role().to_string(),
        values: qs(c.values()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Polys {
    pub schema: u32,
    pub mode: String,
    pub top: usize,
    pub working_dim: usize,
    /// Coefficient lists, lowest degree first.
    pub polys: Vec<Vec<Rational>>,
    pub rendered: Vec<String>,
    pub check: ReportDoc,
}

pub fn poly_seq(p: &PolySeq, mode: &str, working_dim: usize, check: &Report) -> Polys {
    Polys {
        schema: SCHEMA,
        mode: mode.into(),
        top: p.len().saturating_sub(1),
        working_dim,
        polys: p.polys().iter().map(|q| qs(q.coeffs())).collect(),
        rendered: p.polys().iter().map(|q| q.render("x")).collect(),
        check: report(check),
    }
}

/// Operator of an expansion job.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorIn {
    /// Sum of coordinates, as a map onto the constants.
    Epsilon,
    Identity,
    /// Transpose of `epsilon`: `1 ↦ sum_k x^k`.
    EpsilonTranspose,
    Matrix {
        entries: Vec<Vec<RationalIn>>,
        #[serde(default)]
        exact_rows: Option<usize>,
        #[serde(default)]
        exact_cols: Option<usize>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisIn {
    Monomial,
    DividedPowers,
    Columns { columns: Vec<Vec<RationalIn>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoeffsIn {
    Ones,
    /// `1, 1, 2, 3, ...`, the lowering coefficients of `D` on `x^n`.
    Naturals,
    Values { values: Vec<RationalIn> },
}

fn default_monomial() -> BasisIn {
    BasisIn::Monomial
}

fn default_ones() -> CoeffsIn {
    CoeffsIn::Ones
}

/// Input document of the `expand` command. For continuous modes `a` is the
/// shared basis and `b` is ignored.
#[derive(Clone, Debug, Deserialize)]
pub struct ExpandSpec {
    pub schema: u32,
    pub top: usize,
    pub phi: OperatorIn,
    #[serde(default = "default_monomial")]
    pub a: BasisIn,
    #[serde(default = "default_ones")]
    pub alpha: CoeffsIn,
    #[serde(default = "default_monomial")]
    pub b: BasisIn,
    #[serde(default = "default_ones")]
    pub beta: CoeffsIn,
}

/// An expansion job with every part materialized at one working dimension.
#[derive(Clone, Debug)]
pub struct ExpandJob {
    pub top: usize,
    pub phi: OpMatrix,
    pub a: BasisMat,
    pub alpha: CoeffSeq,
    pub b: BasisMat,
    pub beta: CoeffSeq,
}

impl ExpandSpec {
    pub fn parse(text: &str) -> Result<Self, JsonError> {
        let spec: ExpandSpec = serde_json::from_str(text)?;
        if spec.schema != SCHEMA {
            return Err(JsonError::Schema(spec.schema));
        }
        Ok(spec)
    }

    /// Dimension fixed by explicit matrices or value lists, if any.
    fn explicit_dim(&self) -> Result<Option<usize>, JsonError> {
        let mut dims = Vec::new();
        if let OperatorIn::Matrix { entries, .. } = &self.phi {
            dims.push(entries.len());
        }
        for b in [&self.a, &self.b] {
            if let BasisIn::Columns { columns } = b {
                dims.push(columns.len());
            }
        }
        match dims.split_first() {
            None => Ok(None),
            Some((d, rest)) if rest.iter().all(|x| x == d) => Ok(Some(*d)),
            _ => Err(JsonError::Shape("explicit matrices disagree in dimension".into())),
        }
    }

    /// Working dimension: fixed by explicit data, else `top + margin + 1`
    /// where the margin defaults to `top`.
    pub fn resolve(&self, margin: Option<usize>) -> Result<ExpandJob, JsonError> {
        let margin = margin.unwrap_or(self.top);
        let w = self.explicit_dim()?.unwrap_or(self.top + margin + 1);
        if self.top >= w {
            return Err(JsonError::Shape(format!(
                "top index {} does not fit in dimension {w}",
                self.top
            )));
        }
        Ok(ExpandJob {
            top: self.top,
            phi: operator(&self.phi, w)?,
            a: make_basis(&self.a, w)?,
            alpha: coeffs(&self.alpha, w, CoeffRole::Alpha)?,
            b: make_basis(&self.b, w)?,
            beta: coeffs(&self.beta, w, CoeffRole::Beta)?,
        })
    }
}

fn operator(op: &OperatorIn, w: usize) -> Result<OpMatrix, JsonError> {
    let d = DenomSeq::Ones;
    let mut m = OpMatrix::zero(w - 1, d.clone()).expect("valid");
    match op {
        OperatorIn::Identity => return Ok(OpMatrix::identity(w - 1, d).expect("valid")),
        OperatorIn::Epsilon => {
            for k in 0..w {
                m.set(0, k, Q::from_integer(1.into()));
            }
        }
        OperatorIn::EpsilonTranspose => {
            for n in 0..w {
                m.set(n, 0, Q::from_integer(1.into()));
            }
        }
        OperatorIn::Matrix {
            entries,
            exact_rows,
            exact_cols,
        } => {
            if entries.iter().any(|r| r.len() != w) {
                return Err(JsonError::Shape("operator matrix must be square".into()));
            }
            for (n, row) in entries.iter().enumerate() {
                for (k, c) in row.iter().enumerate() {
                    m.set(n, k, c.to_q()?);
                }
            }
            m = m.with_bands(exact_rows.unwrap_or(w), exact_cols.unwrap_or(w));
        }
    }
    Ok(m)
}

fn make_basis(b: &BasisIn, w: usize) -> Result<BasisMat, JsonError> {
    Ok(match b {
        BasisIn::Monomial => BasisMat::monomial(w),
        BasisIn::DividedPowers => BasisMat::divided_powers(w),
        BasisIn::Columns { columns } => {
            BasisMat::from_columns(columns.iter().map(|c| read_qs(c)).collect::<Result<_, _>>()?)?
        }
    })
}

fn coeffs(c: &CoeffsIn, w: usize, role: CoeffRole) -> Result<CoeffSeq, JsonError> {
    Ok(match c {
        CoeffsIn::Ones => CoeffSeq::ones(w, role),
        CoeffsIn::Naturals if role == CoeffRole::Beta => CoeffSeq::naturals(w),
        CoeffsIn::Naturals => {
            let values = (0..w).map(|n| Q::from_integer(n.max(1).into())).collect();
            CoeffSeq::new(values, role)?
        }
        CoeffsIn::Values { values } => CoeffSeq::new(read_qs(values)?, role)?,
    })
}
