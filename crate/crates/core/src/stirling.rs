//! Generalized Stirling numbers of homogeneous operators.
//!
//! For `Ω` of excess `e`, the normal form of `Ω^n` factors as
//! `(a+)^(ne) sum_k S(n,k) (a+)^k a^k` when `e >= 0` and as
//! `(sum_k S(n,k) (a+)^k a^k) a^(n|e|)` when `e < 0`. The table of `S(n,k)`
//! is row-finite. For operators with at most one annihilator per term its
//! double generating function has the Sheffer shape `g(x) exp(y φ(x))`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exec::Exec;
use crate::normal::{Excess, NormalForm};
use crate::rational::{factorial, fmt_q, is_nonnegative_integer, Q};
use crate::report::Report;
use crate::series::{SeriesError, TruncSeries};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StirlingError {
    #[error("operator is {0}")]
    NotHomogeneous(Excess),
    #[error("term (a+)^{i} a^{j} of the normal form of the power {n} does not have the expected shape")]
    Shape { n: usize, i: u32, j: u32 },
    #[error("table has rows through {have}, {need} required")]
    TooFewRows { have: usize, need: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StirlingTable {
    excess: i64,
    rows: Vec<Vec<Q>>,
}

impl StirlingTable {
    /// Builds a table from explicit rows; trailing zeros are trimmed.
    pub fn from_rows(excess: i64, rows: Vec<Vec<Q>>) -> Self {
        let rows = rows.into_iter().map(trim).collect();
        StirlingTable { excess, rows }
    }

    pub fn excess(&self) -> i64 {
        self.excess
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.rows
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, n: usize, k: usize) -> Q {
        self.rows
            .get(n)
            .and_then(|r| r.get(k))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// Largest row length.
    pub fn width(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn all_nonnegative_integers(&self) -> bool {
        self.rows.iter().flatten().all(is_nonnegative_integer)
    }

    /// One line per `n`, zero-padded to the table width, with a header.
    pub fn to_csv(&self) -> String {
        let w = self.width();
        let mut out = String::from("n");
        for k in 0..w {
            out.push_str(&format!(",{k}"));
        }
        out.push('\n');
        for (n, _) in self.rows.iter().enumerate() {
            out.push_str(&n.to_string());
            for k in 0..w {
                out.push(',');
                out.push_str(&fmt_q(&self.get(n, k)));
            }
            out.push('\n');
        }
        out
    }

    /// Left-bracket array layout with trailing ellipses.
    pub fn to_latex(&self) -> String {
        let w = self.width();
        let mut out = String::from("\\left\\lceil\n{\\begin{array}{");
        out.push_str(&"r".repeat(w + 1));
        out.push_str("}\n");
        for (n, _) in self.rows.iter().enumerate() {
            for k in 0..w {
                out.push_str(&fmt_q(&self.get(n, k)));
                out.push_str(" & ");
            }
            out.push_str("\\cdots\\\\\n");
        }
        for _ in 0..w {
            out.push_str("\\vdots & ");
        }
        out.push_str("\\ddots\\\\\n\\end{array}}\n\\right.\n");
        out
    }
}

fn trim(mut row: Vec<Q>) -> Vec<Q> {
    while row.len() > 1 && row.last().is_some_and(Zero::is_zero) {
        row.pop();
    }
    row
}

/// Reads `S(n, ·)` off the normal form of `Ω^n`.
fn read_row(power: &NormalForm, n: usize, e: i64) -> Result<Vec<Q>, StirlingError> {
    let shift = n as i64 * e.abs();
    let mut row = Vec::new();
    for (i, j, c) in power.terms() {
        let k = if e >= 0 {
            (i as i64 - shift == j as i64).then_some(j as usize)
        } else {
            (j as i64 - shift == i as i64).then_some(i as usize)
        };
        let k = k.ok_or(StirlingError::Shape { n, i, j })?;
        if row.len() <= k {
            row.resize(k + 1, Q::zero());
        }
        row[k] = c.clone();
    }
    if row.is_empty() {
        row.push(Q::zero());
    }
    Ok(trim(row))
}

/// Table of `S_Ω(n, k)` for `n = 0 ..= n_max`.
pub fn stirling_table(omega: &NormalForm, n_max: usize) -> Result<StirlingTable, StirlingError> {
    let e = match omega.excess() {
        Excess::Homogeneous(e) => e,
        other => return Err(StirlingError::NotHomogeneous(other)),
    };
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut power = NormalForm::one();
    for n in 0..=n_max {
        if n > 0 {
            power = power.product(omega);
        }
        rows.push(read_row(&power, n, e)?);
    }
    Ok(StirlingTable { excess: e, rows })
}

/// Tabulates several operators, one work item per operator.
pub fn stirling_tables(
    omegas: &[NormalForm],
    n_max: usize,
    exec: Exec,
) -> Vec<Result<StirlingTable, StirlingError>> {
    exec.map_slice(omegas, |w| stirling_table(w, n_max))
}

/// True when `Ω` has nonnegative excess and at most one annihilator per
/// term, the class for which the Sheffer correspondence holds.
pub fn in_sheffer_scope(omega: &NormalForm) -> bool {
    omega.excess().value().is_some_and(|e| e >= 0) && omega.max_annihilation() <= 1
}

/// `g = sum S(n,0) x^n/n!` and `φ = (sum S(n,1) x^n/n!) / g`, both of order `order`.
pub fn egf_extract(
    table: &StirlingTable,
    order: usize,
) -> Result<(TruncSeries, TruncSeries), StirlingError> {
    if table.n_max() < order {
        return Err(StirlingError::TooFewRows {
            have: table.n_max(),
            need: order,
        });
    }
    let col = |k: usize| -> Vec<Q> { (0..=order).map(|n| table.get(n, k)).collect() };
    let g = TruncSeries::from_egf(&col(0), order);
    let g_phi = TruncSeries::from_egf(&col(1), order);
    let phi = g_phi.div(&g)?;
    Ok((g, phi))
}

/// Checks `S(n,k) = n! [x^n] g φ^k / k!` for every `n` up to the series
/// order and every `k` up to `max(n, row width)`. Locations are `(n, k)`.
pub fn sheffer_check(table: &StirlingTable, g: &TruncSeries, phi: &TruncSeries) -> Report {
    let order = g.order().min(phi.order()).min(table.n_max());
    let g = g.with_order(order);
    let phi = phi.with_order(order);
    let mut report = Report::default();
    let k_max = (0..=order)
        .map(|n| n.max(table.rows[n].len().saturating_sub(1)))
        .max()
        .unwrap_or(0);
    let mut gphik = g.clone();
    for k in 0..=k_max {
        if k > 0 {
            gphik = gphik.mul(&phi).expect("same order");
        }
        let kfact = Q::from_integer(factorial(k));
        for n in 0..=order {
            if k > n.max(table.rows[n].len().saturating_sub(1)) {
                continue;
            }
            let predicted = gphik.coeff(n) * Q::from_integer(factorial(n)) / &kfact;
            report.compare(vec![n, k], &predicted, &table.get(n, k));
        }
    }
    report
}

/// Stirling numbers of the second kind by `S(n+1,k) = k S(n,k) + S(n,k-1)`.
pub fn classical_stirling2(n: usize, k: usize) -> BigInt {
    let mut row = vec![BigInt::one()];
    for _ in 0..n {
        let mut next = vec![BigInt::zero(); row.len() + 1];
        for (k, s) in row.iter().enumerate() {
            next[k] += BigInt::from(k) * s;
            next[k + 1] += s;
        }
        row = next;
    }
    row.get(k).cloned().unwrap_or_else(BigInt::zero)
}
