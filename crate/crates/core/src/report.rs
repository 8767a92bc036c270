//! Verification reports: a count of checked coefficients plus every mismatch.

use std::fmt;

use crate::rational::{fmt_q, Q};

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    /// Index tuple of the offending coefficient; its meaning depends on the check.
    pub at: Vec<usize>,
    pub expected: Q,
    pub actual: Q,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub(crate) fn compare(&mut self, at: Vec<usize>, expected: &Q, actual: &Q) {
        self.checked += 1;
        if expected != actual {
            self.mismatches.push(Mismatch {
                at,
                expected: expected.clone(),
                actual: actual.clone(),
            });
        }
    }

    pub(crate) fn merge(&mut self, other: Report) {
        self.checked += other.checked;
        self.mismatches.extend(other.mismatches);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass ({} coefficients checked)", self.checked);
        }
        writeln!(
            f,
            "FAIL ({} of {} coefficients differ)",
            self.mismatches.len(),
            self.checked
        )?;
        for m in self.mismatches.iter().take(10) {
            writeln!(
                f,
                "  at {:?}: expected {}, got {}",
                m.at,
                fmt_q(&m.expected),
                fmt_q(&m.actual)
            )?;
        }
        Ok(())
    }
}
