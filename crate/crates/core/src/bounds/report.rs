use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::GridFn2;
use crate::scalar::Scalar;

/// Relative dominance tolerance: a point violates when
/// `witness - bound > DOMINANCE_TOLERANCE * (1 + |bound|)`.
pub const DOMINANCE_TOLERANCE: f64 = 1e-9;

/// Slack allowed on nonnegativity hypotheses.
pub const HYPOTHESIS_SLACK: f64 = 1e-12;

/// Which variable the exponential factor of the kernel bound runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentVariant {
    /// `e_c(t1, 0)`: product over the first variable at fixed `t2`.
    #[default]
    FirstVariable,
    /// `e_c(t2, 0)`: product over the second variable at fixed `t1`.
    SecondVariable,
}

/// One failed hypothesis check, aggregated over every point where it fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub check: &'static str,
    /// First failing location.
    pub location: String,
    /// Most negative (or otherwise worst) value seen.
    pub worst_value: f64,
    pub count: usize,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {} (worst {}, {} point(s))", self.check, self.location, self.worst_value, self.count)
    }
}

/// Collects nonnegativity failures keyed by check name.
#[derive(Debug, Default)]
pub(crate) struct DiagnosticSink {
    items: Vec<Diagnostic>,
}

impl DiagnosticSink {
    pub fn fail(&mut self, check: &'static str, location: impl FnOnce() -> String, value: f64) {
        match self.items.iter_mut().find(|d| d.check == check) {
            Some(d) => {
                d.count += 1;
                d.worst_value = d.worst_value.min(value);
            }
            None => self.items.push(Diagnostic { check, location: location(), worst_value: value, count: 1 }),
        }
    }

    pub fn nonneg<T: Scalar>(&mut self, check: &'static str, value: T, location: impl FnOnce() -> String) {
        if value < -T::lit(HYPOTHESIS_SLACK) || value.is_nan() {
            self.fail(check, location, value.as_f64());
        }
    }

    pub fn nonneg_grid<T: Scalar>(&mut self, check: &'static str, g: &GridFn2<T>) {
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                self.nonneg(check, g.at(i, j), || format!("({i}, {j})"));
            }
        }
    }

    pub fn finish(self) -> Vec<Diagnostic> {
        self.items
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation<T> {
    pub i: usize,
    pub j: usize,
    pub witness: T,
    pub bound: T,
}

/// A bound evaluated on `κ1 × κ2`, optionally compared against a witness.
#[derive(Debug, Clone)]
pub struct BoundReport<T> {
    pub bound: GridFn2<T>,
    pub witness: Option<GridFn2<T>>,
    /// `max(witness - bound)` clamped at zero.
    pub max_violation: T,
    /// `max((witness - bound) / (1 + |bound|))` clamped at zero.
    pub worst_relative_violation: T,
    /// `min(bound - witness)`; absent without a witness.
    pub min_slack: Option<T>,
    pub violations: Vec<Violation<T>>,
    pub hypothesis_diagnostics: Vec<Diagnostic>,
    pub exponent_variant: ExponentVariant,
}

impl<T: Scalar> BoundReport<T> {
    pub(crate) fn assemble(
        bound: GridFn2<T>,
        witness: Option<&GridFn2<T>>,
        hypothesis_diagnostics: Vec<Diagnostic>,
        exponent_variant: ExponentVariant,
    ) -> Result<Self> {
        let witness = witness.map(|w| w.restrict(bound.rows(), bound.cols())).transpose()?;
        let mut report = Self {
            bound,
            witness: None,
            max_violation: T::zero(),
            worst_relative_violation: T::zero(),
            min_slack: None,
            violations: Vec::new(),
            hypothesis_diagnostics,
            exponent_variant,
        };
        if let Some(w) = witness {
            report.compare(&w);
            report.witness = Some(w);
        }
        Ok(report)
    }

    fn compare(&mut self, w: &GridFn2<T>) {
        let tol = T::lit(DOMINANCE_TOLERANCE);
        let mut min_slack = T::infinity();
        for i in 0..self.bound.rows() {
            for j in 0..self.bound.cols() {
                let (b, u) = (self.bound.at(i, j), w.at(i, j));
                let excess = u - b;
                let rel = excess / (T::one() + b.abs());
                min_slack = min_slack.min(b - u);
                self.max_violation = self.max_violation.max(excess);
                self.worst_relative_violation = self.worst_relative_violation.max(rel);
                if rel > tol {
                    self.violations.push(Violation { i, j, witness: u, bound: b });
                }
            }
        }
        self.min_slack = Some(min_slack);
    }

    /// No point violates beyond the relative tolerance.
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// `t1, t2, witness, bound, slack` for every point of the bound domain.
    pub fn rows(&self) -> impl Iterator<Item = (T, T, Option<T>, T)> + '_ {
        let p1 = self.bound.domain().first().points();
        let p2 = self.bound.domain().second().points();
        (0..self.bound.rows()).flat_map(move |i| {
            (0..self.bound.cols())
                .map(move |j| (p1[i], p2[j], self.witness.as_ref().map(|w| w.at(i, j)), self.bound.at(i, j)))
        })
    }
}
