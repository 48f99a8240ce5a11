use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation policy shared by every infinite series in the crate.
///
/// A series stops once `consecutive_small` successive terms are each below
/// `abs_tol * max(1, |partial sum|)` and no larger than the term before.
/// The second condition keeps the rule from firing on the rising flank of
/// a series whose terms grow before they decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
    pub consecutive_small: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_terms: 10_000,
            consecutive_small: 3,
        }
    }
}

impl SeriesControl {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_terms: usize,
        consecutive_small: usize,
    ) -> Result<Self> {
        let ctrl = Self {
            abs_tol,
            rel_tol,
            max_terms,
            consecutive_small,
        };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_terms == 0 || self.consecutive_small == 0 {
            return Err(Error::InvalidParameter(
                "max_terms and consecutive_small must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Accuracy envelope `abs_tol + rel_tol·|value|` promised for a result.
    pub fn envelope(&self, value: f64) -> f64 {
        self.abs_tol + self.rel_tol * value.abs()
    }
}

/// Tracks the stop rule for one sequence of terms.
#[derive(Debug)]
pub(crate) struct StopRule {
    abs_tol: f64,
    needed: usize,
    run: usize,
    prev: f64,
}

impl StopRule {
    pub(crate) fn new(ctrl: &SeriesControl) -> Self {
        Self {
            abs_tol: ctrl.abs_tol,
            needed: ctrl.consecutive_small,
            run: 0,
            prev: f64::INFINITY,
        }
    }

    /// Records the magnitude of the next term; returns true when the series
    /// may stop.
    pub(crate) fn observe(&mut self, magnitude: f64, partial_sum: f64) -> bool {
        let threshold = self.abs_tol * partial_sum.abs().max(1.0);
        if magnitude < threshold && magnitude <= self.prev {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.prev = magnitude;
        self.run >= self.needed
    }
}

/// `sign · exp(log_mag)`, refusing to overflow silently.
pub(crate) fn exp_term(log_mag: f64, sign: f64, what: &'static str) -> Result<f64> {
    if log_mag == f64::NEG_INFINITY || sign == 0.0 {
        return Ok(0.0);
    }
    let v = log_mag.exp();
    if v.is_finite() {
        Ok(sign * v)
    } else {
        Err(Error::Overflow(what))
    }
}

/// Sum `term(n)` for `n = 0, 1, ...` under `ctrl`.
pub(crate) fn sum_series<F>(ctrl: &SeriesControl, what: &'static str, mut term: F) -> Result<f64>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut rule = StopRule::new(ctrl);
    let mut sum = 0.0;
    for n in 0..ctrl.max_terms {
        let t = term(n)?;
        sum += t;
        if !sum.is_finite() {
            return Err(Error::Overflow(what));
        }
        if rule.observe(t.abs(), sum) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        what,
        terms: ctrl.max_terms,
    })
}
