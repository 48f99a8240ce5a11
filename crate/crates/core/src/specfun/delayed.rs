//! Delayed Mittag-Leffler-type functions.
//!
//! Both the generated function `𝔈^{h,γ}_{a,b}(λ, μ; t)` and the `G` function are
//! instances of one binomially weighted double series,
//!
//! ```text
//! Σ_k Σ_n C(n+k, k) λ^n μ^k x_k^{kγ + na + b − s} / Γ(kγ + na + b)
//! ```
//!
//! where `x_k = t − kh` gated by the Heaviside step for the delayed function
//! (finitely many rows) and `x_k = t` for `G` (rows truncated by the stop
//! rule). Every term is assembled in log space.

use serde::{Deserialize, Serialize};

use super::gamma::{ln_gamma_signed, recip_gamma};
use super::mittag_leffler::require_positive;
use super::series::{exp_term, SeriesControl, StopRule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
enum Rows {
    /// `x_k = t − k h`, rows with `x_k < 0` vanish.
    Delayed { t: f64, h: f64 },
    /// `x_k = t` for every row.
    Undelayed { t: f64 },
}

#[derive(Debug, Clone, Copy)]
struct DoubleSeries {
    n_step: f64,
    k_step: f64,
    offset: f64,
    exponent_shift: f64,
    lambda: f64,
    mu: f64,
    rows: Rows,
}

impl DoubleSeries {
    fn last_row(&self, ctrl: &SeriesControl) -> usize {
        match self.rows {
            Rows::Undelayed { .. } => ctrl.max_terms,
            Rows::Delayed { t, h } => {
                let mut k = (t / h).floor();
                while k > 0.0 && t - k * h < 0.0 {
                    k -= 1.0;
                }
                while t - (k + 1.0) * h >= 0.0 {
                    k += 1.0;
                }
                if k >= ctrl.max_terms as f64 {
                    ctrl.max_terms
                } else {
                    k as usize
                }
            }
        }
    }

    fn row_base(&self, k: usize) -> f64 {
        match self.rows {
            Rows::Delayed { t, h } => t - k as f64 * h,
            Rows::Undelayed { t } => t,
        }
    }

    fn sum(&self, ctrl: &SeriesControl, what: &'static str) -> Result<f64> {
        ctrl.validate()?;
        let ln_lam = self.lambda.abs().ln();
        let ln_mu = self.mu.abs().ln();
        let last = self.last_row(ctrl);
        let mut total = 0.0_f64;
        let mut row_rule = StopRule::new(ctrl);

        for k in 0..=last {
            if k == ctrl.max_terms {
                return Err(Error::NonConvergence {
                    what,
                    terms: ctrl.max_terms,
                });
            }
            if k > 0 && self.mu == 0.0 {
                break;
            }
            let kf = k as f64;
            let x = self.row_base(k);
            let ln_x = x.ln();
            let mu_part = if k == 0 { 0.0 } else { kf * ln_mu };
            let mu_sign = if self.mu < 0.0 && k % 2 == 1 {
                -1.0
            } else {
                1.0
            };

            let mut rule = StopRule::new(ctrl);
            let mut row = 0.0_f64;
            let mut row_abs = 0.0_f64;
            let mut ln_binom = 0.0_f64;
            let mut n = 0usize;
            loop {
                if n == ctrl.max_terms {
                    return Err(Error::NonConvergence {
                        what,
                        terms: ctrl.max_terms,
                    });
                }
                let nf = n as f64;
                if n > 0 {
                    ln_binom += ((nf + kf) / nf).ln();
                }
                let arg = kf * self.k_step + nf * self.n_step + self.offset;
                let exponent = arg - self.exponent_shift;
                let lam_sign = if self.lambda < 0.0 && n % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                let lam_part = if n == 0 { 0.0 } else { nf * ln_lam };
                let term = if x == 0.0 && exponent < 0.0 {
                    if recip_gamma(arg) == 0.0 {
                        0.0
                    } else {
                        return Err(Error::Overflow(what));
                    }
                } else if x == 0.0 && exponent > 0.0 {
                    0.0
                } else {
                    let pow_part = if x == 0.0 {
                        ln_binom + lam_part + mu_part
                    } else {
                        ln_binom + lam_part + mu_part + exponent * ln_x
                    };
                    term_value(pow_part, lam_sign * mu_sign, arg, what)?
                };
                row += term;
                row_abs += term.abs();
                if !row.is_finite() {
                    return Err(Error::Overflow(what));
                }
                n += 1;
                if self.lambda == 0.0 || rule.observe(term.abs(), total + row) {
                    break;
                }
            }
            total += row;
            if !total.is_finite() {
                return Err(Error::Overflow(what));
            }
            if row_rule.observe(row_abs, total) {
                break;
            }
        }
        Ok(total)
    }
}

/// `sign · exp(log_numerator) / Γ(arg)`, dividing by Γ directly when both
/// factors are representable and falling back to log space otherwise.
pub(crate) fn term_value(
    log_numerator: f64,
    sign: f64,
    arg: f64,
    what: &'static str,
) -> Result<f64> {
    if log_numerator == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if arg <= 170.0 && log_numerator.abs() < 700.0 {
        let r = recip_gamma(arg);
        return Ok(sign * log_numerator.exp() * r);
    }
    match ln_gamma_signed(arg) {
        None => Ok(0.0),
        Some((lg, gsign)) => exp_term(log_numerator - lg, sign * gsign, what),
    }
}

/// Parameters of the delayed Mittag-Leffler-type function
/// `𝔈^{h,γ}_{a,b}(λ, μ; ·)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayedMl {
    pub h: f64,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl DelayedMl {
    pub fn new(h: f64, a: f64, b: f64, gamma: f64, lambda: f64, mu: f64) -> Result<Self> {
        let p = Self {
            h,
            a,
            b,
            gamma,
            lambda,
            mu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("delayed_ml_gen", "h", self.h)?;
        require_positive("delayed_ml_gen", "a", self.a)?;
        require_positive("delayed_ml_gen", "b", self.b)?;
        require_positive("delayed_ml_gen", "gamma", self.gamma)?;
        if !self.lambda.is_finite() || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(
                "lambda and mu must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Value at `t`; zero for `t < 0`, and `H(0) = 1` at the knots `t = kh`.
    pub fn eval(&self, t: f64, ctrl: &SeriesControl) -> Result<f64> {
        if t < 0.0 {
            return Ok(0.0);
        }
        if t.is_nan() {
            return Err(Error::Domain {
                what: "delayed_ml_gen",
                arg: t,
                reason: "NaN argument",
            });
        }
        DoubleSeries {
            n_step: self.a,
            k_step: self.gamma,
            offset: self.b,
            exponent_shift: 1.0,
            lambda: self.lambda,
            mu: self.mu,
            rows: Rows::Delayed { t, h: self.h },
        }
        .sum(ctrl, "delayed_ml_gen")
    }
}

/// Free-function form of [`DelayedMl::eval`].
pub fn delayed_ml_gen(params: &DelayedMl, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    params.validate()?;
    params.eval(t, ctrl)
}

/// `G_{α,β}(λ, μ; t) = Σ_n Σ_k C(n+k,k) λ^n μ^k t^{αn + (α−β)k} / Γ(αn + (α−β)k + α)`.
pub fn g_function(
    alpha: f64,
    beta: f64,
    lambda: f64,
    mu: f64,
    t: f64,
    ctrl: &SeriesControl,
) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Domain {
            what: "g_function",
            arg: alpha,
            reason: "alpha must lie in (1, 2]",
        });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain {
            what: "g_function",
            arg: beta,
            reason: "beta must lie in (0, 1)",
        });
    }
    if !(alpha - beta > 1.0) {
        return Err(Error::Domain {
            what: "g_function",
            arg: alpha - beta,
            reason: "alpha - beta must exceed 1",
        });
    }
    require_positive("g_function", "t", t)?;
    DoubleSeries {
        n_step: alpha,
        k_step: alpha - beta,
        offset: alpha,
        exponent_shift: alpha,
        lambda,
        mu,
        rows: Rows::Undelayed { t },
    }
    .sum(ctrl, "g_function")
}

/// Piecewise delayed Mittag-Leffler function `E^{h,a,b}(μ; t)` (scalar case).
///
/// Zero for `t ≤ −h`, `(h+t)^{b−1}/Γ(b)` on `(−h, 0]`, and on
/// `((k−1)h, kh]` the finite sum `Σ_{j=0}^{k} μ^j (t−(j−1)h)^{ja+b−1}/Γ(ja+b)`.
pub fn delayed_ml_piecewise(h: f64, a: f64, b: f64, mu: f64, t: f64) -> Result<f64> {
    require_positive("delayed_ml_piecewise", "h", h)?;
    require_positive("delayed_ml_piecewise", "a", a)?;
    require_positive("delayed_ml_piecewise", "b", b)?;
    if t <= -h {
        return Ok(0.0);
    }
    let last = if t <= 0.0 {
        0
    } else {
        let mut k = (t / h).ceil().max(1.0);
        while (k - 1.0) * h >= t {
            k -= 1.0;
        }
        while k * h < t {
            k += 1.0;
        }
        k as usize
    };
    let mut sum = 0.0;
    let mut mu_pow = 1.0;
    for j in 0..=last {
        if j > 0 {
            mu_pow *= mu;
            if mu_pow == 0.0 {
                break;
            }
        }
        let jf = j as f64;
        let base = t - (jf - 1.0) * h;
        let e = jf * a + b - 1.0;
        sum += mu_pow * base.powf(e) * recip_gamma(jf * a + b);
    }
    if sum.is_finite() {
        Ok(sum)
    } else {
        Err(Error::Overflow("delayed_ml_piecewise"))
    }
}
