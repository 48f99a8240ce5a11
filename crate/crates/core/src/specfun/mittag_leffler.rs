//! Two-parameter Mittag-Leffler function and the derived kernels.

use super::delayed::term_value;
use super::gamma::recip_gamma;
use super::series::{sum_series, SeriesControl};
use crate::error::{Error, Result};

pub(crate) fn require_positive(what: &'static str, name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            arg: v,
            reason: match name {
                "a" => "parameter a must be positive",
                "b" => "parameter b must be positive",
                "t" => "t must be positive",
                "h" => "delay h must be positive",
                "omega" => "omega must be positive",
                _ => "parameter must be positive",
            },
        })
    }
}

/// `E_{a,b}(z) = Σ z^k / Γ(ak + b)`.
pub fn mittag_leffler(a: f64, b: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    require_positive("mittag_leffler", "a", a)?;
    require_positive("mittag_leffler", "b", b)?;
    ctrl.validate()?;
    let ln_z = z.abs().ln();
    let sign_z = z.signum();
    sum_series(ctrl, "mittag_leffler", |k| {
        if z == 0.0 && k > 0 {
            return Ok(0.0);
        }
        let arg = a * k as f64 + b;
        let zk = if k <= i32::MAX as usize {
            z.powi(k as i32)
        } else {
            f64::NAN
        };
        if zk.is_finite() && zk != 0.0 && arg <= 170.0 {
            return Ok(zk * recip_gamma(arg));
        }
        let sign = if sign_z < 0.0 && k % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        term_value(k as f64 * ln_z, sign, arg, "mittag_leffler")
    })
}

/// `e_{a,b}(λ; t) = t^{b-1} E_{a,b}(λ t^a)` for `t > 0`.
pub fn ml_kernel(a: f64, b: f64, lambda: f64, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    require_positive("ml_kernel", "t", t)?;
    let e = mittag_leffler(a, b, lambda * t.powf(a), ctrl)?;
    Ok(t.powf(b - 1.0) * e)
}

/// Weight of the Bielecki-type norm, `E_{α,1}(ω t^α)`.
pub fn weight_ml(alpha: f64, omega: f64, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    require_positive("weight_ml", "omega", omega)?;
    if t < 0.0 {
        return Err(Error::Domain {
            what: "weight_ml",
            arg: t,
            reason: "t must be non-negative",
        });
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    mittag_leffler(alpha, 1.0, omega * t.powf(alpha), ctrl)
}
