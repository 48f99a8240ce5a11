use serde::{Deserialize, Serialize};

use super::gamma::ln_gamma_signed;
use super::series::{exp_term, sum_series, SeriesControl};
use crate::error::{Error, Result};

/// Parameters of `pΨq`: numerator pairs `(λ_l, α_l)` and denominator pairs
/// `(b_j, β_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrightSpec {
    pub upper: Vec<(f64, f64)>,
    pub lower: Vec<(f64, f64)>,
}

impl WrightSpec {
    pub fn new(upper: Vec<(f64, f64)>, lower: Vec<(f64, f64)>) -> Self {
        Self { upper, lower }
    }

    /// `Σβ_j − Σα_l`; the series converges for every `z` when this exceeds −1.
    pub fn margin(&self) -> f64 {
        let lower: f64 = self.lower.iter().map(|&(_, beta)| beta).sum();
        let upper: f64 = self.upper.iter().map(|&(_, alpha)| alpha).sum();
        lower - upper
    }
}

/// Generalized Wright function
/// `Σ_k [Π Γ(λ_l + α_l k) / Π Γ(b_j + β_j k)] z^k / k!`.
pub fn wright_series(spec: &WrightSpec, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    ctrl.validate()?;
    let margin = spec.margin();
    if !(margin > -1.0) {
        return Err(Error::Divergent { margin });
    }
    let ln_z = z.abs().ln();
    sum_series(ctrl, "wright_series", |k| {
        if z == 0.0 && k > 0 {
            return Ok(0.0);
        }
        let kf = k as f64;
        let mut log_mag = 0.0;
        let mut sign = 1.0;
        for &(lam, alpha) in &spec.upper {
            let arg = lam + alpha * kf;
            let (lg, s) = ln_gamma_signed(arg).ok_or(Error::Pole(arg))?;
            log_mag += lg;
            sign *= s;
        }
        for &(b, beta) in &spec.lower {
            match ln_gamma_signed(b + beta * kf) {
                // 1/Γ vanishes at its poles.
                None => return Ok(0.0),
                Some((lg, s)) => {
                    log_mag -= lg;
                    sign *= s;
                }
            }
        }
        if k > 0 {
            log_mag += kf * ln_z - ln_gamma_signed(kf + 1.0).map_or(0.0, |(lg, _)| lg);
            if z < 0.0 && k % 2 == 1 {
                sign = -sign;
            }
        }
        exp_term(log_mag, sign, "wright_series")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::mittag_leffler::mittag_leffler;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_ratios_cancel_to_exponential() {
        let spec = WrightSpec::new(vec![(1.0, 1.0)], vec![(1.0, 1.0)]);
        let v = wright_series(&spec, 0.3, &SeriesControl::default()).unwrap();
        assert_relative_eq!(v, f64::exp(0.3), max_relative = 1e-14);
    }

    #[test]
    fn reduces_to_mittag_leffler() {
        let (a, b, z) = (1.2, 1.8, 0.7);
        let spec = WrightSpec::new(vec![(1.0, 1.0)], vec![(b, a)]);
        let ctrl = SeriesControl::default();
        let v = wright_series(&spec, z, &ctrl).unwrap();
        assert_relative_eq!(
            v,
            mittag_leffler(a, b, z, &ctrl).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn empty_numerator_at_zero() {
        let spec = WrightSpec::new(vec![], vec![(1.0, 1.0)]);
        assert_eq!(
            wright_series(&spec, 0.0, &SeriesControl::default()).unwrap(),
            1.0
        );
    }

    #[test]
    fn denominator_poles_zero_the_term() {
        // 1/Γ(0) = 0 kills k = 0: Σ_{k≥1} z^k/(k!Γ(k)).
        let spec = WrightSpec::new(vec![], vec![(0.0, 1.0)]);
        let v = wright_series(&spec, 0.5, &SeriesControl::default()).unwrap();
        let expected: f64 = (1..30)
            .map(|k| {
                let kf = f64::from(k);
                let fact: f64 = (1..=k).map(f64::from).product();
                0.5_f64.powf(kf) / (fact * fact / kf)
            })
            .sum();
        assert_relative_eq!(v, expected, max_relative = 1e-13);
    }

    #[test]
    fn numerator_pole_is_an_error() {
        let spec = WrightSpec::new(vec![(0.0, 1.0)], vec![(1.0, 1.0)]);
        assert!(matches!(
            wright_series(&spec, 0.5, &SeriesControl::default()),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn divergent_margin_rejected() {
        let spec = WrightSpec::new(vec![(1.0, 2.0)], vec![(1.0, 1.0)]);
        assert!(matches!(
            wright_series(&spec, 0.1, &SeriesControl::default()),
            Err(Error::Divergent { .. })
        ));
    }
}
