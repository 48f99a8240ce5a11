//! Gamma function and its logarithm.
//!
//! Lanczos approximation (g = 7, nine coefficients) on `x >= 0.5`, with the
//! reflection formula below that. Positive integers up to 171 are returned
//! as exact factorial products.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Largest argument for which `Γ(x)` is finite in `f64`.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `sin(πx)` with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let mut r = x - 2.0 * (x / 2.0).round();
    let mut sign = 1.0;
    if r < 0.0 {
        r = -r;
        sign = -1.0;
    }
    if r > 0.5 {
        r = 1.0 - r;
    }
    if r == 0.0 {
        0.0
    } else {
        sign * (PI * r).sin()
    }
}

fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// Γ(x) for real `x`.
///
/// Fails with [`Error::Pole`] at `0, -1, -2, ...` and with
/// [`Error::Overflow`] beyond the representable range.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain {
            what: "gamma",
            arg: x,
            reason: "NaN argument",
        });
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow("gamma"));
    }
    if x == x.floor() && x <= 171.0 {
        let n = x as u32;
        let mut acc = 1.0_f64;
        for k in 2..n {
            acc *= f64::from(k);
        }
        return Ok(acc);
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let g = gamma_fn(1.0 - x);
        return match g {
            Ok(g) => Ok(PI / (s * g)),
            // Γ(1-x) overflowed, so Γ(x) underflows.
            Err(Error::Overflow(_)) => Ok(0.0),
            Err(e) => Err(e),
        };
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // Split the power so that t^(z+1/2) e^-t never overflows on its own.
    let half = t.powf((z + 0.5) / 2.0) * (-t / 2.0).exp();
    let value = (2.0 * PI).sqrt() * half * half * lanczos_sum(z);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("gamma"))
    }
}

/// `(ln|Γ(x)|, sign Γ(x))`, or `None` at a pole.
pub fn ln_gamma_signed(x: f64) -> Option<(f64, f64)> {
    if is_nonpositive_integer(x) || x.is_nan() {
        return None;
    }
    if x >= 0.5 {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        let lg = LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln();
        return Some((lg, 1.0));
    }
    if x > 0.0 {
        let (lg, _) = ln_gamma_signed(x + 1.0)?;
        return Some((lg - x.ln(), 1.0));
    }
    let s = sin_pi(x);
    let (lg1, _) = ln_gamma_signed(1.0 - x)?;
    Some((PI.ln() - s.abs().ln() - lg1, s.signum()))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::Domain {
            what: "ln_gamma",
            arg: x,
            reason: "argument must be positive",
        });
    }
    ln_gamma_signed(x).map(|(lg, _)| lg).ok_or(Error::Pole(x))
}

/// `1/Γ(x)`, zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    match gamma_fn(x) {
        Ok(g) => 1.0 / g,
        Err(_) => match ln_gamma_signed(x) {
            Some((lg, sign)) => sign * (-lg).exp(),
            None => 0.0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values from a 30-digit evaluation.
    const REFERENCE: [(f64, f64); 10] = [
        (0.5, 1.772_453_850_905_516),
        (1.5, 0.886_226_925_452_758),
        (3.3, 2.683_437_381_955_769),
        (10.7, 1_799_844.078_931_375_4),
        (55.5, 1.708_096_280_799_410_6e72),
        (100.25, 2.948_466_281_838_77e156),
        (170.5, 5.562_092_414_56e305),
        (0.001, 999.423_772_484_595_5),
        (-0.5, -3.544_907_701_811_032),
        (-2.5, -0.945_308_720_482_941_9),
    ];

    #[test]
    fn small_integers_are_factorials() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(2.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert_eq!(gamma_fn(11.0).unwrap(), 3_628_800.0);
        assert!(gamma_fn(171.0).unwrap().is_finite());
    }

    #[test]
    fn matches_reference_values() {
        for (x, g) in REFERENCE {
            let got = gamma_fn(x).unwrap();
            assert!(
                ((got - g) / g).abs() <= 1e-12,
                "gamma({x}) = {got}, expected {g}"
            );
        }
    }

    #[test]
    fn ln_gamma_consistent_with_gamma() {
        for x in [0.01, 0.3, 0.9, 1.0, 1.46, 2.0, 7.25, 40.0, 150.5] {
            let lg = ln_gamma(x).unwrap();
            assert_relative_eq!(lg.exp(), gamma_fn(x).unwrap(), max_relative = 1e-12);
        }
        let (lg, sign) = ln_gamma_signed(-0.5).unwrap();
        assert_eq!(sign, -1.0);
        assert_relative_eq!(lg.exp(), 3.544_907_701_811_032, max_relative = 1e-13);
    }

    #[test]
    fn poles_and_overflow() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Pole(_))));
        assert!(matches!(gamma_fn(-3.0), Err(Error::Pole(_))));
        assert!(matches!(gamma_fn(172.0), Err(Error::Overflow(_))));
        assert_eq!(recip_gamma(0.0), 0.0);
        assert_eq!(recip_gamma(-2.0), 0.0);
        assert!(ln_gamma_signed(-4.0).is_none());
    }

    #[test]
    fn sin_pi_exact_zeros() {
        for k in -5..=5 {
            assert_eq!(sin_pi(f64::from(k)), 0.0);
        }
        assert_relative_eq!(sin_pi(0.5), 1.0);
        assert_relative_eq!(sin_pi(-1.5), 1.0);
    }
}
