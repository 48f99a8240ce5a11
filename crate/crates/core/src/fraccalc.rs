//! Riemann–Liouville fractional integrals and derivatives.
//!
//! Polynomial data is handled exactly through the power rule; sampled data
//! goes through the Grünwald–Letnikov sum on a uniform grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{gamma_fn, recip_gamma};

/// Nodes `t_start + i·step`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub t_start: f64,
    pub step: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(t_start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || !t_start.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if count == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one node".into(),
            ));
        }
        Ok(Self {
            t_start,
            step,
            count,
        })
    }

    /// Grid over `[-h, l·h]` with `divisor` cells per delay interval, so that
    /// `0` and every multiple of `h` are nodes.
    pub fn delay_grid(h: f64, divisor: usize, l: usize) -> Result<Self> {
        if divisor == 0 {
            return Err(Error::InvalidParameter(
                "grid divisor must be positive".into(),
            ));
        }
        Self::new(-h, h / divisor as f64, (l + 1) * divisor + 1)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.node(i))
    }

    pub fn t_end(&self) -> f64 {
        self.node(self.count - 1)
    }

    /// Number of steps covering `span`, if `span` is an integer multiple of the step.
    pub fn steps_in(&self, span: f64) -> Option<usize> {
        let r = span / self.step;
        let n = r.round();
        if n >= 0.0 && (r - n).abs() <= 1e-9 * n.max(1.0) {
            Some(n as usize)
        } else {
            None
        }
    }
}

/// `Σ c_m (t − a)^m` with `a` the base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftedPolynomial {
    pub base_point: f64,
    pub coefficients: Vec<f64>,
}

impl ShiftedPolynomial {
    pub fn new(base_point: f64, coefficients: Vec<f64>) -> Self {
        Self {
            base_point,
            coefficients,
        }
    }

    pub fn zero(base_point: f64) -> Self {
        Self::new(base_point, Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = t - self.base_point;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(m, &c)| (m as f64, c))
    }
}

fn check_power(what: &'static str, nu: f64, a: f64, t: f64, allow_base: bool) -> Result<()> {
    if !(nu > -1.0) {
        return Err(Error::Domain {
            what,
            arg: nu,
            reason: "power exponent must exceed -1",
        });
    }
    if t < a || (t == a && !allow_base) || t.is_nan() {
        return Err(Error::Domain {
            what,
            arg: t,
            reason: "t must lie to the right of the base point",
        });
    }
    Ok(())
}

/// `D^order_{a+} (t−a)^ν = Γ(ν+1)/Γ(ν−order+1) (t−a)^{ν−order}`.
///
/// The result is zero when `ν − order + 1` is a pole of Γ.
pub fn rl_derivative_power(a: f64, nu: f64, order: f64, t: f64) -> Result<f64> {
    check_power("rl_derivative_power", nu, a, t, false)?;
    if order < 0.0 {
        return Err(Error::Domain {
            what: "rl_derivative_power",
            arg: order,
            reason: "order must be non-negative",
        });
    }
    let r = recip_gamma(nu - order + 1.0);
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_fn(nu + 1.0)? * r * (t - a).powf(nu - order))
}

/// `I^order_{a+} (t−a)^ν = Γ(ν+1)/Γ(ν+order+1) (t−a)^{ν+order}`; zero at `t = a`.
pub fn rl_integral_power(a: f64, nu: f64, order: f64, t: f64) -> Result<f64> {
    check_power("rl_integral_power", nu, a, t, true)?;
    if !(order > 0.0) {
        return Err(Error::Domain {
            what: "rl_integral_power",
            arg: order,
            reason: "order must be positive",
        });
    }
    if t == a {
        return Ok(0.0);
    }
    Ok(gamma_fn(nu + 1.0)? * recip_gamma(nu + order + 1.0) * (t - a).powf(nu + order))
}

pub fn rl_derivative_poly(p: &ShiftedPolynomial, order: f64, t: f64) -> Result<f64> {
    if t <= p.base_point {
        return Err(Error::Domain {
            what: "rl_derivative_poly",
            arg: t,
            reason: "t must lie to the right of the base point",
        });
    }
    p.terms()
        .map(|(m, c)| rl_derivative_power(p.base_point, m, order, t).map(|v| c * v))
        .sum()
}

/// `D^order_{a+} p` at `t = a + x`, taking the offset `x > 0` directly so that
/// points next to the base keep full relative precision.
pub fn rl_derivative_poly_offset(p: &ShiftedPolynomial, order: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            what: "rl_derivative_poly_offset",
            arg: x,
            reason: "offset from the base point must be positive",
        });
    }
    p.terms()
        .map(|(m, c)| rl_derivative_power(0.0, m, order, x).map(|v| c * v))
        .sum()
}

pub fn rl_integral_poly(p: &ShiftedPolynomial, order: f64, t: f64) -> Result<f64> {
    p.terms()
        .map(|(m, c)| rl_integral_power(p.base_point, m, order, t).map(|v| c * v))
        .sum()
}

/// Limit of `D^order_{a+} p(t)` as `t → a⁺` (a negative `order` means the
/// integral of that order). Fails when the limit is infinite.
pub fn rl_limit_at_base(p: &ShiftedPolynomial, order: f64) -> Result<f64> {
    let mut value = 0.0;
    for (m, c) in p.terms() {
        let exponent = m - order;
        let r = recip_gamma(exponent + 1.0);
        if r == 0.0 || exponent > 0.0 {
            continue;
        }
        if exponent == 0.0 {
            value += c * gamma_fn(m + 1.0)? * r;
        } else {
            return Err(Error::Domain {
                what: "rl_limit_at_base",
                arg: order,
                reason: "limit at the base point is unbounded",
            });
        }
    }
    Ok(value)
}

/// Grünwald–Letnikov weights `w_j = w_{j−1}(1 − (order+1)/j)`, `w_0 = 1`.
pub fn gl_weights(order: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    if n == 0 {
        return w;
    }
    w.push(1.0);
    for j in 1..n {
        let prev = w[j - 1];
        w.push(prev * (1.0 - (order + 1.0) / j as f64));
    }
    w
}

/// Grünwald–Letnikov approximation of `D^order_{t_start+}` at every node.
pub fn gl_derivative(grid: &UniformGrid, samples: &[f64], order: f64) -> Result<Vec<f64>> {
    if !(order > 0.0 && order <= 2.0) {
        return Err(Error::Domain {
            what: "gl_derivative",
            arg: order,
            reason: "order must lie in (0, 2]",
        });
    }
    if samples.len() != grid.count {
        return Err(Error::GridMismatch(format!(
            "{} samples on a grid of {} nodes",
            samples.len(),
            grid.count
        )));
    }
    let w = gl_weights(order, samples.len());
    let scale = grid.step.powf(-order);
    Ok((0..samples.len())
        .map(|i| {
            let acc: f64 = w[..=i]
                .iter()
                .zip(samples[..=i].iter().rev())
                .map(|(w, y)| w * y)
                .sum();
            scale * acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_rule_examples() {
        assert_eq!(rl_derivative_power(0.0, 0.6, 1.6, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            rl_derivative_power(0.0, 1.0, 1.0, 2.0).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            rl_derivative_power(0.0, 1.0, 0.5, 1.0).unwrap(),
            1.0 / gamma_fn(1.5).unwrap(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            rl_derivative_power(0.0, 1.0, 0.5, 1.0).unwrap(),
            std::f64::consts::FRAC_2_SQRT_PI,
            max_relative = 1e-13
        );
        assert!(rl_derivative_power(0.0, -1.0, 0.5, 1.0).is_err());
        assert!(rl_derivative_power(0.0, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn polynomial_derivatives() {
        let one = ShiftedPolynomial::new(0.0, vec![1.0]);
        assert_relative_eq!(
            rl_derivative_poly(&one, 0.5, 1.0).unwrap(),
            0.564_189_583_547_756_3,
            max_relative = 1e-13
        );
        let sq = ShiftedPolynomial::new(-1.0, vec![0.0, 0.0, 1.0]);
        for t in [-0.5, 0.0, 2.0] {
            assert_relative_eq!(
                rl_derivative_poly(&sq, 2.0, t).unwrap(),
                2.0,
                max_relative = 1e-14
            );
        }
        let zero = ShiftedPolynomial::zero(0.0);
        assert_eq!(rl_derivative_poly(&zero, 0.7, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn polynomial_integrals() {
        let one = ShiftedPolynomial::new(0.0, vec![1.0]);
        assert_relative_eq!(
            rl_integral_poly(&one, 1.0, 3.0).unwrap(),
            3.0,
            max_relative = 1e-15
        );
        let lin = ShiftedPolynomial::new(0.0, vec![0.0, 1.0]);
        assert_relative_eq!(
            rl_integral_poly(&lin, 0.5, 1.0).unwrap(),
            0.752_252_778_063_675_3,
            max_relative = 1e-13
        );
        let sq = ShiftedPolynomial::new(2.0, vec![0.0, 0.0, 1.0]);
        assert_eq!(rl_integral_poly(&sq, 0.3, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn integral_then_derivative_is_identity() {
        let p = ShiftedPolynomial::new(-1.0, vec![0.5, -2.0, 0.3, 1.25]);
        for order in [0.2, 0.5, 1.0, 1.6, 2.0] {
            for t in [-0.7, 0.0, 0.4, 2.5] {
                let lifted = p
                    .terms()
                    .map(|(m, c)| {
                        let g = gamma_fn(m + 1.0).unwrap() / gamma_fn(m + order + 1.0).unwrap();
                        (m + order, c * g)
                    })
                    .collect::<Vec<_>>();
                let back: f64 = lifted
                    .iter()
                    .map(|&(nu, c)| c * rl_derivative_power(p.base_point, nu, order, t).unwrap())
                    .sum();
                assert!((back - p.eval(t)).abs() <= 1e-12 * p.eval(t).abs().max(1.0));
            }
        }
    }

    #[test]
    fn limits_at_base() {
        let sq = ShiftedPolynomial::new(-1.0, vec![0.0, 0.0, 1.0]);
        assert_eq!(rl_limit_at_base(&sq, 0.6).unwrap(), 0.0);
        assert_eq!(rl_limit_at_base(&sq, -0.4).unwrap(), 0.0);
        let lin = ShiftedPolynomial::new(-1.0, vec![0.0, 3.0]);
        assert_relative_eq!(rl_limit_at_base(&lin, 1.0).unwrap(), 3.0);
        let c = ShiftedPolynomial::new(-1.0, vec![1.0]);
        assert!(rl_limit_at_base(&c, 0.6).is_err());
        assert_eq!(rl_limit_at_base(&c, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gl_classical_derivative() {
        let grid = UniformGrid::new(0.0, 2f64.powi(-8), 257).unwrap();
        let y: Vec<f64> = grid.nodes().collect();
        let d = gl_derivative(&grid, &y, 1.0).unwrap();
        for v in &d[1..] {
            assert!((v - 1.0).abs() < 1e-6);
        }
        let z = vec![0.0; grid.count];
        assert!(gl_derivative(&grid, &z, 0.7)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn gl_first_order_convergence() {
        let exact = rl_derivative_power(0.0, 1.5, 0.5, 1.0).unwrap();
        assert_relative_eq!(exact, 1.329_340_388_179_137, max_relative = 1e-13);
        let mut errs = Vec::new();
        for p in 6..=10 {
            let n = 1usize << p;
            let grid = UniformGrid::new(0.0, 1.0 / n as f64, n + 1).unwrap();
            let y: Vec<f64> = grid.nodes().map(|t| t.powf(1.5)).collect();
            let d = gl_derivative(&grid, &y, 0.5).unwrap();
            errs.push((d[n] - exact).abs());
        }
        for w in errs.windows(2) {
            let observed = (w[0] / w[1]).log2();
            assert!(observed >= 0.9, "observed order {observed}");
        }
    }

    #[test]
    fn gl_rejects_bad_order() {
        let grid = UniformGrid::new(0.0, 0.1, 3).unwrap();
        assert!(gl_derivative(&grid, &[0.0; 3], 2.5).is_err());
        assert!(gl_derivative(&grid, &[0.0; 3], 0.0).is_err());
        assert!(gl_derivative(&grid, &[0.0; 2], 0.5).is_err());
    }
}
