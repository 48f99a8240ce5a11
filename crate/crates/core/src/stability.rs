//! Ulam–Hyers constant and its empirical check on perturbed problems.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repsolver::{
    choose_omega, contraction_factor, PicardReport, ProblemSpec, RepresentationSolver,
    SolutionTrace, SolverConfig, WeightedNorm,
};

/// Perturbation shape with `sup |g| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GShape {
    Zero,
    One,
    Cos(f64),
    Sin(f64),
}

impl GShape {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            GShape::Zero => 0.0,
            GShape::One => 1.0,
            GShape::Cos(w) => (w * t).cos(),
            GShape::Sin(w) => (w * t).sin(),
        }
    }
}

impl FromStr for GShape {
    type Err = Error;

    /// `zero`, `one`, `cos:W` or `sin:W`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidParameter(format!(
                "unknown g-shape '{s}', expected one, zero, cos:W or sin:W"
            ))
        };
        let freq = |w: &str| {
            w.parse::<f64>()
                .ok()
                .filter(|w| w.is_finite())
                .ok_or_else(bad)
        };
        match s.split_once(':') {
            None if s == "one" => Ok(GShape::One),
            None if s == "zero" => Ok(GShape::Zero),
            Some(("cos", w)) => Ok(GShape::Cos(freq(w)?)),
            Some(("sin", w)) => Ok(GShape::Sin(freq(w)?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GShape::Zero => write!(f, "zero"),
            GShape::One => write!(f, "one"),
            GShape::Cos(w) => write!(f, "cos:{w}"),
            GShape::Sin(w) => write!(f, "sin:{w}"),
        }
    }
}

/// Forcing perturbation `ε·g(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub g_shape: GShape,
}

impl PerturbationSpec {
    pub fn new(epsilon: f64, g_shape: GShape) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        Ok(Self { epsilon, g_shape })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.epsilon * self.g_shape.eval(t)
    }
}

/// `c = T^{α−1} exp(|λ|T^{α−β} + |μ|T^α) / (1 − q)`.
pub fn uh_constant(spec: &ProblemSpec, l_f: f64, omega: f64) -> Result<f64> {
    let q = contraction_factor(spec, l_f, omega)?;
    if q >= 1.0 {
        return Err(Error::NonContraction { q });
    }
    Ok(spec.horizon().powf(spec.alpha - 1.0) * spec.growth_factor() / (1.0 - q))
}

#[derive(Debug, Clone)]
pub struct PerturbedOutcome {
    /// Solution of the perturbed problem.
    pub x: SolutionTrace,
    /// Solution of the unperturbed problem.
    pub y: SolutionTrace,
    pub x_report: PicardReport,
    pub y_report: PicardReport,
    /// `‖x − y‖_ω`.
    pub lhs: f64,
    /// `ε·c`.
    pub rhs_bound: f64,
    pub uh_constant: f64,
    pub omega: f64,
}

impl PerturbedOutcome {
    /// `lhs ≤ ε·c + 2·tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs_bound + 2.0 * tol
    }
}

/// Solves the problem with and without the forcing `ε·g` and measures the
/// weighted distance between the two fixed points.
pub fn perturbed_solve(
    spec: &ProblemSpec,
    pert: &PerturbationSpec,
    cfg: &SolverConfig,
) -> Result<PerturbedOutcome> {
    let solver = RepresentationSolver::new(spec.clone(), *cfg)?;
    let l_f = spec.lipschitz();
    let omega = match cfg.omega {
        Some(w) => w,
        None => choose_omega(spec, l_f, cfg.omega_margin)?,
    };
    let c = uh_constant(spec, l_f, omega)?;
    let extra = |t: f64| pert.eval(t);
    let (x, y) = rayon::join(
        || solver.picard_solve_with(Some(&extra)),
        || solver.picard_solve(),
    );
    let (x, x_report) = x?;
    let (y, y_report) = y?;
    let norm = WeightedNorm::new(solver.grid(), spec.alpha, omega, &cfg.series)?;
    Ok(PerturbedOutcome {
        lhs: norm.distance(&x.values, &y.values),
        rhs_bound: pert.epsilon * c,
        uh_constant: c,
        omega,
        x,
        y,
        x_report,
        y_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraccalc::ShiftedPolynomial;
    use crate::repsolver::{RhsShape, RhsSpec};
    use crate::specfun::gamma_fn;

    fn spec(lambda: f64, mu: f64, l: usize, rhs: RhsSpec) -> ProblemSpec {
        let phi = ShiftedPolynomial::new(-1.0, vec![0.0, 0.0, 1.0]);
        ProblemSpec::with_history_data(1.6, 0.4, lambda, mu, 1.0, l, phi, rhs).unwrap()
    }

    #[test]
    fn shapes() {
        assert_eq!("one".parse::<GShape>().unwrap(), GShape::One);
        assert_eq!("cos:2".parse::<GShape>().unwrap(), GShape::Cos(2.0));
        assert_eq!("sin:0.5".parse::<GShape>().unwrap(), GShape::Sin(0.5));
        assert!("cos:".parse::<GShape>().is_err());
        assert!("tan:1".parse::<GShape>().is_err());
        assert_eq!(GShape::Cos(2.0).to_string(), "cos:2");
        assert!(PerturbationSpec::new(-1.0, GShape::One).is_err());
    }

    #[test]
    fn constants() {
        let p = spec(-0.5, 0.3, 3, RhsSpec::zero());
        let growth = (0.5 * 3f64.powf(1.2) + 0.3 * 3f64.powf(1.6)).exp();
        let c0 = uh_constant(&p, 0.0, 1.0).unwrap();
        assert!((c0 - 3f64.powf(0.6) * growth).abs() < 1e-12 * c0);

        let p1 = ProblemSpec::with_history_data(
            1.6,
            0.4,
            0.0,
            0.0,
            1.0,
            1,
            p.phi.clone(),
            RhsSpec::zero(),
        )
        .unwrap();
        let w = 4.0;
        let q = gamma_fn(1.6).unwrap() / w * 0.5;
        assert!((uh_constant(&p1, 0.5, w).unwrap() - 1.0 / (1.0 - q)).abs() < 1e-14);

        // Margin 2 gives q = 1/2, so c doubles the q = 0 value.
        let w2 = choose_omega(&p, 0.25, 2.0).unwrap();
        assert!((uh_constant(&p, 0.25, w2).unwrap() - 2.0 * c0).abs() < 1e-10 * c0);
        assert!(uh_constant(&p, 0.25, 0.5 * w2 / 2.0).is_err());
    }

    #[test]
    fn zero_perturbation() {
        let p = spec(-0.5, 0.3, 1, RhsSpec::nonlinear(0.25, RhsShape::Sin));
        let cfg = SolverConfig {
            grid_divisor: 16,
            ..SolverConfig::default()
        };
        let out =
            perturbed_solve(&p, &PerturbationSpec::new(0.0, GShape::One).unwrap(), &cfg).unwrap();
        assert_eq!(out.lhs, 0.0);
        assert_eq!(out.rhs_bound, 0.0);
        assert!(out.holds(0.0));
    }

    #[test]
    fn linear_scaling_and_bound() {
        let p = spec(-0.5, 0.3, 1, RhsSpec::nonlinear(0.25, RhsShape::Sin));
        let cfg = SolverConfig {
            grid_divisor: 16,
            ..SolverConfig::default()
        };
        let a =
            perturbed_solve(&p, &PerturbationSpec::new(1e-2, GShape::One).unwrap(), &cfg).unwrap();
        let b =
            perturbed_solve(&p, &PerturbationSpec::new(1e-3, GShape::One).unwrap(), &cfg).unwrap();
        assert!(a.holds(cfg.picard_tol) && b.holds(cfg.picard_tol));
        let r = a.lhs / b.lhs;
        assert!((9.0..=11.0).contains(&r), "ratio {r}");
    }
}
