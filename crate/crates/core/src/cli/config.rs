//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::{rl_limit_at_base, ShiftedPolynomial};
use crate::oracle::OracleConfig;
use crate::quadrature::QuadConfig;
use crate::repsolver::{CompanionReading, ProblemSpec, RhsShape, RhsSpec, SolverConfig};
use crate::specfun::SeriesControl;

/// A polynomial as a bare coefficient array (expanded about the section's
/// default base point) or with an explicit base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolySpec {
    Coefficients(Vec<f64>),
    Shifted(ShiftedPoly),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftedPoly {
    pub base: f64,
    pub coefficients: Vec<f64>,
}

impl Default for PolySpec {
    fn default() -> Self {
        PolySpec::Coefficients(Vec::new())
    }
}

impl PolySpec {
    fn resolve(&self, default_base: f64) -> ShiftedPolynomial {
        match self {
            PolySpec::Coefficients(c) => ShiftedPolynomial::new(default_base, c.clone()),
            PolySpec::Shifted(p) => ShiftedPolynomial::new(p.base, p.coefficients.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RhsSection {
    /// Polynomial in `t`, expanded about 0 by default.
    pub poly: PolySpec,
    pub kappa: f64,
    pub shape: Option<RhsShape>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub h: f64,
    pub l: usize,
    /// History polynomial, expanded about `−h` by default.
    #[serde(default)]
    pub phi: PolySpec,
    /// Defaults to `D^{α−1}φ(−h⁺)`.
    #[serde(default)]
    pub c1: Option<f64>,
    /// Defaults to `I^{2−α}φ(−h⁺)`.
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default)]
    pub rhs: RhsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub series: SeriesControl,
    pub quad_tol: f64,
    pub quad_nodes: usize,
    pub quad_max_depth: usize,
    pub grid_divisor: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub omega_margin: f64,
    pub omega: Option<f64>,
    pub companion: CompanionReading,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            series: s.series,
            quad_tol: s.quad.tol,
            quad_nodes: s.quad.nodes,
            quad_max_depth: s.quad.max_depth,
            grid_divisor: s.grid_divisor,
            picard_tol: s.picard_tol,
            picard_max_iter: s.picard_max_iter,
            omega_margin: s.omega_margin,
            omega: s.omega,
            companion: s.companion,
        }
    }
}

impl NumericsSection {
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            series: self.series,
            quad: QuadConfig {
                tol: self.quad_tol,
                nodes: self.quad_nodes,
                max_depth: self.quad_max_depth,
            },
            grid_divisor: self.grid_divisor,
            picard_tol: self.picard_tol,
            picard_max_iter: self.picard_max_iter,
            omega_margin: self.omega_margin,
            omega: self.omega,
            companion: self.companion,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    /// Significant digits in CSV values.
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            csv: None,
            summary: None,
            precision: 17,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem_spec()?;
        self.solver_config()?;
        if !(1..=17).contains(&self.output.precision) {
            return Err(Error::Config(format!(
                "output precision must lie in 1..=17, got {}",
                self.output.precision
            )));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        self.numerics.solver_config()
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let p = &self.problem;
        let phi = p.phi.resolve(-p.h);
        let rhs = RhsSpec {
            poly_part: p.rhs.poly.resolve(0.0),
            kappa: p.rhs.kappa,
            shape: p.rhs.shape.unwrap_or(if p.rhs.kappa == 0.0 {
                RhsShape::Zero
            } else {
                RhsShape::Identity
            }),
        };
        let mut spec = ProblemSpec {
            alpha: p.alpha,
            beta: p.beta,
            lambda: p.lambda,
            mu: p.mu,
            h: p.h,
            l: p.l,
            phi,
            c1: 0.0,
            c2: 0.0,
            rhs,
        };
        spec.validate()?;
        spec.c1 = match p.c1 {
            Some(v) => v,
            None => rl_limit_at_base(&spec.phi, spec.alpha - 1.0)?,
        };
        spec.c2 = match p.c2 {
            Some(v) => v,
            None => rl_limit_at_base(&spec.phi, spec.alpha - 2.0)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "problem": {"alpha": 1.6, "beta": 0.4, "lambda": -0.5, "mu": 0.3, "h": 1, "l": 3,
                    "phi": [0, 0, 1], "rhs": {"kappa": 0.25, "shape": "sin"}}
    }"#;

    #[test]
    fn parses_defaults() {
        let cfg = RunConfig::from_json(BASE).unwrap();
        let spec = cfg.problem_spec().unwrap();
        assert_eq!(spec.phi.base_point, -1.0);
        assert_eq!((spec.c1, spec.c2), (0.0, 0.0));
        assert_eq!(spec.rhs.shape, RhsShape::Sin);
        assert_eq!(cfg.solver_config().unwrap(), SolverConfig::default());
        assert_eq!(cfg.oracle, OracleConfig::default());
    }

    #[test]
    fn explicit_base_and_overrides() {
        let text = r#"{
            "problem": {"alpha": 1.6, "beta": 0.4, "lambda": 0, "mu": 0, "h": 1, "l": 1,
                        "phi": {"base": -1, "coefficients": [0, 1]}, "c1": 0.5, "c2": 0},
            "numerics": {"grid_divisor": 32, "omega": 3.0, "companion": "literal",
                         "series": {"abs_tol": 1e-15}},
            "oracle": {"step": 0.0625},
            "output": {"precision": 10}
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let spec = cfg.problem_spec().unwrap();
        assert_eq!(spec.c1, 0.5);
        let s = cfg.solver_config().unwrap();
        assert_eq!(s.grid_divisor, 32);
        assert_eq!(s.omega, Some(3.0));
        assert_eq!(s.companion, CompanionReading::Literal);
        assert_eq!(s.series.abs_tol, 1e-15);
        assert_eq!(s.series.max_terms, SeriesControl::default().max_terms);
        assert_eq!(cfg.oracle.step, 0.0625);
    }

    #[test]
    fn rejects_bad_input() {
        let unknown = BASE.replace("\"l\": 3", "\"l\": 3, \"extra\": 1");
        assert!(matches!(
            RunConfig::from_json(&unknown),
            Err(Error::Config(_))
        ));
        let beta = BASE.replace("\"beta\": 0.4", "\"beta\": 0.8");
        assert!(matches!(
            RunConfig::from_json(&beta),
            Err(Error::InvalidParameter(_))
        ));
        assert!(RunConfig::from_json("{}").is_err());
        let bad_section = BASE.replace(
            "\"problem\"",
            "\"numerics\": {\"tolerance\": 1}, \"problem\"",
        );
        assert!(RunConfig::from_json(&bad_section).is_err());
        // φ(−h) ≠ 0 leaves D^{α−1}φ unbounded unless c1 is given.
        let jump = BASE.replace("[0, 0, 1]", "[1, 0, 1]");
        assert!(RunConfig::from_json(&jump).is_err());
        let given = jump.replace("\"l\": 3", "\"l\": 3, \"c1\": 0, \"c2\": 1");
        assert!(RunConfig::from_json(&given).is_ok());
    }
}
