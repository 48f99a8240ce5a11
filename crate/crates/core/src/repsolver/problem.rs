use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::{rl_limit_at_base, ShiftedPolynomial, UniformGrid};

/// Shape applied to the state in `f(t, y) = p(t) + κ·shape(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsShape {
    Zero,
    Identity,
    Sin,
    Cos,
    Tanh,
}

impl RhsShape {
    pub fn apply(self, y: f64) -> f64 {
        match self {
            RhsShape::Zero => 0.0,
            RhsShape::Identity => y,
            RhsShape::Sin => y.sin(),
            RhsShape::Cos => y.cos(),
            RhsShape::Tanh => y.tanh(),
        }
    }

    pub fn derivative(self, y: f64) -> f64 {
        match self {
            RhsShape::Zero => 0.0,
            RhsShape::Identity => 1.0,
            RhsShape::Sin => y.cos(),
            RhsShape::Cos => -y.sin(),
            RhsShape::Tanh => 1.0 - y.tanh().powi(2),
        }
    }
}

/// Globally Lipschitz nonlinearity `f(t, y) = p(t) + κ·shape(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhsSpec {
    pub poly_part: ShiftedPolynomial,
    pub kappa: f64,
    pub shape: RhsShape,
}

impl RhsSpec {
    pub fn zero() -> Self {
        Self {
            poly_part: ShiftedPolynomial::zero(0.0),
            kappa: 0.0,
            shape: RhsShape::Zero,
        }
    }

    pub fn forcing(poly_part: ShiftedPolynomial) -> Self {
        Self {
            poly_part,
            kappa: 0.0,
            shape: RhsShape::Zero,
        }
    }

    pub fn nonlinear(kappa: f64, shape: RhsShape) -> Self {
        Self {
            poly_part: ShiftedPolynomial::zero(0.0),
            kappa,
            shape,
        }
    }

    pub fn eval(&self, t: f64, y: f64) -> f64 {
        self.poly_part.eval(t) + self.state_part(y)
    }

    fn state_part(&self, y: f64) -> f64 {
        if self.shape == RhsShape::Zero || self.kappa == 0.0 {
            0.0
        } else {
            self.kappa * self.shape.apply(y)
        }
    }

    pub fn dy(&self, y: f64) -> f64 {
        self.kappa * self.shape.derivative(y)
    }

    /// True when `f` does not depend on `y`.
    pub fn is_state_free(&self) -> bool {
        self.shape == RhsShape::Zero || self.kappa == 0.0
    }

    /// Exact global Lipschitz constant in `y`.
    pub fn lipschitz(&self) -> f64 {
        if self.is_state_free() {
            0.0
        } else {
            self.kappa.abs()
        }
    }
}

/// Cauchy problem for the delayed two-derivative Langevin equation
///
/// ```text
/// D^α y(t) − λ D^β y(t) = μ y(t − h) + f(t, y(t)),   t ∈ (0, T],  T = l·h,
/// y = φ on [−h, 0],
/// ```
///
/// with both Riemann–Liouville derivatives based at `−h`. `c1` and `c2` are
/// the data `D^{α−1} y(−h⁺)` and `I^{2−α} y(−h⁺)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub h: f64,
    pub l: usize,
    pub phi: ShiftedPolynomial,
    pub c1: f64,
    pub c2: f64,
    pub rhs: RhsSpec,
}

impl ProblemSpec {
    /// Builds a problem with `c1`, `c2` taken from the history polynomial
    /// (`D^{α−1}φ(−h⁺)` and `I^{2−α}φ(−h⁺)`).
    #[allow(clippy::too_many_arguments)]
    pub fn with_history_data(
        alpha: f64,
        beta: f64,
        lambda: f64,
        mu: f64,
        h: f64,
        l: usize,
        phi: ShiftedPolynomial,
        rhs: RhsSpec,
    ) -> Result<Self> {
        let (c1, c2) = history_initial_data(&phi, alpha)?;
        let spec = Self {
            alpha,
            beta,
            lambda,
            mu,
            h,
            l,
            phi,
            c1,
            c2,
            rhs,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return bad(format!("alpha must lie in (1, 2], got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.alpha - self.beta > 1.0) {
            return bad(format!(
                "alpha - beta must exceed 1, got {}",
                self.alpha - self.beta
            ));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("delay h must be positive, got {}", self.h));
        }
        if self.l == 0 {
            return bad("l must be a positive integer".into());
        }
        if !self.lambda.is_finite() || !self.mu.is_finite() {
            return bad("lambda and mu must be finite".into());
        }
        if (self.phi.base_point + self.h).abs() > 1e-12 * self.h {
            return bad(format!(
                "history polynomial must be based at -h = {}, got {}",
                -self.h, self.phi.base_point
            ));
        }
        if !self.c1.is_finite() || !self.c2.is_finite() {
            return bad("initial data c1, c2 must be finite".into());
        }
        if !self.rhs.kappa.is_finite() {
            return bad("kappa must be finite".into());
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.l as f64 * self.h
    }

    /// `exp(|λ| T^{α−β} + |μ| T^α)`, the growth factor of the kernel bound at `T`.
    pub fn growth_factor(&self) -> f64 {
        let t = self.horizon();
        (self.lambda.abs() * t.powf(self.alpha - self.beta) + self.mu.abs() * t.powf(self.alpha))
            .exp()
    }

    pub fn lipschitz(&self) -> f64 {
        self.rhs.lipschitz()
    }
}

/// `(D^{α−1}φ(−h⁺), I^{2−α}φ(−h⁺))` for a polynomial history.
pub fn history_initial_data(phi: &ShiftedPolynomial, alpha: f64) -> Result<(f64, f64)> {
    let c1 = rl_limit_at_base(phi, alpha - 1.0)?;
    let c2 = rl_limit_at_base(phi, alpha - 2.0)?;
    Ok((c1, c2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMethod {
    Linear,
    Picard,
    Oracle,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub method: TraceMethod,
    pub tolerance: f64,
    pub iterations: usize,
}

/// Samples of a solution on a uniform grid over `[−h, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTrace {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    pub meta: TraceMeta,
}

impl SolutionTrace {
    pub fn new(grid: UniformGrid, values: Vec<f64>, meta: TraceMeta) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.count
            )));
        }
        Ok(Self { grid, values, meta })
    }

    /// Samples `f` at every node.
    pub fn sample<F: Fn(f64) -> f64>(grid: UniformGrid, f: F) -> Self {
        let values = grid.nodes().map(f).collect();
        Self {
            grid,
            values,
            meta: TraceMeta {
                method: TraceMethod::Sampled,
                tolerance: 0.0,
                iterations: 0,
            },
        }
    }

    /// Piecewise-linear interpolation, clamped to the grid ends.
    pub fn interpolate(&self, t: f64) -> f64 {
        let g = &self.grid;
        let x = (t - g.t_start) / g.step;
        if x <= 0.0 {
            return self.values[0];
        }
        let last = g.count - 1;
        if x >= last as f64 {
            return self.values[last];
        }
        let i = x.floor() as usize;
        let frac = x - i as f64;
        if frac == 0.0 {
            return self.values[i];
        }
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.nodes().zip(self.values.iter().copied())
    }
}
