//! Grünwald–Letnikov time stepping for the delayed Langevin equation and
//! residual checks for sampled solutions.
//!
//! Both RL derivatives are based at `−h` and their memory sums run over the
//! whole trajectory, history included, so the scheme needs nothing beyond
//! `y = φ` on `[−h, 0]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::{gl_derivative, gl_weights, UniformGrid};
use crate::repsolver::{
    ProblemSpec, RepresentationSolver, SolutionTrace, SolverConfig, TraceMeta, TraceMethod,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub step: f64,
    pub newton_tol: f64,
    pub newton_max: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            step: 1.0 / 512.0,
            newton_tol: 1e-12,
            newton_max: 50,
        }
    }
}

impl OracleConfig {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    /// Grid over `[−h, T]` for `spec`; fails unless `step ≤ h/8` divides `h`.
    pub fn grid_for(&self, spec: &ProblemSpec) -> Result<UniformGrid> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.newton_tol > 0.0) || self.newton_max == 0 {
            return bad("oracle needs newton_tol > 0 and newton_max >= 1".into());
        }
        if !(self.step > 0.0 && self.step <= spec.h / 8.0 * (1.0 + 1e-12)) {
            return bad(format!(
                "oracle step must lie in (0, h/8], got {}",
                self.step
            ));
        }
        let r = spec.h / self.step;
        let n = r.round();
        if (r - n).abs() > 1e-9 * n {
            return bad(format!("h / step must be an integer, got {r}"));
        }
        UniformGrid::delay_grid(spec.h, n as usize, spec.l)
    }
}

/// Implicit GL scheme: at each node `t_i > 0` solve
/// `c·y_i − f(t_i, y_i) = μ y(t_i − h) − τ^{−α}Σ_{j≥1} w^α_j y_{i−j} + λ τ^{−β}Σ_{j≥1} w^β_j y_{i−j}`
/// with `c = τ^{−α} − λ τ^{−β}`.
pub fn gl_solve(spec: &ProblemSpec, cfg: &OracleConfig) -> Result<SolutionTrace> {
    spec.validate()?;
    let grid = cfg.grid_for(spec)?;
    let tau = grid.step;
    let n = grid.count;
    let lag = grid.steps_in(spec.h).expect("delay lands on a node");
    let wa = gl_weights(spec.alpha, n);
    let wb = gl_weights(spec.beta, n);
    let ta = tau.powf(-spec.alpha);
    let tb = tau.powf(-spec.beta);
    let c = ta - spec.lambda * tb;
    let rhs = &spec.rhs;

    let mut y = Vec::with_capacity(n);
    y.extend((0..=lag).map(|i| spec.phi.eval(grid.node(i))));
    for i in lag + 1..n {
        let t = grid.node(i);
        let (mut sa, mut sb) = (0.0, 0.0);
        for j in 1..=i {
            sa += wa[j] * y[i - j];
            sb += wb[j] * y[i - j];
        }
        let r = spec.mu * y[i - lag] - ta * sa + spec.lambda * tb * sb;
        y.push(solve_step(
            c,
            r,
            t,
            y[i - 1],
            cfg,
            |v| rhs.eval(t, v),
            |v| rhs.dy(v),
        )?);
    }
    SolutionTrace::new(
        grid,
        y,
        TraceMeta {
            method: TraceMethod::Oracle,
            tolerance: cfg.newton_tol,
            iterations: 0,
        },
    )
}

/// Root of `c·y − f(y) = r`: Newton first, then the fixed-point map
/// `y ← (r + f(y))/c`.
fn solve_step<F, D>(
    c: f64,
    r: f64,
    t: f64,
    guess: f64,
    cfg: &OracleConfig,
    f: F,
    df: D,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let scale = |y: f64| cfg.newton_tol * (1.0 + y.abs());
    let mut y = guess;
    for _ in 0..cfg.newton_max {
        let slope = c - df(y);
        if slope.abs() <= 1e-12 * c.abs() {
            return Err(Error::SingularStep {
                t,
                coefficient: slope,
            });
        }
        let dy = (c * y - f(y) - r) / slope;
        y -= dy;
        if dy.abs() <= scale(y) {
            return Ok(y);
        }
    }
    if c == 0.0 {
        return Err(Error::SingularStep { t, coefficient: c });
    }
    let mut y = guess;
    for _ in 0..cfg.newton_max {
        let next = (r + f(y)) / c;
        let done = (next - y).abs() <= scale(next);
        y = next;
        if done {
            return Ok(y);
        }
    }
    Err(Error::Newton { t })
}

/// Pointwise residuals of the equation on a sampled trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Maximum of `|r_i|` over the nodes outside the exclusion zones.
    pub max_abs: f64,
    pub excluded: usize,
}

/// Residual `D̂^α y − λ D̂^β y − μ y(t − h) − f(t, y)` at every node `t > 0`;
/// nodes within `4·step` of `−h` or of `0` are left out of `max_abs`.
pub fn residual_check(trace: &SolutionTrace, spec: &ProblemSpec) -> Result<ResidualReport> {
    let width = 4.0 * trace.grid.step;
    residuals(trace, spec, true, 0.0, width)
}

/// Residual of `Y(t) = 𝔈^{h,α}_{α−β,α}(t + h)` sampled at step `step`:
/// `D̂^α Y − λ D̂^β Y − μ Y(t − h)` for `t > −h`, with nodes within
/// `exclusion` of `−h` or of `0` left out of `max_abs`.
pub fn kernel_residual(
    spec: &ProblemSpec,
    solver: &SolverConfig,
    step: f64,
    exclusion: f64,
) -> Result<ResidualReport> {
    let grid = OracleConfig::with_step(step).grid_for(spec)?;
    let rep = RepresentationSolver::with_grid(spec.clone(), *solver, grid)?;
    let h = spec.h;
    let values = grid
        .nodes()
        .map(|t| rep.kernel_main(t + h))
        .collect::<Result<Vec<_>>>()?;
    let trace = SolutionTrace::new(
        grid,
        values,
        TraceMeta {
            method: TraceMethod::Sampled,
            tolerance: 0.0,
            iterations: 0,
        },
    )?;
    residuals(&trace, spec, false, -h, exclusion)
}

fn residuals(
    trace: &SolutionTrace,
    spec: &ProblemSpec,
    with_rhs: bool,
    from: f64,
    width: f64,
) -> Result<ResidualReport> {
    let grid = &trace.grid;
    if (grid.t_start + spec.h).abs() > 1e-12 * spec.h {
        return Err(Error::GridMismatch(
            "residuals need a grid based at -h".into(),
        ));
    }
    let lag = grid
        .steps_in(spec.h)
        .ok_or_else(|| Error::GridMismatch("grid step must divide h".into()))?;
    let da = gl_derivative(grid, &trace.values, spec.alpha)?;
    let db = gl_derivative(grid, &trace.values, spec.beta)?;
    let tiny = 1e-9 * grid.step;
    let mut report = ResidualReport {
        times: Vec::new(),
        residuals: Vec::new(),
        max_abs: 0.0,
        excluded: 0,
    };
    for i in 0..grid.count {
        let t = grid.node(i);
        if t <= from + tiny {
            continue;
        }
        let delayed = if i >= lag { trace.values[i - lag] } else { 0.0 };
        let mut r = da[i] - spec.lambda * db[i] - spec.mu * delayed;
        if with_rhs {
            r -= spec.rhs.eval(t, trace.values[i]);
        }
        let near = (t + spec.h).abs() < width - tiny || t.abs() < width - tiny;
        if near {
            report.excluded += 1;
        } else {
            report.max_abs = report.max_abs.max(r.abs());
        }
        report.times.push(t);
        report.residuals.push(r);
    }
    Ok(report)
}

/// Closed-form against oracle values at the nodes of the closed-form trace
/// in `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub times: Vec<f64>,
    pub closed: Vec<f64>,
    pub oracle: Vec<f64>,
    pub absdiff: Vec<f64>,
    pub max_absdiff: f64,
    /// Trapezoidal `L²(0, T)` norm of the difference.
    pub l2_diff: f64,
}

/// The oracle is sampled by linear interpolation, which is exact when its
/// grid refines the closed-form grid.
pub fn compare_traces(closed: &SolutionTrace, oracle: &SolutionTrace) -> ComparisonReport {
    let mut out = ComparisonReport {
        times: Vec::new(),
        closed: Vec::new(),
        oracle: Vec::new(),
        absdiff: Vec::new(),
        max_absdiff: 0.0,
        l2_diff: 0.0,
    };
    let tiny = 1e-9 * closed.grid.step;
    for (t, y) in closed.iter().filter(|(t, _)| *t >= -tiny) {
        let o = oracle.interpolate(t);
        let d = (y - o).abs();
        out.times.push(t);
        out.closed.push(y);
        out.oracle.push(o);
        out.absdiff.push(d);
        out.max_absdiff = out.max_absdiff.max(d);
    }
    let sq: f64 = out
        .absdiff
        .windows(2)
        .zip(out.times.windows(2))
        .map(|(d, t)| 0.5 * (t[1] - t[0]) * (d[0] * d[0] + d[1] * d[1]))
        .sum();
    out.l2_diff = sq.sqrt();
    out
}

/// `max |a − b|` over the nodes of `a` in `[0, T]`, `b` interpolated.
pub fn sup_diff(a: &SolutionTrace, b: &SolutionTrace) -> f64 {
    compare_traces(a, b).max_absdiff
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraccalc::ShiftedPolynomial;
    use crate::repsolver::{RhsShape, RhsSpec};
    use crate::specfun::gamma_fn;

    fn spec(lambda: f64, mu: f64, phi: ShiftedPolynomial, rhs: RhsSpec) -> ProblemSpec {
        ProblemSpec::with_history_data(1.6, 0.4, lambda, mu, 1.0, 2, phi, rhs).unwrap()
    }

    #[test]
    fn config_checks() {
        let p = spec(0.0, 0.0, ShiftedPolynomial::zero(-1.0), RhsSpec::zero());
        assert!(OracleConfig::with_step(0.25).grid_for(&p).is_err());
        assert!(OracleConfig::with_step(0.1 / 3.0 * 2.9)
            .grid_for(&p)
            .is_err());
        let g = OracleConfig::with_step(0.125).grid_for(&p).unwrap();
        assert_eq!(g.count, 25);
        let cfg = OracleConfig {
            newton_tol: 0.0,
            ..OracleConfig::default()
        };
        assert!(cfg.grid_for(&p).is_err());
    }

    #[test]
    fn zero_problem() {
        let p = spec(-0.5, 0.3, ShiftedPolynomial::zero(-1.0), RhsSpec::zero());
        let tr = gl_solve(&p, &OracleConfig::with_step(1.0 / 64.0)).unwrap();
        assert!(tr.values.iter().all(|&v| v == 0.0));
        let r = residual_check(&tr, &p).unwrap();
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn fractional_integral_of_one() {
        let rhs = RhsSpec::forcing(ShiftedPolynomial::new(0.0, vec![1.0]));
        let p = spec(0.0, 0.0, ShiftedPolynomial::zero(-1.0), rhs);
        let want = 2f64.powf(1.6) / gamma_fn(2.6).unwrap();
        let mut errs = Vec::new();
        for k in 6..=9 {
            let tr = gl_solve(&p, &OracleConfig::with_step(2f64.powi(-k))).unwrap();
            errs.push((tr.values.last().unwrap() - want).abs());
        }
        assert!(errs[3] < 2e-3, "{errs:?}");
        for w in errs.windows(2) {
            assert!(w[1] < 0.75 * w[0], "{errs:?}");
        }
    }

    #[test]
    fn residual_of_oracle_trace_is_small() {
        let phi = ShiftedPolynomial::new(-1.0, vec![0.0, 0.0, 1.0]);
        let p = spec(-0.5, 0.3, phi, RhsSpec::nonlinear(0.25, RhsShape::Sin));
        let cfg = OracleConfig::with_step(1.0 / 64.0);
        let tr = gl_solve(&p, &cfg).unwrap();
        let r = residual_check(&tr, &p).unwrap();
        // The scheme solves the discrete equation, so only Newton error remains.
        let scale = tr.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            r.max_abs < 1e-8 * scale.max(1.0) * cfg.step.powf(-1.6),
            "{}",
            r.max_abs
        );
        assert!(r.excluded > 0);
    }

    #[test]
    fn comparison_of_identical_traces() {
        let g = UniformGrid::delay_grid(1.0, 8, 2).unwrap();
        let a = SolutionTrace::sample(g, |t| t * t);
        let c = compare_traces(&a, &a);
        assert_eq!(c.max_absdiff, 0.0);
        assert_eq!(c.l2_diff, 0.0);
        assert_eq!(c.times.len(), 17);
        let b = SolutionTrace::sample(g, |t| t * t + 0.5);
        let c = compare_traces(&a, &b);
        assert!((c.max_absdiff - 0.5).abs() < 1e-15);
        assert!((c.l2_diff - 0.5 * 2f64.sqrt()).abs() < 1e-14);
    }
}
