use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{CompanionReading, KernelKind, KernelSet};
use super::problem::{ProblemSpec, SolutionTrace, TraceMeta, TraceMethod};
use crate::error::{Error, Result};
use crate::fraccalc::{rl_derivative_poly_offset, ShiftedPolynomial, UniformGrid};
use crate::quadrature::{tanh_sinh, GaussLegendre, QuadConfig};
use crate::specfun::{gamma_fn, recip_gamma, weight_ml, SeriesControl};

/// Time-dependent forcing added on top of `f(t, y)`.
pub type Forcing<'a> = dyn Fn(f64) -> f64 + Sync + 'a;

/// Step halvings allowed on tanh-sinh panels at the singular ends.
const TANH_SINH_LEVELS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub series: SeriesControl,
    pub quad: QuadConfig,
    /// Grid cells per delay interval.
    pub grid_divisor: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub omega_margin: f64,
    /// Overrides the margin-based choice of ω.
    pub omega: Option<f64>,
    pub companion: CompanionReading,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            series: SeriesControl::default(),
            quad: QuadConfig::default(),
            grid_divisor: 128,
            picard_tol: 1e-8,
            picard_max_iter: 100,
            omega_margin: 2.0,
            omega: None,
            companion: CompanionReading::Corrected,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.series.validate()?;
        self.quad.validate()?;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.grid_divisor == 0 {
            return bad("grid divisor must be positive".into());
        }
        if !(self.picard_tol > 0.0) {
            return bad(format!(
                "picard tolerance must be positive, got {}",
                self.picard_tol
            ));
        }
        if self.picard_max_iter == 0 {
            return bad("picard iteration limit must be positive".into());
        }
        if !(self.omega_margin > 1.0) {
            return bad(format!(
                "omega margin must exceed 1, got {}",
                self.omega_margin
            ));
        }
        if let Some(w) = self.omega {
            if !(w > 0.0 && w.is_finite()) {
                return bad(format!("omega must be positive, got {w}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub iterations: usize,
    pub final_delta: f64,
    pub q: f64,
    pub omega: f64,
    /// `‖y_{k+1} − y_k‖_ω` for every iteration.
    pub deltas: Vec<f64>,
    /// Successive ratios `δ_{k+1} / δ_k`.
    pub ratios: Vec<f64>,
    /// `max_{[0,T]} |y_{k+1} − y_k|` for every iteration.
    pub sup_deltas: Vec<f64>,
}

/// `q = Γ(α)/ω · L_f · exp(|λ|T^{α−β} + |μ|T^α)`.
pub fn contraction_factor(spec: &ProblemSpec, l_f: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !(l_f >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "contraction factor needs omega > 0 and L_f >= 0, got {omega}, {l_f}"
        )));
    }
    if l_f == 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_fn(spec.alpha)? / omega * l_f * spec.growth_factor())
}

/// `ω = margin · Γ(α) L_f exp(|λ|T^{α−β} + |μ|T^α)`, so that `q = 1/margin`.
///
/// For `L_f = 0` the contraction factor vanishes for every ω and the
/// formula is evaluated with `L_f = 1`.
pub fn choose_omega(spec: &ProblemSpec, l_f: f64, margin: f64) -> Result<f64> {
    if !(margin > 1.0) || !(l_f >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "omega choice needs margin > 1 and L_f >= 0, got {margin}, {l_f}"
        )));
    }
    let l = if l_f > 0.0 { l_f } else { 1.0 };
    Ok(margin * gamma_fn(spec.alpha)? * l * spec.growth_factor())
}

/// Weights `E_{α,1}(ω t^α)` on the nodes `t ≥ 0` of a grid.
#[derive(Debug, Clone)]
pub struct WeightedNorm {
    first: usize,
    weights: Vec<f64>,
}

impl WeightedNorm {
    pub fn new(grid: &UniformGrid, alpha: f64, omega: f64, ctrl: &SeriesControl) -> Result<Self> {
        let first = (0..grid.count)
            .find(|&i| grid.node(i) >= -1e-12 * grid.step)
            .unwrap_or(grid.count);
        let weights = (first..grid.count)
            .map(|i| weight_ml(alpha, omega, grid.node(i).max(0.0), ctrl))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { first, weights })
    }

    pub fn norm(&self, values: &[f64]) -> f64 {
        values[self.first..]
            .iter()
            .zip(&self.weights)
            .fold(0.0, |m, (v, w)| m.max(v.abs() / w))
    }

    /// Unweighted `max |a − b|` over the same nodes.
    pub fn sup_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a[self.first..]
            .iter()
            .zip(&b[self.first..])
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a[self.first..]
            .iter()
            .zip(&b[self.first..])
            .zip(&self.weights)
            .fold(0.0, |m, ((x, y), w)| m.max((x - y).abs() / w))
    }
}

/// `max_{t ∈ [0,T]} |y(t)| / E_{α,1}(ω t^α)` over the trace nodes.
pub fn weighted_norm(
    trace: &SolutionTrace,
    omega: f64,
    alpha: f64,
    ctrl: &SeriesControl,
) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "omega must be positive, got {omega}"
        )));
    }
    Ok(WeightedNorm::new(&trace.grid, alpha, omega, ctrl)?.norm(&trace.values))
}

/// Closed-form solution of the delayed Langevin problem and the Picard
/// iteration for its nonlinear form.
///
/// Every convolution is integrated in the offset variable `u = t − s` on
/// panels whose ends are multiples of the grid step, so kernel values are
/// shared between all grid nodes through the cache in [`KernelSet`].
#[derive(Debug)]
pub struct RepresentationSolver {
    spec: ProblemSpec,
    cfg: SolverConfig,
    grid: UniformGrid,
    history_nodes: usize,
    kernels: KernelSet,
    rule: GaussLegendre,
    homogeneous: OnceLock<Vec<f64>>,
    /// φ without its linear term, whose `D^α` is bounded at `−h`.
    phi_regular: ShiftedPolynomial,
    /// `a₁/Γ(2−α)`: the source contains `a₁/Γ(2−α)·(s+h)^{1−α}`.
    singular_coef: f64,
}

impl RepresentationSolver {
    /// Solver on the grid with `cfg.grid_divisor` cells per delay interval.
    pub fn new(spec: ProblemSpec, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = UniformGrid::delay_grid(spec.h, cfg.grid_divisor, spec.l)?;
        Self::with_grid(spec, cfg, grid)
    }

    /// Solver on a caller-supplied grid over `[−h, T]` whose step divides `h`.
    pub fn with_grid(spec: ProblemSpec, cfg: SolverConfig, grid: UniformGrid) -> Result<Self> {
        spec.validate()?;
        cfg.validate()?;
        let mismatch = |m: &str| Error::GridMismatch(m.to_string());
        if (grid.t_start + spec.h).abs() > 1e-12 * spec.h {
            return Err(mismatch("grid must start at -h"));
        }
        let history_nodes = grid
            .steps_in(spec.h)
            .filter(|&n| n > 0)
            .ok_or_else(|| mismatch("grid step must divide the delay h"))?;
        if (grid.t_end() - spec.horizon()).abs() > 1e-9 * spec.horizon() {
            return Err(mismatch("grid must end at T = l*h"));
        }
        if spec.phi.eval(-spec.h) != 0.0 {
            // D^α φ then behaves like (s+h)^{−α} at −h and is not integrable.
            return Err(Error::InvalidParameter(format!(
                "the representation needs phi(-h) = 0, got {}",
                spec.phi.eval(-spec.h)
            )));
        }
        let kernels = KernelSet::new(&spec, cfg.companion, cfg.series)?;
        let mut phi_regular = spec.phi.clone();
        let linear = phi_regular.coefficients.get(1).copied().unwrap_or(0.0);
        if let Some(c) = phi_regular.coefficients.get_mut(1) {
            *c = 0.0;
        }
        let singular_coef = linear * recip_gamma(2.0 - spec.alpha);
        Ok(Self {
            phi_regular,
            singular_coef,
            rule: GaussLegendre::new(cfg.quad.nodes),
            spec,
            cfg,
            grid,
            history_nodes,
            kernels,
            homogeneous: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn kernel_main(&self, t: f64) -> Result<f64> {
        self.kernels.main(t)
    }

    pub fn kernel_companion(&self, t: f64) -> Result<f64> {
        self.kernels.companion(t)
    }

    /// `g(s) = D^α φ(s) − λ D^β φ(s)`, derivatives based at `−h`.
    pub fn phi_source(&self, s: f64) -> Result<f64> {
        let h = self.spec.h;
        if !(s > -h && s <= 1e-12 * h) {
            return Err(Error::Domain {
                what: "phi_source",
                arg: s,
                reason: "history source is defined on (-h, 0]",
            });
        }
        self.history_source(s.min(0.0) + h)
    }

    /// `g` at `s = −h + v`.
    fn history_source(&self, v: f64) -> Result<f64> {
        let phi = &self.spec.phi;
        if phi.is_zero() {
            return Ok(0.0);
        }
        let da = rl_derivative_poly_offset(phi, self.spec.alpha, v)?;
        let db = rl_derivative_poly_offset(phi, self.spec.beta, v)?;
        Ok(da - self.spec.lambda * db)
    }

    /// `∫_{−h}^{min(t,0)} K(t − s) g(s) ds`.
    ///
    /// `g` has an algebraic singularity at `−h` whenever φ has a linear term,
    /// so the panel ending there uses the tanh-sinh rule with the distance to
    /// `−h` passed in exactly.
    fn history_integral(&self, t: f64) -> Result<f64> {
        let h = self.spec.h;
        let (u0, u1) = (t - t.min(0.0), t + h);
        if u1 <= u0 {
            return Ok(0.0);
        }
        let breaks = self.offset_breaks(u0, u1, t);
        let n = breaks.len();
        let mut body = |u: f64| Ok(self.kernels.main(u)? * self.history_source(t + h - u)?);
        let tol = self.cfg.quad.tol;
        // For t < 0 the kernel end u = 0 is inside the range as well.
        let (start, mut head) = if breaks[0] == 0.0 && n > 2 {
            let first = tanh_sinh(0.0, breaks[1], tol, TANH_SINH_LEVELS, &mut |u, _, _| {
                body(u)
            })?;
            (1, first)
        } else {
            (0, 0.0)
        };
        head += self
            .rule
            .integrate_panels(&breaks[start..n - 1], &self.cfg.quad, &mut body)?;
        let (a, b) = (breaks[n - 2], breaks[n - 1]);
        Ok(head + self.history_tail(a, b)?)
    }

    /// Last history panel `u ∈ [a, b]`, i.e. `s + h = b − u ∈ [0, b − a]`.
    ///
    /// The bounded part of the source goes through tanh-sinh directly; the
    /// `(s+h)^{1−α}` term is integrated after `s + h = w z^{1/(2−α)}`, which
    /// turns it into a bounded integrand even as α approaches 2.
    fn history_tail(&self, a: f64, b: f64) -> Result<f64> {
        let tol = self.cfg.quad.tol;
        let (alpha, beta, lambda) = (self.spec.alpha, self.spec.beta, self.spec.lambda);
        let regular = tanh_sinh(a, b, tol, TANH_SINH_LEVELS, &mut |u, _, v| {
            let da = rl_derivative_poly_offset(&self.phi_regular, alpha, v)?;
            let db = rl_derivative_poly_offset(&self.spec.phi, beta, v)?;
            let g = da - lambda * db;
            if g == 0.0 {
                return Ok(0.0);
            }
            Ok(self.kernels.main_uncached(u)? * g)
        })?;
        if self.singular_coef == 0.0 {
            return Ok(regular);
        }
        let w = b - a;
        let e = 2.0 - alpha;
        let p = 1.0 / e;
        let scaled = tanh_sinh(0.0, 1.0, tol, TANH_SINH_LEVELS, &mut |_, z, dz| {
            // u = b − w z^p = a + w (1 − z^p), with 1 − z^p formed from 1 − z.
            let gap = if z < 0.5 {
                1.0 - z.powf(p)
            } else {
                -(p * (-dz).ln_1p()).exp_m1()
            };
            self.kernels.main_uncached(a + w * gap)
        })?;
        Ok(regular + self.singular_coef * w.powf(e) / e * scaled)
    }

    /// `∫_{s0}^{s1} kernel(t − s) source(s) ds`.
    pub fn convolve_kernel<S>(
        &self,
        kind: KernelKind,
        source: S,
        s0: f64,
        s1: f64,
        t: f64,
    ) -> Result<f64>
    where
        S: Fn(f64) -> Result<f64>,
    {
        if !(s0 <= s1) || s1 > t + 1e-12 * self.spec.h {
            return Err(Error::InvalidParameter(format!(
                "convolution needs s0 <= s1 <= t, got [{s0}, {s1}] at t = {t}"
            )));
        }
        if s0 == s1 {
            return Ok(0.0);
        }
        let breaks = self.offset_breaks((t - s1).max(0.0), t - s0, t);
        let mut integrand = |u: f64| -> Result<f64> {
            let src = source(t - u)?;
            if src == 0.0 {
                return Ok(0.0);
            }
            Ok(self.kernels.eval(kind, u)? * src)
        };
        if breaks[0] > 0.0 {
            return self
                .rule
                .integrate_panels(&breaks, &self.cfg.quad, &mut integrand);
        }
        // The kernel is not smooth at u = 0 (it behaves like u^{α−1}, or
        // u^{α−2} for the companion), so the first panel gets tanh-sinh.
        let first = tanh_sinh(
            0.0,
            breaks[1],
            self.cfg.quad.tol,
            TANH_SINH_LEVELS,
            &mut |u, _, _| integrand(u),
        )?;
        Ok(first
            + self
                .rule
                .integrate_panels(&breaks[1..], &self.cfg.quad, &mut integrand)?)
    }

    /// Panel ends in `[u0, u1]`: multiples of the grid step, the kernel kinks
    /// `u = kh`, and `u = t` where the history source stops.
    fn offset_breaks(&self, u0: f64, u1: f64, t: f64) -> Vec<f64> {
        let p = self.grid.step;
        let snap_tol = 1e-7;
        let snap = |u: f64| {
            let m = (u / p).round();
            if (u / p - m).abs() < snap_tol {
                m * p
            } else {
                u
            }
        };
        let (a, b) = (snap(u0), snap(u1));
        let mut breaks = vec![a];
        let m_lo = (a / p).floor() as i64 + 1;
        let m_hi = (b / p).ceil() as i64 - 1;
        for m in m_lo..=m_hi {
            let u = m as f64 * p;
            if u > a && u < b {
                breaks.push(u);
            }
        }
        let on_lattice = |u: f64| ((u / p) - (u / p).round()).abs() < snap_tol;
        let h = self.spec.h;
        let mut extra: Vec<f64> = (1..)
            .map(|k| k as f64 * h)
            .take_while(|&u| u < b)
            .filter(|&u| u > a && !on_lattice(u))
            .collect();
        if t > a && t < b && !on_lattice(t) {
            extra.push(t);
        }
        breaks.push(b);
        if !extra.is_empty() {
            breaks.extend(extra);
            breaks.sort_by(f64::total_cmp);
        }
        breaks
    }

    /// Value of the `f = 0` solution at `t ∈ [−h, T]`.
    pub fn homogeneous_at(&self, t: f64) -> Result<f64> {
        let h = self.spec.h;
        if !(t >= -h - 1e-12 * h && t <= self.spec.horizon() + 1e-9 * h) {
            return Err(Error::Domain {
                what: "homogeneous_at",
                arg: t,
                reason: "t must lie in [-h, T]",
            });
        }
        let mut v = 0.0;
        if self.spec.c1 != 0.0 {
            v += self.spec.c1 * self.kernels.main(t + h)?;
        }
        if self.spec.c2 != 0.0 {
            v += self.spec.c2 * self.kernels.companion(t + h)?;
        }
        if !self.spec.phi.is_zero() {
            v += self.history_integral(t)?;
        }
        Ok(v)
    }

    /// `∫_0^t K(t − s) forcing(s) ds` for the zero-history problem.
    pub fn forced_at<F>(&self, forcing: F, t: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        if !(t >= 0.0 && t <= self.spec.horizon() + 1e-9 * self.spec.h) {
            return Err(Error::Domain {
                what: "forced_at",
                arg: t,
                reason: "t must lie in [0, T]",
            });
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        self.convolve_kernel(KernelKind::Main, |s| Ok(forcing(s)), 0.0, t, t)
    }

    fn meta(&self, method: TraceMethod, tolerance: f64, iterations: usize) -> TraceMeta {
        TraceMeta {
            method,
            tolerance,
            iterations,
        }
    }

    /// Homogeneous part on every node after `0`, computed once.
    fn homogeneous_values(&self) -> Result<&[f64]> {
        if let Some(v) = self.homogeneous.get() {
            return Ok(v);
        }
        let first = self.history_nodes + 1;
        let values = (first..self.grid.count)
            .into_par_iter()
            .map(|i| self.homogeneous_at(self.grid.node(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.homogeneous.get_or_init(|| values))
    }

    /// History on `[−h, 0]`, and homogeneous part plus the convolution of
    /// `forcing` on `(0, T]`.
    fn assemble<F>(&self, forcing: F) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let hom = self.homogeneous_values()?;
        let first = self.history_nodes + 1;
        let forced = (first..self.grid.count)
            .into_par_iter()
            .map(|i| self.forced_at(&forcing, self.grid.node(i)))
            .collect::<Result<Vec<_>>>()?;
        let mut values: Vec<f64> = (0..first)
            .map(|i| self.spec.phi.eval(self.grid.node(i)))
            .collect();
        values.extend(hom.iter().zip(&forced).map(|(a, b)| a + b));
        Ok(values)
    }

    /// Solution for a forcing that depends on `t` only.
    pub fn linear_solution(&self) -> Result<SolutionTrace> {
        if !self.spec.rhs.is_state_free() {
            return Err(Error::InvalidParameter(
                "linear solution requires a right-hand side independent of y".into(),
            ));
        }
        let rhs = &self.spec.rhs;
        let values = self.assemble(|s| rhs.eval(s, 0.0))?;
        SolutionTrace::new(
            self.grid,
            values,
            self.meta(TraceMethod::Linear, self.cfg.quad.tol, 0),
        )
    }

    /// The integral operator of the nonlinear problem applied to `y`.
    pub fn apply_f(&self, y: &SolutionTrace) -> Result<SolutionTrace> {
        self.apply_f_with(y, None)
    }

    pub fn apply_f_with(
        &self,
        y: &SolutionTrace,
        extra: Option<&Forcing>,
    ) -> Result<SolutionTrace> {
        if y.grid != self.grid {
            return Err(Error::GridMismatch(
                "input trace lives on a different grid".into(),
            ));
        }
        let values = self.apply_values(y, extra)?;
        SolutionTrace::new(
            self.grid,
            values,
            self.meta(TraceMethod::Picard, self.cfg.quad.tol, 0),
        )
    }

    fn apply_values(&self, y: &SolutionTrace, extra: Option<&Forcing>) -> Result<Vec<f64>> {
        let rhs = &self.spec.rhs;
        self.assemble(|s| {
            let base = rhs.eval(s, y.interpolate(s));
            match extra {
                Some(g) => base + g(s),
                None => base,
            }
        })
    }

    pub fn picard_solve(&self) -> Result<(SolutionTrace, PicardReport)> {
        self.picard_solve_with(None)
    }

    /// Picard iteration in the weighted norm, started from the solution with
    /// forcing `f(t, 0)`; stops once `δ ≤ tol·(1 − q)/q`.
    pub fn picard_solve_with(
        &self,
        extra: Option<&Forcing>,
    ) -> Result<(SolutionTrace, PicardReport)> {
        let l_f = self.spec.lipschitz();
        let omega = match self.cfg.omega {
            Some(w) => w,
            None => choose_omega(&self.spec, l_f, self.cfg.omega_margin)?,
        };
        let q = contraction_factor(&self.spec, l_f, omega)?;
        if q >= 1.0 {
            return Err(Error::NonContraction { q });
        }
        let norm = WeightedNorm::new(&self.grid, self.spec.alpha, omega, &self.cfg.series)?;
        let tol = self.cfg.picard_tol;
        let threshold = if q > 0.0 {
            tol * (1.0 - q) / q
        } else {
            f64::INFINITY
        };

        let rhs = &self.spec.rhs;
        let start = self.assemble(|s| {
            let base = rhs.eval(s, 0.0);
            extra.map_or(base, |g| base + g(s))
        })?;
        let mut y = SolutionTrace::new(self.grid, start, self.meta(TraceMethod::Picard, tol, 0))?;
        let mut deltas: Vec<f64> = Vec::new();
        let mut ratios = Vec::new();
        let mut sup_deltas = Vec::new();
        for iteration in 1..=self.cfg.picard_max_iter {
            let next = self.apply_values(&y, extra)?;
            let delta = norm.distance(&next, &y.values);
            if let Some(&prev) = deltas.last() {
                if prev > 0.0 {
                    ratios.push(delta / prev);
                }
            }
            deltas.push(delta);
            sup_deltas.push(norm.sup_distance(&next, &y.values));
            y.values = next;
            if delta <= threshold || delta == 0.0 {
                y.meta.iterations = iteration;
                let report = PicardReport {
                    iterations: iteration,
                    final_delta: delta,
                    q,
                    omega,
                    deltas,
                    ratios,
                    sup_deltas,
                };
                return Ok((y, report));
            }
        }
        Err(Error::IterationLimit {
            iterations: self.cfg.picard_max_iter,
            delta: deltas.last().copied().unwrap_or(f64::NAN),
        })
    }
}
