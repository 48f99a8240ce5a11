//! Composite Gauss–Legendre quadrature with adaptive panel halving.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    /// A panel is accepted once its one-panel and two-half estimates differ
    /// by less than this.
    pub tol: f64,
    pub nodes: usize,
    pub max_depth: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            nodes: 16,
            max_depth: 14,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.nodes < 2 || self.nodes > 128 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs tol > 0 and 2..=128 nodes, got tol {} nodes {}",
                self.tol, self.nodes
            )));
        }
        Ok(())
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F>(&self, a: f64, b: f64, f: &mut F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x)?;
        }
        Ok(acc * half)
    }

    /// Sum over the panels between consecutive `breaks`, each refined by
    /// halving until the estimates agree to `cfg.tol`.
    pub fn integrate_panels<F>(&self, breaks: &[f64], cfg: &QuadConfig, f: &mut F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let whole = self.integrate(a, b, f)?;
            total += self.refine(a, b, whole, 0, cfg, f)?;
        }
        Ok(total)
    }

    fn refine<F>(
        &self,
        a: f64,
        b: f64,
        whole: f64,
        depth: usize,
        cfg: &QuadConfig,
        f: &mut F,
    ) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let m = 0.5 * (a + b);
        let left = self.integrate(a, m, f)?;
        let right = self.integrate(m, b, f)?;
        let halves = left + right;
        if (halves - whole).abs() < cfg.tol {
            return Ok(halves);
        }
        if depth + 1 >= cfg.max_depth || m <= a || m >= b {
            return Err(Error::Quadrature {
                a,
                b,
                depth: depth + 1,
            });
        }
        Ok(self.refine(a, m, left, depth + 1, cfg, f)?
            + self.refine(m, b, right, depth + 1, cfg, f)?)
    }
}

/// Adaptive tanh-sinh rule on `[a, b]` for integrands with algebraic endpoint
/// singularities.
///
/// `f` receives `(x, x − a, b − x)`; both distances are formed without
/// cancellation, so a singular factor can be evaluated from them directly.
/// The step is halved until two levels agree to `tol` (absolute).
pub fn tanh_sinh<F>(a: f64, b: f64, tol: f64, max_level: usize, f: &mut F) -> Result<f64>
where
    F: FnMut(f64, f64, f64) -> Result<f64>,
{
    let half = 0.5 * (b - a);
    if half <= 0.0 {
        return Ok(0.0);
    }
    let mut sample = |t: f64| -> Result<f64> {
        let u = FRAC_PI_2 * t.sinh();
        // e = exp(−2|u|); 1 − tanh|u| = 2e/(1+e) and sech²u = 4e/(1+e)².
        let e = (-2.0 * u.abs()).exp();
        let d = half * 2.0 * e / (1.0 + e);
        if d == 0.0 {
            return Ok(0.0);
        }
        let w = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let (x, dl, dr) = if u < 0.0 {
            (a + d, d, 2.0 * half - d)
        } else {
            (b - d, 2.0 * half - d, d)
        };
        Ok(w * f(x, dl, dr)?)
    };
    // Beyond |t| = 6.5 every node sits closer than 1e-300 to an endpoint.
    let t_max = 6.5;
    let mut step = 0.5;
    let mut sum = sample(0.0)?;
    let mut k = 1;
    while k as f64 * step <= t_max {
        let t = k as f64 * step;
        sum += sample(t)? + sample(-t)?;
        k += 1;
    }
    let mut estimate = sum * step * half;
    for _ in 0..max_level {
        step *= 0.5;
        let mut k = 1;
        while k as f64 * step <= t_max {
            let t = k as f64 * step;
            sum += sample(t)? + sample(-t)?;
            k += 2;
        }
        let next = sum * step * half;
        let settled = (next - estimate).abs() < tol;
        estimate = next;
        if settled {
            return Ok(estimate);
        }
    }
    Err(Error::Quadrature {
        a,
        b,
        depth: max_level,
    })
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
