use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use super::problem::ProblemSpec;
use crate::error::Result;
use crate::specfun::{DelayedMl, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Main,
    Companion,
}

/// Which parameter set stands behind the coefficient of `c2`.
///
/// `Corrected` is `𝔈^{h,α}_{α−β,α−1}`, whose `I^{2−α}` tends to 1 at `0⁺`;
/// `Literal` is `𝔈^{h,α−1}_{α−β,α}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompanionReading {
    #[default]
    Corrected,
    Literal,
}

/// `𝔈^{h,α}_{α−β,α}(λ, μ; ·)`.
pub fn main_params(spec: &ProblemSpec) -> Result<DelayedMl> {
    DelayedMl::new(
        spec.h,
        spec.alpha - spec.beta,
        spec.alpha,
        spec.alpha,
        spec.lambda,
        spec.mu,
    )
}

pub fn companion_params(spec: &ProblemSpec, reading: CompanionReading) -> Result<DelayedMl> {
    let (b, gamma) = match reading {
        CompanionReading::Corrected => (spec.alpha - 1.0, spec.alpha),
        CompanionReading::Literal => (spec.alpha, spec.alpha - 1.0),
    };
    DelayedMl::new(
        spec.h,
        spec.alpha - spec.beta,
        b,
        gamma,
        spec.lambda,
        spec.mu,
    )
}

/// Both solution kernels of one problem, with the main kernel memoized on the
/// bit pattern of its argument.
///
/// Cached values are pure functions of the key, so a lookup returns exactly
/// what a fresh evaluation would, whichever thread filled the entry.
#[derive(Debug)]
pub struct KernelSet {
    main: DelayedMl,
    companion: DelayedMl,
    ctrl: SeriesControl,
    cache: DashMap<u64, f64>,
}

impl KernelSet {
    pub fn new(spec: &ProblemSpec, reading: CompanionReading, ctrl: SeriesControl) -> Result<Self> {
        ctrl.validate()?;
        Ok(Self {
            main: main_params(spec)?,
            companion: companion_params(spec, reading)?,
            ctrl,
            cache: DashMap::new(),
        })
    }

    pub fn main(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Ok(0.0);
        }
        let key = t.to_bits();
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let v = self.main.eval(t, &self.ctrl)?;
        self.cache.insert(key, v);
        Ok(v)
    }

    /// Main kernel without touching the cache, for arguments unlikely to recur.
    pub fn main_uncached(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Ok(0.0);
        }
        self.main.eval(t, &self.ctrl)
    }

    pub fn companion(&self, t: f64) -> Result<f64> {
        self.companion.eval(t, &self.ctrl)
    }

    pub fn eval(&self, kind: KernelKind, t: f64) -> Result<f64> {
        match kind {
            KernelKind::Main => self.main(t),
            KernelKind::Companion => self.companion(t),
        }
    }

    pub fn cached_len(&self) -> usize {
        self.cache.len()
    }

    pub fn control(&self) -> &SeriesControl {
        &self.ctrl
    }
}
