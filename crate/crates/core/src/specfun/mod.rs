//! Special functions: gamma, Mittag-Leffler, generalized Wright, `G`, and the
//! delayed Mittag-Leffler-type functions.
//!
//! Everything here is a pure function of its arguments.

mod delayed;
mod gamma;
mod mittag_leffler;
mod series;
mod wright;

pub use delayed::{delayed_ml_gen, delayed_ml_piecewise, g_function, DelayedMl};
pub use gamma::{gamma_fn, ln_gamma, ln_gamma_signed, recip_gamma, GAMMA_MAX_ARG};
pub use mittag_leffler::{mittag_leffler, ml_kernel, weight_ml};
pub use series::SeriesControl;
pub use wright::{wright_series, WrightSpec};
