//! Function algebra for filters: exact piecewise-constant functions with
//! rational breakpoints, smooth QMF constructors, and sampled functions.

mod filterfn;
mod piecewise;
mod smooth;

pub use filterfn::{FilterFn, SampledFn};
pub use piecewise::{canonical_union, mirrored, Interval, PiecewiseFn};
pub use smooth::{smooth_step, QmfHighpass, QmfLowpass, SmoothStep, QMF_EPS_MAX};
