//! A filter entry: any of the representations the library works with,
//! evaluated pointwise at exact rational torus points.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::rational::{reduce_coord, Rat, TorusPoint};
use crate::scalar::Scalar;

use super::piecewise::{Interval, PiecewiseFn};
use super::smooth::{QmfHighpass, QmfLowpass};

/// A function known only through samples on the rational grid
/// `(k_1/q, ..., k_d/q)`; evaluation snaps each coordinate to the
/// nearest grid node. Produced by high-pass completion.
#[derive(Clone, Debug)]
pub struct SampledFn {
    samples: BTreeMap<TorusPoint, Scalar>,
    q: i128,
}

impl SampledFn {
    pub fn new(q: i128, samples: BTreeMap<TorusPoint, Scalar>) -> Self {
        assert!(q > 0);
        SampledFn { q, samples }
    }

    pub fn grid_denominator(&self) -> i128 {
        self.q
    }

    pub fn samples(&self) -> &BTreeMap<TorusPoint, Scalar> {
        &self.samples
    }

    fn snap(&self, x: &TorusPoint) -> TorusPoint {
        let q = Rat::from_integer(self.q);
        TorusPoint(
            x.0.iter()
                .map(|c| reduce_coord((c * q).round() / q))
                .collect(),
        )
    }

    pub fn eval(&self, x: &TorusPoint) -> Scalar {
        self.samples
            .get(&self.snap(x))
            .copied()
            .unwrap_or(Scalar::ZERO)
    }
}

/// One matrix entry of a filter system.
#[derive(Clone)]
pub enum FilterFn {
    /// Exact piecewise-constant function on the torus (d = 1).
    Pc(PiecewiseFn),
    /// `window(x) * p0(x + shift)` with the smooth low-pass QMF.
    SmoothLow {
        qmf: QmfLowpass,
        shift: Rat,
        window: PiecewiseFn,
    },
    /// `window(x) * p1(x + shift)` with the smooth high-pass QMF.
    SmoothHigh {
        qmf: QmfHighpass,
        shift: Rat,
        window: PiecewiseFn,
    },
    /// Grid samples (completed high-pass rows).
    Sampled(Arc<SampledFn>),
    /// Arbitrary closure (loop-acted filters).
    Dyn(Arc<dyn Fn(&TorusPoint) -> Scalar + Send + Sync>),
}

impl FilterFn {
    pub fn zero() -> Self {
        FilterFn::Pc(PiecewiseFn::zero(true))
    }

    pub fn eval(&self, x: &TorusPoint) -> Scalar {
        match self {
            FilterFn::Pc(p) => p.eval(x.scalar()),
            FilterFn::SmoothLow { qmf, shift, window } => {
                let w = window.eval(x.scalar());
                if w.is_zero() {
                    Scalar::ZERO
                } else {
                    w * qmf.eval(x.scalar() + *shift)
                }
            }
            FilterFn::SmoothHigh { qmf, shift, window } => {
                let w = window.eval(x.scalar());
                if w.is_zero() {
                    Scalar::ZERO
                } else {
                    w * qmf.eval(x.scalar() + *shift)
                }
            }
            FilterFn::Sampled(s) => s.eval(x),
            FilterFn::Dyn(f) => f(x),
        }
    }

    /// A set of intervals known to contain the support, when one is
    /// available analytically (d = 1 representations only).
    pub fn support_superset(&self) -> Option<Vec<Interval>> {
        match self {
            FilterFn::Pc(p) => Some(p.support()),
            FilterFn::SmoothLow { window, .. } | FilterFn::SmoothHigh { window, .. } => {
                Some(window.support())
            }
            FilterFn::Sampled(_) | FilterFn::Dyn(_) => None,
        }
    }

    /// True when evaluation is exact everywhere (pure pc entry).
    pub fn is_pc(&self) -> bool {
        matches!(self, FilterFn::Pc(_))
    }
}

impl fmt::Debug for FilterFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterFn::Pc(p) => write!(f, "Pc({p:?})"),
            FilterFn::SmoothLow { shift, window, .. } => {
                write!(f, "SmoothLow(shift={shift}, window={window:?})")
            }
            FilterFn::SmoothHigh { shift, window, .. } => {
                write!(f, "SmoothHigh(shift={shift}, window={window:?})")
            }
            FilterFn::Sampled(s) => write!(f, "Sampled(q={}, {} pts)", s.q, s.samples.len()),
            FilterFn::Dyn(_) => write!(f, "Dyn(..)"),
        }
    }
}
