//! Smooth (C-infinity) QMF filter pair used by the smooth Journé system.
//!
//! The low-pass `p0` is even, 1-periodic, real, and piecewise given on
//! `a = |x| in [0, 1/2]` (with `eps` a small rational margin and
//! `len = 1/14 - 2*eps`):
//!
//! | region                      | value                                     |
//! |-----------------------------|-------------------------------------------|
//! | `[0, 1/14+eps]`             | `sqrt 2`                                  |
//! | `(1/14+eps, 1/7-eps)`       | `sqrt2 * cos(pi/2 * th((a-1/14-eps)/len))` |
//! | `[1/7-eps, 3/14+eps]`       | `0`                                       |
//! | `(3/14+eps, 2/7-eps)`       | `sqrt2 * sin(pi/2 * th((a-3/14-eps)/len))` |
//! | `[2/7-eps, 5/14+eps]`       | `sqrt 2`                                  |
//! | `(5/14+eps, 3/7-eps)`       | `sqrt2 * sin(pi/2 * th((3/7-eps-a)/len))`  |
//! | `[3/7-eps, 1/2]`            | `0`                                       |
//!
//! where `th` is the standard exp(-1/u) smooth step. Since the half-turn
//! `x -> x + 1/2` maps `a` to `1/2 - a`, each ramp is paired with a ramp
//! (or itself, via `th(1-u) = 1 - th(u)`) so that
//! `|p0(x)|^2 + |p0(x+1/2)|^2 = 2` holds pointwise, and on the flat
//! regions the identity holds *exactly* in rational arithmetic.
//!
//! The high-pass is `p1(x) = e^{2 pi i x} * conj(p0(x + 1/2))`.

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rational::{rat, rat_to_f64, reduce_coord, Rat};
use crate::scalar::Scalar;

/// C-infinity step: 0 for u <= 0, 1 for u >= 1, strictly increasing
/// between, with th(1-u) = 1 - th(u).
pub fn smooth_step(u: f64) -> f64 {
    fn phi(u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            (-1.0 / u).exp()
        }
    }
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = phi(u);
        a / (a + phi(1.0 - u))
    }
}

/// Smooth ramp from 0 at `lo` to 1 at `hi`.
#[derive(Clone, Copy, Debug)]
pub struct SmoothStep {
    pub lo: f64,
    pub hi: f64,
}

impl SmoothStep {
    pub fn eval(&self, x: f64) -> f64 {
        smooth_step((x - self.lo) / (self.hi - self.lo))
    }
}

/// Maximum allowed ramp margin (the default).
pub const QMF_EPS_MAX: Rat = Rat::new_raw(1, 100);

/// The smooth even 1-periodic low-pass QMF described in the module docs.
#[derive(Clone, Copy, Debug)]
pub struct QmfLowpass {
    eps: Rat,
}

/// Which analytic region of `p0` a point falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Region {
    FlatMax,
    FlatZero,
    RampDownLow,  // (1/14+eps, 1/7-eps)
    RampUp,       // (3/14+eps, 2/7-eps)
    RampDownHigh, // (5/14+eps, 3/7-eps)
}

impl QmfLowpass {
    pub fn new(eps: Rat) -> Result<Self> {
        if eps <= Rat::zero() || eps > QMF_EPS_MAX {
            return Err(Error::EpsilonTooLarge(rat_to_f64(&eps)));
        }
        Ok(QmfLowpass { eps })
    }

    pub fn default_eps() -> Self {
        QmfLowpass { eps: QMF_EPS_MAX }
    }

    pub fn eps(&self) -> Rat {
        self.eps
    }

    fn region(&self, a: Rat) -> Region {
        let e = self.eps;
        if a <= rat(1, 14) + e || (a >= rat(2, 7) - e && a <= rat(5, 14) + e) {
            Region::FlatMax
        } else if (a >= rat(1, 7) - e && a <= rat(3, 14) + e) || a >= rat(3, 7) - e {
            Region::FlatZero
        } else if a < rat(1, 7) - e {
            Region::RampDownLow
        } else if a < rat(2, 7) - e {
            Region::RampUp
        } else {
            Region::RampDownHigh
        }
    }

    /// Evaluate at an exact rational point. Returns an exact `sqrt 2`
    /// or `0` on the flat regions, a float on the ramps.
    pub fn eval(&self, x: Rat) -> Scalar {
        let a = reduce_coord(x).abs();
        let e = rat_to_f64(&self.eps);
        let len = 1.0 / 14.0 - 2.0 * e;
        let af = rat_to_f64(&a);
        match self.region(a) {
            Region::FlatMax => Scalar::sqrt_n(2),
            Region::FlatZero => Scalar::ZERO,
            Region::RampDownLow => {
                let t = smooth_step((af - 1.0 / 14.0 - e) / len);
                Scalar::num(2.0f64.sqrt() * (PI / 2.0 * t).cos(), 0.0)
            }
            Region::RampUp => {
                let t = smooth_step((af - 3.0 / 14.0 - e) / len);
                Scalar::num(2.0f64.sqrt() * (PI / 2.0 * t).sin(), 0.0)
            }
            Region::RampDownHigh => {
                let t = smooth_step((3.0 / 7.0 - e - af) / len);
                Scalar::num(2.0f64.sqrt() * (PI / 2.0 * t).sin(), 0.0)
            }
        }
    }

    /// Closed intervals of `a = |x|` where `p0 = sqrt 2` exactly.
    pub fn flat_max(&self) -> Vec<(Rat, Rat)> {
        let e = self.eps;
        vec![
            (Rat::zero(), rat(1, 14) + e),
            (rat(2, 7) - e, rat(5, 14) + e),
        ]
    }

    /// Closed intervals of `a = |x|` where `p0 = 0` exactly.
    pub fn flat_zero(&self) -> Vec<(Rat, Rat)> {
        let e = self.eps;
        vec![(rat(1, 7) - e, rat(3, 14) + e), (rat(3, 7) - e, rat(1, 2))]
    }
}

/// `p1(x) = e^{2 pi i x} * conj(p0(x + 1/2))`.
#[derive(Clone, Copy, Debug)]
pub struct QmfHighpass {
    pub low: QmfLowpass,
}

impl QmfHighpass {
    pub fn new(low: QmfLowpass) -> Self {
        QmfHighpass { low }
    }

    pub fn eval(&self, x: Rat) -> Scalar {
        let base = self.low.eval(x + rat(1, 2)).conj();
        if base.is_zero() {
            return Scalar::ZERO;
        }
        // exact phase when 2x is an integer: e^{2 pi i x} = +-1
        let two_x = x * Rat::from_integer(2);
        if base.is_exact() && two_x.is_integer() {
            return if (two_x.to_integer() % 2) == 0 { base } else { -base };
        }
        let xf = rat_to_f64(&x);
        Scalar::Num(Complex64::from_polar(1.0, 2.0 * PI * xf) * base.to_complex())
    }
}
