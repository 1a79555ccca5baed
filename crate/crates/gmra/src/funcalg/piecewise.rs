use num_complex::Complex64;
use num_traits::Zero;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::{format_rat, rat, rat_to_f64, reduce_coord, Rat};
use crate::scalar::Scalar;

/// Half-open interval [lo, hi) with exact rational endpoints.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidInterval(format_rat(&lo), format_rat(&hi)));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: &Rat) -> bool {
        *x >= self.lo && *x < self.hi
    }

    pub fn len(&self) -> Rat {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn translate(&self, t: Rat) -> Interval {
        Interval { lo: self.lo + t, hi: self.hi + t }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", format_rat(&self.lo), format_rat(&self.hi))
    }
}

/// The "+-[a,b)" shorthand: [-b,-a) u [a,b).
pub fn mirrored(a: Rat, b: Rat) -> Vec<Interval> {
    vec![Interval { lo: -b, hi: -a }, Interval { lo: a, hi: b }]
}

/// Merge overlapping/adjacent intervals into a canonical sorted union.
pub fn canonical_union(mut ivs: Vec<Interval>) -> Vec<Interval> {
    ivs.retain(|i| !i.is_empty());
    ivs.sort();
    let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => {
                last.hi = last.hi.max(iv.hi);
            }
            _ => out.push(iv),
        }
    }
    out
}

/// Piecewise-constant function with rational breakpoints; zero off all
/// pieces. Periodic functions are evaluated modulo Z after reduction to
/// the cube; non-periodic ones live on the real line.
#[derive(Clone, PartialEq)]
pub struct PiecewiseFn {
    pieces: Vec<(Interval, Scalar)>,
    periodic: bool,
}

impl fmt::Debug for PiecewiseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pc{}[", if self.periodic { "~" } else { "" })?;
        for (iv, v) in &self.pieces {
            write!(f, "{iv:?}={v:?} ")?;
        }
        write!(f, "]")
    }
}

impl PiecewiseFn {
    /// Build from raw pieces; sorts, rejects overlaps, drops exact zeros.
    pub fn new(pieces: Vec<(Interval, Scalar)>, periodic: bool) -> Result<Self> {
        let mut pieces: Vec<(Interval, Scalar)> =
            pieces.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        for w in pieces.windows(2) {
            if w[1].0.lo < w[0].0.hi {
                return Err(Error::OverlappingPieces(format!("{:?}", w[1].0)));
            }
        }
        Ok(PiecewiseFn { pieces, periodic })
    }

    /// Torus filter: endpoints must lie in [-1/2, 1/2]; evaluated
    /// Z-periodically.
    pub fn torus(pieces: Vec<(Interval, Scalar)>) -> Result<Self> {
        let half = rat(1, 2);
        for (iv, _) in &pieces {
            if iv.lo < -half || iv.hi > half {
                return Err(Error::InvalidInterval(
                    format_rat(&iv.lo),
                    format_rat(&iv.hi),
                ));
            }
        }
        PiecewiseFn::new(pieces, true)
    }

    pub fn zero(periodic: bool) -> Self {
        PiecewiseFn { pieces: Vec::new(), periodic }
    }

    pub fn indicator(intervals: Vec<Interval>, value: Scalar, periodic: bool) -> Result<Self> {
        PiecewiseFn::new(intervals.into_iter().map(|iv| (iv, value)).collect(), periodic)
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn pieces(&self) -> &[(Interval, Scalar)] {
        &self.pieces
    }

    pub fn eval(&self, x: Rat) -> Scalar {
        let x = if self.periodic { reduce_coord(x) } else { x };
        // pieces are few; linear scan with early exit
        for (iv, v) in &self.pieces {
            if iv.lo > x {
                break;
            }
            if iv.contains(&x) {
                return *v;
            }
        }
        Scalar::ZERO
    }

    pub fn support(&self) -> Vec<Interval> {
        canonical_union(self.pieces.iter().map(|(iv, _)| *iv).collect())
    }

    /// Smallest interval containing the support (None when zero).
    pub fn support_bounds(&self) -> Option<(Rat, Rat)> {
        let s = self.support();
        Some((s.first()?.lo, s.last()?.hi))
    }

    pub fn breakpoints(&self) -> Vec<Rat> {
        let mut bps: Vec<Rat> = self
            .pieces
            .iter()
            .flat_map(|(iv, _)| [iv.lo, iv.hi])
            .collect();
        bps.sort();
        bps.dedup();
        bps
    }

    pub fn conj(&self) -> Self {
        PiecewiseFn {
            pieces: self.pieces.iter().map(|(iv, v)| (*iv, v.conj())).collect(),
            periodic: self.periodic,
        }
    }

    pub fn scale_values(&self, c: Scalar) -> Self {
        PiecewiseFn {
            pieces: self.pieces.iter().map(|(iv, v)| (*iv, c * *v)).collect(),
            periodic: self.periodic,
        }
    }

    /// g(x) = f(x + t); non-periodic only.
    pub fn shift_arg(&self, t: Rat) -> Self {
        assert!(!self.periodic);
        PiecewiseFn {
            pieces: self
                .pieces
                .iter()
                .map(|(iv, v)| (iv.translate(-t), *v))
                .collect(),
            periodic: false,
        }
    }

    /// g(x) = f(x / s) for s > 0; the result is non-periodic.
    pub fn dilate_arg(&self, s: Rat) -> Self {
        assert!(s > Rat::zero(), "argument dilation needs positive scale");
        assert!(!self.periodic);
        PiecewiseFn {
            pieces: self
                .pieces
                .iter()
                .map(|(iv, v)| (Interval { lo: iv.lo * s, hi: iv.hi * s }, *v))
                .collect(),
            periodic: false,
        }
    }

    /// Non-periodic view of this function on [lo, hi), unfolding the
    /// periodic extension when needed.
    pub fn unfold(&self, lo: Rat, hi: Rat) -> Vec<(Interval, Scalar)> {
        let window = match Interval::new(lo, hi) {
            Ok(w) => w,
            Err(_) => return Vec::new(),
        };
        let mut out = Vec::new();
        if !self.periodic {
            for (iv, v) in &self.pieces {
                if let Some(hit) = iv.intersect(&window) {
                    out.push((hit, *v));
                }
            }
            return out;
        }
        let kmin = lo.floor().to_integer() - 1;
        let kmax = hi.ceil().to_integer() + 1;
        for k in kmin..=kmax {
            let t = Rat::from_integer(k);
            for (iv, v) in &self.pieces {
                if let Some(hit) = iv.translate(t).intersect(&window) {
                    out.push((hit, *v));
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Pointwise product. If both operands are periodic the result is
    /// periodic (computed on the cube); otherwise the result is
    /// non-periodic, supported on the bounded operand's support.
    pub fn mul(&self, other: &PiecewiseFn) -> PiecewiseFn {
        combine(self, other, |a, b| a * b)
    }

    pub fn add(&self, other: &PiecewiseFn) -> PiecewiseFn {
        combine(self, other, |a, b| a + b)
    }

    /// Exact integral over the real line (non-periodic) or over one
    /// period (periodic).
    pub fn integral(&self) -> Scalar {
        self.pieces
            .iter()
            .fold(Scalar::ZERO, |acc, (iv, v)| acc + *v * Scalar::from_rat(iv.len()))
    }

    /// Exact integral of |f|^2.
    pub fn integral_abs_sq(&self) -> Scalar {
        self.pieces.iter().fold(Scalar::ZERO, |acc, (iv, v)| {
            acc + v.norm_sq() * Scalar::from_rat(iv.len())
        })
    }

    /// Closed form of integral f(x) e^{-2 pi i a x} dx for a non-periodic f.
    pub fn integral_against_exponential(&self, freq: f64) -> Complex64 {
        let mut acc = Complex64::zero();
        for (iv, v) in &self.pieces {
            let (a, b) = (rat_to_f64(&iv.lo), rat_to_f64(&iv.hi));
            let vz = v.to_complex();
            if freq == 0.0 {
                acc += vz * (b - a);
            } else {
                let ea = Complex64::from_polar(1.0, -2.0 * PI * freq * a);
                let eb = Complex64::from_polar(1.0, -2.0 * PI * freq * b);
                acc += vz * (eb - ea) / Complex64::new(0.0, -2.0 * PI * freq);
            }
        }
        acc
    }
}

fn combine(
    f: &PiecewiseFn,
    g: &PiecewiseFn,
    op: impl Fn(Scalar, Scalar) -> Scalar,
) -> PiecewiseFn {
    let periodic = f.periodic && g.periodic;
    let (lo, hi) = if periodic {
        (rat(-1, 2), rat(1, 2))
    } else {
        let bounds = |h: &PiecewiseFn| h.support_bounds();
        // the window must cover every point where either operand is
        // nonzero; a periodic operand is unbounded, so use the other one
        let (flo, fhi) = match (f.periodic, g.periodic) {
            (false, false) => {
                let Some(a) = bounds(f) else {
                    return bounds(g).map_or_else(
                        || PiecewiseFn::zero(false),
                        |_| {
                            let (lo, hi) = bounds(g).unwrap();
                            window_combine(f, g, lo, hi, &op)
                        },
                    );
                };
                let b = bounds(g).unwrap_or(a);
                (a.0.min(b.0), a.1.max(b.1))
            }
            (false, true) => match bounds(f) {
                Some(a) => a,
                None => return PiecewiseFn::zero(false),
            },
            (true, false) => match bounds(g) {
                Some(a) => a,
                None => return PiecewiseFn::zero(false),
            },
            (true, true) => unreachable!(),
        };
        (flo, fhi)
    };
    window_combine(f, g, lo, hi, &op)
}

fn window_combine(
    f: &PiecewiseFn,
    g: &PiecewiseFn,
    lo: Rat,
    hi: Rat,
    op: &impl Fn(Scalar, Scalar) -> Scalar,
) -> PiecewiseFn {
    let periodic = f.periodic && g.periodic;
    let mut cuts: Vec<Rat> = vec![lo, hi];
    for (iv, _) in f.unfold(lo, hi).iter().chain(g.unfold(lo, hi).iter()) {
        cuts.push(iv.lo);
        cuts.push(iv.hi);
    }
    cuts.sort();
    cuts.dedup();
    let mut pieces = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a >= b {
            continue;
        }
        let mid = (a + b) / Rat::from_integer(2);
        let v = op(f.eval(mid), g.eval(mid));
        if !v.is_zero() {
            pieces.push((Interval { lo: a, hi: b }, v));
        }
    }
    // merge equal-valued neighbors
    let mut merged: Vec<(Interval, Scalar)> = Vec::with_capacity(pieces.len());
    for (iv, v) in pieces {
        match merged.last_mut() {
            Some((last, lv)) if last.hi == iv.lo && *lv == v && v.is_exact() => {
                last.hi = iv.hi;
            }
            _ => merged.push((iv, v)),
        }
    }
    PiecewiseFn { pieces: merged, periodic }
}
