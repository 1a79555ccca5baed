//! Exact rational arithmetic for torus geometry.
//!
//! All interval endpoints, grid points and preimage coordinates are
//! `Ratio<i128>`; floating point enters only through filter values.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::error::{Error, Result};

pub type Rat = Ratio<i128>;

pub fn rat(num: i128, den: i128) -> Rat {
    Ratio::new(num, den)
}

/// Parse a rational from "p/q" or a plain integer string.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i128 = num
        .parse()
        .map_err(|_| Error::Config(format!("bad rational {s:?}")))?;
    let d: i128 = den
        .parse()
        .map_err(|_| Error::Config(format!("bad rational {s:?}")))?;
    if d == 0 {
        return Err(Error::Config(format!("zero denominator in {s:?}")));
    }
    Ok(Ratio::new(n, d))
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Reduce x into the fundamental cube coordinate range [-1/2, 1/2).
pub fn reduce_coord(x: Rat) -> Rat {
    let half = rat(1, 2);
    let shifted = x + half;
    let fl = shifted.floor();
    x - fl
}

/// A point of the torus T^d = [-1/2, 1/2)^d with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusPoint(pub Vec<Rat>);

impl TorusPoint {
    /// Reduce arbitrary rational coordinates into the cube.
    pub fn reduce(coords: Vec<Rat>) -> Self {
        TorusPoint(coords.into_iter().map(reduce_coord).collect())
    }

    pub fn zero(d: usize) -> Self {
        TorusPoint(vec![Rat::zero(); d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    /// The single coordinate of a 1-d point.
    pub fn scalar(&self) -> Rat {
        debug_assert_eq!(self.0.len(), 1);
        self.0[0]
    }

    pub fn from_scalar(x: Rat) -> Self {
        TorusPoint(vec![reduce_coord(x)])
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rat_to_f64).collect()
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rat(c))?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Absolute value of a rational as f64, for diagnostics.
pub fn rat_abs_f64(r: &Rat) -> f64 {
    rat_to_f64(&r.abs())
}
