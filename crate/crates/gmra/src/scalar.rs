//! Filter values.
//!
//! Values of the shipped piecewise-constant systems live in the real
//! quadratic field Q(sqrt N); keeping them symbolic makes the filter
//! equation residuals exactly zero. Anything else (smooth filters,
//! completed high-pass samples) is a complex double.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::rational::{format_rat, rat_to_f64, Rat};

/// A filter value: exactly `a + b*sqrt(n)` (real), or a complex double.
///
/// `n = 0` marks a pure rational; exact values with different radicands
/// are demoted to floats on contact.
#[derive(Clone, Copy, PartialEq)]
pub enum Scalar {
    Exact { a: Rat, b: Rat, n: i128 },
    Num(Complex64),
}

impl Scalar {
    pub const ZERO: Scalar = Scalar::Exact {
        a: Ratio::new_raw(0, 1),
        b: Ratio::new_raw(0, 1),
        n: 0,
    };
    pub const ONE: Scalar = Scalar::Exact {
        a: Ratio::new_raw(1, 1),
        b: Ratio::new_raw(0, 1),
        n: 0,
    };

    pub fn from_rat(a: Rat) -> Self {
        Scalar::Exact { a, b: Rat::zero(), n: 0 }
    }

    pub fn from_int(k: i128) -> Self {
        Scalar::from_rat(Rat::from_integer(k))
    }

    /// `b * sqrt(n)`.
    pub fn sqrt_mult(b: Rat, n: i128) -> Self {
        assert!(n >= 0);
        if b.is_zero() || n == 0 {
            return Scalar::ZERO;
        }
        if n == 1 {
            return Scalar::from_rat(b);
        }
        // pull out square factors so sqrt(4) etc. normalizes
        let mut m = n;
        let mut outer = Rat::from_integer(1);
        let mut k = 2i128;
        while k * k <= m {
            while m % (k * k) == 0 {
                m /= k * k;
                outer *= Rat::from_integer(k);
            }
            k += 1;
        }
        if m == 1 {
            Scalar::from_rat(b * outer)
        } else {
            Scalar::Exact { a: Rat::zero(), b: b * outer, n: m }
        }
    }

    pub fn sqrt_n(n: i128) -> Self {
        Scalar::sqrt_mult(Rat::from_integer(1), n)
    }

    pub fn num(re: f64, im: f64) -> Self {
        Scalar::Num(Complex64::new(re, im))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact { a, b, .. } => a.is_zero() && b.is_zero(),
            Scalar::Num(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact { a, b, n } => {
                Complex64::new(rat_to_f64(a) + rat_to_f64(b) * (*n as f64).sqrt(), 0.0)
            }
            Scalar::Num(z) => *z,
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact { .. } => *self,
            Scalar::Num(z) => Scalar::Num(z.conj()),
        }
    }

    /// |v|^2, exact when the value is exact.
    pub fn norm_sq(&self) -> Scalar {
        match self {
            Scalar::Exact { .. } => *self * *self,
            Scalar::Num(z) => Scalar::Num(Complex64::new(z.norm_sqr(), 0.0)),
        }
    }

    /// Absolute value as f64 (for residual reporting).
    pub fn abs(&self) -> f64 {
        match self {
            Scalar::Exact { .. } => self.to_complex().re.abs(),
            Scalar::Num(z) => z.norm(),
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::ZERO
    }
}

fn compatible(n1: i128, n2: i128) -> Option<i128> {
    if n1 == 0 {
        Some(n2)
    } else if n2 == 0 || n1 == n2 {
        Some(n1)
    } else {
        None
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact { a: a1, b: b1, n: n1 }, Scalar::Exact { a: a2, b: b2, n: n2 }) => {
                match compatible(n1, n2) {
                    Some(n) => {
                        let b = b1 + b2;
                        Scalar::Exact { a: a1 + a2, b, n: if b.is_zero() { 0 } else { n } }
                    }
                    None => Scalar::Num(self.to_complex() + rhs.to_complex()),
                }
            }
            _ => Scalar::Num(self.to_complex() + rhs.to_complex()),
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact { a, b, n } => Scalar::Exact { a: -a, b: -b, n },
            Scalar::Num(z) => Scalar::Num(-z),
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact { a: a1, b: b1, n: n1 }, Scalar::Exact { a: a2, b: b2, n: n2 }) => {
                match compatible(n1, n2) {
                    Some(n) => {
                        let a = a1 * a2 + b1 * b2 * Rat::from_integer(n);
                        let b = a1 * b2 + a2 * b1;
                        Scalar::Exact { a, b, n: if b.is_zero() { 0 } else { n } }
                    }
                    None => Scalar::Num(self.to_complex() * rhs.to_complex()),
                }
            }
            _ => Scalar::Num(self.to_complex() * rhs.to_complex()),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact { a, b, n } => {
                if b.is_zero() {
                    write!(f, "{}", format_rat(a))
                } else if a.is_zero() {
                    write!(f, "{}*sqrt({})", format_rat(b), n)
                } else {
                    write!(f, "{} + {}*sqrt({})", format_rat(a), format_rat(b), n)
                }
            }
            Scalar::Num(z) => write!(f, "{z}"),
        }
    }
}

/// Sum with exactness preserved when every term is exact.
pub fn scalar_sum<I: IntoIterator<Item = Scalar>>(terms: I) -> Scalar {
    terms.into_iter().fold(Scalar::ZERO, |acc, t| acc + t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn sqrt2_squares_exactly() {
        let s = Scalar::sqrt_n(2);
        let sq = s * s;
        assert_eq!(sq, Scalar::from_int(2));
        assert!(sq.is_exact());
        // float path would miss: sqrt(2)^2 != 2 in f64
        let f = 2.0f64.sqrt();
        assert_ne!(f * f, 2.0);
    }

    #[test]
    fn inv_sqrt_n_times_sqrt_n() {
        let inv = Scalar::sqrt_mult(rat(1, 2), 2); // 1/sqrt(2)
        let s = Scalar::sqrt_n(2);
        assert_eq!(inv * s, Scalar::ONE);
    }

    #[test]
    fn square_radicands_normalize() {
        assert_eq!(Scalar::sqrt_n(4), Scalar::from_int(2));
        assert_eq!(Scalar::sqrt_n(8), Scalar::sqrt_mult(rat(2, 1), 2));
        assert_eq!(Scalar::sqrt_n(9), Scalar::from_int(3));
    }

    #[test]
    fn mixed_radicands_fall_back_to_float() {
        let a = Scalar::sqrt_n(2);
        let b = Scalar::sqrt_n(3);
        let p = a * b;
        assert!(!p.is_exact());
        assert!((p.to_complex().re - 6.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn norm_sq_of_exact_is_exact_zero_residual() {
        let v = Scalar::sqrt_n(2);
        let residual = v.norm_sq() + Scalar::ZERO.norm_sq() - Scalar::from_int(2);
        assert!(residual.is_zero());
    }
}
