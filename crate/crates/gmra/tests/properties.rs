//! Randomized invariants over the exact-arithmetic core.

use proptest::prelude::*;

use gmra::cascade::partial_product;
use gmra::catalog::{ex35_system, journe_canonical_system};
use gmra::filters::{build_kl, verify_filter_eq, verify_highpass_eq};
use gmra::funcalg::{Interval, PiecewiseFn};
use gmra::rational::{format_rat, parse_rat, rat, TorusPoint};
use gmra::scalar::Scalar;

fn max_entry(residuals: &[Vec<Scalar>]) -> f64 {
    residuals.iter().flatten().map(|s| s.abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// p/q strings round-trip through the parser exactly.
    #[test]
    fn rational_strings_round_trip(p in -10_000i128..10_000, q in 1i128..10_000) {
        let r = rat(p, q);
        prop_assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
    }

    /// The pc-system identities are exactly zero at arbitrary rational
    /// points, not just on the standard grids.
    #[test]
    fn identities_exact_at_arbitrary_rationals(p in -50_000i128..50_000, q in 1i128..100_000) {
        let w = TorusPoint::from_scalar(rat(p, q));
        for sys in [ex35_system(), journe_canonical_system()] {
            prop_assert_eq!(max_entry(&verify_filter_eq(&sys, &w)), 0.0);
            prop_assert_eq!(max_entry(&verify_highpass_eq(&sys, &w)), 0.0);
            prop_assert_eq!(build_kl(&sys, &w).unwrap().unitarity_defect(), 0.0);
        }
    }

    /// ||chi_[a,b)||^2 = b - a, and argument dilation scales it by s.
    #[test]
    fn indicator_norms_scale(a in -100i128..100, len in 1i128..200, s_num in 1i128..20, s_den in 1i128..20) {
        let (lo, hi) = (rat(a, 16), rat(a, 16) + rat(len, 16));
        let f = PiecewiseFn::indicator(
            vec![Interval::new(lo, hi).unwrap()], Scalar::ONE, false,
        ).unwrap();
        let s = rat(s_num, s_den);
        prop_assert_eq!(f.integral_abs_sq(), Scalar::from_rat(hi - lo));
        prop_assert_eq!(
            f.dilate_arg(s).integral_abs_sq(),
            Scalar::from_rat((hi - lo) * s)
        );
    }

    /// Exact partial products of pc systems have only 0/1-norm columns
    /// once stabilized, and the first column squared-sums to at most 1.
    #[test]
    fn partial_product_first_column_contracts(p in -4_000i128..4_000, q in 1i128..1_000) {
        let x = rat(p, q);
        let pp = partial_product(&ex35_system(), &[x], 30);
        let norm_sq: f64 = pp.matrix.iter().map(|row| {
            let v = row[0].abs();
            v * v
        }).sum();
        prop_assert!(norm_sq <= 1.0 + 1e-12);
    }

    /// shift_arg and integral_against_exponential satisfy the Fourier
    /// shift rule: F[f(. + t)](z) = e^{+2 pi i z t} F[f](z).
    #[test]
    fn fourier_shift_rule(t_num in -32i128..32, z in -8i128..8) {
        let t = rat(t_num, 8);
        let f = PiecewiseFn::indicator(
            vec![Interval::new(rat(-1, 4), rat(1, 3)).unwrap()], Scalar::ONE, false,
        ).unwrap();
        let lhs = f.shift_arg(t).integral_against_exponential(z as f64);
        let phase = num_complex::Complex64::from_polar(
            1.0,
            2.0 * std::f64::consts::PI * z as f64 * gmra::rational::rat_to_f64(&t),
        );
        let rhs = phase * f.integral_against_exponential(z as f64);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}
