//! The shipped example systems: the flat two-band system of Example
//! 3.5, the canonical and smooth Journé systems, and the classical
//! one-dimensional MRA pair.

use crate::filters::{make_filter_system, FilterSystem};
use crate::funcalg::{mirrored, FilterFn, Interval, PiecewiseFn, QmfHighpass, QmfLowpass};
use crate::lattice::DilationScheme;
use crate::multiplicity::{MultiplicityFn, MultiplicityPair};
use crate::rational::{rat, Rat};
use crate::scalar::Scalar;

fn dyadic_scheme() -> DilationScheme {
    DilationScheme::new(vec![vec![2]]).expect("dyadic scheme")
}

fn iv(lo: Rat, hi: Rat) -> Interval {
    Interval::new(lo, hi).expect("catalog interval")
}

fn sqrt2_chi(intervals: Vec<Interval>) -> FilterFn {
    FilterFn::Pc(
        PiecewiseFn::indicator(intervals, Scalar::sqrt_n(2), true).expect("catalog pc"),
    )
}

fn one_chi(intervals: Vec<Interval>) -> PiecewiseFn {
    PiecewiseFn::indicator(intervals, Scalar::ONE, true).expect("catalog window")
}

fn zero_fn() -> FilterFn {
    FilterFn::zero()
}

fn full_torus() -> Vec<Interval> {
    vec![iv(rat(-1, 2), rat(1, 2))]
}

/// The Journé multiplicity function: 2 on S_2 = [-1/7,1/7), 1 on the
/// rest of S_1 = [-1/2,-3/7) u [-2/7,2/7) u [3/7,1/2), 0 elsewhere.
pub fn journe_multiplicity() -> MultiplicityFn {
    MultiplicityFn::new(vec![
        (iv(rat(-1, 2), rat(-3, 7)), 1),
        (iv(rat(-2, 7), rat(-1, 7)), 1),
        (iv(rat(-1, 7), rat(1, 7)), 2),
        (iv(rat(1, 7), rat(2, 7)), 1),
        (iv(rat(3, 7), rat(1, 2)), 1),
    ])
    .expect("journe multiplicity")
}

/// Example 3.5: the flat two-band pair with m = m-tilde = 1,
/// h = sqrt2 [chi_{[-1/8,1/8)} + chi_{+-[1/4,3/8)}],
/// g = sqrt2 [chi_{+-[1/8,1/4)} + chi_{+-[3/8,1/2)}].
pub fn ex35_system() -> FilterSystem {
    let scheme = dyadic_scheme();
    let mp = MultiplicityPair::new(&scheme, MultiplicityFn::constant(1))
        .expect("ex35 multiplicity pair");
    let mut h_ivs = vec![iv(rat(-1, 8), rat(1, 8))];
    h_ivs.extend(mirrored(rat(1, 4), rat(3, 8)));
    let mut g_ivs = mirrored(rat(1, 8), rat(1, 4));
    g_ivs.extend(mirrored(rat(3, 8), rat(1, 2)));
    make_filter_system(
        scheme,
        mp,
        vec![vec![sqrt2_chi(h_ivs)]],
        vec![vec![sqrt2_chi(g_ivs)]],
        "ex35",
    )
    .expect("ex35 system")
}

fn journe_pair() -> (DilationScheme, MultiplicityPair) {
    let scheme = dyadic_scheme();
    let mp = MultiplicityPair::new(&scheme, journe_multiplicity())
        .expect("journe multiplicity pair");
    debug_assert_eq!(mp.c(), 2);
    debug_assert_eq!(mp.c_tilde(), 1);
    (scheme, mp)
}

/// Example 4.8: the canonical Journé filter system
/// h^C_{1,1} = sqrt2 chi_{[-2/7,-1/4) u [-1/7,1/7) u [1/4,2/7)},
/// h^C_{2,1} = sqrt2 chi_{+-[3/7,1/2)},
/// g^C_1 = sqrt2 chi_{[-1/4,-1/7) u [1/7,1/4)},
/// g^C_2 = sqrt2 chi_{[-1/7,1/7)}; the second column of H is zero.
pub fn journe_canonical_system() -> FilterSystem {
    let (scheme, mp) = journe_pair();
    let h11 = sqrt2_chi(vec![
        iv(rat(-2, 7), rat(-1, 4)),
        iv(rat(-1, 7), rat(1, 7)),
        iv(rat(1, 4), rat(2, 7)),
    ]);
    let h21 = sqrt2_chi(mirrored(rat(3, 7), rat(1, 2)));
    let g11 = sqrt2_chi(vec![iv(rat(-1, 4), rat(-1, 7)), iv(rat(1, 7), rat(1, 4))]);
    let g12 = sqrt2_chi(vec![iv(rat(-1, 7), rat(1, 7))]);
    make_filter_system(
        scheme,
        mp,
        vec![vec![h11, zero_fn()], vec![h21, zero_fn()]],
        vec![vec![g11, g12]],
        "journe-canonical",
    )
    .expect("journe canonical system")
}

/// Example 3.6: the smooth Journé system built from the QMF pair
/// h_{1,1} = p0 chi_{[-2/7,2/7)}, h_{1,2} = p0(. + 1/2) chi_{[-1/7,1/7)},
/// h_{2,1} = sqrt2 chi_{+-[3/7,1/2)},
/// g_1 = p1 chi_{[-2/7,2/7)}, g_2 = p1(. + 1/2) chi_{[-1/7,1/7)}.
pub fn journe_smooth_system_with_eps(eps: Rat) -> FilterSystem {
    let (scheme, mp) = journe_pair();
    let p0 = QmfLowpass::new(eps).expect("journe smooth eps");
    let p1 = QmfHighpass::new(p0);
    let w_s1_mid = one_chi(vec![iv(rat(-2, 7), rat(2, 7))]);
    let w_s2 = one_chi(vec![iv(rat(-1, 7), rat(1, 7))]);
    let h11 = FilterFn::SmoothLow { qmf: p0, shift: rat(0, 1), window: w_s1_mid.clone() };
    let h12 = FilterFn::SmoothLow { qmf: p0, shift: rat(1, 2), window: w_s2.clone() };
    let h21 = sqrt2_chi(mirrored(rat(3, 7), rat(1, 2)));
    let g11 = FilterFn::SmoothHigh { qmf: p1, shift: rat(0, 1), window: w_s1_mid };
    let g12 = FilterFn::SmoothHigh { qmf: p1, shift: rat(1, 2), window: w_s2 };
    make_filter_system(
        scheme,
        mp,
        vec![vec![h11, h12], vec![h21, zero_fn()]],
        vec![vec![g11, g12]],
        "journe-smooth",
    )
    .expect("journe smooth system")
}

pub fn journe_smooth_system() -> FilterSystem {
    journe_smooth_system_with_eps(rat(1, 100))
}

/// The classical dyadic MRA pair (p0, p1) with m = m-tilde = 1.
pub fn classical_mra_system() -> FilterSystem {
    let scheme = dyadic_scheme();
    let mp = MultiplicityPair::new(&scheme, MultiplicityFn::constant(1))
        .expect("classical multiplicity pair");
    let p0 = QmfLowpass::default_eps();
    let p1 = QmfHighpass::new(p0);
    let w = one_chi(full_torus());
    make_filter_system(
        scheme,
        mp,
        vec![vec![FilterFn::SmoothLow { qmf: p0, shift: rat(0, 1), window: w.clone() }]],
        vec![vec![FilterFn::SmoothHigh { qmf: p1, shift: rat(0, 1), window: w }]],
        "classical-mra",
    )
    .expect("classical mra system")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::TorusPoint;

    #[test]
    fn shipped_systems_construct() {
        assert_eq!(ex35_system().c(), 1);
        assert_eq!(journe_canonical_system().c(), 2);
        assert_eq!(journe_smooth_system().c_tilde(), 1);
        assert_eq!(classical_mra_system().c(), 1);
    }

    #[test]
    fn journe_mp_matches_reference() {
        let (_, mp) = journe_pair();
        assert_eq!(mp.m_tilde, MultiplicityFn::constant(1));
    }

    #[test]
    fn canonical_g2_is_sqrt2_on_s2() {
        let sys = journe_canonical_system();
        let v = sys.g[0][1].eval(&TorusPoint::from_scalar(rat(1, 10)));
        assert_eq!(v, Scalar::sqrt_n(2));
        let w = sys.g[0][1].eval(&TorusPoint::from_scalar(rat(1, 5)));
        assert!(w.is_zero());
    }
}
