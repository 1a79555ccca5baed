//! Multiplicity functions m, their conjugates m-tilde, the level sets
//! S_i = {m >= i}, and the (truncated) admissibility checks.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::funcalg::{canonical_union, Interval, PiecewiseFn};
use crate::lattice::DilationScheme;
use crate::rational::{rat, reduce_coord, Rat, TorusPoint};
use crate::scalar::Scalar;

/// Bounded integer-valued piecewise-constant multiplicity function on
/// the 1-d torus. Zero off the listed pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicityFn {
    pieces: Vec<(Interval, u32)>,
    c: u32,
}

impl MultiplicityFn {
    pub fn new(pieces: Vec<(Interval, u32)>) -> Result<Self> {
        let half = rat(1, 2);
        let mut pieces: Vec<(Interval, u32)> =
            pieces.into_iter().filter(|(_, v)| *v > 0).collect();
        for (iv, _) in &pieces {
            if iv.lo < -half || iv.hi > half {
                return Err(Error::InvalidInterval(
                    format!("{}", iv.lo),
                    format!("{}", iv.hi),
                ));
            }
        }
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        for w in pieces.windows(2) {
            if w[1].0.lo < w[0].0.hi {
                return Err(Error::OverlappingPieces(format!("{:?}", w[1].0)));
            }
        }
        let c = pieces.iter().map(|(_, v)| *v).max().unwrap_or(0);
        Ok(MultiplicityFn { pieces, c })
    }

    /// m identically equal to `v` on the whole torus.
    pub fn constant(v: u32) -> Self {
        if v == 0 {
            return MultiplicityFn { pieces: Vec::new(), c: 0 };
        }
        MultiplicityFn {
            pieces: vec![(Interval { lo: rat(-1, 2), hi: rat(1, 2) }, v)],
            c: v,
        }
    }

    /// Maximum value c = ess sup m.
    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn pieces(&self) -> &[(Interval, u32)] {
        &self.pieces
    }

    pub fn eval(&self, x: Rat) -> u32 {
        let x = reduce_coord(x);
        for (iv, v) in &self.pieces {
            if iv.lo > x {
                break;
            }
            if iv.contains(&x) {
                return *v;
            }
        }
        0
    }

    pub fn eval_point(&self, omega: &TorusPoint) -> u32 {
        self.eval(omega.scalar())
    }

    /// S_i = {omega : m(omega) >= i}, exact interval union; 1 <= i <= c.
    pub fn s_set(&self, i: u32) -> Result<Vec<Interval>> {
        if i == 0 || i > self.c {
            return Err(Error::IndexOutOfRange(i as usize, self.c as usize));
        }
        Ok(canonical_union(
            self.pieces
                .iter()
                .filter(|(_, v)| *v >= i)
                .map(|(iv, _)| *iv)
                .collect(),
        ))
    }

    /// Indicator of S_i as an exact pc function.
    pub fn s_indicator(&self, i: u32) -> Result<PiecewiseFn> {
        PiecewiseFn::indicator(self.s_set(i)?, Scalar::ONE, true)
    }

    pub fn breakpoints(&self) -> Vec<Rat> {
        let mut bps: Vec<Rat> = self
            .pieces
            .iter()
            .flat_map(|(iv, _)| [iv.lo, iv.hi])
            .collect();
        bps.push(rat(-1, 2));
        bps.push(rat(1, 2));
        bps.sort();
        bps.dedup();
        bps
    }
}

/// m-tilde(omega) = sum_l m(omega_l) - m(omega), computed exactly by
/// refining the breakpoint partition under the B^{-1} pullback.
pub fn conjugate_multiplicity(
    scheme: &DilationScheme,
    m: &MultiplicityFn,
) -> Result<MultiplicityFn> {
    assert_eq!(scheme.d, 1, "exact conjugate multiplicity needs d = 1");
    let b = scheme.b[0][0];
    let half = rat(1, 2);

    // cut points: breakpoints of m, plus every omega where some
    // preimage omega_l = reduce(omega/b + zeta_l) crosses a breakpoint,
    // i.e. omega = b*(beta + j - zeta_l)
    let mut cuts: Vec<Rat> = vec![-half, half];
    let babs = b.unsigned_abs() as i128;
    for beta in m.breakpoints() {
        cuts.push(beta);
        for z in &scheme.zetas {
            for j in -(babs + 1)..=(babs + 1) {
                let cand = Rat::from_integer(b) * (beta + Rat::from_integer(j) - z.scalar());
                if cand >= -half && cand <= half {
                    cuts.push(cand);
                }
            }
        }
    }
    cuts.sort();
    cuts.dedup();

    let mut pieces: Vec<(Interval, u32)> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo >= hi {
            continue;
        }
        let mid = (lo + hi) / Rat::from_integer(2);
        let omega = TorusPoint::from_scalar(mid);
        let sum: u32 = scheme
            .preimages(&omega)
            .iter()
            .map(|p| m.eval_point(p))
            .sum();
        let mv = m.eval(mid);
        if sum < mv {
            return Err(Error::ConsistencyViolated(format!("{omega}")));
        }
        let val = sum - mv;
        match pieces.last_mut() {
            Some((last, lv)) if last.hi == lo && *lv == val => last.hi = hi,
            _ => pieces.push((Interval { lo, hi }, val)),
        }
    }
    MultiplicityFn::new(pieces)
}

/// The pair (m, m-tilde) with their maxima.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicityPair {
    pub m: MultiplicityFn,
    pub m_tilde: MultiplicityFn,
}

impl MultiplicityPair {
    pub fn new(scheme: &DilationScheme, m: MultiplicityFn) -> Result<Self> {
        let m_tilde = conjugate_multiplicity(scheme, &m)?;
        Ok(MultiplicityPair { m, m_tilde })
    }

    pub fn c(&self) -> u32 {
        self.m.c()
    }

    pub fn c_tilde(&self) -> u32 {
        self.m_tilde.c()
    }
}

/// One point where the consistency inequality fails.
#[derive(Clone, Debug)]
pub struct ConsistencyViolation {
    pub omega: TorusPoint,
    pub m_value: u32,
    pub preimage_sum: u32,
}

/// Grid check of m(omega) <= sum_l m(omega_l).
#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub grid_q: u32,
    pub checked: usize,
    pub violations: Vec<ConsistencyViolation>,
}

impl ConsistencyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_consistency_inequality(
    scheme: &DilationScheme,
    m: &MultiplicityFn,
    grid_q: u32,
) -> ConsistencyReport {
    let grid = scheme.rational_grid(grid_q);
    let mut violations = Vec::new();
    for omega in &grid {
        let mv = m.eval_point(omega);
        let sum: u32 = scheme
            .preimages(omega)
            .iter()
            .map(|p| m.eval_point(p))
            .sum();
        if sum < mv {
            violations.push(ConsistencyViolation {
                omega: omega.clone(),
                m_value: mv,
                preimage_sum: sum,
            });
        }
    }
    ConsistencyReport { grid_q, checked: grid.len(), violations }
}

/// Truncated verification of the Delta-conditions (Eqs. 4.3/4.4):
/// with Delta approximated by union_{k<=K} B^k(S_1 + n), |n| <= nMax,
/// the translate count sum_n chi_Delta(omega+n) must dominate m(omega)
/// on the grid, and union_{|p|<=P} B^p(Delta) must cover the box
/// [-B^P/2, B^P/2).
#[derive(Clone, Debug)]
pub struct DeltaReport {
    pub fold_depth: usize,
    pub n_max: i128,
    pub dilate_range: usize,
    pub grid_q: u32,
    /// (omega, m(omega), translate count) where count < m(omega)
    pub translate_failures: Vec<(TorusPoint, u32, u32)>,
    /// uncovered sub-intervals of the box
    pub coverage_gaps: Vec<Interval>,
}

impl DeltaReport {
    pub fn ok(&self) -> bool {
        self.translate_failures.is_empty() && self.coverage_gaps.is_empty()
    }
}

fn scale_intervals(ivs: &[Interval], s: Rat) -> Vec<Interval> {
    ivs.iter()
        .map(|iv| {
            if s > Rat::zero() {
                Interval { lo: iv.lo * s, hi: iv.hi * s }
            } else {
                // negative scale flips orientation; half-open flavor is
                // immaterial for the measure-zero endpoint set here
                Interval { lo: iv.hi * s, hi: iv.lo * s }
            }
        })
        .collect()
}

fn in_union(ivs: &[Interval], x: Rat) -> bool {
    ivs.iter().any(|iv| iv.contains(&x))
}

/// Set difference box \ union, both as canonical interval lists.
fn gaps_in(box_iv: Interval, union: &[Interval]) -> Vec<Interval> {
    let mut gaps = Vec::new();
    let mut cursor = box_iv.lo;
    for iv in union {
        if iv.hi <= cursor {
            continue;
        }
        if iv.lo >= box_iv.hi {
            break;
        }
        if iv.lo > cursor {
            gaps.push(Interval { lo: cursor, hi: iv.lo.min(box_iv.hi) });
        }
        cursor = cursor.max(iv.hi);
        if cursor >= box_iv.hi {
            break;
        }
    }
    if cursor < box_iv.hi {
        gaps.push(Interval { lo: cursor, hi: box_iv.hi });
    }
    gaps
}

pub fn check_delta_conditions(
    scheme: &DilationScheme,
    m: &MultiplicityFn,
    fold_depth: usize,
    n_max: i128,
    dilate_range: usize,
    grid_q: u32,
) -> Result<DeltaReport> {
    assert_eq!(scheme.d, 1, "Delta verifier needs d = 1");
    assert!(fold_depth >= 1 && n_max >= 1 && dilate_range >= 1);
    let b = Rat::from_integer(scheme.b[0][0]);

    // truncated Delta = union_{k=0..K} B^k (S_1 + n), |n| <= nMax
    let s1 = if m.c() >= 1 { m.s_set(1)? } else { Vec::new() };
    let mut delta: Vec<Interval> = Vec::new();
    for k in 0..=fold_depth {
        let scale = num_traits::pow::pow(b, k);
        for n in -n_max..=n_max {
            let translated: Vec<Interval> = s1
                .iter()
                .map(|iv| iv.translate(Rat::from_integer(n)))
                .collect();
            delta.extend(scale_intervals(&translated, scale));
        }
    }
    let delta = canonical_union(delta);

    // Eq. 4.3: translate count >= m(omega) on the grid
    let mut translate_failures = Vec::new();
    for omega in scheme.rational_grid(grid_q) {
        let mv = m.eval_point(&omega);
        if mv == 0 {
            continue;
        }
        let x = omega.scalar();
        let count = (-n_max..=n_max)
            .filter(|&n| in_union(&delta, x + Rat::from_integer(n)))
            .count() as u32;
        if count < mv {
            translate_failures.push((omega, mv, count));
        }
    }

    // Eq. 4.4: union_{|p|<=P} B^p(Delta) covers [-B^P/2, B^P/2)
    let mut dilated: Vec<Interval> = Vec::new();
    for p in -(dilate_range as i32)..=(dilate_range as i32) {
        let scale = if p >= 0 {
            num_traits::pow::pow(b, p as usize)
        } else {
            num_traits::pow::pow(b.recip(), (-p) as usize)
        };
        dilated.extend(scale_intervals(&delta, scale));
    }
    let dilated = canonical_union(dilated);
    let half_box = num_traits::pow::pow(b, dilate_range) / Rat::from_integer(2);
    let box_iv = Interval { lo: -half_box.abs(), hi: half_box.abs() };
    let coverage_gaps = gaps_in(box_iv, &dilated);

    Ok(DeltaReport {
        fold_depth,
        n_max,
        dilate_range,
        grid_q,
        translate_failures,
        coverage_gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn dyadic() -> DilationScheme {
        DilationScheme::new(vec![vec![2]]).unwrap()
    }

    /// The Journé multiplicity: m = 2 on [-1/7,1/7), 1 on the rest of
    /// S_1 = [-1/2,-3/7) u [-2/7,2/7) u [3/7,1/2), 0 elsewhere.
    pub(crate) fn journe_m() -> MultiplicityFn {
        MultiplicityFn::new(vec![
            (Interval::new(rat(-1, 2), rat(-3, 7)).unwrap(), 1),
            (Interval::new(rat(-2, 7), rat(-1, 7)).unwrap(), 1),
            (Interval::new(rat(-1, 7), rat(1, 7)).unwrap(), 2),
            (Interval::new(rat(1, 7), rat(2, 7)).unwrap(), 1),
            (Interval::new(rat(3, 7), rat(1, 2)).unwrap(), 1),
        ])
        .unwrap()
    }

    #[test]
    fn journe_s_sets_match_listing() {
        let m = journe_m();
        assert_eq!(m.c(), 2);
        assert_eq!(
            m.s_set(1).unwrap(),
            vec![
                Interval::new(rat(-1, 2), rat(-3, 7)).unwrap(),
                Interval::new(rat(-2, 7), rat(2, 7)).unwrap(),
                Interval::new(rat(3, 7), rat(1, 2)).unwrap(),
            ]
        );
        assert_eq!(
            m.s_set(2).unwrap(),
            vec![Interval::new(rat(-1, 7), rat(1, 7)).unwrap()]
        );
        assert!(m.s_set(0).is_err());
        assert!(m.s_set(3).is_err());
    }

    #[test]
    fn s_sets_are_nested() {
        let m = journe_m();
        let s1 = m.s_set(1).unwrap();
        for iv in m.s_set(2).unwrap() {
            let mid = (iv.lo + iv.hi) / Rat::from_integer(2);
            assert!(in_union(&s1, mid) && in_union(&s1, iv.lo));
        }
    }

    #[test]
    fn journe_conjugate_is_constant_one() {
        let scheme = dyadic();
        let mt = conjugate_multiplicity(&scheme, &journe_m()).unwrap();
        assert_eq!(mt, MultiplicityFn::constant(1));
        assert_eq!(mt.c(), 1);
    }

    #[test]
    fn classical_mra_conjugate() {
        let scheme = dyadic();
        let mt = conjugate_multiplicity(&scheme, &MultiplicityFn::constant(1)).unwrap();
        assert_eq!(mt, MultiplicityFn::constant(1));
    }

    #[test]
    fn pointwise_conjugate_at_one_third() {
        // m-tilde(1/3) = m(1/6) + m(-1/3) - m(1/3) = 1 + 0 - 0 = 1
        let m = journe_m();
        assert_eq!(m.eval(rat(1, 6)), 1);
        assert_eq!(m.eval(rat(-1, 3)), 0);
        assert_eq!(m.eval(rat(1, 3)), 0);
        let mt = conjugate_multiplicity(&dyadic(), &m).unwrap();
        assert_eq!(mt.eval(rat(1, 3)), 1);
    }

    #[test]
    fn consistency_equation_exact_on_grid() {
        let scheme = dyadic();
        let m = journe_m();
        let mt = conjugate_multiplicity(&scheme, &m).unwrap();
        for omega in scheme.rational_grid(7 * 256) {
            let sum: u32 = scheme
                .preimages(&omega)
                .iter()
                .map(|p| m.eval_point(p))
                .sum();
            assert_eq!(
                m.eval_point(&omega) + mt.eval_point(&omega),
                sum,
                "consistency fails at {omega}"
            );
        }
    }

    #[test]
    fn consistency_inequality_reports() {
        let scheme = dyadic();
        assert!(check_consistency_inequality(&scheme, &journe_m(), 7 * 256).ok());
        assert!(check_consistency_inequality(&scheme, &MultiplicityFn::constant(1), 128).ok());
        // constructed counterexample: m = 1 on [1/4, 1/2), whose
        // preimages [1/8,1/4) and [-3/8,-1/4) carry m = 0
        let bad = MultiplicityFn::new(vec![(
            Interval::new(rat(1, 4), rat(1, 2)).unwrap(),
            1,
        )])
        .unwrap();
        let rep = check_consistency_inequality(&scheme, &bad, 128);
        assert!(!rep.ok());
        assert!(conjugate_multiplicity(&scheme, &bad).is_err());
    }

    #[test]
    fn delta_conditions_journe_and_trivial() {
        let scheme = dyadic();
        let rep = check_delta_conditions(&scheme, &journe_m(), 4, 8, 3, 7 * 64).unwrap();
        assert!(rep.ok(), "journe delta check failed: {rep:?}");
        let rep = check_delta_conditions(&scheme, &MultiplicityFn::constant(1), 2, 2, 2, 64)
            .unwrap();
        assert!(rep.ok());
        let rep = check_delta_conditions(&scheme, &MultiplicityFn::constant(0), 2, 2, 2, 64)
            .unwrap();
        assert!(!rep.ok());
        assert!(!rep.coverage_gaps.is_empty());
    }

    #[test]
    fn m_tilde_bounded_by_preimage_sum_bound() {
        let scheme = dyadic();
        let m = journe_m();
        let mt = conjugate_multiplicity(&scheme, &m).unwrap();
        assert!(mt.c() <= scheme.n as u32 * m.c());
    }

    #[test]
    fn gaps_in_finds_holes() {
        let box_iv = Interval::new(rat(0, 1), rat(1, 1)).unwrap();
        let union = vec![
            Interval::new(rat(-1, 1), rat(1, 4)).unwrap(),
            Interval::new(rat(1, 2), rat(3, 4)).unwrap(),
        ];
        let gaps = gaps_in(box_iv, &union);
        assert_eq!(
            gaps,
            vec![
                Interval::new(rat(1, 4), rat(1, 2)).unwrap(),
                Interval::new(rat(3, 4), rat(1, 1)).unwrap(),
            ]
        );
        assert!(union.iter().all(|iv| iv.lo.abs() <= Rat::from_integer(1)));
    }
}
