//! M-systems (Definition 4.3), the per-omega unitary section of
//! Theorem 4.5, the loop group with its free transitive action
//! (Theorem 4.7) and quotients, and the Journé data of Example 4.8.

use std::sync::Arc;

use num_complex::Complex64;

use crate::catalog::journe_multiplicity;
use crate::error::{Error, Result};
use crate::filters::{build_kl, lambda_omega, make_filter_system, FilterSystem};
use crate::funcalg::{FilterFn, QmfHighpass, QmfLowpass};
use crate::lattice::DilationScheme;
use crate::multiplicity::MultiplicityPair;
use crate::rational::{rat, reduce_coord, Rat, TorusPoint};
use crate::scalar::Scalar;

const IC_TOL: f64 = 1e-10;

/// M(omega) for omega in the j-th copy (1-based) of the disjoint union:
/// the first m(alpha(omega)) components are h_{i,j}(omega), the last
/// m-tilde(alpha(omega)) are g_{k,j}(omega) (second index suppressed).
pub fn msystem_values(sys: &FilterSystem, j: usize, omega: &TorusPoint) -> Vec<Scalar> {
    let a = sys.scheme.alpha(omega);
    let ma = sys.mp.m.eval_point(&a) as usize;
    let mta = sys.mp.m_tilde.eval_point(&a) as usize;
    let hv = sys.h_at(omega);
    let gv = sys.g_at(omega);
    let mut out = Vec::with_capacity(ma + mta);
    for i in 0..ma {
        out.push(hv[i][j - 1]);
    }
    for k in 0..mta {
        out.push(gv[k][j - 1]);
    }
    out
}

/// A filter system viewed as a Borel cross-section of the bundle E_m.
#[derive(Clone, Debug)]
pub struct MSystem {
    pub sys: Arc<FilterSystem>,
    /// per-component unimodular phase against the registered canonical
    /// reference at the zeta_l, when one was registered
    pub phases: Option<Vec<Complex64>>,
}

impl MSystem {
    /// fiber dimension m(alpha(omega)) + m-tilde(alpha(omega))
    pub fn dim_at(&self, omega: &TorusPoint) -> usize {
        let a = self.sys.scheme.alpha(omega);
        (self.sys.mp.m.eval_point(&a) + self.sys.mp.m_tilde.eval_point(&a)) as usize
    }

    pub fn values(&self, j: usize, omega: &TorusPoint) -> Vec<Scalar> {
        msystem_values(&self.sys, j, omega)
    }
}

/// Wraps a filter system as an M-system. When a canonical reference is
/// registered, the initial conditions h_i(zeta_l) = h^C_i(zeta_l),
/// g_k(zeta_l) = g^C_k(zeta_l) are checked modulo one constant
/// unimodular phase per component, which is recorded.
pub fn msystem_from_filters(
    sys: &FilterSystem,
    canonical: Option<&FilterSystem>,
) -> Result<MSystem> {
    let phases = match canonical {
        None => None,
        Some(canon) => {
            if canon.mp != sys.mp {
                return Err(Error::DimensionMismatch(
                    "canonical reference has a different multiplicity pair".into(),
                ));
            }
            let zetas = sys.scheme.preimages(&TorusPoint::zero(sys.scheme.d));
            let dim0 =
                (sys.mp.m.eval_point(&zetas[0]) + sys.mp.m_tilde.eval_point(&zetas[0])) as usize;
            let mut phases = vec![Complex64::new(1.0, 0.0); dim0];
            let mut fixed = vec![false; dim0];
            for (l, zeta) in zetas.iter().enumerate() {
                for j in 1..=sys.mp.m.eval_point(zeta) as usize {
                    let v = msystem_values(sys, j, zeta);
                    let vc = msystem_values(canon, j, zeta);
                    for i in 0..dim0 {
                        let (a, b) = (v[i].to_complex(), vc[i].to_complex());
                        if a.norm() < IC_TOL && b.norm() < IC_TOL {
                            continue;
                        }
                        let mismatch = || Error::InitialConditionViolated {
                            l,
                            got: format!("component {} = {:?}", i + 1, v[i]),
                            canonical: format!("{:?}", vc[i]),
                        };
                        if a.norm() < IC_TOL || b.norm() < IC_TOL {
                            return Err(mismatch());
                        }
                        let ph = a / b;
                        if (ph.norm() - 1.0).abs() > IC_TOL {
                            return Err(mismatch());
                        }
                        if fixed[i] {
                            if (ph - phases[i]).norm() > IC_TOL {
                                return Err(mismatch());
                            }
                        } else {
                            phases[i] = ph;
                            fixed[i] = true;
                        }
                    }
                }
            }
            Some(phases)
        }
    };
    Ok(MSystem { sys: Arc::new(sys.clone()), phases })
}

/// Reconstructs the filter matrices from the cross-section view; the
/// round trip with msystem_from_filters is lossless.
pub fn filters_from_msystem(m: &MSystem) -> Result<FilterSystem> {
    let base = m.sys.clone();
    let c = base.c();
    let ct = base.c_tilde();
    let entry = |row_kind_g: bool, idx: usize, j: usize| -> FilterFn {
        let base = base.clone();
        FilterFn::Dyn(Arc::new(move |w: &TorusPoint| {
            if base.mp.m.eval_point(w) < j as u32 {
                return Scalar::ZERO; // w not in S_j
            }
            let a = base.scheme.alpha(w);
            let ma = base.mp.m.eval_point(&a) as usize;
            let mta = base.mp.m_tilde.eval_point(&a) as usize;
            let pos = if row_kind_g {
                if idx > mta {
                    return Scalar::ZERO;
                }
                ma + idx
            } else {
                if idx > ma {
                    return Scalar::ZERO;
                }
                idx
            };
            msystem_values(&base, j, w)[pos - 1]
        }))
    };
    let h = (1..=c)
        .map(|i| (1..=c).map(|j| entry(false, i, j)).collect())
        .collect();
    let g = (1..=ct)
        .map(|k| (1..=c).map(|j| entry(true, k, j)).collect())
        .collect();
    make_filter_system(
        base.scheme.clone(),
        base.mp.clone(),
        h,
        g,
        format!("{}-from-msystem", base.name),
    )
}

/// L(omega) of Theorem 4.5: rows i, columns lambda_omega(l,j), entries
/// sqrt(1/N) M_i(r_{(l,j)}(omega)); equals the L-submatrix of K(omega).
pub fn msystem_to_unitary_section(m: &MSystem, omega: &TorusPoint) -> Result<Vec<Vec<Scalar>>> {
    Ok(build_kl(&m.sys, omega)?.l_mat)
}

/// A section of the unitary group bundle F_m: omega maps to a square
/// matrix of size m(omega) + m-tilde(omega).
#[derive(Clone)]
pub struct LoopElement {
    pub mp: MultiplicityPair,
    section: Arc<dyn Fn(&TorusPoint) -> Vec<Vec<Scalar>> + Send + Sync>,
}

impl std::fmt::Debug for LoopElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LoopElement(c={}, c~={})", self.mp.c(), self.mp.c_tilde())
    }
}

fn mat_unitarity_defect(mat: &[Vec<Scalar>]) -> f64 {
    let d = mat.len();
    let mut worst = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            let mut ctc = Scalar::ZERO;
            let mut cct = Scalar::ZERO;
            for r in 0..d {
                ctc = ctc + mat[r][a].conj() * mat[r][b];
                cct = cct + mat[a][r] * mat[b][r].conj();
            }
            let id = if a == b { Scalar::ONE } else { Scalar::ZERO };
            worst = worst.max((ctc - id).abs()).max((cct - id).abs());
        }
    }
    worst
}

impl LoopElement {
    pub fn new(
        mp: MultiplicityPair,
        section: Arc<dyn Fn(&TorusPoint) -> Vec<Vec<Scalar>> + Send + Sync>,
    ) -> Self {
        LoopElement { mp, section }
    }

    pub fn identity(mp: MultiplicityPair) -> Self {
        let m = mp.clone();
        LoopElement::new(
            mp,
            Arc::new(move |w: &TorusPoint| {
                let d = (m.m.eval_point(w) + m.m_tilde.eval_point(w)) as usize;
                (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| if i == j { Scalar::ONE } else { Scalar::ZERO })
                            .collect()
                    })
                    .collect()
            }),
        )
    }

    pub fn at(&self, omega: &TorusPoint) -> Vec<Vec<Scalar>> {
        (self.section)(omega)
    }

    /// Pointwise product (self first: (self * other)(w) = self(w) other(w)).
    pub fn compose(&self, other: &LoopElement) -> Result<LoopElement> {
        if self.mp != other.mp {
            return Err(Error::DimensionMismatch(
                "loop elements over different multiplicity pairs".into(),
            ));
        }
        let (a, b) = (self.section.clone(), other.section.clone());
        Ok(LoopElement::new(
            self.mp.clone(),
            Arc::new(move |w: &TorusPoint| {
                let (ma, mb) = (a(w), b(w));
                let d = ma.len();
                (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                let mut acc = Scalar::ZERO;
                                for t in 0..d {
                                    acc = acc + ma[i][t] * mb[t][j];
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect()
            }),
        ))
    }

    pub fn unitarity_defect(&self, points: &[TorusPoint]) -> f64 {
        points
            .iter()
            .map(|w| mat_unitarity_defect(&self.at(w)))
            .fold(0.0, f64::max)
    }

    /// L(0) = Id, within exact-or-1e-12 tolerance.
    pub fn check_identity_at_zero(&self, d: usize) -> Result<()> {
        let zero = TorusPoint::zero(d);
        let mat = self.at(&zero);
        for (i, row) in mat.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let id = if i == j { Scalar::ONE } else { Scalar::ZERO };
                if (*v - id).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "loop element violates L(0) = Id at entry ({},{}): {v:?}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The action of Theorem 4.7: (L . M)(omega) = L(alpha(omega)) M(omega),
/// repackaged as a filter system (with its validity re-checked).
pub fn loop_act(l: &LoopElement, m: &MSystem) -> Result<MSystem> {
    if l.mp != m.sys.mp {
        return Err(Error::DimensionMismatch(
            "loop element and M-system have different multiplicity pairs".into(),
        ));
    }
    let base = m.sys.clone();
    let c = base.c();
    let ct = base.c_tilde();
    let entry = |row_kind_g: bool, idx: usize, j: usize| -> FilterFn {
        let base = base.clone();
        let sec = l.section.clone();
        FilterFn::Dyn(Arc::new(move |w: &TorusPoint| {
            if base.mp.m.eval_point(w) < j as u32 {
                return Scalar::ZERO;
            }
            let a = base.scheme.alpha(w);
            let ma = base.mp.m.eval_point(&a) as usize;
            let mta = base.mp.m_tilde.eval_point(&a) as usize;
            let row = if row_kind_g {
                if idx > mta {
                    return Scalar::ZERO;
                }
                ma + idx
            } else {
                if idx > ma {
                    return Scalar::ZERO;
                }
                idx
            };
            let mat = sec(&a);
            let vals = msystem_values(&base, j, w);
            let mut acc = Scalar::ZERO;
            for (t, v) in vals.iter().enumerate() {
                acc = acc + mat[row - 1][t] * *v;
            }
            acc
        }))
    };
    let h = (1..=c)
        .map(|i| (1..=c).map(|j| entry(false, i, j)).collect())
        .collect();
    let g = (1..=ct)
        .map(|k| (1..=c).map(|j| entry(true, k, j)).collect())
        .collect();
    let sys = make_filter_system(
        base.scheme.clone(),
        base.mp.clone(),
        h,
        g,
        format!("loop.{}", base.name),
    )?;
    Ok(MSystem { sys: Arc::new(sys), phases: None })
}

/// Eq. 4.6 (proof of Theorem 4.7): the unique L with L . M = M-tilde,
/// L_{i,i'}(omega) = (1/N) sum_{(l,j)} conj(M_{i'}(r_{(l,j)} omega))
/// M~_i(r_{(l,j)} omega); equals L_{M~}(omega) L_M(omega)*.
pub fn loop_quotient(m: &MSystem, m_tilde: &MSystem) -> Result<LoopElement> {
    if m.sys.mp != m_tilde.sys.mp {
        return Err(Error::DimensionMismatch(
            "quotient of M-systems over different multiplicity pairs".into(),
        ));
    }
    let a = m.sys.clone();
    let b = m_tilde.sys.clone();
    let mp = a.mp.clone();
    let section = Arc::new(move |w: &TorusPoint| {
        let pairs = lambda_omega(&a.scheme, &a.mp, w);
        let pts = a.scheme.preimages(w);
        let dim = pairs.len();
        let inv_n = Scalar::from_rat(rat(1, a.scheme.n as i128));
        let mut mat = vec![vec![Scalar::ZERO; dim]; dim];
        for &(l, j) in &pairs {
            let vm = msystem_values(&a, j, &pts[l]);
            let vt = msystem_values(&b, j, &pts[l]);
            for i in 0..dim {
                for ip in 0..dim {
                    mat[i][ip] = mat[i][ip] + inv_n * vt[i] * vm[ip].conj();
                }
            }
        }
        mat
    });
    Ok(LoopElement::new(mp, section))
}

// ---------------------------------------------------------------------
// Example 4.8 data.

fn journe_mp() -> Result<(DilationScheme, MultiplicityPair)> {
    let scheme = DilationScheme::new(vec![vec![2]])?;
    let mp = MultiplicityPair::new(&scheme, journe_multiplicity())?;
    Ok((scheme, mp))
}

/// The canonical Journé M-system M_J (Example 4.8), registered against
/// itself so all recorded phases are 1.
pub fn canonical_journe_msystem() -> Result<MSystem> {
    let sys = crate::catalog::journe_canonical_system();
    msystem_from_filters(&sys, Some(&sys))
}

/// is x in +-[a, b) on the torus? (the mirror of [a,b) is [-b,-a))
fn in_pm(x: Rat, a: Rat, b: Rat) -> bool {
    (a <= x && x < b) || (-b <= x && x < -a)
}

/// The partition P_1..P_4 of the Journe loop construction, with annotated
/// values of (m(x), m(x/2), m((x+1)/2)) on each piece.
const P_ANNOTATIONS: [(i128, i128, [u32; 3]); 4] = [
    (0, 1, [2, 2, 1]), // P1 = [-1/7, 1/7)
    (1, 2, [1, 2, 0]), // P2 = +-[1/7, 2/7)
    (2, 3, [0, 1, 0]), // P3 = +-[2/7, 3/7)
    (3, 4, [1, 1, 1]), // P4 = +-[3/7, 1/2)  (4/8 read as 1/2)
];

fn p_region(x: Rat) -> usize {
    for (idx, (a7, b7, _)) in P_ANNOTATIONS.iter().enumerate() {
        let a = rat(*a7, 7);
        let b = if idx == 3 { rat(1, 2) } else { rat(*b7, 7) };
        if (idx == 0 && -b <= x && x < b) || (idx > 0 && in_pm(x, a, b)) {
            return idx + 1;
        }
    }
    unreachable!("P1..P4 partition the torus")
}

fn check_p_annotations(mp: &MultiplicityPair) -> Result<()> {
    // cross-check the hard-coded partition against the multiplicity
    // function; a failure means the transcribed constants drifted
    let samples_in = |idx: usize| -> Vec<Rat> {
        let (a7, b7, _) = P_ANNOTATIONS[idx];
        let a = rat(a7, 7);
        let b = if idx == 3 { rat(1, 2) } else { rat(b7, 7) };
        let probes = [a, (a + b) / Rat::from_integer(2), b - rat(1, 1000)];
        if idx == 0 {
            vec![-probes[1], rat(0, 1), probes[1]]
        } else {
            probes.iter().flat_map(|&p| [p, -b + (p - a)]).collect()
        }
    };
    for (idx, (_, _, ann)) in P_ANNOTATIONS.iter().enumerate() {
        for x in samples_in(idx) {
            let vals = [
                mp.m.eval(x),
                mp.m.eval(x / Rat::from_integer(2)),
                mp.m.eval((x + Rat::from_integer(1)) / Rat::from_integer(2)),
            ];
            if vals != *ann {
                return Err(Error::Config(format!(
                    "P{} annotation mismatch at x = {}: expected {:?}, multiplicity gives {:?}",
                    idx + 1,
                    x,
                    ann,
                    vals
                )));
            }
            // fiber dimension m(x) + m~(x) must match the matrix size
            let dim = (mp.m.eval(x) + mp.m_tilde.eval(x)) as usize;
            let expect = [3usize, 2, 1, 2][idx];
            if dim != expect {
                return Err(Error::Config(format!(
                    "P{} fiber dimension {dim} != matrix size {expect}",
                    idx + 1
                )));
            }
        }
    }
    Ok(())
}

/// The loop element L_p of Example 4.8, built from a QMF low-pass p0.
///
/// NOTE on phases: the textbook form of L_p has the p~1 row unflipped, but
/// with the standard high-pass convention p1(x) = e^{2 pi i x}
/// conj(p0(x + 1/2)) one gets p~1(1/2) = -1, so that form of L_p(0) is
/// diag(1,1,-1), not the identity. We multiply the p~1 row by the
/// constant phase -1 in every piece; this keeps each piece unitary,
/// restores L(0) = Id, and changes the action's output only by the
/// global phase -1 on the high-pass row.
pub fn journe_loop_element(p0: QmfLowpass) -> Result<LoopElement> {
    let (_, mp) = journe_mp()?;
    check_p_annotations(&mp)?;
    let p1 = QmfHighpass::new(p0);
    let half_sqrt2 = Scalar::sqrt_mult(rat(1, 2), 2); // 1/sqrt(2)
    let pt0 = move |y: Rat| half_sqrt2 * p0.eval(y);
    let pt1 = move |y: Rat| -(half_sqrt2 * p1.eval(y));
    let z = Scalar::ZERO;
    let one = Scalar::ONE;
    let section = Arc::new(move |w: &TorusPoint| {
        let x = reduce_coord(w.scalar());
        let y0 = x / Rat::from_integer(2);
        let y1 = (x + Rat::from_integer(1)) / Rat::from_integer(2);
        match p_region(x) {
            1 => vec![
                vec![pt0(y0), z, pt0(y1)],
                vec![z, one, z],
                vec![pt1(y0), z, pt1(y1)],
            ],
            2 => vec![vec![pt0(y0), pt0(y1)], vec![pt1(y0), pt1(y1)]],
            3 => vec![vec![pt1(y0)]],
            _ => vec![vec![pt0(y1), pt0(y0)], vec![pt1(y1), pt1(y0)]],
        }
    });
    let l = LoopElement::new(mp, section);
    l.check_identity_at_zero(1)?;
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ex35_system, journe_canonical_system, journe_smooth_system};
    use crate::filters::{verify_cross_orth, verify_filter_eq, verify_highpass_eq};
    use crate::funcalg::{mirrored, Interval, PiecewiseFn};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn pts(count: usize, seed: u64) -> Vec<TorusPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let den = 7 * (1i128 << 12);
        (0..count)
            .map(|_| TorusPoint::from_scalar(rat(rng.gen_range(-den / 2..den / 2), den)))
            .collect()
    }

    #[test]
    fn mj_matches_reference_listing() {
        let m = canonical_journe_msystem().unwrap();
        assert_eq!(m.phases, Some(vec![Complex64::new(1.0, 0.0); 3]));
        let s2 = Scalar::sqrt_n(2);
        let at = |j: usize, x: Rat| m.values(j, &TorusPoint::from_scalar(x));
        // S_1 rows of the listing
        assert_eq!(at(1, rat(3, 16)), vec![s2]); // T_{1,1}
        assert_eq!(at(1, rat(1, 10)), vec![s2, Scalar::ZERO]); // +-[1/14,1/7)
        assert_eq!(at(1, rat(9, 35)), vec![s2, Scalar::ZERO]); // +-[1/4,2/7)
        assert_eq!(at(1, rat(8, 35)), vec![Scalar::ZERO, s2]); // +-[3/14,1/4)
        assert_eq!(at(1, rat(-9, 20)), vec![Scalar::ZERO, s2, Scalar::ZERO]); // T13\T23
        assert_eq!(at(1, rat(1, 20)), vec![s2, Scalar::ZERO, Scalar::ZERO]); // T13 n T23
        // S_2 rows
        assert_eq!(at(2, rat(1, 10)), vec![Scalar::ZERO, s2]); // T_{2,2}
        assert_eq!(at(2, rat(1, 20)), vec![Scalar::ZERO, Scalar::ZERO, s2]); // T_{2,3}
    }

    #[test]
    fn unitary_section_examples() {
        let m = canonical_journe_msystem().unwrap();
        let lc = msystem_to_unitary_section(&m, &TorusPoint::zero(1)).unwrap();
        let e = |v: i128| Scalar::from_int(v);
        assert_eq!(
            lc,
            vec![
                vec![e(1), e(0), e(0)],
                vec![e(0), e(0), e(1)],
                vec![e(0), e(1), e(0)],
            ]
        );
        let ex = msystem_from_filters(&ex35_system(), None).unwrap();
        let l = msystem_to_unitary_section(&ex, &TorusPoint::from_scalar(rat(1, 4))).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(mat_unitarity_defect(&l), 0.0);
        for w in pts(1000, 3) {
            let lm = msystem_to_unitary_section(&m, &w).unwrap();
            assert!(mat_unitarity_defect(&lm) < 1e-10, "defect at {w:?}");
            // lambda bookkeeping: size = m(w) + m~(w)
            let d = (m.sys.mp.m.eval_point(&w) + m.sys.mp.m_tilde.eval_point(&w)) as usize;
            assert_eq!(lm.len(), d);
            assert_eq!(lambda_omega(&m.sys.scheme, &m.sys.mp, &w).len(), d);
        }
    }

    #[test]
    fn round_trip_filters() {
        for sys in [ex35_system(), journe_canonical_system(), journe_smooth_system()] {
            let m = msystem_from_filters(&sys, None).unwrap();
            let back = filters_from_msystem(&m).unwrap();
            for w in pts(1000, 7) {
                let (h0, h1) = (sys.h_at(&w), back.h_at(&w));
                let (g0, g1) = (sys.g_at(&w), back.g_at(&w));
                assert_eq!(h0, h1, "{} H at {w:?}", sys.name);
                assert_eq!(g0, g1, "{} G at {w:?}", sys.name);
            }
        }
    }

    #[test]
    fn smooth_journe_initial_conditions_record_phase() {
        let canon = journe_canonical_system();
        let m = msystem_from_filters(&journe_smooth_system(), Some(&canon)).unwrap();
        let ph = m.phases.unwrap();
        assert!((ph[0] - 1.0).norm() < 1e-12);
        assert!((ph[1] - 1.0).norm() < 1e-12);
        assert!((ph[2] + 1.0).norm() < 1e-12, "g row carries phase -1: {ph:?}");
    }

    #[test]
    fn initial_condition_violation_detected() {
        // a flat system whose h does not vanish at zeta_1 = -1/2
        let scheme = DilationScheme::new(vec![vec![2]]).unwrap();
        let mp = MultiplicityPair::new(&scheme, crate::multiplicity::MultiplicityFn::constant(1))
            .unwrap();
        let mut ivs = vec![Interval::new(rat(-1, 8), rat(1, 8)).unwrap()];
        ivs.extend(mirrored(rat(3, 8), rat(1, 2)));
        let h = FilterFn::Pc(PiecewiseFn::indicator(ivs, Scalar::sqrt_n(2), true).unwrap());
        let g = FilterFn::Pc(
            PiecewiseFn::indicator(mirrored(rat(1, 8), rat(3, 8)), Scalar::sqrt_n(2), true)
                .unwrap(),
        );
        let sys = make_filter_system(scheme, mp, vec![vec![h]], vec![vec![g]], "bad-ic").unwrap();
        // canonical reference: the Shannon pair
        let shannon = {
            let scheme = DilationScheme::new(vec![vec![2]]).unwrap();
            let mp = MultiplicityPair::new(
                &scheme,
                crate::multiplicity::MultiplicityFn::constant(1),
            )
            .unwrap();
            let h = FilterFn::Pc(
                PiecewiseFn::indicator(
                    vec![Interval::new(rat(-1, 4), rat(1, 4)).unwrap()],
                    Scalar::sqrt_n(2),
                    true,
                )
                .unwrap(),
            );
            let g = FilterFn::Pc(
                PiecewiseFn::indicator(mirrored(rat(1, 4), rat(1, 2)), Scalar::sqrt_n(2), true)
                    .unwrap(),
            );
            make_filter_system(scheme, mp, vec![vec![h]], vec![vec![g]], "shannon").unwrap()
        };
        let err = msystem_from_filters(&sys, Some(&shannon)).unwrap_err();
        assert!(matches!(err, Error::InitialConditionViolated { l: 1, .. }), "{err:?}");
        // ex35 satisfies the Shannon initial conditions with phase 1
        let ok = msystem_from_filters(&ex35_system(), Some(&shannon)).unwrap();
        assert_eq!(ok.phases, Some(vec![Complex64::new(1.0, 0.0); 2]));
    }

    #[test]
    fn journe_loop_element_is_unitary_with_identity_at_zero() {
        let l = journe_loop_element(QmfLowpass::default_eps()).unwrap();
        assert!(l.unitarity_defect(&pts(1000, 11)) < 1e-10);
        l.check_identity_at_zero(1).unwrap();
        // reference listing: L_p on P4, first column is (p~0((x+1)/2), p~1((x+1)/2))
        let x = rat(-9, 20); // in P4
        let mat = l.at(&TorusPoint::from_scalar(x));
        let p0 = QmfLowpass::default_eps();
        let p1 = QmfHighpass::new(p0);
        let hs = Scalar::sqrt_mult(rat(1, 2), 2);
        let y1 = (x + Rat::from_integer(1)) / Rat::from_integer(2);
        assert_eq!(mat[0][0], hs * p0.eval(y1));
        assert_eq!(mat[1][0], -(hs * p1.eval(y1)));
    }

    #[test]
    fn identity_acts_trivially() {
        let m = canonical_journe_msystem().unwrap();
        let id = LoopElement::identity(m.sys.mp.clone());
        let out = loop_act(&id, &m).unwrap();
        for w in pts(300, 13) {
            assert_eq!(out.sys.h_at(&w), m.sys.h_at(&w));
            assert_eq!(out.sys.g_at(&w), m.sys.g_at(&w));
        }
    }

    #[test]
    fn lp_action_recovers_smooth_journe_filters() {
        let m = canonical_journe_msystem().unwrap();
        let l = journe_loop_element(QmfLowpass::default_eps()).unwrap();
        let out = loop_act(&l, &m).unwrap();
        let smooth = journe_smooth_system();
        let mut worst = 0.0f64;
        for w in pts(1000, 17) {
            let (ho, hs) = (out.sys.h_at(&w), smooth.h_at(&w));
            let (go, gs) = (out.sys.g_at(&w), smooth.g_at(&w));
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((ho[i][j] - hs[i][j]).abs());
                }
            }
            // high-pass row matches modulo the documented phase -1
            for j in 0..2 {
                worst = worst.max((go[0][j] + gs[0][j]).abs());
            }
        }
        assert!(worst < 1e-12, "max deviation {worst}");
        // the acted system passes the filter equations
        for w in pts(100, 19) {
            for r in [
                verify_filter_eq(&out.sys, &w),
                verify_highpass_eq(&out.sys, &w),
                verify_cross_orth(&out.sys, &w),
            ] {
                let max = r.iter().flatten().map(|s| s.abs()).fold(0.0f64, f64::max);
                assert!(max < 1e-10, "acted system equation residual {max} at {w:?}");
            }
        }
        // ... and satisfies the canonical initial conditions strictly
        let reg = msystem_from_filters(&out.sys, Some(&journe_canonical_system())).unwrap();
        assert_eq!(reg.phases, Some(vec![Complex64::new(1.0, 0.0); 3]));
    }

    #[test]
    fn quotient_of_system_with_itself_is_identity() {
        let m = canonical_journe_msystem().unwrap();
        let l = loop_quotient(&m, &m).unwrap();
        for w in pts(300, 23) {
            let mat = l.at(&w);
            for (i, row) in mat.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let id = if i == j { Scalar::ONE } else { Scalar::ZERO };
                    assert!((*v - id).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn quotient_round_trip() {
        let m = canonical_journe_msystem().unwrap();
        let lp = journe_loop_element(QmfLowpass::default_eps()).unwrap();
        let target = loop_act(&lp, &m).unwrap();
        let q = loop_quotient(&m, &target).unwrap();
        assert!(q.unitarity_defect(&pts(300, 29)) < 1e-10);
        let back = loop_act(&q, &m).unwrap();
        let mut worst = 0.0f64;
        for w in pts(1000, 31) {
            let (a, b) = (back.sys.h_at(&w), target.sys.h_at(&w));
            let (ga, gb) = (back.sys.g_at(&w), target.sys.g_at(&w));
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((a[i][j] - b[i][j]).abs());
                }
            }
            for j in 0..2 {
                worst = worst.max((ga[0][j] - gb[0][j]).abs());
            }
        }
        assert!(worst < 1e-12, "round trip deviation {worst}");
    }

    #[test]
    fn action_is_associative() {
        let m = canonical_journe_msystem().unwrap();
        let lp = journe_loop_element(QmfLowpass::default_eps()).unwrap();
        let q = loop_quotient(&m, &m).unwrap(); // identity-like second element
        let composed = lp.compose(&q).unwrap();
        let lhs = loop_act(&composed, &m).unwrap();
        let rhs = loop_act(&lp, &loop_act(&q, &m).unwrap()).unwrap();
        let mut worst = 0.0f64;
        for w in pts(300, 37) {
            let (a, b) = (lhs.sys.h_at(&w), rhs.sys.h_at(&w));
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((a[i][j] - b[i][j]).abs());
                }
            }
        }
        assert!(worst < 1e-12, "associativity residual {worst}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let lp = journe_loop_element(QmfLowpass::default_eps()).unwrap();
        let ex = msystem_from_filters(&ex35_system(), None).unwrap();
        assert!(matches!(
            loop_act(&lp, &ex),
            Err(Error::DimensionMismatch(_))
        ));
        let m = canonical_journe_msystem().unwrap();
        assert!(matches!(
            loop_quotient(&m, &ex),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
