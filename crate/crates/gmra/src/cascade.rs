//! The cascade infinite product P(x) = prod_q (1/sqrt N) H(B^{-q} x),
//! generalized scaling vectors, and convergence diagnostics (Prop. 3.1).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filters::FilterSystem;
use crate::funcalg::{Interval, PiecewiseFn};
use crate::rational::{rat, Rat, TorusPoint};
use crate::scalar::Scalar;

pub const DEFAULT_K_MAX: usize = 64;
pub const DEFAULT_BOX_LEVEL: u32 = 4;

/// Truncated product P^k at one point of R^d.
#[derive(Clone, Debug)]
pub struct PartialProduct {
    pub x: Vec<Rat>,
    pub k: usize,
    /// c x c; P^k = prod_{q=1..k} (1/sqrt N) H(B^{-q} x), left to right
    pub matrix: Vec<Vec<Scalar>>,
    /// first depth at which the product stopped changing
    pub stabilized_at: Option<usize>,
    /// Cauchy increments max|P^q - P^{q-1}| per computed depth
    pub increments: Vec<f64>,
}

fn identity(c: usize) -> Vec<Vec<Scalar>> {
    (0..c)
        .map(|i| {
            (0..c)
                .map(|j| if i == j { Scalar::ONE } else { Scalar::ZERO })
                .collect()
        })
        .collect()
}

fn smat_mul(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = Scalar::ZERO;
                    for t in 0..n {
                        acc = acc + a[i][t] * b[t][j];
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn smat_diff_max(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (*x - *y).abs())
        .fold(0.0, f64::max)
}

/// Compute P^k at x through the full depth k_max. `stabilized_at` is
/// determined post hoc: the first depth after which the product never
/// changes again within the computed range (None if the last increment
/// is nonzero).
pub fn partial_product(sys: &FilterSystem, x: &[Rat], k_max: usize) -> PartialProduct {
    let c = sys.c();
    let inv = Scalar::sqrt_mult(rat(1, sys.scheme.n as i128), sys.scheme.n as i128);
    let mut p = identity(c);
    let mut y: Vec<Rat> = x.to_vec();
    let mut increments = Vec::with_capacity(k_max);
    for _q in 1..=k_max {
        y = crate::lattice::mat_apply(&sys.scheme.b_inv, &y);
        let t = TorusPoint::reduce(y.clone());
        let mut f = sys.h_at(&t);
        for row in f.iter_mut() {
            for v in row.iter_mut() {
                *v = inv * *v;
            }
        }
        let next = smat_mul(&p, &f);
        increments.push(smat_diff_max(&next, &p));
        p = next;
    }
    let trailing_zeros = increments.iter().rev().take_while(|&&d| d == 0.0).count();
    let stabilized_at = if trailing_zeros == 0 {
        None
    } else {
        Some(k_max - trailing_zeros)
    };
    PartialProduct { x: x.to_vec(), k: k_max, matrix: p, stabilized_at, increments }
}

/// First column of the infinite product at x: (phi-hat_1, ..., phi-hat_c).
/// Errors when the truncated product is still moving at k_max.
pub fn phi_hat_at(sys: &FilterSystem, x: &[Rat], k_max: usize) -> Result<Vec<Scalar>> {
    let pp = partial_product(sys, x, k_max);
    if pp.stabilized_at.is_none() {
        let last = pp.increments.last().copied().unwrap_or(0.0);
        if last > 1e-8 {
            return Err(Error::NonConvergent {
                point: format!("{:?}", pp.x),
                increment: last,
                depth: pp.k,
            });
        }
    }
    Ok(pp.matrix.iter().map(|row| row[0]).collect())
}

/// Sampled (and, for pc systems, exact piecewise) scaling vector over
/// the box B^K(cube) for d = 1.
#[derive(Clone, Debug)]
pub struct ScalingVector {
    pub level_k: u32,
    pub grid_q: u32,
    pub k_max: usize,
    /// sample abscissas k/Q over [-B^K/2, B^K/2)
    pub xs: Vec<Rat>,
    /// per abscissa, the c-vector (phi-hat_1, ..., phi-hat_c)
    pub samples: Vec<Vec<Scalar>>,
    /// exact pc representation when every filter entry is pc
    pub exact_pieces: Option<Vec<PiecewiseFn>>,
}

impl ScalingVector {
    /// Evaluate phi-hat_i (1-based i) at an arbitrary rational point,
    /// via the exact pieces when available.
    pub fn eval(&self, sys: &FilterSystem, i: usize, x: Rat) -> Result<Scalar> {
        if let Some(pieces) = &self.exact_pieces {
            return Ok(pieces[i - 1].eval(x));
        }
        Ok(phi_hat_at(sys, &[x], self.k_max)?[i - 1])
    }
}

/// Half-width of the box B^K(cube) for d = 1.
pub fn box_half_width(sys: &FilterSystem, level_k: u32) -> Rat {
    let b = Rat::from_integer(sys.scheme.b[0][0]);
    num_traits::pow::pow(b, level_k as usize).abs() / Rat::from_integer(2)
}

use num_traits::Signed;

/// Cascade over the grid of the box B^K(cube); d = 1 only.
pub fn scaling_vector(
    sys: &FilterSystem,
    level_k: u32,
    grid_q: u32,
    k_max: usize,
) -> Result<ScalingVector> {
    assert_eq!(sys.scheme.d, 1, "scaling_vector sampling implemented for d = 1");
    let half = box_half_width(sys, level_k);
    let lo_idx = (-half * Rat::from_integer(grid_q as i128)).to_integer();
    let hi_idx = (half * Rat::from_integer(grid_q as i128)).to_integer();
    let xs: Vec<Rat> = (lo_idx..hi_idx).map(|k| rat(k, grid_q as i128)).collect();

    let exact_pieces = exact_scaling_pieces(sys, level_k, k_max)?;

    let samples: Result<Vec<Vec<Scalar>>> = if let Some(pieces) = &exact_pieces {
        Ok(xs
            .iter()
            .map(|&x| pieces.iter().map(|p| p.eval(x)).collect())
            .collect())
    } else {
        xs.par_iter().map(|&x| phi_hat_at(sys, &[x], k_max)).collect()
    };

    Ok(ScalingVector {
        level_k,
        grid_q,
        k_max,
        xs,
        samples: samples?,
        exact_pieces,
    })
}

type PcMatrix = Vec<Vec<PiecewiseFn>>;

fn pc_mat_mul(a: &PcMatrix, b: &PcMatrix) -> PcMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = PiecewiseFn::zero(false);
                    for t in 0..n {
                        acc = acc.add(&a[i][t].mul(&b[t][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Exact symbolic cascade for fully pc systems with a positive 1-d
/// dilation: multiplies the pc factor matrices H(x/b^q)/sqrt N on the
/// box until the factor restricted to the box becomes the constant
/// idempotent e11 (value 1 at (1,1), zero elsewhere), after which the
/// product's first column no longer changes. Returns None when the
/// system has non-pc entries or stabilization is not reached.
pub fn exact_scaling_pieces(
    sys: &FilterSystem,
    level_k: u32,
    k_max: usize,
) -> Result<Option<Vec<PiecewiseFn>>> {
    if sys.scheme.d != 1 || sys.scheme.b[0][0] < 2 {
        return Ok(None);
    }
    if !sys.h.iter().flatten().all(|f| f.is_pc()) {
        return Ok(None);
    }
    let c = sys.c();
    let b = sys.scheme.b[0][0];
    let inv = Scalar::sqrt_mult(rat(1, sys.scheme.n as i128), sys.scheme.n as i128);
    let half = box_half_width(sys, level_k);
    let box_iv = Interval::new(-half, half)?;

    // identity restricted to the box
    let one_on_box =
        PiecewiseFn::indicator(vec![box_iv], Scalar::ONE, false)?;
    let mut p: PcMatrix = (0..c)
        .map(|i| {
            (0..c)
                .map(|j| if i == j { one_on_box.clone() } else { PiecewiseFn::zero(false) })
                .collect()
        })
        .collect();

    let mut scale = Rat::from_integer(1); // b^q
    for _q in 1..=k_max {
        scale *= Rat::from_integer(b);
        // factor entry (i,j): (1/sqrt N) h_{i,j}(x / b^q) on the box
        let factor: PcMatrix = sys
            .h
            .iter()
            .map(|row| {
                row.iter()
                    .map(|f| {
                        let crate::funcalg::FilterFn::Pc(pc) = f else { unreachable!() };
                        let window =
                            PiecewiseFn::new(pc.unfold(-half / scale, half / scale), false)
                                .expect("unfold produces disjoint pieces");
                        window.dilate_arg(scale).scale_values(inv)
                    })
                    .collect()
            })
            .collect();
        // stabilized once the factor is e11 (constant 1-at-(1,1)) on the box
        let is_e11 = factor.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, entry)| {
                if i == 0 && j == 0 {
                    entry.pieces() == [(box_iv, Scalar::ONE)]
                } else {
                    entry.pieces().is_empty()
                }
            })
        });
        if is_e11 {
            return Ok(Some((0..c).map(|i| p[i][0].clone()).collect()));
        }
        p = pc_mat_mul(&p, &factor);
    }
    Ok(None)
}

/// Max over test points and rows i of
/// |sqrt N phi-hat_i(B x) - sum_j h_{i,j}(x) phi-hat_j(x)| (Eq. genrefeqn).
pub fn refinement_residual(
    sys: &FilterSystem,
    sv: &ScalingVector,
    test_points: &[Rat],
) -> Result<f64> {
    let c = sys.c();
    let root_n = Scalar::sqrt_n(sys.scheme.n as i128);
    let b = Rat::from_integer(sys.scheme.b[0][0]);
    let mut worst = 0.0f64;
    for &x in test_points {
        let t = TorusPoint::from_scalar(x);
        let hv = sys.h_at(&t);
        let phi_x: Vec<Scalar> =
            (1..=c).map(|i| sv.eval(sys, i, x)).collect::<Result<_>>()?;
        let phi_bx: Vec<Scalar> =
            (1..=c).map(|i| sv.eval(sys, i, b * x)).collect::<Result<_>>()?;
        for i in 0..c {
            let mut rhs = Scalar::ZERO;
            for j in 0..c {
                rhs = rhs + hv[i][j] * phi_x[j];
            }
            worst = worst.max((root_n * phi_bx[i] - rhs).abs());
        }
    }
    Ok(worst)
}

/// Midpoint-Riemann estimate of sum_j int_{B^k(Q)} |P^k_{i,j}|^2 dx
/// (Prop. 3.1 proof bound; must be <= 1 + quadrature slack).
pub fn l2_bound_check(sys: &FilterSystem, i: usize, k: usize, grid_q: u32) -> f64 {
    assert_eq!(sys.scheme.d, 1);
    let half = box_half_width(sys, k as u32);
    let q = grid_q as i128;
    let lo = (-half * Rat::from_integer(q)).to_integer();
    let hi = (half * Rat::from_integer(q)).to_integer();
    let c = sys.c();
    (lo..hi)
        .into_par_iter()
        .map(|t| {
            let x = rat(2 * t + 1, 2 * q); // midpoint of [t/q, (t+1)/q)
            let pp = partial_product(sys, &[x], k);
            (0..c)
                .map(|j| pp.matrix[i - 1][j].abs().powi(2))
                .sum::<f64>()
                / grid_q as f64
        })
        .sum()
}

/// omega -> sum_{|z| <= zMax} |phi-hat_i(omega + z)|^2 on the torus grid.
pub fn translate_norm_profile(
    sys: &FilterSystem,
    sv: &ScalingVector,
    i: usize,
    z_max: i128,
    grid_q: u32,
) -> Result<Vec<(Rat, f64)>> {
    assert_eq!(sys.scheme.d, 1);
    let q = grid_q as i128;
    (0..q)
        .map(|t| {
            let omega = crate::rational::reduce_coord(rat(t, q));
            let mut acc = 0.0;
            for z in -z_max..=z_max {
                let v = sv.eval(sys, i, omega + Rat::from_integer(z))?;
                acc += v.abs().powi(2);
            }
            Ok((omega, acc))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::funcalg::canonical_union;

    fn pieces_support(p: &PiecewiseFn) -> Vec<Interval> {
        canonical_union(
            p.pieces()
                .iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(iv, _)| *iv)
                .collect(),
        )
    }

    #[test]
    fn ex35_pointwise_products() {
        let sys = catalog::ex35_system();
        // x = 1/8: every factor is 1
        let pp = partial_product(&sys, &[rat(1, 8)], 10);
        assert_eq!(pp.matrix[0][0], Scalar::ONE);
        // x = 3/8: first factor h(3/16)/sqrt2 = 0
        let pp = partial_product(&sys, &[rat(3, 8)], 5);
        assert!(pp.matrix[0][0].is_zero());
        // x = 0: identity-like column
        let phi = phi_hat_at(&sys, &[rat(0, 1)], 40).unwrap();
        assert_eq!(phi[0], Scalar::ONE);
    }

    #[test]
    fn ex35_exact_pieces_are_box_indicator() {
        let sys = catalog::ex35_system();
        let pieces = exact_scaling_pieces(&sys, 3, 40).unwrap().unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(
            pieces_support(&pieces[0]),
            vec![Interval::new(rat(-1, 4), rat(1, 4)).unwrap()]
        );
        assert_eq!(pieces[0].eval(rat(1, 5)), Scalar::ONE);
        assert!(pieces[0].eval(rat(3, 10)).is_zero());
    }

    #[test]
    fn ex35_sampled_matches_indicator() {
        let sys = catalog::ex35_system();
        let sv = scaling_vector(&sys, 3, 64, 40).unwrap();
        assert!(sv.exact_pieces.is_some());
        for (x, row) in sv.xs.iter().zip(&sv.samples) {
            let expect = if *x >= rat(-1, 4) && *x < rat(1, 4) { 1.0 } else { 0.0 };
            assert!((row[0].abs() - expect).abs() < 1e-12, "at {x}");
        }
    }

    #[test]
    fn journe_canonical_exact_pieces() {
        let sys = catalog::journe_canonical_system();
        let pieces = exact_scaling_pieces(&sys, 4, 64).unwrap().unwrap();
        assert_eq!(
            pieces_support(&pieces[0]),
            vec![
                Interval::new(rat(-4, 7), rat(-1, 2)).unwrap(),
                Interval::new(rat(-2, 7), rat(2, 7)).unwrap(),
                Interval::new(rat(1, 2), rat(4, 7)).unwrap(),
            ]
        );
        assert_eq!(
            pieces_support(&pieces[1]),
            vec![
                Interval::new(rat(-8, 7), rat(-1, 1)).unwrap(),
                Interval::new(rat(1, 1), rat(8, 7)).unwrap(),
            ]
        );
        // indicator values
        assert_eq!(pieces[0].eval(rat(1, 5)), Scalar::ONE);
        assert_eq!(pieces[1].eval(rat(9, 8)), Scalar::ONE);
    }

    #[test]
    fn journe_smooth_cascade_stabilizes() {
        let sys = catalog::journe_smooth_system();
        // P^k(x) identical for all k > log2(14 |x|) + 2
        for x in [rat(1, 3), rat(5, 4), rat(-7, 5), rat(3, 1)] {
            let pp = partial_product(&sys, &[x], 64);
            let bound = (14.0 * crate::rational::rat_to_f64(&x).abs()).log2() + 2.0;
            let st = pp.stabilized_at.expect("must stabilize") as f64;
            assert!(st <= bound.ceil() + 1.0, "stabilized at {st}, bound {bound} for x={x}");
        }
    }

    #[test]
    fn refinement_residual_zero_for_pc_systems() {
        for sys in [catalog::ex35_system(), catalog::journe_canonical_system()] {
            let sv = scaling_vector(&sys, 4, 32, 64).unwrap();
            // off-breakpoint rationals (denominator coprime to 7 and 2)
            let pts: Vec<Rat> = (-30..30).map(|k| rat(k, 61)).collect();
            let r = refinement_residual(&sys, &sv, &pts).unwrap();
            assert_eq!(r, 0.0, "{}", sys.name);
        }
    }

    #[test]
    fn refinement_residual_small_for_smooth() {
        let sys = catalog::journe_smooth_system();
        let sv = scaling_vector(&sys, 3, 16, 64).unwrap();
        let pts: Vec<Rat> = (-20..20).map(|k| rat(k, 41)).collect();
        let r = refinement_residual(&sys, &sv, &pts).unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn l2_bounds_hold() {
        let sys = catalog::ex35_system();
        let v = l2_bound_check(&sys, 1, 6, 128);
        assert!(v <= 1.0 + 10.0 / 128.0, "ex35 l2 mass {v}");
        // at convergence the mass is exactly int |chi_{[-1/4,1/4)}|^2 = 1/2
        let pieces = exact_scaling_pieces(&sys, 3, 40).unwrap().unwrap();
        assert_eq!(pieces[0].integral_abs_sq(), Scalar::from_rat(rat(1, 2)));
        let sys = catalog::journe_canonical_system();
        for i in 1..=2 {
            let v = l2_bound_check(&sys, i, 6, 128);
            assert!(v <= 1.0 + 10.0 / 128.0, "journe i={i} l2 mass {v}");
        }
    }

    #[test]
    fn translate_profile_recovers_effective_multiplicity() {
        let sys = catalog::ex35_system();
        let sv = scaling_vector(&sys, 3, 32, 64).unwrap();
        let prof = translate_norm_profile(&sys, &sv, 1, 2, 7 * 16).unwrap();
        for (omega, v) in prof {
            let expect = if omega >= rat(-1, 4) && omega < rat(1, 4) { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-10, "profile at {omega}: {v}");
        }
    }

    #[test]
    fn journe_translate_profiles_match_s_sets() {
        let sys = catalog::journe_canonical_system();
        let sv = scaling_vector(&sys, 4, 32, 64).unwrap();
        for i in 1..=2usize {
            let s = sys.mp.m.s_set(i as u32).unwrap();
            let prof = translate_norm_profile(&sys, &sv, i, 2, 7 * 16).unwrap();
            for (omega, v) in prof {
                let expect = if s.iter().any(|iv| iv.contains(&omega)) { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-10, "i={i} at {omega}: {v}");
            }
        }
    }

    #[test]
    fn column_one_concentration() {
        // Prop 3.1(1): P_{i,j} -> 0 for j > 1
        let sys = catalog::journe_canonical_system();
        for t in -40..40 {
            let x = rat(t, 17);
            let pp = partial_product(&sys, &[x], 64);
            for i in 0..2 {
                assert!(pp.matrix[i][1].abs() < 1e-10, "P[{i}][2] at {x}");
            }
        }
    }

    #[test]
    fn cauchy_increments_vanish() {
        for sys in [
            catalog::ex35_system(),
            catalog::journe_canonical_system(),
            catalog::journe_smooth_system(),
        ] {
            for t in [rat(1, 3), rat(-7, 5), rat(13, 11)] {
                let pp = partial_product(&sys, &[t], 64);
                // once stabilized, increments stay exactly 0
                let st = pp.stabilized_at.expect("stabilizes");
                assert!(pp.increments[st..].iter().all(|&d| d == 0.0), "{}", sys.name);
            }
        }
    }
}
