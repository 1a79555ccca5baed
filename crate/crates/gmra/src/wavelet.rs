//! Wavelet synthesis (Thm. 3.4), the frame family psi_{n,k,z}, the
//! two-route Parseval frame-sum analyzer, and the Cuntz operators
//! S_H / S_G of Lemma 3.2.

use num_complex::Complex64;

use rayon::prelude::*;

use crate::cascade::{phi_hat_at, ScalingVector};
use crate::error::{Error, Result};
use crate::filters::FilterSystem;
use crate::funcalg::{FilterFn, Interval, PiecewiseFn};
use crate::rational::{rat, rat_to_f64, reduce_coord, Rat, TorusPoint};
use crate::scalar::Scalar;

pub const DEFAULT_Z_MAX: i128 = 1 << 14;
pub const DEFAULT_N_MIN: i32 = -40;
pub const DEFAULT_FJ_GRID_Q: u32 = 1 << 12;

/// A synthesized wavelet family psi-hat_1..psi-hat_{c-tilde}.
#[derive(Clone, Debug)]
pub struct WaveletSystem {
    pub sys: FilterSystem,
    pub sv: ScalingVector,
    /// exact non-periodic pc representation, when G and phi-hat are pc
    pub psi_pieces: Option<Vec<PiecewiseFn>>,
}

fn inv_sqrt_n(sys: &FilterSystem) -> Scalar {
    Scalar::sqrt_mult(rat(1, sys.scheme.n as i128), sys.scheme.n as i128)
}

/// psi-hat_k(x) = (1/sqrt N) sum_j g_{k,j}(B^{-1}x) phi-hat_j(B^{-1}x)
/// (Theorem 3.4). Exact pc output when both G and phi-hat are pc.
pub fn synthesize_wavelets(sys: &FilterSystem, sv: &ScalingVector) -> Result<WaveletSystem> {
    assert_eq!(sys.scheme.d, 1);
    let psi_pieces = match (&sv.exact_pieces, sys.g.iter().flatten().all(|f| f.is_pc())) {
        (Some(phi), true) => {
            let b = Rat::from_integer(sys.scheme.b[0][0]);
            if b < Rat::from_integer(2) {
                None
            } else {
                let half = crate::cascade::box_half_width(sys, sv.level_k);
                let inv = inv_sqrt_n(sys);
                let mut out = Vec::with_capacity(sys.c_tilde());
                for k in 0..sys.c_tilde() {
                    let mut acc = PiecewiseFn::zero(false);
                    for j in 0..sys.c() {
                        let FilterFn::Pc(g) = &sys.g[k][j] else { unreachable!() };
                        // g_{k,j}(x/b) on the dilated box
                        let g_unfolded =
                            PiecewiseFn::new(g.unfold(-half, half), false)?.dilate_arg(b);
                        let phi_dil = phi[j].dilate_arg(b);
                        acc = acc.add(&g_unfolded.mul(&phi_dil));
                    }
                    out.push(acc.scale_values(inv));
                }
                Some(out)
            }
        }
        _ => None,
    };
    Ok(WaveletSystem { sys: sys.clone(), sv: sv.clone(), psi_pieces })
}

impl WaveletSystem {
    /// Pointwise psi-hat_k (1-based k) at a rational point.
    pub fn psi_hat(&self, k: usize, x: Rat) -> Result<Scalar> {
        if let Some(pieces) = &self.psi_pieces {
            return Ok(pieces[k - 1].eval(x));
        }
        let b = Rat::from_integer(self.sys.scheme.b[0][0]);
        let y = x / b;
        let t = TorusPoint::from_scalar(y);
        let gv = self.sys.g_at(&t);
        let phi = phi_hat_at(&self.sys, &[y], self.sv.k_max)?;
        let mut acc = Scalar::ZERO;
        for j in 0..self.sys.c() {
            acc = acc + gv[k - 1][j] * phi[j];
        }
        Ok(inv_sqrt_n(&self.sys) * acc)
    }
}

fn pow_rat(base: i128, n: i32) -> Rat {
    if n >= 0 {
        Rat::from_integer(base.pow(n as u32))
    } else {
        rat(1, base.pow((-n) as u32))
    }
}

/// <f-hat, psi-hat_{n,k,z}> for pc f-hat and exact pc psi-hat:
/// N^{-n/2} int f-hat(x) conj(psi-hat_k(B^{-n}x)) e^{-2 pi i z B^{-n} x} dx.
pub fn frame_coefficient(
    ws: &WaveletSystem,
    f_hat: &PiecewiseFn,
    n: i32,
    k: usize,
    z: i128,
) -> Result<Complex64> {
    let psi = ws
        .psi_pieces
        .as_ref()
        .ok_or_else(|| Error::Config("frame_coefficient needs exact pc wavelets".into()))?;
    let b = ws.sys.scheme.b[0][0];
    let scale = pow_rat(b, n);
    let prod = f_hat.mul(&psi[k - 1].dilate_arg(scale).conj());
    let freq = z as f64 * (b as f64).powi(-n);
    let amp = (ws.sys.scheme.n as f64).powf(-(n as f64) / 2.0);
    Ok(prod.integral_against_exponential(freq) * amp)
}

/// Direct route: sum_{n = nMin..J} sum_k sum_{|z| <= zMax} |<f, psi_{n,k,z}>|^2.
pub fn frame_sum_direct(
    ws: &WaveletSystem,
    f_hat: &PiecewiseFn,
    j_max: i32,
    n_min: i32,
    z_max: i128,
) -> Result<f64> {
    let psi = ws
        .psi_pieces
        .as_ref()
        .ok_or_else(|| Error::Config("frame_sum_direct needs exact pc wavelets".into()))?;
    let b = ws.sys.scheme.b[0][0];
    let nn = ws.sys.scheme.n as f64;
    let mut total = 0.0f64;
    for n in n_min..=j_max {
        let scale = pow_rat(b, n);
        let amp_sq = nn.powi(-n);
        for pk in psi {
            let prod = f_hat.mul(&pk.dilate_arg(scale).conj());
            if prod.pieces().is_empty() {
                continue;
            }
            let freq_unit = (b as f64).powi(-n);
            // deterministic: ordered collect, then sequential reduction
            let terms: Vec<f64> = (-z_max..=z_max)
                .into_par_iter()
                .map(|z| {
                    prod.integral_against_exponential(z as f64 * freq_unit)
                        .norm_sqr()
                })
                .collect();
            total += amp_sq * terms.iter().sum::<f64>();
        }
    }
    Ok(total)
}

/// F^J route (Theorem 3.4 proof): with
/// F^J_j(omega) = sqrt N^{1+J} sum_zeta f-hat(B^{1+J}(omega+zeta)) conj(phi-hat_j(omega+zeta)),
/// returns sum_j int_T |F^J_j|^2, which equals the FULL z-sum
/// sum_{n<=J} sum_k sum_{z in Z} |<f, psi_{n,k,z}>|^2. Exact for pc
/// scaling vectors; per-piece midpoint quadrature otherwise.
pub fn frame_sum_fj(
    ws: &WaveletSystem,
    f_hat: &PiecewiseFn,
    j: u32,
    grid_q: u32,
) -> Result<f64> {
    let sys = &ws.sys;
    let b = sys.scheme.b[0][0];
    assert!(b >= 2, "F^J route implemented for positive 1-d dilations");
    let big = pow_rat(b, (j + 1) as i32); // B^{1+J}
    let nn_pow = (sys.scheme.n as f64).powi((j + 1) as i32);

    if let Some(phi) = &ws.sv.exact_pieces {
        // exact path: p_j(u) = f-hat(B^{1+J} u) conj(phi-hat_j(u)), folded into the cube
        let mut total = Scalar::ZERO;
        let cube = PiecewiseFn::indicator(
            vec![Interval::new(rat(-1, 2), rat(1, 2))?],
            Scalar::ONE,
            false,
        )?;
        for pj in phi {
            let p = f_hat.dilate_arg(big.recip()).mul(&pj.conj());
            let Some((lo, hi)) = p.support_bounds() else { continue };
            let mut folded = PiecewiseFn::zero(false);
            let z_lo = lo.floor().to_integer() - 1;
            let z_hi = hi.ceil().to_integer() + 1;
            for zeta in z_lo..=z_hi {
                folded = folded.add(&p.shift_arg(Rat::from_integer(zeta)));
            }
            total = total + folded.mul(&cube).integral_abs_sq();
        }
        return Ok(total.abs() * nn_pow);
    }

    // quadrature path: supports shrink like B^{-1-J}, so subdivide each
    // scaled piece of f-hat instead of using a uniform torus grid. Valid
    // when B^{1+J} exceeds the diameter of supp f-hat (no fold overlap).
    let Some((flo, fhi)) = f_hat.support_bounds() else { return Ok(0.0) };
    if fhi - flo >= big {
        return Err(Error::Config(
            "quadrature F^J route requires B^{1+J} > diam supp f-hat".into(),
        ));
    }
    let mut total = 0.0f64;
    for c_idx in 1..=sys.c() {
        for (iv, _) in f_hat.pieces() {
            // u-interval: piece scaled by B^{-1-J}
            let (ulo, uhi) = (iv.lo / big, iv.hi / big);
            let width = uhi - ulo;
            let step = width / Rat::from_integer(grid_q as i128);
            let samples: Result<Vec<f64>> = (0..grid_q as i128)
                .into_par_iter()
                .map(|t| {
                    let u = ulo + step * rat(2 * t + 1, 2);
                    let fval = f_hat.eval(u * big);
                    let pval = phi_hat_at(sys, &[u], ws.sv.k_max)?[c_idx - 1];
                    Ok(fval.abs().powi(2) * pval.abs().powi(2))
                })
                .collect();
            let integral: f64 =
                samples?.iter().sum::<f64>() * rat_to_f64(&step);
            total += integral;
        }
    }
    Ok(total * nn_pow)
}

// ---------------------------------------------------------------------
// Cuntz operators (Lemma 3.2), applied pointwise.

/// A pointwise view of an element of H = direct-sum_j L^2(S_j):
/// a function from torus points to its c (or c-tilde) component values.
pub type VecFn<'a> = &'a (dyn Fn(&TorusPoint) -> Vec<Scalar> + Sync);

/// [S_H f](omega) = H^t(omega) f(alpha(omega)).
pub fn apply_sh(sys: &FilterSystem, f: VecFn, omega: &TorusPoint) -> Vec<Scalar> {
    let hv = sys.h_at(omega);
    let fa = f(&sys.scheme.alpha(omega));
    (0..sys.c())
        .map(|jj| {
            let mut acc = Scalar::ZERO;
            for i in 0..sys.c() {
                acc = acc + hv[i][jj] * fa[i];
            }
            acc
        })
        .collect()
}

/// [S_H* f](omega) = (1/N) sum_l conj(H(omega_l)) f(omega_l), forced to
/// 0 off S_i componentwise.
pub fn apply_sh_star(sys: &FilterSystem, f: VecFn, omega: &TorusPoint) -> Vec<Scalar> {
    let inv_n = Scalar::from_rat(rat(1, sys.scheme.n as i128));
    let pres = sys.scheme.preimages(omega);
    (1..=sys.c())
        .map(|i| {
            let mut acc = Scalar::ZERO;
            for p in &pres {
                let hv = sys.h_at(p);
                let fv = f(p);
                for jj in 0..sys.c() {
                    acc = acc + hv[i - 1][jj].conj() * fv[jj];
                }
            }
            inv_n * acc * sys.chi_s(i, omega)
        })
        .collect()
}

/// [S_G f~](omega) = G^t(omega) f~(alpha(omega)) (maps H-tilde into H).
pub fn apply_sg(sys: &FilterSystem, f_tilde: VecFn, omega: &TorusPoint) -> Vec<Scalar> {
    let gv = sys.g_at(omega);
    let fa = f_tilde(&sys.scheme.alpha(omega));
    (0..sys.c())
        .map(|jj| {
            let mut acc = Scalar::ZERO;
            for k in 0..sys.c_tilde() {
                acc = acc + gv[k][jj] * fa[k];
            }
            acc
        })
        .collect()
}

/// [S_G* f](omega) = (1/N) sum_l conj(G(omega_l)) f(omega_l), forced to
/// 0 off S~_k componentwise.
pub fn apply_sg_star(sys: &FilterSystem, f: VecFn, omega: &TorusPoint) -> Vec<Scalar> {
    let inv_n = Scalar::from_rat(rat(1, sys.scheme.n as i128));
    let pres = sys.scheme.preimages(omega);
    (1..=sys.c_tilde())
        .map(|k| {
            let mut acc = Scalar::ZERO;
            for p in &pres {
                let gv = sys.g_at(p);
                let fv = f(p);
                for jj in 0..sys.c() {
                    acc = acc + gv[k - 1][jj].conj() * fv[jj];
                }
            }
            inv_n * acc * sys.chi_s_tilde(k, omega)
        })
        .collect()
}

fn vec_diff_max(a: &[Scalar], b: &[Scalar]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).abs())
        .fold(0.0, f64::max)
}

fn vec_max(a: &[Scalar]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Residuals of the four Cuntz-type relations of Lemma 3.2
/// (1) S_H* S_H = I, (2) S_G* S_G = I, (3) S_H* S_G = 0 and S_G* S_H = 0,
/// (4) S_H S_H* + S_G S_G* = I, as pointwise maxima over the samples.
pub fn cuntz_residuals(
    sys: &FilterSystem,
    f: VecFn,
    f_tilde: VecFn,
    samples: &[TorusPoint],
) -> [f64; 4] {
    // components of H-elements must vanish off their S_j; enforce here
    // so callers can pass arbitrary closures
    let c = sys.c();
    let ct = sys.c_tilde();
    let fh = |w: &TorusPoint| -> Vec<Scalar> {
        let v = f(w);
        (1..=c).map(|i| v[i - 1] * sys.chi_s(i, w)).collect()
    };
    let ft = |w: &TorusPoint| -> Vec<Scalar> {
        let v = f_tilde(w);
        (1..=ct).map(|k| v[k - 1] * sys.chi_s_tilde(k, w)).collect()
    };
    let mut r = [0.0f64; 4];
    for omega in samples {
        let sh_f = |w: &TorusPoint| apply_sh(sys, &fh, w);
        let sg_ft = |w: &TorusPoint| apply_sg(sys, &ft, w);
        // (1) and (2)
        r[0] = r[0].max(vec_diff_max(&apply_sh_star(sys, &sh_f, omega), &fh(omega)));
        r[1] = r[1].max(vec_diff_max(&apply_sg_star(sys, &sg_ft, omega), &ft(omega)));
        // (3) both mixed products vanish
        r[2] = r[2]
            .max(vec_max(&apply_sh_star(sys, &sg_ft, omega)))
            .max(vec_max(&apply_sg_star(sys, &sh_f, omega)));
        // (4) S_H S_H* + S_G S_G* = I
        let shs = |w: &TorusPoint| apply_sh_star(sys, &fh, w);
        let sgs = |w: &TorusPoint| apply_sg_star(sys, &fh, w);
        let lhs: Vec<Scalar> = apply_sh(sys, &shs, omega)
            .into_iter()
            .zip(apply_sg(sys, &sgs, omega))
            .map(|(a, b)| a + b)
            .collect();
        r[3] = r[3].max(vec_diff_max(&lhs, &fh(omega)));
    }
    r
}

/// A pc element of H (c components, component j supported on S_j),
/// convenient for randomized Cuntz tests.
pub fn pc_vector_fn(components: Vec<PiecewiseFn>) -> impl Fn(&TorusPoint) -> Vec<Scalar> + Sync {
    move |w: &TorusPoint| {
        let x = reduce_coord(w.scalar());
        components.iter().map(|p| p.eval(x)).collect()
    }
}
