//! Generalized filter systems (H, G), the orthogonality equations of
//! §2, the K/L matrices of Theorem 2.5, and pointwise high-pass
//! completion (Theorem 2.4).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcalg::{FilterFn, SampledFn};
use crate::lattice::DilationScheme;
use crate::multiplicity::MultiplicityPair;
use crate::rational::{rat, Rat, TorusPoint};
use crate::scalar::Scalar;

/// Default validation grid denominator for d = 1 (7 * 2^8 divided down
/// for construction-time checks).
pub const DEFAULT_MAKE_GRID_Q: u32 = 7 * 64;
/// Completion / unitarity tolerance on the float path.
pub const FLOAT_TOL: f64 = 1e-10;

/// A generalized filter system: low-pass H (c x c) and high-pass G
/// (c-tilde x c) over a dilation scheme and multiplicity pair.
#[derive(Clone, Debug)]
pub struct FilterSystem {
    pub name: String,
    pub scheme: DilationScheme,
    pub mp: MultiplicityPair,
    pub h: Vec<Vec<FilterFn>>,
    pub g: Vec<Vec<FilterFn>>,
}

impl FilterSystem {
    pub fn c(&self) -> usize {
        self.mp.c() as usize
    }

    pub fn c_tilde(&self) -> usize {
        self.mp.c_tilde() as usize
    }

    /// chi_{S_i}(omega) for 1-based i (0 when i > c).
    pub fn chi_s(&self, i: usize, omega: &TorusPoint) -> Scalar {
        if self.mp.m.eval_point(omega) >= i as u32 {
            Scalar::ONE
        } else {
            Scalar::ZERO
        }
    }

    /// chi_{S-tilde_k}(omega) for 1-based k.
    pub fn chi_s_tilde(&self, k: usize, omega: &TorusPoint) -> Scalar {
        if self.mp.m_tilde.eval_point(omega) >= k as u32 {
            Scalar::ONE
        } else {
            Scalar::ZERO
        }
    }

    /// Evaluate H(omega) as a c x c Scalar matrix.
    pub fn h_at(&self, omega: &TorusPoint) -> Vec<Vec<Scalar>> {
        self.h
            .iter()
            .map(|row| row.iter().map(|f| f.eval(omega)).collect())
            .collect()
    }

    /// Evaluate G(omega) as a c-tilde x c Scalar matrix.
    pub fn g_at(&self, omega: &TorusPoint) -> Vec<Vec<Scalar>> {
        self.g
            .iter()
            .map(|row| row.iter().map(|f| f.eval(omega)).collect())
            .collect()
    }
}

/// Largest |entry| of a residual matrix.
pub fn max_abs(residuals: &[Vec<Scalar>]) -> f64 {
    residuals
        .iter()
        .flatten()
        .map(|s| s.abs())
        .fold(0.0, f64::max)
}

/// True when every residual is an exact zero of the rational path.
pub fn all_exact_zero(residuals: &[Vec<Scalar>]) -> bool {
    residuals.iter().flatten().all(|s| s.is_exact() && s.is_zero())
}

fn sqrt_n_scalar(n: usize) -> Scalar {
    Scalar::sqrt_n(n as i128)
}

/// 1/sqrt(N), exact.
fn inv_sqrt_n_scalar(n: usize) -> Scalar {
    Scalar::sqrt_mult(rat(1, n as i128), n as i128)
}

/// Construct and validate a filter system: shapes, support inclusion
/// supp h_{i,j} (and g_{k,j}) in S_j, the generalized low-pass
/// condition at 0, and a finite-difference Lipschitz estimate near 0.
pub fn make_filter_system(
    scheme: DilationScheme,
    mp: MultiplicityPair,
    h: Vec<Vec<FilterFn>>,
    g: Vec<Vec<FilterFn>>,
    name: impl Into<String>,
) -> Result<FilterSystem> {
    let c = mp.c() as usize;
    let ct = mp.c_tilde() as usize;
    if h.len() != c || h.iter().any(|r| r.len() != c) {
        return Err(Error::DimensionMismatch(format!(
            "H must be {c}x{c}, got {}x{}",
            h.len(),
            h.first().map_or(0, |r| r.len())
        )));
    }
    if g.len() != ct || g.iter().any(|r| r.len() != c) {
        return Err(Error::DimensionMismatch(format!(
            "G must be {ct}x{c}, got {}x{}",
            g.len(),
            g.first().map_or(0, |r| r.len())
        )));
    }
    let sys = FilterSystem { name: name.into(), scheme, mp, h, g };

    // support: entries in column j vanish off S_j, checked on the grid
    let grid = sys.scheme.rational_grid(DEFAULT_MAKE_GRID_Q);
    for omega in &grid {
        for j in 1..=c {
            if !sys.chi_s(j, omega).is_zero() {
                continue;
            }
            for (i, row) in sys.h.iter().enumerate() {
                if row[j - 1].eval(omega).abs() > FLOAT_TOL {
                    return Err(Error::SupportViolation {
                        entry: format!("h_{{{},{}}}", i + 1, j),
                        point: format!("{omega}"),
                        j,
                    });
                }
            }
            for (k, row) in sys.g.iter().enumerate() {
                if row[j - 1].eval(omega).abs() > FLOAT_TOL {
                    return Err(Error::SupportViolation {
                        entry: format!("g_{{{},{}}}", k + 1, j),
                        point: format!("{omega}"),
                        j,
                    });
                }
            }
        }
    }

    // generalized low-pass condition h_{i,j}(0) = delta_{i,1} delta_{j,1} sqrt(N)
    let zero = TorusPoint::zero(sys.scheme.d);
    let root_n = sqrt_n_scalar(sys.scheme.n);
    for i in 1..=c {
        for j in 1..=c {
            let v = sys.h[i - 1][j - 1].eval(&zero);
            let expected = if i == 1 && j == 1 { root_n } else { Scalar::ZERO };
            if (v - expected).abs() > FLOAT_TOL {
                return Err(Error::LowPassViolation {
                    entry: format!("h_{{{i},{j}}}"),
                    value: format!("{v:?}"),
                    expected: format!("{expected:?}"),
                });
            }
        }
    }

    // numeric Lipschitz estimate for H near 0 along each axis
    let mut worst = 0.0f64;
    for axis in 0..sys.scheme.d {
        let h0 = sys.h_at(&zero);
        for k in 4..=20u32 {
            let step = rat(1, 1i128 << k);
            for sign in [1i128, -1] {
                let mut coords = vec![Rat::zero(); sys.scheme.d];
                coords[axis] = step * Rat::from_integer(sign);
                let p = TorusPoint::reduce(coords);
                let hp = sys.h_at(&p);
                for i in 0..c {
                    for j in 0..c {
                        let quot = (hp[i][j] - h0[i][j]).abs() * (1i128 << k) as f64;
                        worst = worst.max(quot);
                    }
                }
            }
        }
    }
    if worst > 1e6 {
        return Err(Error::LipschitzSuspect(worst));
    }

    Ok(sys)
}

use num_traits::Zero;

/// Eq. orthh: residual_{i,i'} =
/// sum_j sum_l h_{i,j}(omega_l) conj(h_{i',j}(omega_l)) - delta N chi_{S_i}(omega).
pub fn verify_filter_eq(sys: &FilterSystem, omega: &TorusPoint) -> Vec<Vec<Scalar>> {
    let c = sys.c();
    let pres = sys.scheme.preimages(omega);
    let hv: Vec<Vec<Vec<Scalar>>> = pres.iter().map(|p| sys.h_at(p)).collect();
    let n = Scalar::from_int(sys.scheme.n as i128);
    (1..=c)
        .map(|i| {
            (1..=c)
                .map(|ip| {
                    let mut lhs = Scalar::ZERO;
                    for hl in &hv {
                        for j in 0..c {
                            lhs = lhs + hl[i - 1][j] * hl[ip - 1][j].conj();
                        }
                    }
                    let rhs = if i == ip { n * sys.chi_s(i, omega) } else { Scalar::ZERO };
                    lhs - rhs
                })
                .collect()
        })
        .collect()
}

/// Eq. orthg: residual_{k,k'} =
/// sum_j sum_l g_{k,j}(omega_l) conj(g_{k',j}(omega_l)) - delta N chi_{S~_k}(omega).
pub fn verify_highpass_eq(sys: &FilterSystem, omega: &TorusPoint) -> Vec<Vec<Scalar>> {
    let c = sys.c();
    let ct = sys.c_tilde();
    let pres = sys.scheme.preimages(omega);
    let gv: Vec<Vec<Vec<Scalar>>> = pres.iter().map(|p| sys.g_at(p)).collect();
    let n = Scalar::from_int(sys.scheme.n as i128);
    (1..=ct)
        .map(|k| {
            (1..=ct)
                .map(|kp| {
                    let mut lhs = Scalar::ZERO;
                    for gl in &gv {
                        for j in 0..c {
                            lhs = lhs + gl[k - 1][j] * gl[kp - 1][j].conj();
                        }
                    }
                    let rhs = if k == kp {
                        n * sys.chi_s_tilde(k, omega)
                    } else {
                        Scalar::ZERO
                    };
                    lhs - rhs
                })
                .collect()
        })
        .collect()
}

/// Eq. orthgh: residual_{i,k} = sum_j sum_l h_{i,j}(omega_l) conj(g_{k,j}(omega_l)).
pub fn verify_cross_orth(sys: &FilterSystem, omega: &TorusPoint) -> Vec<Vec<Scalar>> {
    let c = sys.c();
    let ct = sys.c_tilde();
    let pres = sys.scheme.preimages(omega);
    let hv: Vec<Vec<Vec<Scalar>>> = pres.iter().map(|p| sys.h_at(p)).collect();
    let gv: Vec<Vec<Vec<Scalar>>> = pres.iter().map(|p| sys.g_at(p)).collect();
    (1..=c)
        .map(|i| {
            (1..=ct)
                .map(|k| {
                    let mut lhs = Scalar::ZERO;
                    for (hl, gl) in hv.iter().zip(&gv) {
                        for j in 0..c {
                            lhs = lhs + hl[i - 1][j] * gl[k - 1][j].conj();
                        }
                    }
                    lhs
                })
                .collect()
        })
        .collect()
}

/// Eq. orthcol: for all column pairs (j,l), (j',l'), residual =
/// sum_i h_{i,j}(omega_l) conj(h_{i,j'}(omega_{l'}))
/// + sum_k g_{k,j}(omega_l) conj(g_{k,j'}(omega_{l'}))
/// - delta_{j,j'} delta_{l,l'} N chi_{S_j}(omega_l).
/// Rows/columns are indexed by (l, j) pairs in lexicographic order.
pub fn verify_column_orth(sys: &FilterSystem, omega: &TorusPoint) -> Vec<Vec<Scalar>> {
    let c = sys.c();
    let pres = sys.scheme.preimages(omega);
    let hv: Vec<Vec<Vec<Scalar>>> = pres.iter().map(|p| sys.h_at(p)).collect();
    let gv: Vec<Vec<Vec<Scalar>>> = pres.iter().map(|p| sys.g_at(p)).collect();
    let n = Scalar::from_int(sys.scheme.n as i128);
    let cols: Vec<(usize, usize)> = (0..pres.len())
        .flat_map(|l| (1..=c).map(move |j| (l, j)))
        .collect();
    cols.iter()
        .map(|&(l, j)| {
            cols.iter()
                .map(|&(lp, jp)| {
                    let mut lhs = Scalar::ZERO;
                    for i in 0..c {
                        lhs = lhs + hv[l][i][j - 1] * hv[lp][i][jp - 1].conj();
                    }
                    for k in 0..sys.c_tilde() {
                        lhs = lhs + gv[l][k][j - 1] * gv[lp][k][jp - 1].conj();
                    }
                    let rhs = if j == jp && l == lp {
                        n * sys.chi_s(j, &pres[l])
                    } else {
                        Scalar::ZERO
                    };
                    lhs - rhs
                })
                .collect()
        })
        .collect()
}

/// The lambda_omega column index: pairs (l, j) with 1 <= j <= m(omega_l),
/// ordered lexicographically with l major.
pub fn lambda_omega(
    scheme: &DilationScheme,
    mp: &MultiplicityPair,
    omega: &TorusPoint,
) -> Vec<(usize, usize)> {
    scheme
        .preimages(omega)
        .iter()
        .enumerate()
        .flat_map(|(l, p)| {
            let mv = mp.m.eval_point(p) as usize;
            (1..=mv).map(move |j| (l, j))
        })
        .collect()
}

/// The K(omega) and L(omega) matrices of Theorem 2.5.
#[derive(Clone, Debug)]
pub struct KLMatrices {
    pub omega: TorusPoint,
    /// (c + c-tilde) x (c * N); column (j, l) at index l*c + (j-1)
    pub k: Vec<Vec<Scalar>>,
    /// square submatrix of size m(omega) + m-tilde(omega)
    pub l_mat: Vec<Vec<Scalar>>,
    /// kept K-rows (0-based): first m(omega) H-rows, then m-tilde G-rows
    pub row_map: Vec<usize>,
    /// kept columns as (l, j) pairs in lambda_omega order (j 1-based)
    pub col_map: Vec<(usize, usize)>,
}

impl KLMatrices {
    /// max |(L* L - I)| and |(L L* - I)| entry; exactly 0 on the
    /// rational path.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.l_mat.len();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                let mut ctc = Scalar::ZERO; // (L* L)_{a,b}
                let mut cct = Scalar::ZERO; // (L L*)_{a,b}
                for r in 0..d {
                    ctc = ctc + self.l_mat[r][a].conj() * self.l_mat[r][b];
                    cct = cct + self.l_mat[a][r] * self.l_mat[b][r].conj();
                }
                let eye = if a == b { Scalar::ONE } else { Scalar::ZERO };
                worst = worst.max((ctc - eye).abs()).max((cct - eye).abs());
            }
        }
        worst
    }
}

/// Assemble K(omega) and extract L(omega) per Theorem 2.5.
pub fn build_kl(sys: &FilterSystem, omega: &TorusPoint) -> Result<KLMatrices> {
    let c = sys.c();
    let ct = sys.c_tilde();
    let nn = sys.scheme.n;
    let inv = inv_sqrt_n_scalar(nn);
    let pres = sys.scheme.preimages(omega);

    // K rows: H rows then G rows; columns (j, l) at l*c + (j-1)
    let mut k = vec![vec![Scalar::ZERO; c * nn]; c + ct];
    for (l, p) in pres.iter().enumerate() {
        let hv = sys.h_at(p);
        let gv = sys.g_at(p);
        for j in 0..c {
            for i in 0..c {
                k[i][l * c + j] = inv * hv[i][j];
            }
            for kk in 0..ct {
                k[c + kk][l * c + j] = inv * gv[kk][j];
            }
        }
    }

    let m = sys.mp.m.eval_point(omega) as usize;
    let mt = sys.mp.m_tilde.eval_point(omega) as usize;
    let row_map: Vec<usize> = (0..m).chain(c..c + mt).collect();
    let col_map = lambda_omega(&sys.scheme, &sys.mp, omega);
    if col_map.len() != m + mt {
        return Err(Error::DimensionMismatch(format!(
            "lambda_omega at {omega} has {} columns, expected m+m~ = {}",
            col_map.len(),
            m + mt
        )));
    }
    let l_mat: Vec<Vec<Scalar>> = row_map
        .iter()
        .map(|&r| col_map.iter().map(|&(l, j)| k[r][l * c + (j - 1)]).collect())
        .collect();
    Ok(KLMatrices { omega: omega.clone(), k, l_mat, row_map, col_map })
}

// small complex vector helpers for the completion
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Extend the H-rows of L(omega) at every grid point to an orthonormal
/// basis by deterministic Gram-Schmidt over the standard basis vectors
/// in lambda_omega order, and return the new rows as a sampled G.
///
/// The sample locations are the depth-1 preimages of the Q-grid, which
/// for d = 1 form exactly the (N*Q)-grid, each point written once.
pub fn complete_highpass(
    scheme: &DilationScheme,
    mp: &MultiplicityPair,
    h: &[Vec<FilterFn>],
    grid_q: u32,
) -> Result<Vec<Vec<FilterFn>>> {
    assert_eq!(scheme.d, 1, "high-pass completion implemented for d = 1");
    let c = mp.c() as usize;
    let ct = mp.c_tilde() as usize;
    let nn = scheme.n;
    let inv = 1.0 / (nn as f64).sqrt();

    type PointRows = Vec<(TorusPoint, usize, Vec<(usize, Complex64)>)>;
    // per grid point: (omega_l, k, [(j, value)]) writes
    let grid = scheme.rational_grid(grid_q);
    let per_point: Result<Vec<PointRows>> = grid
        .par_iter()
        .map(|omega| {
            let pres = scheme.preimages(omega);
            let cols = lambda_omega(scheme, mp, omega);
            let dim = cols.len();
            let m = mp.m.eval_point(omega) as usize;
            let mt = mp.m_tilde.eval_point(omega) as usize;
            debug_assert_eq!(dim, m + mt);
            if mt == 0 {
                return Ok(Vec::new());
            }
            // existing orthonormal rows from H
            let mut basis: Vec<Vec<Complex64>> = (0..m)
                .map(|i| {
                    cols.iter()
                        .map(|&(l, j)| {
                            h[i][j - 1].eval(&pres[l]).to_complex() * inv
                        })
                        .collect()
                })
                .collect();
            let n_h = basis.len();
            let mut new_rows: Vec<Vec<Complex64>> = Vec::with_capacity(mt);
            for t in 0..dim {
                if new_rows.len() == mt {
                    break;
                }
                let mut r: Vec<Complex64> = vec![Complex64::zero(); dim];
                r[t] = Complex64::new(1.0, 0.0);
                // two orthogonalization passes for numerical stability
                for _ in 0..2 {
                    for u in &basis {
                        let p = dot(&r, u);
                        for (rv, uv) in r.iter_mut().zip(u) {
                            *rv -= p * uv;
                        }
                    }
                }
                let nrm = norm(&r);
                if nrm <= FLOAT_TOL {
                    continue; // near-dependent candidate, skip
                }
                let row: Vec<Complex64> = r.iter().map(|x| x / nrm).collect();
                basis.push(row.clone());
                new_rows.push(row);
            }
            if new_rows.len() < mt {
                return Err(Error::CompletionFailed { point: format!("{omega}") });
            }
            let _ = n_h;
            let scale = (nn as f64).sqrt();
            let mut writes = Vec::new();
            for (k, row) in new_rows.iter().enumerate() {
                let mut by_l: BTreeMap<usize, Vec<(usize, Complex64)>> = BTreeMap::new();
                for (t, &(l, j)) in cols.iter().enumerate() {
                    by_l.entry(l).or_default().push((j, row[t] * scale));
                }
                for (l, vals) in by_l {
                    writes.push((pres[l].clone(), k, vals));
                }
            }
            Ok(writes)
        })
        .collect();

    // assemble sampled entries; deterministic: BTreeMap keyed by exact points
    let mut samples: Vec<Vec<BTreeMap<TorusPoint, Scalar>>> =
        vec![vec![BTreeMap::new(); c]; ct];
    for writes in per_point? {
        for (point, k, vals) in writes {
            for (j, v) in vals {
                samples[k][j - 1].insert(point.clone(), Scalar::Num(v));
            }
        }
    }
    let q_out = (nn as i128) * grid_q as i128;
    Ok(samples
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|map| FilterFn::Sampled(Arc::new(SampledFn::new(q_out, map))))
                .collect()
        })
        .collect())
}
