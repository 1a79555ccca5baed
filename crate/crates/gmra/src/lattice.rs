//! The dilation scheme: expansive integer matrix A, the torus
//! endomorphism alpha induced by B = A^t, coset representatives of
//! Z^d / B Z^d, and exact preimage enumeration.

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat, Rat, TorusPoint};

pub const DEFAULT_PREIMAGE_CAP: u128 = 1 << 20;

/// d x d integer matrix, row major.
pub type IMat = Vec<Vec<i128>>;

pub fn transpose(m: &IMat) -> IMat {
    let d = m.len();
    (0..d).map(|j| (0..d).map(|i| m[i][j]).collect()).collect()
}

/// Determinant by rational Gaussian elimination (exact).
pub fn det(m: &IMat) -> Rat {
    let d = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .map(|row| row.iter().map(|&x| Rat::from_integer(x)).collect())
        .collect();
    let mut det = Rat::one();
    for col in 0..d {
        let pivot = (col..d).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { return Rat::zero() };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= a[col][col];
        let inv = a[col][col].recip();
        for r in col + 1..d {
            let factor = a[r][col] * inv;
            if factor.is_zero() {
                continue;
            }
            for c in col..d {
                let sub = factor * a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Exact inverse over the rationals; None when singular.
pub fn invert(m: &IMat) -> Option<Vec<Vec<Rat>>> {
    let d = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .map(|row| row.iter().map(|&x| Rat::from_integer(x)).collect())
        .collect();
    let mut inv: Vec<Vec<Rat>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect();
    for col in 0..d {
        let pivot = (col..d).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        inv.swap(pivot, col);
        let p = a[col][col].recip();
        for c in 0..d {
            a[col][c] *= p;
            inv[col][c] *= p;
        }
        for r in 0..d {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col];
            for c in 0..d {
                let (ac, ic) = (a[col][c], inv[col][c]);
                a[r][c] -= factor * ac;
                inv[r][c] -= factor * ic;
            }
        }
    }
    Some(inv)
}

pub fn mat_apply(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| *a * *b).sum())
        .collect()
}

pub fn imat_apply(m: &IMat, v: &[Rat]) -> Vec<Rat> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(&a, b)| Rat::from_integer(a) * *b).sum())
        .collect()
}

/// Dilation data: A, B = A^t, N = |det A|, coset representatives of
/// Z^d / B Z^d, and the preimages zeta_l of 0 under alpha.
#[derive(Clone, Debug)]
pub struct DilationScheme {
    pub d: usize,
    pub a: IMat,
    pub b: IMat,
    pub b_inv: Vec<Vec<Rat>>,
    pub n: usize,
    /// Representatives of Z^d / B Z^d; first entry is 0.
    pub coset_reps: Vec<Vec<i128>>,
    /// zeta_l = B^{-1} xi_l reduced to the cube; zeta_0 = 0.
    pub zetas: Vec<TorusPoint>,
    pub preimage_cap: u128,
}

impl DilationScheme {
    pub fn new(a: IMat) -> Result<Self> {
        let d = a.len();
        if d == 0 || a.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch("dilation matrix must be square".into()));
        }
        let determinant = det(&a);
        if determinant.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let n_abs = {
            let v = determinant;
            debug_assert!(v.is_integer());
            v.numer().unsigned_abs() as usize
        };
        // expansiveness: every eigenvalue modulus > 1 (float check, margin 1e-9)
        let fm = DMatrix::from_fn(d, d, |i, j| a[i][j] as f64);
        for ev in fm.complex_eigenvalues().iter() {
            if ev.norm() <= 1.0 + 1e-9 {
                return Err(Error::NonExpansive(ev.norm()));
            }
        }
        if n_abs < 2 {
            return Err(Error::NonExpansive(1.0));
        }
        let b = transpose(&a);
        let b_inv = invert(&b).ok_or(Error::SingularMatrix)?;
        let coset_reps = enumerate_coset_reps(&b_inv, d, n_abs)?;
        let zetas: Vec<TorusPoint> = coset_reps
            .iter()
            .map(|xi| {
                let v: Vec<Rat> = xi.iter().map(|&x| Rat::from_integer(x)).collect();
                TorusPoint::reduce(mat_apply(&b_inv, &v))
            })
            .collect();
        // zeta_l are distinct preimages of 0
        for (i, z) in zetas.iter().enumerate() {
            debug_assert!(zetas[..i].iter().all(|w| w != z));
        }
        Ok(DilationScheme {
            d,
            a,
            b,
            b_inv,
            n: n_abs,
            coset_reps,
            zetas,
            preimage_cap: DEFAULT_PREIMAGE_CAP,
        })
    }

    /// The endomorphism alpha: omega -> B omega mod Z^d.
    pub fn alpha(&self, omega: &TorusPoint) -> TorusPoint {
        TorusPoint::reduce(imat_apply(&self.b, &omega.0))
    }

    /// Fixed cross-section of alpha: sigma(omega) = B^{-1} applied to the
    /// cube representative, reduced. sigma(0) = 0 and alpha(sigma(w)) = w.
    pub fn sigma(&self, omega: &TorusPoint) -> TorusPoint {
        TorusPoint::reduce(mat_apply(&self.b_inv, &omega.0))
    }

    /// The N preimages of omega under alpha, in the canonical order
    /// omega_l = sigma(omega) + zeta_l.
    pub fn preimages(&self, omega: &TorusPoint) -> Vec<TorusPoint> {
        let s = self.sigma(omega);
        self.zetas
            .iter()
            .map(|z| {
                TorusPoint::reduce(
                    s.0.iter().zip(&z.0).map(|(a, b)| *a + *b).collect(),
                )
            })
            .collect()
    }

    /// All N^n points x with alpha^n(x) = omega, labeled so that the point
    /// with index l = s*N + q at depth n+1 is the s-th depth-n preimage of
    /// omega_q.
    pub fn preimages_n(&self, omega: &TorusPoint, n: usize) -> Result<Vec<TorusPoint>> {
        assert!(n >= 1);
        let total = (self.n as u128)
            .checked_pow(n as u32)
            .ok_or(Error::DepthOverflow(u128::MAX, self.preimage_cap))?;
        if total > self.preimage_cap {
            return Err(Error::DepthOverflow(total, self.preimage_cap));
        }
        // Labeling rule: the depth-(k+1) list satisfies
        // L_{k+1}[s*N + q] = (depth-k preimages of omega_q)[s],
        // where omega_q are the depth-1 preimages of omega.
        fn depth(scheme: &DilationScheme, omega: &TorusPoint, n: usize) -> Vec<TorusPoint> {
            if n == 1 {
                return scheme.preimages(omega);
            }
            let firsts = scheme.preimages(omega);
            let per: Vec<Vec<TorusPoint>> =
                firsts.iter().map(|w| depth(scheme, w, n - 1)).collect();
            let nn = scheme.n;
            let block = per[0].len();
            let mut out = Vec::with_capacity(block * nn);
            for s in 0..block {
                for q in 0..nn {
                    out.push(per[q][s].clone());
                }
            }
            out
        }
        Ok(depth(self, omega, n))
    }

    /// The Q^d rational grid points (k_1/Q, ..., k_d/Q) reduced to the cube,
    /// last coordinate varying fastest.
    pub fn rational_grid(&self, q: u32) -> Vec<TorusPoint> {
        assert!(q >= 1);
        let mut pts = Vec::with_capacity((q as usize).pow(self.d as u32));
        let mut idx = vec![0u32; self.d];
        loop {
            pts.push(TorusPoint::reduce(
                idx.iter().map(|&k| rat(k as i128, q as i128)).collect(),
            ));
            let mut c = self.d;
            loop {
                if c == 0 {
                    return pts;
                }
                c -= 1;
                idx[c] += 1;
                if idx[c] < q {
                    break;
                }
                idx[c] = 0;
            }
        }
    }
}

/// Scan the box [0, N)^d lexicographically, keeping the first
/// representative of each coset of B Z^d. Since N B^{-1} is an integer
/// matrix, N Z^d is contained in B Z^d and the box covers all N cosets.
fn enumerate_coset_reps(b_inv: &[Vec<Rat>], d: usize, n: usize) -> Result<Vec<Vec<i128>>> {
    let mut reps: Vec<Vec<i128>> = Vec::with_capacity(n);
    let mut idx = vec![0i128; d];
    let congruent = |x: &[i128], y: &[i128]| -> bool {
        let diff: Vec<Rat> = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| Rat::from_integer(a - b))
            .collect();
        mat_apply(b_inv, &diff).iter().all(|c| c.is_integer())
    };
    'scan: loop {
        if !reps.iter().any(|r| congruent(r, &idx)) {
            reps.push(idx.clone());
            if reps.len() == n {
                return Ok(reps);
            }
        }
        let mut c = d;
        loop {
            if c == 0 {
                break 'scan;
            }
            c -= 1;
            idx[c] += 1;
            if idx[c] < n as i128 {
                break;
            }
            idx[c] = 0;
        }
    }
    Err(Error::DimensionMismatch(format!(
        "found only {} of {} coset representatives",
        reps.len(),
        n
    )))
}
