//! Skew-symmetric matrices, pfaffians, and skew kernels.

use super::linalg::{svd_jacobi, CMatrix};
use crate::{Error, Result, C64};

/// A complex skew-symmetric matrix, `A + Aᵀ = 0` with an exactly zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    m: CMatrix,
}

impl SkewMatrix {
    /// Validates skew-symmetry to relative tolerance 1e-12 and stores the
    /// antisymmetrised matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::InvalidInput(format!("skew matrix must be square, got {}x{}", m.rows, m.cols)));
        }
        let n = m.rows;
        let scale = m.max_abs().max(1.0);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((m[(i, j)] + m[(j, i)]).norm());
            }
        }
        if worst > 1e-12 * scale {
            return Err(Error::NotSkew(worst));
        }
        Ok(Self::antisymmetrize(&m))
    }

    /// `(A − Aᵀ)/2`, which is skew by construction.
    pub fn antisymmetrize(m: &CMatrix) -> Self {
        let n = m.rows;
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = (m[(i, j)] - m[(j, i)]) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = -v;
            }
        }
        SkewMatrix { m: out }
    }

    /// Builds from the strict upper triangle `f(i, j)`, `i < j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                out[(i, j)] = v;
                out[(j, i)] = -v;
            }
        }
        SkewMatrix { m: out }
    }

    pub fn n(&self) -> usize {
        self.m.rows
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    /// Congruence `M A Mᵀ`, again skew.
    pub fn congruent(&self, basis_change: &CMatrix) -> SkewMatrix {
        let t = basis_change.mul(&self.m).mul(&basis_change.transpose());
        Self::antisymmetrize(&t)
    }
}

/// Pfaffian by skew Gaussian elimination with full pivoting.
///
/// Each step moves the largest remaining entry to position `(k, k+1)` by a
/// simultaneous row/column transposition (each flips the sign), then clears
/// rows and columns `k+2..` against the pivot pair.
pub fn pfaffian(a: &SkewMatrix) -> C64 {
    let n = a.n();
    if n % 2 == 1 {
        return C64::new(0.0, 0.0);
    }
    let mut m = a.m.clone();
    let mut sign = 1.0;
    let mut acc = C64::new(1.0, 0.0);
    let mut k = 0;
    while k < n {
        let (mut bp, mut bq, mut best) = (k, k + 1, -1.0);
        for i in k..n {
            for j in i + 1..n {
                let v = m[(i, j)].norm();
                if v > best {
                    best = v;
                    bp = i;
                    bq = j;
                }
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if bp != k {
            swap_sym(&mut m, bp, k);
            sign = -sign;
            if bq == k {
                bq = bp;
            }
        }
        if bq != k + 1 {
            swap_sym(&mut m, bq, k + 1);
            sign = -sign;
        }
        let piv = m[(k, k + 1)];
        acc *= piv;
        for i in k + 2..n {
            // Clear m[i][k] using row k+1 and m[i][k+1] using row k.
            let f = m[(i, k)] / m[(k + 1, k)];
            let g = m[(i, k + 1)] / m[(k, k + 1)];
            for j in k..n {
                let r1 = m[(k + 1, j)];
                let r0 = m[(k, j)];
                m[(i, j)] -= f * r1 + g * r0;
            }
            for j in k..n {
                let c1 = m[(j, k + 1)];
                let c0 = m[(j, k)];
                m[(j, i)] -= f * c1 + g * c0;
            }
        }
        k += 2;
    }
    acc * sign
}

fn swap_sym(m: &mut CMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    m.swap_rows(a, b);
    for i in 0..m.rows {
        m.data.swap(i * m.cols + a, i * m.cols + b);
    }
}

/// Numerical rank and kernel of a skew matrix.
#[derive(Clone, Debug)]
pub struct SkewRankKernel {
    pub rank: usize,
    /// Orthonormal kernel vectors.
    pub kernel: Vec<Vec<C64>>,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
}

/// Rank and orthonormal kernel. Singular values of a skew matrix come in
/// equal pairs, so the rank is counted pairwise: a pair counts when its
/// smaller member exceeds `tol · ‖A‖∞`. This keeps the reported rank even.
pub fn skew_rank_kernel(a: &SkewMatrix, tol: f64) -> SkewRankKernel {
    skew_rank_kernel_scaled(a, tol, 0.0)
}

/// As [`skew_rank_kernel`], with the cutoff taken relative to
/// max(‖A‖∞, `scale`). A matrix whose entries cancel to round-off should
/// pass the size of the cancelling terms here, or its noise reads as rank.
pub fn skew_rank_kernel_scaled(a: &SkewMatrix, tol: f64, scale: f64) -> SkewRankKernel {
    let n = a.n();
    let scale = a.m.norm_inf().max(scale);
    let svd = svd_jacobi(&a.m);
    let cutoff = tol * scale;
    let mut rank = 0;
    while rank + 1 < n && scale > 0.0 && svd.sigma[rank + 1] > cutoff {
        rank += 2;
    }
    let kernel = (rank..n).map(|k| (0..n).map(|i| svd.v[(i, k)]).collect()).collect();
    SkewRankKernel { rank, kernel, singular_values: svd.sigma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn two_by_two() {
        let a = SkewMatrix::from_upper(2, |_, _| c64(3.0, -1.0));
        assert_eq!(pfaffian(&a), c64(3.0, -1.0));
    }

    #[test]
    fn odd_is_zero() {
        let a = SkewMatrix::from_upper(3, |i, j| c64((i + 2 * j) as f64, 1.0));
        assert_eq!(pfaffian(&a), c64(0.0, 0.0));
    }

    #[test]
    fn block_diagonal_product() {
        let a = SkewMatrix::from_upper(4, |i, j| match (i, j) {
            (0, 1) => c64(2.0, 0.0),
            (2, 3) => c64(0.0, 5.0),
            _ => c64(0.0, 0.0),
        });
        assert!((pfaffian(&a) - c64(0.0, 10.0)).norm() < 1e-14);
    }

    #[test]
    fn pivoting_case_zero_leading_entry() {
        // a12 = 0 forces a pivot swap; Pf = a12 a34 − a13 a24 + a14 a23 = −1·1 = −1.
        let a = SkewMatrix::from_upper(4, |i, j| match (i, j) {
            (0, 2) => c64(1.0, 0.0),
            (1, 3) => c64(1.0, 0.0),
            _ => c64(0.0, 0.0),
        });
        assert!((pfaffian(&a) - c64(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn new_rejects_non_skew() {
        let m = CMatrix::from_rows(&[vec![c64(0.0, 0.0), c64(1.0, 0.0)], vec![c64(1.0, 0.0), c64(0.0, 0.0)]]);
        assert!(SkewMatrix::new(m).is_err());
    }

    #[test]
    fn rank_kernel_basic() {
        let z = SkewMatrix::from_upper(4, |_, _| c64(0.0, 0.0));
        let rk = skew_rank_kernel(&z, 1e-9);
        assert_eq!(rk.rank, 0);
        assert_eq!(rk.kernel.len(), 4);
        let j = SkewMatrix::from_upper(2, |_, _| c64(1.0, 0.0));
        let rk = skew_rank_kernel(&j, 1e-9);
        assert_eq!(rk.rank, 2);
        assert!(rk.kernel.is_empty());
    }

    #[test]
    fn square_matches_determinant_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [2, 4, 6, 8] {
            for _ in 0..20 {
                let a = SkewMatrix::from_upper(n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                let pf = pfaffian(&a);
                let det = a.matrix().det();
                assert!((pf * pf - det).norm() <= 1e-9 * det.norm().max(1e-300), "n={n}");
            }
        }
    }
}
