//! Small dense complex linear algebra: LU with partial pivoting, one-sided
//! Jacobi SVD, and row reduction of vector families.

use crate::C64;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Determinant by LU factorisation with partial pivoting.
    pub fn det(&self) -> C64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = C64::new(1.0, 0.0);
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm())).unwrap();
            if a[(p, k)].norm() == 0.0 {
                return C64::new(0.0, 0.0);
            }
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let piv = a[(k, k)];
            det *= piv;
            for i in k + 1..n {
                let f = a[(i, k)] / piv;
                if f != C64::new(0.0, 0.0) {
                    for j in k..n {
                        let t = a[(k, j)];
                        a[(i, j)] -= f * t;
                    }
                }
            }
        }
        det
    }

    /// Solve `A x = b` by LU with partial pivoting. `None` if singular.
    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.to_vec();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm())).unwrap();
            if a[(p, k)].norm() <= 1e-300 * scale {
                return None;
            }
            if p != k {
                a.swap_rows(p, k);
                x.swap(p, k);
            }
            let piv = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / piv;
                for j in k..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
                let t = x[k];
                x[i] -= f * t;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[(k, j)] * x[j];
            }
            x[k] = s / a[(k, k)];
        }
        Some(x)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of [`svd_jacobi`]: singular values (descending) and the matching
/// right singular vectors as columns of `v`.
pub struct Svd {
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

/// One-sided (Hestenes) Jacobi SVD. Accurate for small matrices, which is all
/// the Ω matrices here are.
pub fn svd_jacobi(a: &CMatrix) -> Svd {
    let m = a.rows;
    let n = a.cols;
    let mut u = a.clone();
    let mut v = CMatrix::identity(n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    alpha += up.norm_sqr();
                    beta += uq.norm_sqr();
                    gamma += up.conj() * uq;
                }
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = up * c - uq * phase.conj() * s;
                    u[(i, q)] = up * phase * s + uq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * phase.conj() * s;
                    v[(i, q)] = vp * phase * s + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| (0..m).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
    idx.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let sigma = idx.iter().map(|&j| norms[j]).collect();
    let v_sorted = CMatrix::from_fn(n, n, |i, k| v[(i, idx[k])]);
    Svd { sigma, v: v_sorted }
}

/// Reduced row echelon form of a family of vectors (rows), with each leading
/// coefficient scaled to 1. Rows that reduce to zero (relative `tol`) are dropped.
pub fn rref(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let mut m = CMatrix::from_rows(vectors);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut lead_row = 0;
    for col in 0..m.cols {
        if lead_row == m.rows {
            break;
        }
        let p = (lead_row..m.rows).max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm())).unwrap();
        if m[(p, col)].norm() <= tol * scale {
            continue;
        }
        m.swap_rows(p, lead_row);
        let piv = m[(lead_row, col)];
        for j in 0..m.cols {
            m[(lead_row, j)] /= piv;
        }
        for i in 0..m.rows {
            if i != lead_row {
                let f = m[(i, col)];
                if f != C64::new(0.0, 0.0) {
                    for j in 0..m.cols {
                        let t = m[(lead_row, j)];
                        m[(i, j)] -= f * t;
                    }
                }
            }
        }
        lead_row += 1;
    }
    m.to_rows().into_iter().take(lead_row).collect()
}

/// Euclidean norm of a complex vector.
pub fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn det_and_solve_small() {
        let a = CMatrix::from_rows(&[vec![c64(2.0, 0.0), c64(1.0, 1.0)], vec![c64(0.0, -1.0), c64(3.0, 0.0)]]);
        let d = a.det();
        let expect = c64(2.0, 0.0) * c64(3.0, 0.0) - c64(1.0, 1.0) * c64(0.0, -1.0);
        assert!((d - expect).norm() < 1e-14);
        let x = a.solve(&[c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap();
        let r = a.mul_vec(&x);
        assert!((r[0] - c64(1.0, 0.0)).norm() < 1e-14 && r[1].norm() < 1e-14);
    }

    #[test]
    fn svd_recovers_rank_deficiency() {
        let a = CMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(2.0, 1.0), c64(3.0, 0.0)],
            vec![c64(2.0, 0.0), c64(4.0, 2.0), c64(6.0, 0.0)],
            vec![c64(0.0, 1.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        ]);
        let s = svd_jacobi(&a);
        assert!(s.sigma[2] < 1e-12 * s.sigma[0]);
        let k: Vec<C64> = (0..3).map(|i| s.v[(i, 2)]).collect();
        assert!(vnorm(&a.mul_vec(&k)) < 1e-12);
    }

    #[test]
    fn rref_normalises_leading_entries() {
        let rows =
            vec![vec![c64(0.0, 0.0), c64(2.0, 0.0), c64(4.0, 0.0)], vec![c64(3.0, 0.0), c64(0.0, 0.0), c64(3.0, 0.0)]];
        let r = rref(&rows, 1e-12);
        assert_eq!(r.len(), 2);
        assert!((r[0][0] - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((r[1][1] - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((r[1][2] - c64(2.0, 0.0)).norm() < 1e-15);
    }
}
