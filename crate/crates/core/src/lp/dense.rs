//! Minimal dense linear algebra: row-major matrices and LU factorisation
//! with partial pivoting, including transpose solves (needed for dual
//! recovery) and a cheap conditioning estimate.

use crate::tol::PIVOT_EPS;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.concat() }
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self^T * y`.
    pub fn mul_vec_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            if yi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += a * yi;
                }
            }
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
#[error("matrix is numerically singular at pivot {col} (|pivot| = {pivot:.3e})")]
pub struct Singular {
    pub col: usize,
    pub pivot: f64,
}

/// LU factorisation `P A = L U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    /// Packed factors: strict lower triangle holds L (unit diagonal implied),
    /// upper triangle holds U.
    lu: Vec<f64>,
    /// Row permutation: factor row `i` came from input row `perm[i]`.
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu, Singular> {
        assert_eq!(a.n_rows(), a.n_cols(), "LU needs a square matrix");
        let n = a.n_rows();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            // Partial pivot: largest magnitude in column k at or below the diagonal.
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= PIVOT_EPS {
                return Err(Singular { col: k, pivot: best });
            }
            if p != k {
                perm.swap(k, p);
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let m = lu[i * n + k] / pivot;
                lu[i * n + k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= m * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ratio of extreme U-diagonal magnitudes; a cheap lower bound on the
    /// condition number that is adequate for flagging degenerate bases.
    pub fn condition_estimate(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for k in 0..self.n {
            let d = self.lu[k * self.n + k].abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Solve `A x = b` in place: `b` enters as the right-hand side and leaves
    /// as the solution.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        // Apply the row permutation.
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // Forward: L y = P b.
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        // Back: U x = y.
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        b.copy_from_slice(&x);
    }

    /// Solve `A^T x = b` in place.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        // (PA)^T = A^T P^T = (LU)^T = U^T L^T; solve U^T y = b, then L^T z = y,
        // then undo the permutation: x = P^T z.
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * x[j];
            }
            x[i] = s;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = x[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lu_solves_small_system() {
        let a = Matrix::from_rows(&[
            vec![2.0, 1.0, 1.0],
            vec![4.0, -6.0, 0.0],
            vec![-2.0, 7.0, 2.0],
        ]);
        let lu = Lu::factor(&a).unwrap();
        let mut b = vec![5.0, -2.0, 9.0];
        lu.solve(&mut b);
        assert_abs_diff_eq!(b[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn transpose_solve_matches_explicit_transpose() {
        let a = Matrix::from_rows(&[
            vec![3.0, -1.0, 2.0],
            vec![1.0, 4.0, 0.5],
            vec![-2.0, 1.5, 3.0],
        ]);
        let mut at = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                *at.at_mut(j, i) = a.at(i, j);
            }
        }
        let b = vec![1.0, 2.0, 3.0];
        let mut x1 = b.clone();
        Lu::factor(&a).unwrap().solve_transpose(&mut x1);
        let mut x2 = b;
        Lu::factor(&at).unwrap().solve(&mut x2);
        for (u, v) in x1.iter().zip(&x2) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(Lu::factor(&a).is_err());
    }

    #[test]
    fn permutation_round_trip() {
        // Matrix that forces row swaps.
        let a = Matrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
            vec![3.0, 0.0, 0.0],
        ]);
        let lu = Lu::factor(&a).unwrap();
        let x = vec![1.5, -2.0, 0.25];
        let mut b = a.mul_vec(&x);
        lu.solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
        let mut bt = a.mul_vec_transpose(&x);
        lu.solve_transpose(&mut bt);
        for (u, v) in bt.iter().zip(&x) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
    }
}
