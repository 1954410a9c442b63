//! Cholesky factorization of symmetric positive-definite band matrices.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// `A = L Lᵀ` with `L` stored by rows inside the band: `band[i][k]` holds
/// `L[i][i - bw + k]`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl BandedCholesky {
    /// Factors a symmetric matrix. Only the lower triangle is read.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
        let n = a.nrows();
        let bw = a.half_bandwidth();
        let width = bw + 1;
        let mut band = vec![0.0; n * width];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    band[i * width + (j + bw - i)] = v;
                }
            }
        }

        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut sum = band[i * width + (j + bw - i)];
                let kmin = lo.max(j.saturating_sub(bw));
                for k in kmin..j {
                    sum -= band[i * width + (k + bw - i)] * band[j * width + (k + bw - j)];
                }
                if j == i {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: sum });
                    }
                    band[i * width + bw] = sum.sqrt();
                } else {
                    band[i * width + (j + bw - i)] = sum / band[j * width + bw];
                }
            }
        }
        Ok(BandedCholesky { n, bw, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bw
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let (n, bw, width) = (self.n, self.bw, self.bw + 1);
        let l = |i: usize, j: usize| self.band[i * width + (j + bw - i)];
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= l(i, k) * x[k];
            }
            x[i] = s / l(i, i);
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= l(k, i) * x[k];
            }
            x[i] = s / l(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let f = BandedCholesky::factor(&CsrMatrix::identity(4)).unwrap();
        assert_eq!(f.solve(&[1.0, -2.0, 3.0, 4.0]).unwrap(), vec![1.0, -2.0, 3.0, 4.0]);
    }

    #[test]
    fn pentadiagonal_solve() {
        let n = 10;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 6.0));
            if i + 1 < n {
                t.push((i, i + 1, -2.0));
                t.push((i + 1, i, -2.0));
            }
            if i + 2 < n {
                t.push((i, i + 2, -1.0));
                t.push((i + 2, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.matvec(&x_true);
        let x = BandedCholesky::factor(&a).unwrap().solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(
            BandedCholesky::factor(&a),
            Err(Error::NotPositiveDefinite { row: 1, .. })
        ));
    }
}
