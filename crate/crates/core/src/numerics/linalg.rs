//! Small dense linear algebra for metric tensors (n is the model dimension,
//! typically below ten).

use std::ops::{Index, IndexMut};

use super::NumericsError;

const SYMMETRY_TOL: f64 = 1e-12;

/// Square real matrix stored row-major. Used for `g_{μν}` and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl MetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumericsError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(NumericsError::NotSquare);
        }
        Ok(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest `|m_ij - m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Replace with `(m + mᵀ)/2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// `Jᵀ · self · J`, the pullback of a metric through a Jacobian.
    pub fn congruence(&self, jacobian: &Self) -> Self {
        jacobian.transpose().matmul(self).matmul(jacobian)
    }

    /// Quadratic form `vᵀ m v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for j in 0..self.n {
                row += self[(i, j)] * v[j];
            }
            acc += v[i] * row;
        }
        acc
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Sub-matrix on the listed indices.
    pub fn principal_block(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    fn check_symmetric(&self) -> Result<(), NumericsError> {
        let scale = self.max_abs().max(1.0);
        let asym = self.asymmetry();
        if asym > SYMMETRY_TOL * scale {
            return Err(NumericsError::NotSymmetric { asymmetry: asym });
        }
        Ok(())
    }

    /// Lower-triangular Cholesky factor. Fails at the first non-positive pivot.
    pub fn cholesky(&self) -> Result<Cholesky, NumericsError> {
        if !self.data.iter().all(|x| x.is_finite()) {
            return Err(NumericsError::NonFiniteMatrix);
        }
        self.check_symmetric()?;
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return Err(NumericsError::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }
}

impl Index<(usize, usize)> for MetricMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for MetricMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// `m = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: MetricMatrix,
}

impl Cholesky {
    pub fn factor(&self) -> &MetricMatrix {
        &self.l
    }

    pub fn det(&self) -> f64 {
        let n = self.l.dim();
        (0..n).map(|i| self.l[(i, i)]).product::<f64>().powi(2)
    }

    /// `sqrt(det m)` computed without squaring.
    pub fn sqrt_det(&self) -> f64 {
        let n = self.l.dim();
        (0..n).map(|i| self.l[(i, i)]).product()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.dim();
        let l = &self.l;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= l[(i, k)] * y[k];
            }
            y[i] /= l[(i, i)];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= l[(k, i)] * y[k];
            }
            y[i] /= l[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> MetricMatrix {
        let n = self.l.dim();
        let mut inv = MetricMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv.symmetrize();
        inv
    }
}

/// Determinant and inverse of a symmetric matrix.
///
/// Positive definite input goes through Cholesky, so the determinant is
/// strictly positive. Symmetric indefinite input falls back to LU with partial
/// pivoting; a vanishing pivot is reported as [`NumericsError::Singular`].
pub fn det_and_inverse(m: &MetricMatrix) -> Result<(f64, MetricMatrix), NumericsError> {
    match m.cholesky() {
        Ok(ch) => Ok((ch.det(), ch.inverse())),
        Err(NumericsError::NotPositiveDefinite { .. }) => lu_det_inverse(m),
        Err(e) => Err(e),
    }
}

fn lu_det_inverse(m: &MetricMatrix) -> Result<(f64, MetricMatrix), NumericsError> {
    let n = m.dim();
    let scale = m.max_abs();
    let mut a = m.clone();
    let mut inv = MetricMatrix::identity(n);
    let mut det = 1.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .unwrap_or(col);
        let p = a[(pivot_row, col)];
        if p.abs() <= 1e-14 * scale {
            return Err(NumericsError::Singular { pivot: col });
        }
        if pivot_row != col {
            for j in 0..n {
                a.data.swap(col * n + j, pivot_row * n + j);
                inv.data.swap(col * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        det *= p;
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[(i, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(i, j)] -= f * a[(col, j)];
                inv[(i, j)] -= f * inv[(col, j)];
            }
        }
    }
    inv.symmetrize();
    Ok((det, inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &MetricMatrix, b: &MetricMatrix, tol: f64) {
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn identity() {
        let (d, inv) = det_and_inverse(&MetricMatrix::identity(2)).unwrap();
        assert_eq!(d, 1.0);
        assert_eq!(inv, MetricMatrix::identity(2));
    }

    #[test]
    fn gaussian_metric_at_unit_sigma() {
        let (d, inv) = det_and_inverse(&MetricMatrix::diagonal(&[1.0, 2.0])).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
        assert_close(&inv, &MetricMatrix::diagonal(&[1.0, 0.5]), 1e-15);
    }

    #[test]
    fn diagonal_quarter_half() {
        let (d, inv) = det_and_inverse(&MetricMatrix::diagonal(&[0.25, 0.5])).unwrap();
        assert!((d - 0.125).abs() < 1e-15);
        assert_close(&inv, &MetricMatrix::diagonal(&[4.0, 2.0]), 1e-14);
    }

    #[test]
    fn indefinite_goes_through_lu() {
        let m = MetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (d, inv) = det_and_inverse(&m).unwrap();
        assert!((d + 1.0).abs() < 1e-15);
        assert_close(&inv, &m, 1e-15);
        assert!(matches!(
            m.cholesky(),
            Err(NumericsError::NotPositiveDefinite { pivot: 0, .. })
        ));
    }

    #[test]
    fn singular_names_pivot() {
        let m = MetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            det_and_inverse(&m),
            Err(NumericsError::Singular { pivot: 1 })
        ));
    }

    #[test]
    fn asymmetric_rejected() {
        let m = MetricMatrix::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            det_and_inverse(&m),
            Err(NumericsError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn congruence_matches_hand_product() {
        let g = MetricMatrix::diagonal(&[1.0, 2.0]);
        let j = MetricMatrix::diagonal(&[1.0, 3.0]);
        assert_close(&g.congruence(&j), &MetricMatrix::diagonal(&[1.0, 18.0]), 0.0);
    }
}
