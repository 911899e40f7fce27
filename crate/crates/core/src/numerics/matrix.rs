use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major values, rejecting wrong lengths and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::shape("matrix values", rows * cols, values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("matrix values".into()));
        }
        Ok(Self { rows, cols, values })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.values[row * self.cols..(row + 1) * self.cols]
    }

    /// `out = self * x + bias`.
    pub fn affine_into(&self, x: &[f64], bias: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::shape("matrix-vector input", self.cols, x.len()));
        }
        if bias.len() != self.rows || out.len() != self.rows {
            return Err(Error::shape("matrix-vector output", self.rows, out.len()));
        }
        for (i, (o, b)) in out.iter_mut().zip(bias).enumerate() {
            *o = b + dot(self.row(i), x);
        }
        Ok(())
    }
}

/// Dot product with four independent accumulators so the compiler can pipeline it.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_checks_length_and_finiteness() {
        assert!(DenseMatrix::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            DenseMatrix::from_vec(1, 2, vec![1.0, f64::NAN]),
            Err(Error::Numeric(_))
        ));
        let m = DenseMatrix::from_vec(2, 3, (0..6).map(f64::from).collect()).unwrap();
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.row(1), &[3.0, 4.0, 5.0]);
    }

    #[test]
    fn affine_matches_naive() {
        let m = DenseMatrix::from_vec(2, 5, (0..10).map(|v| v as f64 * 0.5 - 2.0).collect()).unwrap();
        let x = [1.0, -2.0, 0.25, 3.0, 7.0];
        let b = [0.5, -0.5];
        let mut out = [0.0; 2];
        m.affine_into(&x, &b, &mut out).unwrap();
        for i in 0..2 {
            let mut want = b[i];
            for j in 0..5 {
                want += m.get(i, j) * x[j];
            }
            assert!((out[i] - want).abs() < 1e-12);
        }
        assert!(m.affine_into(&x[..4], &b, &mut out).is_err());
    }

    #[test]
    fn dot_handles_remainders() {
        for n in 0..11 {
            let a: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let want: f64 = a.iter().map(|x| x * x).sum();
            assert_eq!(dot(&a, &a), want);
        }
    }
}
