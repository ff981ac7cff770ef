use super::{check_dim, norm, GeometryError};

/// Dense `rows × cols` matrix acting as a bounded linear map.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperatorSpec {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    norm_estimate: f64,
}

impl LinearOperatorSpec {
    /// Row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, GeometryError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(GeometryError::InvalidOperator(format!(
                "expected {rows}x{cols} = {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidOperator("entries must be finite".into()));
        }
        let mut op = LinearOperatorSpec { rows, cols, data, norm_estimate: 0.0 };
        op.norm_estimate = op.estimate_norm();
        Ok(op)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GeometryError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(GeometryError::InvalidOperator("ragged matrix rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::new(n, n, data).expect("identity is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn norm_estimate(&self) -> f64 {
        self.norm_estimate
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        check_dim(self.cols, x.len())?;
        Ok(self.apply_unchecked(x))
    }

    #[inline]
    pub(crate) fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Power iteration on `AᵀA`, floored by the largest column norm (a
    /// guaranteed lower bound on the spectral norm).
    fn estimate_norm(&self) -> f64 {
        let column_bound = (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.data[i * self.cols + j].powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let mut v: Vec<f64> = (0..self.cols).map(|j| 1.0 + j as f64 / self.cols as f64).collect();
        let mut sigma = 0.0f64;
        for _ in 0..100 {
            let nv = norm(&v);
            if nv == 0.0 {
                break;
            }
            v.iter_mut().for_each(|c| *c /= nv);
            let av = self.apply_unchecked(&v);
            sigma = norm(&av);
            v = (0..self.cols).map(|j| (0..self.rows).map(|i| self.data[i * self.cols + j] * av[i]).sum()).collect();
        }
        sigma.max(column_bound)
    }
}
