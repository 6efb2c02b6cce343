use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An `n × p` sample stored column-major so that each component is a
/// contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Build from column-major storage (`values[j * n + i]` is row `i`, column `j`).
    pub fn from_column_major(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * p {
            return Err(Error::LengthMismatch { left: values.len(), right: n * p });
        }
        let m = DataMatrix { n, p, values };
        m.validate()?;
        Ok(m)
    }

    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch { left: n, right: bad.len() });
        }
        Self::from_column_major(n, p, columns.concat())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut values = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::LengthMismatch { left: p, right: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                values[j * n + i] = v;
            }
        }
        Self::from_column_major(n, p, values)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_column_major(m.nrows(), m.ncols(), m.as_slice().to_vec())
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::SampleTooSmall { needed: 2, got: self.n });
        }
        if self.p < 1 {
            return Err(Error::Invalid("data matrix has no columns".into()));
        }
        if let Some(idx) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: idx % self.n, column: idx / self.n });
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.p, &self.values)
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.p) {
            return Err(Error::Invalid(format!("column {bad} out of range (p = {})", self.p)));
        }
        let mut values = Vec::with_capacity(cols.len() * self.n);
        for &c in cols {
            values.extend_from_slice(self.column(c));
        }
        Self::from_column_major(self.n, cols.len(), values)
    }

    /// Per-column sample means.
    pub fn column_means(&self) -> Vec<f64> {
        self.columns().map(|c| c.iter().sum::<f64>() / self.n as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_columns_agree() {
        let a = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let b = DataMatrix::from_columns(vec![vec![1.0, 3.0, 5.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.column(1), &[2.0, 4.0, 6.0]);
        assert_eq!(a.row(2), vec![5.0, 6.0]);
        assert_eq!(a.to_matrix()[(1, 0)], 3.0);
        assert_eq!(a.column_means(), vec![3.0, 4.0]);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            DataMatrix::from_rows(&[vec![1.0, 2.0]]),
            Err(Error::SampleTooSmall { .. })
        ));
        assert!(matches!(
            DataMatrix::from_rows(&[vec![1.0, f64::INFINITY], vec![0.0, 0.0]]),
            Err(Error::NonFinite { row: 0, column: 1 })
        ));
        assert!(matches!(
            DataMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0]]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn column_selection() {
        let a = DataMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let s = a.select_columns(&[2, 0]).unwrap();
        assert_eq!(s.row(1), vec![6.0, 4.0]);
        assert!(a.select_columns(&[3]).is_err());
    }
}
