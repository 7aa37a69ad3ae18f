//! Compressed sparse row storage.

use crate::linalg::LinearOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Pattern from per-row column lists; columns are sorted and deduplicated,
    /// values start at zero.
    pub fn from_pattern(n_cols: usize, rows: Vec<Vec<usize>>) -> Self {
        let n_rows = rows.len();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            debug_assert!(r.last().map_or(true, |&c| c < n_cols));
            col_idx.extend_from_slice(&r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![Vec::new(); n_rows];
        for &(r, c, _) in triplets {
            rows[r].push(c);
        }
        let mut m = Self::from_pattern(n_cols, rows);
        for &(r, c, v) in triplets {
            *m.entry_mut(r, c).expect("entry is in the pattern") += v;
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn row_mut(&mut self, r: usize) -> (&[usize], &mut [f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &mut self.values[a..b])
    }

    pub fn entry_mut(&mut self, r: usize, c: usize) -> Option<&mut f64> {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        let pos = self.col_idx[a..b].binary_search(&c).ok()?;
        Some(&mut self.values[a + pos])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |p| vals[p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.n_rows) {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut s = 0.0;
            for k in a..b {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr = s;
        }
    }

    /// `y = Aᵀ x`
    pub fn mul_vec_transposed(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (r, &xr) in x.iter().enumerate().take(self.n_rows) {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            for k in a..b {
                y[self.col_idx[k]] += self.values[k] * xr;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                trip.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.n_cols, self.n_rows, &trip)
    }

    /// Bytes held by the three CSR arrays.
    pub fn memory_bytes(&self) -> usize {
        self.values.len() * std::mem::size_of::<f64>()
            + self.col_idx.len() * std::mem::size_of::<usize>()
            + self.row_ptr.len() * std::mem::size_of::<usize>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij − A_ji|`
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }
}

impl LinearOperator for CsrMatrix {
    fn n(&self) -> usize {
        self.n_rows
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_transpose() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 2, 2.0), (1, 0, 4.0), (0, 0, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 2), 3.0);
        let mut y = [0.0; 2];
        m.mul_vec(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, [2.0, 4.0]);
        let t = m.transpose();
        assert_eq!(t.get(2, 0), 3.0);
        let mut z = [0.0; 3];
        m.mul_vec_transposed(&[1.0, 2.0], &mut z);
        assert_eq!(z, [7.0, 0.0, 3.0]);
    }
}
