use nalgebra::DMatrix;

use super::LinearOperator;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a square matrix from per-row `(column, value)` lists.
    /// Duplicate columns within a row are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range for n = {n}");
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[s..e].iter().copied().zip(self.vals[s..e].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[s..e].binary_search(&j) {
            Ok(p) => self.vals[s + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Adds `d[i]` to every diagonal entry. The diagonal must be structurally present.
    pub fn add_diagonal(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.n);
        for (i, &di) in d.iter().enumerate() {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let p = self.cols[s..e]
                .binary_search(&i)
                .expect("diagonal entry not stored");
            self.vals[s + p] += di;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.vals.iter_mut().for_each(|v| *v *= s);
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |M - M^T|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let mut d = 0.0;
            let mut r = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    d = v;
                } else {
                    r += v.abs();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    /// Upper bound on the spectral norm (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for p in s..e {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *yi = acc;
        }
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        CsrMatrix::from_rows(
            (0..n)
                .map(|i| {
                    let mut r = vec![(i, 2.0)];
                    if i > 0 {
                        r.push((i - 1, -1.0));
                    }
                    if i + 1 < n {
                        r.push((i + 1, -1.0));
                    }
                    r
                })
                .collect(),
        )
    }

    #[test]
    fn matvec_and_accessors() {
        let m = tridiag(4);
        let mut y = vec![0.0; 4];
        m.matvec(&[1.0, 1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(m.bandwidth(), 1);
        assert_eq!(m.max_asymmetry(), 0.0);
        assert_eq!(m.gershgorin(), (0.0, 4.0));
        assert_eq!(m.get(0, 3), 0.0);
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_rows(vec![vec![(0, 1.0), (0, 2.0)], vec![(1, 1.0)]]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.nnz(), 2);
    }
}
