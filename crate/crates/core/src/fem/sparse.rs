use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;

/// Symmetric sparse matrix in compressed-row form, storing both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Sums duplicate `(row, col, value)` entries. Entries are merged in a fixed
    /// order, so equal input gives bit-identical matrices.
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len() / 2);
        let mut values: Vec<f64> = Vec::with_capacity(entries.len() / 2);
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside dimension {dim}");
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                cols.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseSymMatrix {
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored `(column, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.dim)
            .map(|r| x[r] * self.row(r).map(|(c, v)| v * y[c]).sum::<f64>())
            .sum()
    }

    /// `A·Y` for a dense block `Y` (one column per vector).
    pub fn mul_dense(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, y.ncols());
        for j in 0..y.ncols() {
            let col = y.column(j);
            let x = col.as_slice();
            let mut dst = out.column_mut(j);
            for r in 0..self.dim {
                dst[r] = self.row(r).map(|(c, v)| v * x[c]).sum();
            }
        }
        out
    }

    /// `a·self + b·other`; both operands must share a dimension.
    pub fn combine(&self, a: f64, other: &SparseSymMatrix, b: f64) -> SparseSymMatrix {
        assert_eq!(self.dim, other.dim);
        let mut entries = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.dim {
            entries.extend(self.row(r).map(|(c, v)| (r, c, a * v)));
            entries.extend(other.row(r).map(|(c, v)| (r, c, b * v)));
        }
        SparseSymMatrix::from_triplets(self.dim, entries)
    }

    /// Largest `|A_ij − A_ji|` relative to the largest entry.
    pub fn max_asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.dim)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// Lower triangle in faer's compressed-column layout.
    pub(crate) fn to_faer_lower(&self) -> SparseColMat<usize, f64> {
        let entries: Vec<Triplet<usize, usize, f64>> = (0..self.dim)
            .flat_map(|r| {
                self.row(r)
                    .filter(move |&(c, _)| c <= r)
                    .map(move |(c, v)| Triplet::new(r, c, v))
            })
            .collect();
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &entries)
            .expect("indices are within the matrix dimension")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = SparseSymMatrix::from_triplets(
            2,
            vec![(0, 0, 1.0), (1, 0, 2.0), (0, 1, 2.0), (0, 0, 0.5), (1, 1, 3.0)],
        );
        assert_eq!(a.get(0, 0), 1.5);
        assert_eq!(a.get(1, 0), 2.0);
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![3.5, 5.0]);
        assert_eq!(a.bilinear(&[1.0, 0.0], &[0.0, 1.0]), 2.0);
        assert_eq!(a.max_asymmetry(), 0.0);
    }

    #[test]
    fn combine_matches_dense() {
        let a = SparseSymMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 2.0)]);
        let b = SparseSymMatrix::from_triplets(2, vec![(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let c = a.combine(2.0, &b, -1.0).to_dense();
        assert_eq!(c, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 3.0]));
    }
}
