use rayon::prelude::*;

use crate::block::{BlockVectors, DenseMatrix};
use crate::error::{check_dim, EigenError, Result};
use crate::field::Field;
use crate::operator::HermitianOperator;

/// Sparse Hermitian matrix in compressed row form.
///
/// Both triangles are stored. Column indices within a row are sorted and
/// unique.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian<T: Field> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Field> SparseHermitian<T> {
    /// Assembles from entries of the full matrix; duplicates are summed.
    ///
    /// The caller is responsible for supplying a Hermitian pattern; use
    /// [`SparseHermitian::from_triangle`] to mirror one triangle.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut entries: Vec<(usize, usize, T)> = entries.into_iter().collect();
        if let Some(&(i, j, _)) = entries.iter().find(|(i, j, _)| *i >= n || *j >= n) {
            return Err(EigenError::InvalidOptions(format!(
                "entry ({i}, {j}) outside a {n}x{n} matrix"
            )));
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(entries.len());
        let mut values: Vec<T> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry exists") += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Assembles from the entries of one triangle (either may be used, also
    /// mixed). Off-diagonal entries are mirrored as their conjugates and only
    /// the real part of diagonal entries is kept.
    pub fn from_triangle(n: usize, entries: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut full = Vec::new();
        for (i, j, v) in entries {
            if i == j {
                full.push((i, i, T::from_real(v.real())));
            } else {
                full.push((i, j, v));
                full.push((j, i, v.conjugate()));
            }
        }
        Self::from_entries(n, full)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_complex(&self) -> bool {
        T::IS_COMPLEX
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (start, end) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[start..end].binary_search(&j) {
            Ok(pos) => self.values[start + pos],
            Err(_) => T::zero(),
        }
    }

    /// Real parts of the diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).real()).collect()
    }

    /// Entries `(i, j, a_ij)` with `i >= j`, in row order.
    pub fn lower_triangle(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .filter(move |&p| self.col_idx[p] <= i)
                .map(move |p| (i, self.col_idx[p], self.values[p]))
        })
    }

    /// `A + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Result<Self> {
        check_dim("diagonal length", self.n, d.len())?;
        let entries = (0..self.n)
            .flat_map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, p)))
            .map(|(i, p)| (i, self.col_idx[p], self.values[p]))
            .chain(d.iter().enumerate().map(|(i, &v)| (i, i, T::from_real(v))));
        Self::from_entries(self.n, entries)
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[p])] = self.values[p];
            }
        }
        m
    }

    fn apply_column(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
    }
}

impl<T: Field> HermitianOperator<T> for SparseHermitian<T> {
    fn dim(&self) -> usize {
        self.n
    }

    /// Columns are processed in parallel; each is summed in row order, so
    /// the result does not depend on the thread count.
    fn apply(&self, x: &BlockVectors<T>) -> Result<BlockVectors<T>> {
        check_dim("sparse operator input rows", self.n, x.nrows())?;
        let mut y = BlockVectors::zeros(self.n, x.ncols());
        if self.n == 0 {
            return Ok(y);
        }
        y.as_matrix_mut()
            .as_mut_slice()
            .par_chunks_mut(self.n)
            .zip(x.as_matrix().as_slice().par_chunks(self.n))
            .for_each(|(yc, xc)| self.apply_column(xc, yc));
        Ok(y)
    }
}
