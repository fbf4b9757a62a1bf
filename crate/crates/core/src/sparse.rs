//! Compressed sparse row matrices.
//!
//! Column indices are strictly increasing inside each row and no stored value
//! is NaN or infinite. Every product is computed row by row with a fixed
//! reduction order, so results do not depend on threading.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Builds a matrix from raw CSR arrays, checking every layout invariant.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if indptr.len() != rows + 1 {
            return Err(Error::InvalidSparse(format!(
                "indptr has length {}, expected {}",
                indptr.len(),
                rows + 1
            )));
        }
        if indptr[0] != 0 || indptr[rows] != indices.len() || indices.len() != values.len() {
            return Err(Error::InvalidSparse("inconsistent indptr / indices / values".into()));
        }
        for i in 0..rows {
            let (start, end) = (indptr[i], indptr[i + 1]);
            if start > end {
                return Err(Error::InvalidSparse(format!("row {i}: offsets decrease")));
            }
            let row = &indices[start..end];
            if row.iter().any(|&c| c >= cols) {
                return Err(Error::InvalidSparse(format!("row {i}: column out of range")));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSparse(format!(
                    "row {i}: column indices not strictly increasing"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSparse("non-finite stored value".into()));
        }
        Ok(Self { rows, cols, indptr, indices, values })
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); rows];
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::InvalidSparse(format!(
                    "triplet ({i}, {j}) outside {rows}x{cols}"
                )));
            }
            per_row[i].push((j, v));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        for mut row in per_row {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                match indices.last() {
                    Some(&last) if last == j && values.len() > indptr[indptr.len() - 1] => {
                        *values.last_mut().unwrap() += v;
                    }
                    _ => {
                        indices.push(j);
                        values.push(v);
                    }
                }
            }
            indptr.push(indices.len());
        }
        Self::from_csr(rows, cols, indptr, indices, values)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Converts a dense matrix, dropping exact zeros.
    pub fn from_dense(dense: ArrayView2<'_, T>) -> Result<Self> {
        let (rows, cols) = dense.dim();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in dense.axis_iter(Axis(0)) {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self::from_csr(rows, cols, indptr, indices, values)
    }

    pub fn to_dense(&self) -> Array2<T> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for (i, j, v) in self.iter() {
            out[[i, j]] = v;
        }
        out
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    /// Iterates stored entries as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for (i, j, v) in self.iter() {
            let k = next[j];
            indices[k] = i;
            values[k] = v;
            next[j] += 1;
        }
        Self { rows: self.cols, cols: self.rows, indptr, indices, values }
    }

    pub fn scale(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Largest absolute difference between the matrix and its transpose.
    pub fn max_asymmetry(&self) -> T {
        if self.rows != self.cols {
            return T::infinity();
        }
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(T::zero(), T::max)
    }

    /// Maximum absolute row sum, a Gershgorin bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect())
    }

    /// Sparse times dense: `self · x`.
    pub fn mul_dense(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        let mut out = Array2::zeros((self.rows, x.ncols()));
        self.mul_dense_into(x, out.view_mut())?;
        Ok(out)
    }

    /// Writes `self · x` into `out`, overwriting it.
    pub fn mul_dense_into(
        &self,
        x: ArrayView2<'_, T>,
        mut out: ndarray::ArrayViewMut2<'_, T>,
    ) -> Result<()> {
        if x.nrows() != self.cols || out.dim() != (self.rows, x.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "spmm: {}x{} times {}x{} into {}x{}",
                self.rows,
                self.cols,
                x.nrows(),
                x.ncols(),
                out.nrows(),
                out.ncols()
            )));
        }
        out.fill(T::zero());
        let d = x.ncols();
        if let (Some(xs), Some(os)) = (x.as_slice(), out.as_slice_mut()) {
            for (i, o) in os.chunks_exact_mut(d.max(1)).enumerate().take(self.rows) {
                let (cols, vals) = self.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    for (a, &b) in o.iter_mut().zip(&xs[j * d..(j + 1) * d]) {
                        *a += v * b;
                    }
                }
            }
            return Ok(());
        }
        for (i, mut out_row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out_row.scaled_add(v, &x.row(j));
            }
        }
        Ok(())
    }

    /// Transposed sparse times dense: `selfᵀ · x`, without forming the transpose.
    pub fn tmul_dense(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        let mut out = Array2::zeros((self.cols, x.ncols()));
        self.tmul_dense_add(x, out.view_mut())?;
        Ok(out)
    }

    /// Accumulates `selfᵀ · x` into `out`.
    pub fn tmul_dense_add(
        &self,
        x: ArrayView2<'_, T>,
        mut out: ndarray::ArrayViewMut2<'_, T>,
    ) -> Result<()> {
        if x.nrows() != self.rows || out.dim() != (self.cols, x.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "transposed spmm: ({}x{})ᵀ times {}x{} into {}x{}",
                self.rows,
                self.cols,
                x.nrows(),
                x.ncols(),
                out.nrows(),
                out.ncols()
            )));
        }
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            let xi = x.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out.row_mut(j).scaled_add(v, &xi);
            }
        }
        Ok(())
    }

    /// Sparse times sparse (row-wise Gustavson accumulation).
    pub fn mul_sparse(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "spgemm: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = vec![T::zero(); other.cols];
        let mut touched = vec![false; other.cols];
        let mut pattern: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..self.rows {
            let (acols, avals) = self.row(i);
            for (&k, &a) in acols.iter().zip(avals) {
                let (bcols, bvals) = other.row(k);
                for (&j, &b) in bcols.iter().zip(bvals) {
                    if !touched[j] {
                        touched[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                let v = acc[j];
                if v != T::zero() {
                    indices.push(j);
                    values.push(v);
                }
                acc[j] = T::zero();
                touched[j] = false;
            }
            pattern.clear();
            indptr.push(indices.len());
        }
        Ok(Self { rows: self.rows, cols: other.cols, indptr, indices, values })
    }

    /// Linear combination `alpha · self + beta · other`; exact zeros are dropped.
    pub fn add_scaled(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "sparse add: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(self.nnz().max(other.nnz()));
        indptr.push(0);
        for i in 0..self.rows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                let (j, v) = if q == bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    p += 1;
                    (ac[p - 1], alpha * av[p - 1])
                } else if p == ac.len() || bc[q] < ac[p] {
                    q += 1;
                    (bc[q - 1], beta * bv[q - 1])
                } else {
                    p += 1;
                    q += 1;
                    (ac[p - 1], alpha * av[p - 1] + beta * bv[q - 1])
                };
                if v != T::zero() {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { rows: self.rows, cols: self.cols, indptr, indices, values })
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[&Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::DimensionMismatch("vstack: column counts differ".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let nnz = blocks.iter().map(|b| b.nnz()).sum();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for b in blocks {
            let base = indices.len();
            indptr.extend(b.indptr[1..].iter().map(|&p| p + base));
            indices.extend_from_slice(&b.indices);
            values.extend_from_slice(&b.values);
        }
        Ok(Self { rows, cols, indptr, indices, values })
    }

    /// Casts stored values to another scalar type.
    pub fn cast<U: Scalar>(&self) -> SparseMatrix<U> {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample() -> SparseMatrix<f64> {
        SparseMatrix::from_dense(array![[1.0, 0.0, 2.0], [0.0, 3.0, 0.0], [4.0, 0.0, 5.0]].view())
            .unwrap()
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 3.0);
    }

    #[test]
    fn rejects_unsorted_columns() {
        let err = SparseMatrix::<f64>::from_csr(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]);
        assert!(err.is_err());
        let err = SparseMatrix::<f64>::from_csr(1, 3, vec![0, 1], vec![1], vec![f64::NAN]);
        assert!(err.is_err());
    }

    #[test]
    fn products_match_dense() {
        let a = sample();
        let x = array![[1.0, -1.0], [2.0, 0.5], [0.0, 3.0]];
        assert_eq!(a.mul_dense(x.view()).unwrap(), a.to_dense().dot(&x));
        assert_eq!(a.tmul_dense(x.view()).unwrap(), a.to_dense().t().dot(&x));
        let aa = a.mul_sparse(&a).unwrap();
        assert_eq!(aa.to_dense(), a.to_dense().dot(&a.to_dense()));
        assert_eq!(a.transpose().to_dense(), a.to_dense().t().to_owned());
    }

    #[test]
    fn add_scaled_and_vstack() {
        let a = sample();
        let i = SparseMatrix::identity(3);
        let s = a.add_scaled(2.0, &i, -1.0).unwrap();
        assert_eq!(s.to_dense(), a.to_dense() * 2.0 - ndarray::Array2::<f64>::eye(3));
        let st = SparseMatrix::vstack(&[&a, &i]).unwrap();
        assert_eq!(st.shape(), (6, 3));
        assert_eq!(st.get(4, 1), 1.0);
        assert_eq!(st.get(2, 2), 5.0);
    }

    #[test]
    fn asymmetry_and_gershgorin() {
        let a = sample();
        assert_eq!(a.max_asymmetry(), 2.0);
        assert_eq!(a.gershgorin_bound(), 9.0);
    }
}
