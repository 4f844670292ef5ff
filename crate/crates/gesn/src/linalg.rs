//! Small dense/sparse linear-algebra kernels: row-major matrices, CSR
//! matrix-vector products, and direct solvers for symmetric positive-definite
//! systems. Everything is `f64`; accumulation happens in fixed order so
//! results are reproducible bit-for-bit.

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// y = M x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// y = Mᵀ x
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (yj, &mij) in y.iter_mut().zip(self.row(i)) {
                *yj += mij * xi;
            }
        }
        y
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Sparse matrix in compressed-row form with explicit values.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets. Duplicates are summed; rows end
    /// up sorted by column index.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= rows {
                return Err(Error::NodeOutOfRange {
                    index: r,
                    num_nodes: rows,
                });
            }
            if c >= cols {
                return Err(Error::NodeOutOfRange {
                    index: c,
                    num_nodes: cols,
                });
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut cur_row = 0usize;
        for (r, c, v) in triplets {
            if col_indices.len() > row_offsets[r]
                && cur_row == r
                && *col_indices.last().unwrap() == c
            {
                *values.last_mut().unwrap() += v;
                continue;
            }
            while cur_row < r {
                cur_row += 1;
                row_offsets[cur_row] = col_indices.len();
            }
            col_indices.push(c);
            values.push(v);
        }
        while cur_row < rows {
            cur_row += 1;
            row_offsets[cur_row] = col_indices.len();
        }
        Ok(CsrMatrix {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_entries(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    /// Multiplies every stored value by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    /// y = M x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// y = M x written into a caller-provided buffer.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for i in 0..self.rows {
            let (cols, vals) = self.row_entries(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    /// y = Mᵀ x
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let (cols, vals) = self.row_entries(i);
            let xi = x[i];
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (cols, vals) = self.row_entries(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m.set(i, j, v);
            }
        }
        m
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn normalize(x: &mut [f64]) -> f64 {
    let n = norm2(x);
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
    n
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Solves `A X = B` for symmetric positive-definite `A` via an unpivoted
/// Cholesky factorization. Returns `Err(Error::SingularSystem)` when a pivot
/// is not strictly positive.
pub fn cholesky_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "matrix must be square");
    assert_eq!(b.rows(), n, "rhs row count must match");

    // Lower-triangular factor, packed row-major.
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.at(i, j);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::SingularSystem);
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }

    let m = b.cols();
    let mut x = b.clone();
    // Forward substitution: L Z = B.
    for i in 0..n {
        for c in 0..m {
            let mut sum = x.at(i, c);
            for k in 0..i {
                sum -= l[i * n + k] * x.at(k, c);
            }
            x.set(i, c, sum / l[i * n + i]);
        }
    }
    // Back substitution: Lᵀ X = Z.
    for i in (0..n).rev() {
        for c in 0..m {
            let mut sum = x.at(i, c);
            for k in i + 1..n {
                sum -= l[k * n + i] * x.at(k, c);
            }
            x.set(i, c, sum / l[i * n + i]);
        }
    }
    Ok(x)
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting. Fallback
/// path for normal matrices that fail Cholesky at tiny regularization.
pub fn pivoted_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "matrix must be square");
    assert_eq!(b.rows(), n, "rhs row count must match");
    let m = b.cols();

    let mut aug = a.clone();
    let mut rhs = b.clone();
    let mut scale = 0.0f64;
    for v in aug.data() {
        scale = scale.max(v.abs());
    }
    let tiny = f64::EPSILON * scale.max(1.0) * n as f64;

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                aug.at(r1, col)
                    .abs()
                    .partial_cmp(&aug.at(r2, col).abs())
                    .unwrap()
            })
            .unwrap();
        if aug.at(pivot_row, col).abs() <= tiny {
            return Err(Error::SingularSystem);
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = aug.at(col, j);
                aug.set(col, j, aug.at(pivot_row, j));
                aug.set(pivot_row, j, tmp);
            }
            for j in 0..m {
                let tmp = rhs.at(col, j);
                rhs.set(col, j, rhs.at(pivot_row, j));
                rhs.set(pivot_row, j, tmp);
            }
        }
        let pivot = aug.at(col, col);
        for r in col + 1..n {
            let factor = aug.at(r, col) / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                let v = aug.at(r, j) - factor * aug.at(col, j);
                aug.set(r, j, v);
            }
            for j in 0..m {
                let v = rhs.at(r, j) - factor * rhs.at(col, j);
                rhs.set(r, j, v);
            }
        }
    }

    let mut x = Matrix::zeros(n, m);
    for r in (0..n).rev() {
        for c in 0..m {
            let mut sum = rhs.at(r, c);
            for k in r + 1..n {
                sum -= aug.at(r, k) * x.at(k, c);
            }
            x.set(r, c, sum / aug.at(r, r));
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_from_triplets_sorts_and_merges() {
        let m = CsrMatrix::from_triplets(
            3,
            3,
            vec![(2, 1, 4.0), (0, 2, 1.0), (0, 0, 2.0), (0, 0, 3.0)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 3);
        let (cols, vals) = m.row_entries(0);
        assert_eq!(cols, &[0, 2]);
        assert_eq!(vals, &[5.0, 1.0]);
        let (cols, vals) = m.row_entries(1);
        assert!(cols.is_empty() && vals.is_empty());
        let (cols, vals) = m.row_entries(2);
        assert_eq!(cols, &[1]);
        assert_eq!(vals, &[4.0]);
    }

    #[test]
    fn csr_matvec_matches_dense() {
        let m = CsrMatrix::from_triplets(
            3,
            4,
            vec![(0, 1, 2.0), (1, 0, -1.0), (1, 3, 0.5), (2, 2, 3.0)],
        )
        .unwrap();
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(m.matvec(&x), vec![4.0, 1.0, 9.0]);
        let d = m.to_dense();
        assert_eq!(d.matvec(&x), m.matvec(&x));

        let y = [1.0, 1.0, 2.0];
        assert_eq!(m.tr_matvec(&y), d.tr_matvec(&y));
    }

    #[test]
    fn csr_rejects_out_of_range() {
        assert!(CsrMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(CsrMatrix::from_triplets(2, 2, vec![(0, 5, 1.0)]).is_err());
    }

    #[test]
    fn cholesky_solves_spd_system() {
        // A = [[4,1],[1,3]], b = [1, 2] -> x = (1/11, 7/11)
        let a = Matrix::from_vec(2, 2, vec![4.0, 1.0, 1.0, 3.0]);
        let b = Matrix::from_vec(2, 1, vec![1.0, 2.0]);
        let x = cholesky_solve(&a, &b).unwrap();
        assert!((x.at(0, 0) - 1.0 / 11.0).abs() < 1e-12);
        assert!((x.at(1, 0) - 7.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 1.0]);
        let b = Matrix::from_vec(2, 1, vec![1.0, 1.0]);
        assert!(matches!(cholesky_solve(&a, &b), Err(Error::SingularSystem)));
        // ... but the pivoted fallback handles it (it is merely indefinite).
        let x = pivoted_solve(&a, &b).unwrap();
        assert!((x.at(0, 0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((x.at(1, 0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pivoted_solve_rejects_singular() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        let b = Matrix::from_vec(2, 1, vec![1.0, 1.0]);
        assert!(matches!(pivoted_solve(&a, &b), Err(Error::SingularSystem)));
    }

    #[test]
    fn solvers_agree_on_random_spd() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(1..8usize);
            let g = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            // GᵀG + 0.1 I is SPD.
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut s = if i == j { 0.1 } else { 0.0 };
                    for k in 0..n {
                        s += g.at(k, i) * g.at(k, j);
                    }
                    a.set(i, j, s);
                }
            }
            let b = Matrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
            let x1 = cholesky_solve(&a, &b).unwrap();
            let x2 = pivoted_solve(&a, &b).unwrap();
            assert!(max_abs_diff(x1.data(), x2.data()) < 1e-9);
        }
    }
}
