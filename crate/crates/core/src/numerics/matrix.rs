//! Dense row-major matrices plus the small amount of factorization machinery
//! the rest of the crate needs: LU with partial pivoting for square solves,
//! explicit inversion for the simplex refactorization step, and Gauss-Jordan
//! reduction with full pivoting for rank, consistency, and null-space
//! questions on rectangular systems.

use std::fmt;

/// Dense row-major matrix. A `rows = 0` matrix still carries a column count
/// so that shape checks stay meaningful for empty constraint blocks.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from explicit rows. Panics on ragged input; an empty slice
    /// yields a 0x0 matrix, so use `zeros(0, n)` when the column count
    /// matters for an empty block.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        if rows.is_empty() {
            return Matrix::zeros(0, 0);
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows in Matrix::from_rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] += v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Transpose-vector product, `A^T y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            if yi == 0.0 {
                continue;
            }
            let r = self.row(i);
            for (o, a) in out.iter_mut().zip(r) {
                *o += yi * a;
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// LU factorization with partial pivoting of a square matrix.
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

/// Returns `None` when a pivot falls below `tol` in magnitude, i.e. the
/// matrix is singular at that tolerance.
pub fn lu_factor(a: &Matrix, tol: f64) -> Option<Lu> {
    assert_eq!(a.rows(), a.cols(), "lu_factor needs a square matrix");
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut best = k;
        let mut best_abs = lu.get(k, k).abs();
        for i in k + 1..n {
            let v = lu.get(i, k).abs();
            if v > best_abs {
                best = i;
                best_abs = v;
            }
        }
        if best_abs <= tol {
            return None;
        }
        if best != k {
            perm.swap(k, best);
            for j in 0..n {
                let tmp = lu.get(k, j);
                lu.set(k, j, lu.get(best, j));
                lu.set(best, j, tmp);
            }
        }
        let piv = lu.get(k, k);
        for i in k + 1..n {
            let f = lu.get(i, k) / piv;
            lu.set(i, k, f);
            if f != 0.0 {
                for j in k + 1..n {
                    lu.add_to(i, j, -f * lu.get(k, j));
                }
            }
        }
    }
    Some(Lu { lu, perm })
}

impl Lu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for k in 0..i {
                x[i] -= self.lu.get(i, k) * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.lu.get(i, k) * x[k];
            }
            x[i] /= self.lu.get(i, i);
        }
        x
    }

    /// Solves for every column of `b` at once.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n);
        let mut out = Matrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let col = self.solve(&b.column(j));
            for i in 0..n {
                out.set(i, j, col[i]);
            }
        }
        out
    }
}

/// Explicit inverse via LU; `None` if singular at `tol`.
pub fn invert(a: &Matrix, tol: f64) -> Option<Matrix> {
    let lu = lu_factor(a, tol)?;
    Some(lu.solve_matrix(&Matrix::identity(a.rows())))
}

/// Gauss-Jordan reduction of `a x = b` with full pivoting (rows swapped,
/// pivot columns chosen anywhere), used for eliminating equality blocks and
/// extracting null-space bases. The pivot threshold is relative to the
/// largest entry of `a`.
pub struct LinearSystem {
    red_a: Matrix,
    red_b: Matrix,
    pivot_cols: Vec<usize>,
    rank: usize,
    zero_tol: f64,
}

pub fn reduce_system(a: &Matrix, b: &Matrix, rel_tol: f64) -> LinearSystem {
    assert_eq!(a.rows(), b.rows());
    let m = a.rows();
    let n = a.cols();
    let mut ra = a.clone();
    let mut rb = b.clone();
    let zero_tol = rel_tol * (1.0 + a.max_abs());
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut is_pivot = vec![false; n];
    let mut rank = 0;
    while rank < m {
        let mut best = (0usize, 0usize);
        let mut best_abs = 0.0;
        for i in rank..m {
            for j in 0..n {
                if is_pivot[j] {
                    continue;
                }
                let v = ra.get(i, j).abs();
                if v > best_abs {
                    best_abs = v;
                    best = (i, j);
                }
            }
        }
        if best_abs <= zero_tol {
            break;
        }
        let (pi, pj) = best;
        if pi != rank {
            for j in 0..n {
                let tmp = ra.get(rank, j);
                ra.set(rank, j, ra.get(pi, j));
                ra.set(pi, j, tmp);
            }
            for j in 0..rb.cols() {
                let tmp = rb.get(rank, j);
                rb.set(rank, j, rb.get(pi, j));
                rb.set(pi, j, tmp);
            }
        }
        let piv = ra.get(rank, pj);
        for j in 0..n {
            let v = ra.get(rank, j) / piv;
            ra.set(rank, j, v);
        }
        for j in 0..rb.cols() {
            let v = rb.get(rank, j) / piv;
            rb.set(rank, j, v);
        }
        for i in 0..m {
            if i == rank {
                continue;
            }
            let f = ra.get(i, pj);
            if f != 0.0 {
                for j in 0..n {
                    let v = ra.get(rank, j);
                    if v != 0.0 {
                        ra.add_to(i, j, -f * v);
                    }
                }
                for j in 0..rb.cols() {
                    let v = rb.get(rank, j);
                    if v != 0.0 {
                        rb.add_to(i, j, -f * v);
                    }
                }
            }
        }
        is_pivot[pj] = true;
        pivot_cols.push(pj);
        rank += 1;
    }
    LinearSystem { red_a: ra, red_b: rb, pivot_cols, rank, zero_tol }
}

impl LinearSystem {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Consistency of every right-hand-side column against the zero rows.
    pub fn is_consistent(&self) -> bool {
        let scale = 1.0 + self.red_b.max_abs();
        for i in self.rank..self.red_a.rows() {
            for j in 0..self.red_b.cols() {
                if self.red_b.get(i, j).abs() > self.zero_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// One solution per right-hand-side column with free variables at zero;
    /// `None` when inconsistent.
    pub fn particular_solution(&self) -> Option<Matrix> {
        if !self.is_consistent() {
            return None;
        }
        let n = self.red_a.cols();
        let mut out = Matrix::zeros(n, self.red_b.cols());
        for (i, &pc) in self.pivot_cols.iter().enumerate() {
            for j in 0..self.red_b.cols() {
                out.set(pc, j, self.red_b.get(i, j));
            }
        }
        Some(out)
    }

    /// Columns form a basis of the null space of `a`.
    pub fn null_basis(&self) -> Matrix {
        let n = self.red_a.cols();
        let mut is_pivot = vec![false; n];
        for &pc in &self.pivot_cols {
            is_pivot[pc] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
        let mut basis = Matrix::zeros(n, free.len());
        for (b, &fc) in free.iter().enumerate() {
            basis.set(fc, b, 1.0);
            for (i, &pc) in self.pivot_cols.iter().enumerate() {
                basis.set(pc, b, -self.red_a.get(i, fc));
            }
        }
        basis
    }
}

/// Orthonormal basis (as matrix columns) of the row space of `a`, via
/// modified Gram-Schmidt with drop tolerance relative to the input scale.
pub fn row_space_basis(a: &Matrix, rel_tol: f64) -> Matrix {
    let n = a.cols();
    let drop_tol = rel_tol * (1.0 + a.max_abs());
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..a.rows() {
        let mut v = a.row(i).to_vec();
        for b in &basis {
            let c = dot(&v, b);
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= c * bk;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > drop_tol {
            for vk in v.iter_mut() {
                *vk /= norm;
            }
            basis.push(v);
        }
    }
    let mut out = Matrix::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        for i in 0..n {
            out.set(i, j, b[i]);
        }
    }
    out
}
