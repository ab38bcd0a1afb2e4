//! Dense row-major matrices over a [`Scalar`] and the handful of
//! elimination routines the workbench needs (rank, solve, kernels).

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<S>]) -> Option<Self> {
        if cols.iter().any(|c| c.len() != rows) {
            return None;
        }
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        Some(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    /// Matrix product; `None` on shape mismatch.
    pub fn mul(&self, other: &Matrix<S>) -> Option<Matrix<S>> {
        if self.cols != other.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    out[(i, j)].add_mul_assign(a, b);
                }
            }
        }
        Some(out)
    }

    pub fn mul_vec(&self, v: &[S]) -> Option<Vec<S>> {
        if v.len() != self.cols {
            return None;
        }
        Some(
            (0..self.rows)
                .map(|r| {
                    let mut acc = S::zero();
                    for (a, b) in self.row(r).iter().zip(v) {
                        acc.add_mul_assign(a, b);
                    }
                    acc
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &Matrix<S>) -> Option<Matrix<S>> {
        if self.shape() != other.shape() {
            return None;
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Some(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Matrix<S>) -> Option<Matrix<S>> {
        if self.shape() != other.shape() {
            return None;
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Some(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, k: &S) -> Matrix<S> {
        let data = self.data.iter().map(|a| a.clone() * k.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Matrix<S> {
        let data = self.data.iter().map(|a| -a.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |m, v| S::max_of(m, v.abs()))
    }

    /// Largest entrywise `|self - other|`; `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix<S>) -> Option<S> {
        self.sub(other).map(|d| d.max_abs())
    }

    /// Entrywise equality, exact or within tolerance.
    pub fn approx_eq(&self, other: &Matrix<S>) -> bool {
        self.shape() == other.shape()
            && self.data.iter().zip(&other.data).all(|(a, b)| a.approx_eq(b))
    }

    pub fn is_zero_tol(&self) -> bool {
        self.data.iter().all(Scalar::is_zero_tol)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Matrix<S>) -> Option<Matrix<S>> {
        if self.rows != other.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..other.cols {
                out[(r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        Some(out)
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix<S> {
        let mut out = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out[(r, j)] = self[(r, c)].clone();
            }
        }
        out
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Matrix<S>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // Partial pivoting: in float mode take the largest entry, in
            // exact mode the first nonzero (any nonzero is as good).
            let mut best: Option<usize> = None;
            for r in row..m.rows {
                if m[(r, col)].is_zero_tol() {
                    continue;
                }
                best = match best {
                    None => Some(r),
                    Some(b) if m[(r, col)].abs() > m[(b, col)].abs() && S::MODE == crate::Mode::Float => {
                        Some(r)
                    }
                    keep => keep,
                };
            }
            let Some(p) = best else { continue };
            m.swap_rows(row, p);
            let inv = S::one() / m[(row, col)].clone();
            for c in 0..m.cols {
                let v = m[(row, c)].clone() * inv.clone();
                m[(row, c)] = v;
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for c in 0..m.cols {
                    let pv = m[(row, c)].clone();
                    m[(r, c)].sub_mul_assign(&factor, &pv);
                }
                m[(r, col)] = S::zero();
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Indices of a maximal set of linearly independent columns, chosen
    /// greedily from the left.
    pub fn independent_columns(&self) -> Vec<usize> {
        self.rref().1
    }

    /// Basis of the null space `{v : self · v = 0}`, as columns.
    pub fn kernel(&self) -> Matrix<S> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            basis[(f, k)] = S::one();
            for (i, &p) in pivots.iter().enumerate() {
                basis[(p, k)] = -r[(i, f)].clone();
            }
        }
        basis
    }

    /// Solves `self · x = b` when the system is consistent; returns one
    /// solution (free variables set to zero).
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        if b.len() != self.rows {
            return None;
        }
        let bcol = Matrix::from_columns(self.rows, &[b.to_vec()])?;
        let aug = self.hcat(&bcol)?;
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![S::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    /// Solves `self · X = rhs` column by column.
    pub fn solve_matrix(&self, rhs: &Matrix<S>) -> Option<Matrix<S>> {
        let cols: Option<Vec<Vec<S>>> = (0..rhs.cols).map(|c| self.solve(&rhs.column(c))).collect();
        Matrix::from_columns(self.cols, &cols?)
    }

    pub fn inverse(&self) -> Option<Matrix<S>> {
        if self.rows != self.cols {
            return None;
        }
        let aug = self.hcat(&Matrix::identity(self.rows))?;
        let (r, pivots) = aug.rref();
        if pivots.len() < self.rows || pivots[self.rows - 1] != self.rows - 1 {
            return None;
        }
        let idx: Vec<usize> = (self.cols..2 * self.cols).collect();
        Some(r.select_columns(&idx))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        &mut self.data[r * self.cols + c]
    }
}

/// Dot product of equal-length slices.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc.add_mul_assign(x, y);
    }
    acc
}
