//! Dense matrices over a [`BaseField`] and Gaussian elimination.

use crate::error::{Error, Result};
use crate::field::BaseField;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    /// Builds a matrix from its columns.
    pub fn from_cols(cols: &[Vec<u32>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, v: &[u32], f: &BaseField) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| f.dot(self.row(i), v)).collect())
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[u32], f: &BaseField) -> Result<Vec<u32>> {
        if v.len() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} times {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![0; self.cols];
        for (i, &c) in v.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = f.add(*o, f.mul(c, a));
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Matrix, f: &BaseField) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = other.vec_mul(self.row(i), f)?;
            out.data[i * other.cols..(i + 1) * other.cols].copy_from_slice(&row);
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// `row[dst] += c * row[src]`
    fn axpy_row(&mut self, dst: usize, src: usize, c: u32, f: &BaseField) {
        for j in 0..self.cols {
            let v = f.mul(c, self.data[src * self.cols + j]);
            let d = &mut self.data[dst * self.cols + j];
            *d = f.add(*d, v);
        }
    }

    fn scale_row(&mut self, r: usize, c: u32, f: &BaseField) {
        for j in 0..self.cols {
            let d = &mut self.data[r * self.cols + j];
            *d = f.mul(*d, c);
        }
    }

    /// Reduced row echelon form; returns the pivot columns. Every row
    /// operation is mirrored on `track` when given.
    fn rref_with(&mut self, f: &BaseField, mut track: Option<&mut Matrix>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self[(i, c)] != 0) else {
                continue;
            };
            self.swap_rows(r, p);
            if let Some(t) = track.as_deref_mut() {
                t.swap_rows(r, p);
            }
            let inv = f.inv(self[(r, c)]).expect("nonzero pivot");
            self.scale_row(r, inv, f);
            if let Some(t) = track.as_deref_mut() {
                t.scale_row(r, inv, f);
            }
            for i in 0..self.rows {
                let v = self[(i, c)];
                if i != r && v != 0 {
                    let neg = f.neg(v);
                    self.axpy_row(i, r, neg, f);
                    if let Some(t) = track.as_deref_mut() {
                        t.axpy_row(i, r, neg, f);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &BaseField) -> usize {
        self.clone().rref_with(f, None).len()
    }

    pub fn inverse(&self, f: &BaseField) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of a non-square matrix".into()));
        }
        let mut a = self.clone();
        let mut t = Matrix::identity(self.rows);
        let pivots = a.rref_with(f, Some(&mut t));
        if pivots.len() != self.rows {
            return Err(Error::Internal("singular matrix".into()));
        }
        Ok(t)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = u32;

    fn index(&self, (i, j): (usize, usize)) -> &u32 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut u32 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solver for `A x = v` with `A` of full column rank, possibly tall.
///
/// Holds an invertible `E` with `E A = [I; 0]`: the first `cols` rows of `E`
/// form a left inverse, the remaining rows span the consistency checks.
#[derive(Debug, Clone)]
pub struct LeftInverse {
    transform: Matrix,
    unknowns: usize,
}

impl LeftInverse {
    /// Fails if `a` does not have full column rank.
    pub fn new(a: &Matrix, f: &BaseField) -> Result<Self> {
        let mut work = a.clone();
        let mut t = Matrix::identity(a.rows());
        let pivots = work.rref_with(f, Some(&mut t));
        if pivots.len() != a.cols() {
            return Err(Error::Internal(format!(
                "matrix has rank {} < {} columns",
                pivots.len(),
                a.cols()
            )));
        }
        Ok(LeftInverse {
            transform: t,
            unknowns: a.cols(),
        })
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    pub fn equations(&self) -> usize {
        self.transform.rows()
    }

    /// The unique solution, or `InterpolationInconsistent` if `v` is not in
    /// the column space.
    pub fn solve(&self, v: &[u32], f: &BaseField) -> Result<Vec<u32>> {
        let y = self.transform.mul_vec(v, f)?;
        if y[self.unknowns..].iter().any(|&c| c != 0) {
            return Err(Error::InterpolationInconsistent);
        }
        Ok(y[..self.unknowns].to_vec())
    }

    /// Applies the left inverse without the consistency check.
    pub fn apply(&self, v: &[u32], f: &BaseField) -> Result<Vec<u32>> {
        let y = self.transform.mul_vec(v, f)?;
        Ok(y[..self.unknowns].to_vec())
    }

    /// Column `j` of the left inverse.
    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.unknowns).map(|i| self.transform[(i, j)]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let f = BaseField::with_order(5).unwrap();
        let a = Matrix::from_rows(&[vec![1, 2, 0], vec![0, 1, 4], vec![1, 0, 1]]);
        let inv = a.inverse(&f).unwrap();
        assert_eq!(a.mul(&inv, &f).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn rank_of_dependent_rows() {
        let f = BaseField::with_order(3).unwrap();
        let a = Matrix::from_rows(&[vec![1, 2], vec![2, 1]]);
        assert_eq!(a.rank(&f), 1);
    }

    #[test]
    fn overdetermined_solve() {
        let f = BaseField::with_order(7).unwrap();
        // evaluation of a + b x at 0, 1, 2
        let a = Matrix::from_rows(&[vec![1, 0], vec![1, 1], vec![1, 2]]);
        let s = LeftInverse::new(&a, &f).unwrap();
        assert_eq!(s.solve(&[3, 5, 0], &f).unwrap(), vec![3, 2]);
        assert_eq!(s.solve(&[3, 5, 1], &f), Err(Error::InterpolationInconsistent));
    }
}
