//! Small dense matrices over a [`Scalar`] field and LU / Cholesky factorizations.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot threshold used in floating-point mode.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            if r.len() != ncols {
                return Err(Error::ShapeMismatch("ragged matrix rows".into()));
            }
            data.extend(r);
        }
        Ok(Matrix { rows: nrows, cols: ncols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
            .collect())
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, l| acc + self[(i, l)].clone() * other[(l, j)].clone())
        }))
    }

    /// Largest absolute entry, as `f64`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum, as `f64`.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)].to_f64().abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::new(self)
    }

    pub fn determinant(&self) -> Result<T> {
        Ok(self.lu()?.determinant())
    }

    pub fn inverse(&self) -> Result<Matrix<T>> {
        self.lu()?.inverse()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with row pivoting, `P A = L U`.
///
/// In floating mode the pivot is the largest entry of the column and a
/// pivot with `|p| <= PIVOT_TOL * max|A|` marks the matrix singular. In
/// exact mode the first nonzero entry is taken and only zero is singular.
#[derive(Debug, Clone)]
pub struct Lu<T = f64> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    odd: bool,
    singular: bool,
    min_pivot_ratio: f64,
}

impl<T: Scalar> Lu<T> {
    fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::ShapeMismatch(format!("{}x{} matrix is not square", a.rows, a.cols)));
        }
        let n = a.rows;
        let scale = a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        let mut singular = false;
        let mut min_pivot_ratio = f64::INFINITY;

        for col in 0..n {
            let pivot_row = if T::EXACT {
                (col..n).find(|&r| !lu[(r, col)].is_zero())
            } else {
                (col..n)
                    .max_by(|&r1, &r2| {
                        let a1 = lu[(r1, col)].to_f64().abs();
                        let a2 = lu[(r2, col)].to_f64().abs();
                        a1.total_cmp(&a2)
                    })
                    .filter(|&r| !lu[(r, col)].is_zero())
            };
            let Some(p) = pivot_row else {
                singular = true;
                min_pivot_ratio = 0.0;
                continue;
            };
            if p != col {
                for j in 0..n {
                    lu.data.swap(p * n + j, col * n + j);
                }
                perm.swap(p, col);
                odd = !odd;
            }
            let pivot = lu[(col, col)].clone();
            let ratio = if scale > 0.0 { pivot.to_f64().abs() / scale } else { 0.0 };
            min_pivot_ratio = min_pivot_ratio.min(ratio);
            if !T::EXACT && ratio <= PIVOT_TOL {
                singular = true;
            }
            for r in col + 1..n {
                if lu[(r, col)].is_zero() {
                    continue;
                }
                let factor = lu[(r, col)].clone() / pivot.clone();
                for j in col + 1..n {
                    let v = lu[(r, j)].clone() - factor.clone() * lu[(col, j)].clone();
                    lu[(r, j)] = v;
                }
                lu[(r, col)] = factor;
            }
        }
        if n == 0 {
            min_pivot_ratio = 1.0;
        }
        Ok(Lu { lu, perm, odd, singular, min_pivot_ratio })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Smallest `|pivot| / max|A|` seen during elimination.
    pub fn min_pivot_ratio(&self) -> f64 {
        self.min_pivot_ratio
    }

    pub fn determinant(&self) -> T {
        let n = self.dim();
        let mut det = T::one();
        for i in 0..n {
            det = det * self.lu[(i, i)].clone();
        }
        if self.odd {
            -det
        } else {
            det
        }
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        if self.singular {
            return Err(Error::Singular);
        }
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let v = x[i].clone() - self.lu[(i, j)].clone() * x[j].clone();
                x[i] = v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = x[i].clone() - self.lu[(i, j)].clone() * x[j].clone();
                x[i] = v;
            }
            x[i] = x[i].clone() / self.lu[(i, i)].clone();
        }
        Ok(x)
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        if self.singular {
            return Err(Error::Singular);
        }
        // A^T = U^T L^T P, so solve U^T y = b, L^T z = y, then x = P^T z.
        let mut y = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let v = y[i].clone() - self.lu[(j, i)].clone() * y[j].clone();
                y[i] = v;
            }
            y[i] = y[i].clone() / self.lu[(i, i)].clone();
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = y[i].clone() - self.lu[(j, i)].clone() * y[j].clone();
                y[i] = v;
            }
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i].clone();
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix<T>> {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = self.solve(&e)?;
            e[j] = T::zero();
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        Ok(inv)
    }
}

/// Cholesky factorization `A = L L^T` of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix<f64>,
}

impl Cholesky {
    pub fn new(a: &Matrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::ShapeMismatch("Cholesky needs a square matrix".into()));
        }
        let n = a.rows();
        let scale = a.max_abs();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = a[(j, j)];
            for p in 0..j {
                diag -= l[(j, p)] * l[(j, p)];
            }
            if diag <= PIVOT_TOL * scale {
                return Err(Error::Singular);
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.l.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let mut y = b.to_vec();
        for i in 0..n {
            for p in 0..i {
                y[i] -= self.l[(i, p)] * y[p];
            }
            y[i] /= self.l[(i, i)];
        }
        for i in (0..n).rev() {
            for p in i + 1..n {
                y[i] -= self.l[(p, i)] * y[p];
            }
            y[i] /= self.l[(i, i)];
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn determinant_and_solve() {
        let a = Matrix::from_rows(vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]).unwrap();
        let lu = a.lu().unwrap();
        assert!((lu.determinant() - 18.0).abs() < 1e-12);
        let x = lu.solve(&[1.0, 2.0, 3.0]).unwrap();
        let ax = a.mul_vec(&x).unwrap();
        for (u, v) in ax.iter().zip([1.0, 2.0, 3.0]) {
            assert!((u - v).abs() < 1e-12);
        }
        let xt = lu.solve_transpose(&[1.0, 0.0, 2.0]).unwrap();
        let atx = a.transpose().mul_vec(&xt).unwrap();
        for (u, v) in atx.iter().zip([1.0, 0.0, 2.0]) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_determinant_with_row_swap() {
        let a: Matrix<Rational> = Matrix::from_rows(vec![
            vec![Rational::from_i64(0), Rational::from_i64(1)],
            vec![Rational::from_ratio(1, 3), Rational::from_i64(5)],
        ])
        .unwrap();
        assert_eq!(a.determinant().unwrap(), Rational::from_ratio(-1, 3));
        let inv = a.inverse().unwrap();
        assert_eq!(a.matmul(&inv).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn singular_detection() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let lu = a.lu().unwrap();
        assert!(lu.is_singular());
        assert_eq!(lu.solve(&[1.0, 1.0]), Err(Error::Singular));
        let e: Matrix<Rational> = a.map(|v| v.to_rational());
        let lu = e.lu().unwrap();
        assert!(lu.is_singular());
        assert_eq!(lu.determinant(), Rational::from_i64(0));
    }

    #[test]
    fn empty_matrix() {
        let a: Matrix<f64> = Matrix::zeros(0, 0);
        let lu = a.lu().unwrap();
        assert!(!lu.is_singular());
        assert_eq!(lu.determinant(), 1.0);
        assert!(lu.solve(&[]).unwrap().is_empty());
    }

    #[test]
    fn cholesky_spd() {
        let a = Matrix::from_rows(vec![vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let c = Cholesky::new(&a).unwrap();
        let x = c.solve(&[2.0, 1.0]).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-14);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-14);
        let b = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(Cholesky::new(&b).is_err());
    }
}
