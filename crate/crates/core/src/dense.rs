//! Small dense row-major matrix and split complex vector, generic over [`Real`].

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::precision::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Clone> Matrix<R> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<R>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must be rows × cols");
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

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[R] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [R] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<R> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<S: Clone>(&self, f: impl Fn(&R) -> S) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<R: Real> Matrix<R> {
    pub fn identity(n: usize, ctx: R::Ctx) -> Self {
        Matrix::from_fn(n, n, |i, j| R::from_f64(ctx, if i == j { 1.0 } else { 0.0 }))
    }

    pub fn mul_vec(&self, x: &[R]) -> Vec<R> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(self.row(i), x))
            .collect()
    }

    pub fn matmul(&self, other: &Matrix<R>) -> Matrix<R> {
        assert_eq!(self.cols, other.rows);
        let ctx = self.data[0].ctx();
        let mut out = Matrix::from_fn(self.rows, other.cols, |_, _| R::zero(ctx));
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)].add_assign_mul(a, &other[(k, j)]);
                }
            }
        }
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|v| v.to_f64())
    }
}

impl<R> Index<(usize, usize)> for Matrix<R> {
    type Output = R;
    fn index(&self, (i, j): (usize, usize)) -> &R {
        &self.data[i * self.cols + j]
    }
}

impl<R> IndexMut<(usize, usize)> for Matrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut R {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = R::zero(a[0].ctx());
    for (x, y) in a.iter().zip(b) {
        acc.add_assign_mul(x, y);
    }
    acc
}

/// Complex vector stored as separate real and imaginary parts, so that real
/// matrices act on it without complex arithmetic in extended precision.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitComplex<R> {
    pub re: Vec<R>,
    pub im: Vec<R>,
}

impl<R: Real> SplitComplex<R> {
    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn from_complex(ctx: R::Ctx, v: &[Complex64]) -> Self {
        SplitComplex {
            re: v.iter().map(|c| R::from_f64(ctx, c.re)).collect(),
            im: v.iter().map(|c| R::from_f64(ctx, c.im)).collect(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(a, b)| Complex64::new(a.to_f64(), b.to_f64()))
            .collect()
    }

    /// `selfᴴ other`, as (re, im).
    pub fn inner(&self, other: &Self) -> (R, R) {
        let re = dot(&self.re, &other.re) + dot(&self.im, &other.im);
        let im = dot(&self.re, &other.im) - dot(&self.im, &other.re);
        (re, im)
    }

    /// `Σ |v_n|²`.
    pub fn norm_sqr(&self) -> R {
        dot(&self.re, &self.re) + dot(&self.im, &self.im)
    }

    /// `selfᴴ Z self` for a real symmetric `Z`; the imaginary part vanishes.
    pub fn quadratic_form(&self, z: &Matrix<R>) -> R {
        let zr = z.mul_vec(&self.re);
        let zi = z.mul_vec(&self.im);
        dot(&self.re, &zr) + dot(&self.im, &zi)
    }
}
