//! Precision-generic symmetric eigensolver and LU solver.

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::precision::Real;

/// Sweep cap for the cyclic Jacobi method.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Eigenpairs of a real symmetric matrix, eigenvalues in descending order.
/// Column `n` of `vectors` belongs to `values[n]`.
#[derive(Debug, Clone)]
pub struct Eigen<R> {
    pub values: Vec<R>,
    pub vectors: Matrix<R>,
}

fn off_diagonal_sq<R: Real>(a: &Matrix<R>) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let v = a[(i, j)].to_f64();
            s += 2.0 * v * v;
        }
    }
    s
}

fn frobenius_sq<R: Real>(a: &Matrix<R>) -> f64 {
    a.as_slice().iter().map(|v| v.to_f64().powi(2)).sum()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Rotations are applied row by row over the upper triangle. Iteration stops
/// once the off-diagonal Frobenius norm falls to unit-roundoff scale relative
/// to the full norm; failure to get there within [`MAX_JACOBI_SWEEPS`] is an
/// error carrying the residual.
pub fn jacobi_eigen<R: Real>(a: &Matrix<R>) -> Result<Eigen<R>> {
    assert!(a.is_square(), "eigendecomposition needs a square matrix");
    let n = a.rows();
    let ctx = a[(0, 0)].ctx();
    let eps = R::epsilon(ctx);
    let mut m = a.clone();
    let mut v = Matrix::<R>::identity(n, ctx);
    let norm_sq = frobenius_sq(&m);
    let target = (eps * norm_sq.sqrt()).powi(2).max(f64::MIN_POSITIVE);
    let one = R::one(ctx);
    let half = R::from_f64(ctx, 0.5);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_sq(&m);
        if off <= target {
            break;
        }
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_diagonal: off.sqrt(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)].clone();
                if apq.is_zero() {
                    continue;
                }
                let app = m[(p, p)].clone();
                let aqq = m[(q, q)].clone();
                // negligible against both diagonal entries: drop it
                let scale = app.abs().to_f64().max(aqq.abs().to_f64());
                if apq.abs().to_f64() <= 0.25 * eps * eps.sqrt() * scale {
                    m[(p, q)] = R::zero(ctx);
                    m[(q, p)] = R::zero(ctx);
                    continue;
                }
                let theta = (aqq.clone() - &app) * &half / &apq;
                let root = (one.clone() + theta.clone() * &theta).sqrt();
                let t = if theta >= R::zero(ctx) {
                    one.clone() / (theta.clone() + &root)
                } else {
                    -(one.clone() / (root - &theta))
                };
                let c = one.clone() / (one.clone() + t.clone() * &t).sqrt();
                let s = t.clone() * &c;

                m[(p, p)] = app - t.clone() * &apq;
                m[(q, q)] = aqq + t * &apq;
                m[(p, q)] = R::zero(ctx);
                m[(q, p)] = R::zero(ctx);
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[(k, p)].clone();
                    let akq = m[(k, q)].clone();
                    let new_kp = c.clone() * &akp - s.clone() * &akq;
                    let new_kq = s.clone() * &akp + c.clone() * &akq;
                    m[(k, p)] = new_kp.clone();
                    m[(p, k)] = new_kp;
                    m[(k, q)] = new_kq.clone();
                    m[(q, k)] = new_kq;
                }
                for k in 0..n {
                    let vkp = v[(k, p)].clone();
                    let vkq = v[(k, q)].clone();
                    v[(k, p)] = c.clone() * &vkp - s.clone() * &vkq;
                    v[(k, q)] = s.clone() * &vkp + c.clone() * &vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .partial_cmp(&m[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[(i, i)].clone()).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])].clone());
    Ok(Eigen { values, vectors })
}

/// LU factorisation with partial pivoting, `P A = L U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu<R> {
    lu: Matrix<R>,
    perm: Vec<usize>,
}

impl<R: Real> Lu<R> {
    pub fn factor(a: &Matrix<R>) -> Result<Self> {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best.is_zero() {
                return Err(Error::IllConditioned {
                    residual: f64::INFINITY,
                    tolerance: 0.0,
                    condition: f64::INFINITY,
                });
            }
            if piv != k {
                perm.swap(k, piv);
                for j in 0..n {
                    let tmp = lu[(k, j)].clone();
                    lu[(k, j)] = lu[(piv, j)].clone();
                    lu[(piv, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)].clone();
            let (top, bottom) = split_rows(&mut lu, k);
            let pivot_row = &top[k + 1..];
            for row in bottom.chunks_mut(n) {
                let l = row[k].clone() / &pivot;
                for (x, u) in row[k + 1..].iter_mut().zip(pivot_row) {
                    x.sub_assign_mul(&l, u);
                }
                row[k] = l;
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[R]) -> Vec<R> {
        let n = self.perm.len();
        assert_eq!(b.len(), n);
        let mut x: Vec<R> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            for j in 0..i {
                let (head, tail) = x.split_at_mut(i);
                tail[0].sub_assign_mul(&row[j], &head[j]);
            }
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            for j in i + 1..n {
                let (head, tail) = x.split_at_mut(j);
                head[i].sub_assign_mul(&row[j], &tail[0]);
            }
            x[i] = x[i].clone() / &row[i];
        }
        x
    }

    /// Crude condition estimate from the pivot magnitudes.
    pub fn pivot_ratio(&self) -> f64 {
        let n = self.perm.len();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..n {
            let v = self.lu[(i, i)].to_f64().abs();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi / lo
    }
}

/// Row `k` (whole) and the rows strictly below it, as disjoint slices.
fn split_rows<R: Clone>(m: &mut Matrix<R>, k: usize) -> (&[R], &mut [R]) {
    let n = m.cols();
    let (head, tail) = m.as_mut_slice().split_at_mut((k + 1) * n);
    (&head[k * n..], tail)
}

/// `‖r‖₂ / ‖b‖₂` with `r = b − A x`.
pub fn relative_residual<R: Real>(a: &Matrix<R>, x: &[R], b: &[R]) -> (Vec<R>, f64) {
    let ax = a.mul_vec(x);
    let r: Vec<R> = b.iter().zip(ax).map(|(bi, axi)| bi.clone() - axi).collect();
    let rn: f64 = r.iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt();
    let bn: f64 = b.iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt();
    (r, if bn == 0.0 { rn } else { rn / bn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::ExtFloat;

    fn sym(n: usize, f: impl Fn(usize, usize) -> f64) -> Matrix<f64> {
        Matrix::from_fn(n, n, |i, j| if i <= j { f(i, j) } else { f(j, i) })
    }

    #[test]
    fn identity_eigen() {
        let e = jacobi_eigen(&Matrix::<f64>::identity(4, ())).unwrap();
        assert!(e.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rank_one_pair() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0]);
        let e = jacobi_eigen(&a).unwrap();
        assert!((e.values[0] - 2.0).abs() < 1e-15);
        assert!(e.values[1].abs() < 1e-15);
    }

    #[test]
    fn reconstructs_and_is_orthonormal() {
        let a = sym(7, |i, j| 1.0 / (1.0 + i as f64 + j as f64) + if i == j { 0.3 } else { 0.0 });
        let e = jacobi_eigen(&a).unwrap();
        for w in e.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        let n = 7;
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n).map(|k| e.vectors[(i, k)] * e.values[k] * e.vectors[(j, k)]).sum();
                assert!((rec - a[(i, j)]).abs() < 1e-14);
                let g: f64 = (0..n).map(|k| e.vectors[(k, i)] * e.vectors[(k, j)]).sum();
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn extended_hilbert_smallest_eigenvalue() {
        // Hilbert matrix of order 8: smallest eigenvalue 1.1115e-10, κ ≈ 1.5258e10
        let n = 8;
        let h = Matrix::from_fn(n, n, |i, j| {
            ExtFloat::new(192, 1.0) / ExtFloat::new(192, (i + j + 1) as f64)
        });
        let e = jacobi_eigen(&h).unwrap();
        let smallest = e.values[n - 1].to_f64();
        assert!((smallest - 1.111_538_966_372_442_4e-10).abs() < 1e-22, "{smallest:e}");
    }

    #[test]
    fn lu_solves() {
        let a = Matrix::from_row_major(3, 3, vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]);
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve(&b);
        for (u, v) in x.iter().zip(x_true) {
            assert!((u - v).abs() < 1e-14);
        }
        let (_, res) = relative_residual(&a, &x, &b);
        assert!(res < 1e-15);
    }

    #[test]
    fn lu_singular() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(Lu::factor(&a), Err(Error::IllConditioned { .. })));
    }
}
