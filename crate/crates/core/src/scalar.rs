//! Scalar abstraction: every numerical routine is generic over [`Real`], which
//! is implemented for `f32` and `f64`. Dense factorizations are delegated to
//! `faer` through the two backend hooks on the trait.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use faer::{Mat, Side};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Output of a Hermitian eigendecomposition: ascending eigenvalues and,
/// optionally, the matching orthonormal eigenvectors stored as columns.
pub type EigenPairs<T> = (Vec<T>, Option<Matrix<T>>);

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Relative tolerance used for Hermiticity checks.
    fn hermitian_tol() -> Self;

    /// Default kernel tolerance, relative to `1 + spectral radius`.
    fn default_kernel_tol() -> Self;

    /// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
    fn hermitian_eigen(m: &Matrix<Self>, vectors: bool) -> Result<EigenPairs<Self>>;

    /// Thin SVD of a real `rows × cols` matrix given row-major; returns
    /// `(u, s, v)` with `u` row-major `rows × k`, `v` row-major `cols × k`.
    fn real_svd(rows: usize, cols: usize, data: &[Self]) -> Result<(Vec<Self>, Vec<Self>, Vec<Self>)>;

    /// Converts an `f64` literal. Panics only for non-representable input,
    /// which never happens for the constants used in this crate.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, $herm:expr, $ker:expr) => {
        impl Real for $t {
            fn hermitian_tol() -> Self {
                $herm
            }

            fn default_kernel_tol() -> Self {
                $ker
            }

            fn hermitian_eigen(m: &Matrix<Self>, vectors: bool) -> Result<EigenPairs<Self>> {
                let n = m.rows();
                let fm = Mat::<Complex<$t>>::from_fn(n, n, |i, j| m[(i, j)]);
                if vectors {
                    let evd = fm
                        .self_adjoint_eigen(Side::Lower)
                        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
                    let vals: Vec<$t> = evd.S().column_vector().iter().map(|z| z.re).collect();
                    let u = evd.U();
                    let vecs = Matrix::from_fn(n, n, |i, j| u[(i, j)]);
                    Ok((vals, Some(vecs)))
                } else {
                    let vals = fm
                        .self_adjoint_eigenvalues(Side::Lower)
                        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
                    Ok((vals, None))
                }
            }

            fn real_svd(
                rows: usize,
                cols: usize,
                data: &[Self],
            ) -> Result<(Vec<Self>, Vec<Self>, Vec<Self>)> {
                let fm = Mat::<$t>::from_fn(rows, cols, |i, j| data[i * cols + j]);
                let svd = fm
                    .thin_svd()
                    .map_err(|e| Error::Eigensolver(format!("svd: {e:?}")))?;
                let k = rows.min(cols);
                let s: Vec<$t> = svd.S().column_vector().iter().copied().collect();
                let (u, v) = (svd.U(), svd.V());
                let mut uu = Vec::with_capacity(rows * k);
                for i in 0..rows {
                    for j in 0..k {
                        uu.push(u[(i, j)]);
                    }
                }
                let mut vv = Vec::with_capacity(cols * k);
                for i in 0..cols {
                    for j in 0..k {
                        vv.push(v[(i, j)]);
                    }
                }
                Ok((uu, s, vv))
            }
        }
    };
}

impl_real!(f64, 1e-12, 1e-8);
impl_real!(f32, 1e-5, 1e-4);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_sigma2() {
        let mut m = Matrix::<f64>::zeros(2, 2);
        m[(0, 1)] = Complex::new(0.0, -1.0);
        m[(1, 0)] = Complex::new(0.0, 1.0);
        let (vals, vecs) = f64::hermitian_eigen(&m, true).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let v = vecs.unwrap();
        let av = m.matmul(&v);
        for i in 0..2 {
            for j in 0..2 {
                assert!((av[(i, j)] - v[(i, j)] * vals[j]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn svd_reconstructs() {
        let a = [3.0f64, 1.0, 1.0, 3.0, 0.0, 2.0];
        let (u, s, v) = f64::real_svd(3, 2, &a).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let r: f64 = (0..2).map(|k| u[i * 2 + k] * s[k] * v[j * 2 + k]).sum();
                assert!((r - a[i * 2 + j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn f32_eigen_works() {
        let m = Matrix::<f32>::from_real_diagonal(&[3.0, -1.0, 0.0]);
        let (vals, _) = f32::hermitian_eigen(&m, false).unwrap();
        assert_eq!(vals, vec![-1.0, 0.0, 3.0]);
    }
}
