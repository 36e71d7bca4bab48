//! The θ-family of boundary conditions interpolating APS (`θ = 0`) and
//! transmission (`θ = π/4`) at a cut.
//!
//! Boundary data of the folded operator are doubled as `s = (u(c⁺), u(c⁻))`
//! with `ℬ̃ = diag(ℬ, −ℬ)` and the swap `τ(x, y) = (y, x)`. The condition is
//! `Π̃(θ)s = 0` with `Π̃(θ) = cos²θ·Π₊ + sin²θ·Π₋ − ½sin2θ·τ(Π₊ + Π₋)`, a
//! rank-two projection since `τΠ₊τ = Π₋`.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{cut_copies, fold_at_cut, restrict_to_boundary, BoundaryOperator, Constraint, DiracOperator};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// A cut operator with the θ boundary condition imposed at the cut node.
#[derive(Clone, Debug)]
pub struct ThetaBVP<T> {
    pub theta: T,
    /// Compression of the folded operator onto `ker Π̃(θ)`.
    pub operator: DiracOperator<T>,
    pub boundary_op: BoundaryOperator<T>,
    /// Swap of the two copies on the doubled boundary space.
    pub tau: Matrix<T>,
    pub pi_plus: Matrix<T>,
    pub pi_minus: Matrix<T>,
    pub pi_theta: Matrix<T>,
}

fn projector<T: Real>(vecs: &Matrix<T>, cols: &[usize]) -> Matrix<T> {
    let n = vecs.rows();
    Matrix::from_fn(n, n, |i, j| {
        cols.iter()
            .fold(Complex::zero(), |acc, &k| acc + vecs[(i, k)] * vecs[(j, k)].conj())
    })
}

/// `diag(ℬ, −ℬ)` on the doubled space `(u(c⁺), u(c⁻))`.
pub fn doubled_boundary<T: Real>(b: &BoundaryOperator<T>) -> Matrix<T> {
    let m = b.matrix();
    Matrix::from_fn(4, 4, |i, j| match (i / 2, j / 2) {
        (0, 0) => m[(i, j)],
        (1, 1) => -m[(i - 2, j - 2)],
        _ => Complex::zero(),
    })
}

fn swap<T: Real>() -> Matrix<T> {
    Matrix::from_fn(4, 4, |i, j| {
        if (i + 2) % 4 == j {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::zero()
        }
    })
}

impl<T: Real> ThetaBVP<T> {
    /// `U(θ) = cosθ(Π₊ + Π₋) + sinθ(Π₊ − Π₋)τ`.
    pub fn unitary(&self) -> Matrix<T> {
        let (s, c) = self.theta.sin_cos();
        let sum = self.pi_plus.add(&self.pi_minus);
        let diff = self.pi_plus.sub(&self.pi_minus).matmul(&self.tau);
        sum.scale(c).add(&diff.scale(s))
    }

    /// `max |U*U − I|`.
    pub fn unitarity_defect(&self) -> T {
        let u = self.unitary();
        u.adjoint().matmul(&u).sub(&Matrix::identity(4)).max_abs()
    }

    /// `max |Π̃² − Π̃|` together with `|rank − 2|` as a real.
    pub fn projection_defect(&self) -> T {
        let p = &self.pi_theta;
        p.matmul(p).sub(p).max_abs().max((p.trace_re() - T::lit(2.0)).abs())
    }

    pub fn self_adjointness_defect(&self) -> T {
        self.operator.matrix().hermiticity_defect()
    }
}

/// Builds the θ-BVP of `a` cut at `cut`, `θ ∈ (−π/2, π/2)`.
pub fn build_theta_bvp<T: Real>(a: &DiracOperator<T>, cut: usize, theta: T) -> Result<ThetaBVP<T>> {
    if !(theta.abs() < T::FRAC_PI_2()) {
        return Err(Error::InvalidTheta(theta.to_f64_lossy()));
    }
    let boundary_op = restrict_to_boundary(a, cut)?;
    let folded = fold_at_cut(a, cut)?;
    let bt = doubled_boundary(&boundary_op);
    let (vals, vecs) = T::hermitian_eigen(&bt, true)?;
    let vecs = vecs.expect("requested eigenvectors");
    let pos: Vec<usize> = (0..4).filter(|&k| vals[k] > T::zero()).collect();
    let neg: Vec<usize> = (0..4).filter(|&k| vals[k] < T::zero()).collect();
    let pi_plus = projector(&vecs, &pos);
    let pi_minus = projector(&vecs, &neg);
    let tau = swap();
    let (s, c) = theta.sin_cos();
    let pi_theta = pi_plus
        .scale(c * c)
        .add(&pi_minus.scale(s * s))
        .sub(&tau.matmul(&pi_plus.add(&pi_minus)).scale(s * c));
    let (pv, pvecs) = T::hermitian_eigen(&pi_theta, true)?;
    let pvecs = pvecs.expect("requested eigenvectors");
    let keep: Vec<usize> = (0..4).filter(|&k| pv[k] < T::lit(0.5)).collect();
    let basis = Matrix::from_fn(4, keep.len(), |i, j| pvecs[(i, keep[j])]);
    let (minus, plus) = cut_copies(cut);
    let local = vec![plus[0], plus[1], minus[0], minus[1]];
    let constraint = Constraint::new(folded.rows(), local, basis);
    let matrix = constraint.compress(&folded);
    let operator = DiracOperator::assemble(
        matrix,
        2,
        1,
        a.geometry().clone(),
        a.scheme(),
        Some(constraint),
    );
    Ok(ThetaBVP {
        theta,
        operator,
        boundary_op,
        tau,
        pi_plus,
        pi_minus,
        pi_theta,
    })
}

/// Largest gap between two sorted multisets; infinite when sizes differ.
pub fn multiset_distance<T: Real>(a: &[T], b: &[T]) -> T {
    if a.len() != b.len() {
        return T::infinity();
    }
    let sort = |v: &[T]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        v
    };
    sort(a)
        .iter()
        .zip(&sort(b))
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}
