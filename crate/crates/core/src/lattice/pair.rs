use super::operator::DiracOperator;
use super::potential::{Potential, PotentialKind};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Two operators that agree outside `diff_support`, with the node-local
/// difference stored as `patch` (so `a1 = a0 + patch`).
#[derive(Clone, Debug)]
pub struct OperatorPair<T> {
    pub a0: DiracOperator<T>,
    pub a1: DiracOperator<T>,
    diff_support: Vec<usize>,
    patch: Potential<T>,
}

impl<T: Real> OperatorPair<T> {
    /// Builds a pair from two operators on the same geometry whose difference
    /// is node-local.
    pub fn new(a0: DiracOperator<T>, a1: DiracOperator<T>) -> Result<Self> {
        check_compatible(&a0, &a1)?;
        let r = a0.bundle_rank();
        let diff = a1.matrix().sub(a0.matrix());
        let nodes = a0.num_nodes();
        let mut blocks = Vec::with_capacity(nodes);
        for node in 0..nodes {
            for j in 0..diff.cols() {
                if j / r != node && (0..r).any(|a| diff[(node * r + a, j)].norm() > T::zero()) {
                    return Err(Error::Incompatible(format!(
                        "operators differ off the diagonal block of node {node}"
                    )));
                }
            }
            blocks.push(Matrix::from_fn(r, r, |a, b| diff[(node * r + a, node * r + b)]));
        }
        let patch = Potential::from_blocks(PotentialKind::MatrixValued, blocks)?;
        Ok(Self {
            diff_support: patch.support().to_vec(),
            a0,
            a1,
            patch,
        })
    }

    /// Nodes whose rows differ between the two operators.
    pub fn diff_support(&self) -> &[usize] {
        &self.diff_support
    }

    pub fn patch(&self) -> &Potential<T> {
        &self.patch
    }

    /// The pair with roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a0: self.a1.clone(),
            a1: self.a0.clone(),
            diff_support: self.diff_support.clone(),
            patch: self.patch.scaled(-T::one()),
        }
    }

    /// Linear path `a0 + r·patch` from `a0` to `a1`.
    pub fn linear_path(&self) -> Result<OperatorPath<T>> {
        OperatorPath::new(self.a0.clone(), self.patch.clone(), Schedule::Linear)
    }
}

fn check_compatible<T: Real>(a0: &DiracOperator<T>, a1: &DiracOperator<T>) -> Result<()> {
    if a0.geometry() != a1.geometry()
        || a0.bundle_rank() != a1.bundle_rank()
        || a0.scheme() != a1.scheme()
        || a0.dim() != a1.dim()
    {
        return Err(Error::Incompatible(
            "operators must share grid, bundle rank and derivative scheme".into(),
        ));
    }
    if a0.constraint().is_some() || a1.constraint().is_some() {
        return Err(Error::Incompatible("pairs are built from uncut operators".into()));
    }
    Ok(())
}

fn check_patch<T: Real>(a0: &DiracOperator<T>, patch: &Potential<T>) -> Result<()> {
    if patch.rank() != a0.bundle_rank() || patch.num_nodes() != a0.num_nodes() {
        return Err(Error::Incompatible(format!(
            "patch has {} blocks of rank {}, operator has {} nodes of rank {}",
            patch.num_nodes(),
            patch.rank(),
            a0.num_nodes(),
            a0.bundle_rank()
        )));
    }
    if a0.constraint().is_some() {
        return Err(Error::Incompatible("cannot patch a compressed operator".into()));
    }
    if let Some(&node) = patch.support().iter().find(|&&n| a0.geometry().is_boundary(n)) {
        return Err(Error::NotCompactlySupported(format!(
            "patch touches boundary node {node}"
        )));
    }
    Ok(())
}

/// `a1 = a0 + patch` for a patch supported away from the grid boundary.
pub fn make_pair<T: Real>(a0: &DiracOperator<T>, patch: &Potential<T>) -> Result<OperatorPair<T>> {
    check_patch(a0, patch)?;
    let mut m = a0.matrix().clone();
    patch.add_into(&mut m, T::one());
    let a1 = a0.with_matrix(m);
    let pair = OperatorPair {
        a0: a0.clone(),
        a1,
        diff_support: patch.support().to_vec(),
        patch: patch.clone(),
    };
    let r = a0.bundle_rank();
    let rows = pair.a0.matrix().differing_rows(pair.a1.matrix(), T::lit(1e-14));
    if rows.iter().any(|i| !pair.diff_support.contains(&(i / r))) {
        return Err(Error::Incompatible("rows differ outside the patch support".into()));
    }
    Ok(pair)
}

/// Reparametrization `ρ: [0, 1] → ℝ` of a path `A_r = base + ρ(r)·patch`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule<T> {
    /// `ρ(r) = r`.
    Linear,
    /// `ρ(r) = 3r² − 2r³`.
    Smoothstep,
    /// `ρ(r) = r + a·sin(πr)`; same endpoints as `Linear`.
    Wiggle(T),
    /// `ρ(r) = r0 + (r1 − r0)·r`.
    Affine(T, T),
}

impl<T: Real> Schedule<T> {
    pub fn value(&self, r: T) -> T {
        match *self {
            Schedule::Linear => r,
            Schedule::Smoothstep => r * r * (T::lit(3.0) - T::lit(2.0) * r),
            Schedule::Wiggle(a) => r + a * (T::PI() * r).sin(),
            Schedule::Affine(r0, r1) => r0 + (r1 - r0) * r,
        }
    }

    pub fn derivative(&self, r: T) -> T {
        match *self {
            Schedule::Linear => T::one(),
            Schedule::Smoothstep => T::lit(6.0) * r * (T::one() - r),
            Schedule::Wiggle(a) => T::one() + a * T::PI() * (T::PI() * r).cos(),
            Schedule::Affine(r0, r1) => r1 - r0,
        }
    }

    /// Upper bound on `|ρ'|` over `[0, 1]`.
    pub fn lipschitz(&self) -> T {
        match *self {
            Schedule::Linear => T::one(),
            Schedule::Smoothstep => T::lit(1.5),
            Schedule::Wiggle(a) => T::one() + a.abs() * T::PI(),
            Schedule::Affine(r0, r1) => (r1 - r0).abs(),
        }
    }
}

/// One-parameter family `A_r = base + ρ(r)·patch`, `r ∈ [0, 1]`, constant
/// outside the patch support. `Ȧ_r = ρ'(r)·patch`.
#[derive(Clone, Debug)]
pub struct OperatorPath<T> {
    base: DiracOperator<T>,
    patch: Potential<T>,
    patch_matrix: Matrix<T>,
    schedule: Schedule<T>,
    patch_norm: T,
    endpoints: (Matrix<T>, Matrix<T>),
}

impl<T: Real> OperatorPath<T> {
    pub fn new(base: DiracOperator<T>, patch: Potential<T>, schedule: Schedule<T>) -> Result<Self> {
        check_patch(&base, &patch)?;
        if base.grid().is_some() && patch.support().len() == base.num_nodes() {
            return Err(Error::NotCompactlySupported(
                "path patch must leave some nodes untouched".into(),
            ));
        }
        let patch_matrix = patch.to_matrix();
        let patch_norm = patch.operator_norm()?;
        let at = |r: T| base.matrix().add_scaled(schedule.value(r), &patch_matrix);
        let endpoints = (at(T::zero()), at(T::one()));
        Ok(Self {
            base,
            patch,
            patch_matrix,
            schedule,
            patch_norm,
            endpoints,
        })
    }

    pub fn base(&self) -> &DiracOperator<T> {
        &self.base
    }

    pub fn patch(&self) -> &Potential<T> {
        &self.patch
    }

    pub fn schedule(&self) -> Schedule<T> {
        self.schedule
    }

    /// `‖patch‖`, the operator norm of the bundle map.
    pub fn patch_norm(&self) -> T {
        self.patch_norm
    }

    pub fn start(&self) -> &Matrix<T> {
        &self.endpoints.0
    }

    pub fn end(&self) -> &Matrix<T> {
        &self.endpoints.1
    }

    pub fn evaluate(&self, r: T) -> DiracOperator<T> {
        self.base
            .with_matrix(self.base.matrix().add_scaled(self.schedule.value(r), &self.patch_matrix))
    }

    /// `Ȧ_r = ρ'(r)·patch`.
    pub fn derivative(&self, r: T) -> Matrix<T> {
        self.patch_matrix.scale(self.schedule.derivative(r))
    }

    /// The same family with a different schedule.
    pub fn with_schedule(&self, schedule: Schedule<T>) -> Result<Self> {
        Self::new(self.base.clone(), self.patch.clone(), schedule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::grid::{Grid, Topology};
    use crate::lattice::operator::{build_dirac_1d, DerivativeScheme};
    use num_complex::Complex;

    fn line() -> DiracOperator<f64> {
        let g = Grid::centered(1, 12, 0.5, Topology::TruncatedLine).unwrap();
        let v = Potential::sigma3(&g.sample(|x| 1.0 + 0.1 * x[0] * x[0])).unwrap();
        build_dirac_1d(&g, &v, DerivativeScheme::CentralDifference).unwrap()
    }

    #[test]
    fn zero_patch_gives_identical_pair() {
        let a0 = line();
        let pair = make_pair(&a0, &Potential::zeros(12, 2)).unwrap();
        assert!(pair.diff_support().is_empty());
        assert_eq!(pair.a0.matrix(), pair.a1.matrix());
    }

    #[test]
    fn one_node_pair_arithmetic() {
        let a0 = DiracOperator::from_matrix(Matrix::from_real_diagonal(&[-1.0, 1.0]), 2, 1).unwrap();
        let patch = Potential::diagonal(&[vec![2.0, 0.0]]).unwrap();
        let pair = make_pair(&a0, &patch).unwrap();
        assert_eq!(pair.diff_support(), &[0]);
        assert_eq!(pair.a1.matrix(), &Matrix::from_real_diagonal(&[1.0, 1.0]));
    }

    #[test]
    fn boundary_patch_rejected() {
        let a0 = line();
        let mut vals = vec![0.0; 12];
        vals[0] = 1.0;
        let err = make_pair(&a0, &Potential::sigma3(&vals).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotCompactlySupported(_)));
    }

    #[test]
    fn pair_locality_and_new_roundtrip() {
        let a0 = line();
        let mut vals = vec![0.0; 12];
        vals[5] = -0.7;
        vals[6] = 0.3;
        let pair = make_pair(&a0, &Potential::sigma3(&vals).unwrap()).unwrap();
        assert_eq!(pair.diff_support(), &[5, 6]);
        let rebuilt = OperatorPair::new(pair.a0.clone(), pair.a1.clone()).unwrap();
        assert_eq!(rebuilt.diff_support(), &[5, 6]);
        let diff = pair.a1.matrix().sub(pair.a0.matrix());
        for i in 0..diff.rows() {
            for j in 0..diff.cols() {
                if diff[(i, j)].norm() > 0.0 {
                    assert!(pair.diff_support().contains(&(i / 2)));
                    assert!(pair.diff_support().contains(&(j / 2)));
                }
            }
        }
    }

    #[test]
    fn non_local_difference_rejected() {
        let a0 = DiracOperator::from_matrix(Matrix::<f64>::identity(4), 2, 1).unwrap();
        let mut m = Matrix::identity(4);
        m[(0, 3)] = Complex::new(0.5, 0.0);
        m[(3, 0)] = Complex::new(0.5, 0.0);
        let a1 = DiracOperator::from_matrix(m, 2, 1).unwrap();
        assert!(matches!(OperatorPair::new(a0, a1), Err(Error::Incompatible(_))));
    }

    #[test]
    fn path_endpoints_bit_for_bit() {
        let a0 = line();
        let mut vals = vec![0.0; 12];
        vals[6] = -2.0;
        let path = OperatorPath::new(a0, Potential::sigma3(&vals).unwrap(), Schedule::Smoothstep).unwrap();
        assert_eq!(path.evaluate(0.0).matrix(), path.start());
        assert_eq!(path.evaluate(1.0).matrix(), path.end());
        assert!(path.evaluate(0.37).matrix().is_hermitian(1e-12));
        assert!((path.patch_norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn schedule_derivatives_match_finite_differences() {
        for s in [Schedule::Linear, Schedule::Smoothstep, Schedule::Wiggle(0.2), Schedule::Affine(-1.0, 2.0)] {
            for &r in &[0.1f64, 0.5, 0.83] {
                let h = 1e-6;
                let fd = (s.value(r + h) - s.value(r - h)) / (2.0 * h);
                assert!((fd - s.derivative(r)).abs() < 1e-8);
                assert!(s.derivative(r).abs() <= s.lipschitz() + 1e-12);
            }
        }
    }
}
