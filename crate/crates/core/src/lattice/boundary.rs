//! Cutting a one-dimensional operator at a node: the boundary operator `ℬ`,
//! the folded (doubled) operator and APS half-line problems.
//!
//! The cut node `c` is split into a left copy `c⁻` and a right copy `c⁺`.
//! Each copy keeps the diagonal block of `c`; its couplings to the
//! neighbouring node are scaled by `√2`, and the two copies are not coupled.
//! With this weighting the transmission condition `u(c⁻) = u(c⁺)`, realized as
//! compression onto `(e₊ + e₋)/√2`, reproduces the uncut operator exactly.

use num_complex::Complex;
use num_traits::Zero;

use super::grid::{Grid, Topology};
use super::operator::{DerivativeScheme, DiracOperator, Geometry};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Default number of nodes on each side of a cut over which the operator
/// must be of product form.
pub const DEFAULT_COLLAR: usize = 3;

/// Which piece of a cut line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Tangential operator `ℬ` at a cut, for the product form `A = −iσ₁(∂ + ℬ)`
/// near the cut; for `A = −iσ₁∂ + W` this gives `ℬ = iσ₁W(c)`.
#[derive(Clone, Debug)]
pub struct BoundaryOperator<T> {
    matrix: Matrix<T>,
    cut: usize,
    eigenvalues: Vec<T>,
    eigenvectors: Matrix<T>,
    kernel_tol: T,
}

impl<T: Real> BoundaryOperator<T> {
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &Matrix<T> {
        &self.eigenvectors
    }

    pub fn min_abs_eigenvalue(&self) -> T {
        self.eigenvalues.iter().fold(T::infinity(), |m, v| m.min(v.abs()))
    }

    pub fn is_invertible(&self) -> bool {
        self.min_abs_eigenvalue() > self.kernel_tol
    }

    /// Orthonormal basis (columns) of the eigenspace selected by `keep`,
    /// with the orientation sign applied to the eigenvalues first.
    fn spectral_subspace(&self, orientation: T, keep: impl Fn(T) -> bool) -> Matrix<T> {
        let cols: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&k| keep(orientation * self.eigenvalues[k]))
            .collect();
        Matrix::from_fn(self.matrix.rows(), cols.len(), |i, j| self.eigenvectors[(i, cols[j])])
    }
}

/// Orthonormal boundary-condition subspace of an ambient space: all ambient
/// coordinates except `local`, plus the columns of `basis` embedded on `local`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    ambient_dim: usize,
    local: Vec<usize>,
    basis: Matrix<T>,
}

enum Coord {
    Ambient(usize),
    Local(usize),
}

impl<T: Real> Constraint<T> {
    pub fn new(ambient_dim: usize, local: Vec<usize>, basis: Matrix<T>) -> Self {
        assert_eq!(local.len(), basis.rows());
        Self {
            ambient_dim,
            local,
            basis,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn local_indices(&self) -> &[usize] {
        &self.local
    }

    /// Columns spanning the allowed values on the constrained coordinates.
    pub fn local_basis(&self) -> &Matrix<T> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.ambient_dim - self.local.len() + self.basis.cols()
    }

    /// Ordering of the compressed coordinates: ambient order, with the local
    /// basis inserted where the first constrained coordinate used to be.
    fn coords(&self) -> Vec<Coord> {
        let first = self.local.iter().copied().min().unwrap_or(self.ambient_dim);
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.ambient_dim {
            if i == first {
                out.extend((0..self.basis.cols()).map(Coord::Local));
            }
            if !self.local.contains(&i) {
                out.push(Coord::Ambient(i));
            }
        }
        out
    }

    /// Dense `ambient_dim × dim` isometry `Q`.
    pub fn to_dense(&self) -> Matrix<T> {
        let coords = self.coords();
        let mut q = Matrix::zeros(self.ambient_dim, coords.len());
        for (j, c) in coords.iter().enumerate() {
            match *c {
                Coord::Ambient(i) => q[(i, j)] = Complex::new(T::one(), T::zero()),
                Coord::Local(p) => {
                    for (a, &i) in self.local.iter().enumerate() {
                        q[(i, j)] = self.basis[(a, p)];
                    }
                }
            }
        }
        q
    }

    /// `Qᴴ M Q` in `O(N²)` using the sparsity of `Q`.
    pub fn compress(&self, m: &Matrix<T>) -> Matrix<T> {
        let coords = self.coords();
        let k = self.basis.cols();
        // M·Q restricted to the local columns: ambient_dim × k.
        let mq = Matrix::from_fn(self.ambient_dim, k, |i, p| {
            self.local
                .iter()
                .enumerate()
                .fold(Complex::zero(), |acc, (a, &l)| acc + m[(i, l)] * self.basis[(a, p)])
        });
        let mut out = Matrix::from_fn(coords.len(), coords.len(), |r, c| match (&coords[r], &coords[c]) {
            (Coord::Ambient(i), Coord::Ambient(j)) => m[(*i, *j)],
            (Coord::Ambient(i), Coord::Local(p)) => mq[(*i, *p)],
            (Coord::Local(p), Coord::Ambient(j)) => mq[(*j, *p)].conj(),
            (Coord::Local(p), Coord::Local(q)) => self
                .local
                .iter()
                .enumerate()
                .fold(Complex::zero(), |acc, (a, &l)| acc + self.basis[(a, *p)].conj() * mq[(l, *q)]),
        });
        out.symmetrize();
        out
    }
}

fn line_grid<T: Real>(a: &DiracOperator<T>) -> Result<&Grid<T>> {
    let grid = a
        .grid()
        .ok_or_else(|| Error::NotProductNearCut("cuts need a lattice operator".into()))?;
    if grid.dim() != 1 || a.bundle_rank() != 2 || a.constraint().is_some() {
        return Err(Error::NotProductNearCut(
            "cuts are implemented for uncut rank-2 operators on 1D grids".into(),
        ));
    }
    if a.scheme() != DerivativeScheme::CentralDifference {
        return Err(Error::SchemeMismatch(
            "cutting needs the nearest-neighbour central-difference scheme".into(),
        ));
    }
    Ok(grid)
}

/// `ℬ` at `cut`, requiring product form over `DEFAULT_COLLAR` nodes each side.
pub fn restrict_to_boundary<T: Real>(a: &DiracOperator<T>, cut: usize) -> Result<BoundaryOperator<T>> {
    restrict_to_boundary_with_collar(a, cut, DEFAULT_COLLAR)
}

pub fn restrict_to_boundary_with_collar<T: Real>(
    a: &DiracOperator<T>,
    cut: usize,
    collar: usize,
) -> Result<BoundaryOperator<T>> {
    let grid = line_grid(a)?;
    let n = grid.num_nodes();
    if cut < collar || cut + collar >= n {
        return Err(Error::NotProductNearCut(format!(
            "cut {cut} leaves no collar of {collar} nodes inside a grid of {n}"
        )));
    }
    let w = a.node_block(cut);
    let tol = T::lit(1e-12) * (T::one() + w.max_abs());
    for node in cut - collar..=cut + collar {
        let other = a.node_block(node);
        if !other.differing_rows(&w, tol).is_empty() {
            return Err(Error::NotProductNearCut(format!(
                "potential at node {node} differs from the value at the cut"
            )));
        }
    }
    // ℬ = iσ₁W
    let i_sigma1 = Matrix::from_fn(2, 2, |r, c| {
        if r == c {
            Complex::zero()
        } else {
            Complex::new(T::zero(), T::one())
        }
    });
    let b = i_sigma1.matmul(&w);
    if !b.is_hermitian(T::lit(1e-12)) {
        return Err(Error::NotProductNearCut(
            "iσ₁W is not self-adjoint; W must lie in span{σ₂, σ₃}".into(),
        ));
    }
    let (eigenvalues, vecs) = T::hermitian_eigen(&b, true)?;
    let eigenvectors = vecs.expect("requested eigenvectors");
    let radius = eigenvalues.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let kernel_tol = T::default_kernel_tol() * (T::one() + radius);
    let op = BoundaryOperator {
        matrix: b,
        cut,
        eigenvalues,
        eigenvectors,
        kernel_tol,
    };
    if !op.is_invertible() {
        return Err(Error::SingularBoundaryOperator {
            min_abs: op.min_abs_eigenvalue().to_f64_lossy(),
        });
    }
    Ok(op)
}

/// Folded operator on `N + 1` nodes ordered `0..c−1, c⁻, c⁺, c+1..N−1`.
pub fn fold_at_cut<T: Real>(a: &DiracOperator<T>, cut: usize) -> Result<Matrix<T>> {
    let grid = line_grid(a)?;
    let n = grid.num_nodes();
    if cut == 0 || cut + 1 >= n {
        return Err(Error::NotProductNearCut("cut must be an interior node".into()));
    }
    let m = a.matrix();
    let r = 2;
    // original node of a folded node, and whether it lies on the right piece
    let origin = |e: usize| -> (usize, bool) {
        if e <= cut {
            (e, false)
        } else {
            (e - 1, true)
        }
    };
    for i in 0..cut {
        for j in cut + 1..n {
            for (p, q) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                if m[(i * r + p, j * r + q)].norm() > T::zero() {
                    return Err(Error::SchemeMismatch(format!(
                        "nodes {i} and {j} couple across the cut"
                    )));
                }
            }
        }
    }
    let sqrt2 = T::lit(2.0).sqrt();
    let nodes = n + 1;
    let mut out = Matrix::zeros(nodes * r, nodes * r);
    for e in 0..nodes {
        let (i, ri) = origin(e);
        for f in 0..nodes {
            let (j, rj) = origin(f);
            if ri != rj {
                continue;
            }
            let scale = if (i == cut) != (j == cut) { sqrt2 } else { T::one() };
            for p in 0..r {
                for q in 0..r {
                    let z = m[(i * r + p, j * r + q)];
                    if !z.is_zero() {
                        out[(e * r + p, f * r + q)] = z * scale;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Folded-space indices of the two components of `c⁻` and `c⁺`.
pub fn cut_copies(cut: usize) -> ([usize; 2], [usize; 2]) {
    ([2 * cut, 2 * cut + 1], [2 * (cut + 1), 2 * (cut + 1) + 1])
}

/// Half-line piece of `a` at `cut` with the APS condition
/// `Π_{≥0}(ℬ_side)·u(cut) = 0` (or `Π_{>0}` when `dual`), where the right
/// piece uses `ℬ` and the left piece its outward orientation `−ℬ`.
pub fn build_aps_halfline<T: Real>(
    a: &DiracOperator<T>,
    cut: usize,
    side: Side,
    dual: bool,
) -> Result<DiracOperator<T>> {
    let b = restrict_to_boundary(a, cut)?;
    let folded = fold_at_cut(a, cut)?;
    let grid = line_grid(a)?;
    let n = grid.num_nodes();
    let (nodes, first) = match side {
        Side::Left => (cut + 1, 0),
        Side::Right => (n - cut, cut + 1),
    };
    let idx: Vec<usize> = (2 * first..2 * (first + nodes)).collect();
    let half = folded.principal_submatrix(&idx);
    let orientation = match side {
        Side::Right => T::one(),
        Side::Left => -T::one(),
    };
    let allowed = if dual {
        b.spectral_subspace(orientation, |l| l <= T::zero())
    } else {
        b.spectral_subspace(orientation, |l| l < T::zero())
    };
    let local = match side {
        Side::Left => vec![2 * (nodes - 1), 2 * (nodes - 1) + 1],
        Side::Right => vec![0, 1],
    };
    let constraint = Constraint::new(half.rows(), local, allowed);
    let matrix = constraint.compress(&half);
    let offset = grid.origin_offset()[0] + T::from_usize_lossy(first) * grid.spacing();
    let half_grid = Grid::new(1, nodes, grid.spacing(), Topology::HalfLine, vec![offset])?;
    Ok(DiracOperator::assemble(
        matrix,
        2,
        1,
        Geometry::Lattice(half_grid),
        DerivativeScheme::CentralDifference,
        Some(constraint),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::operator::build_dirac_1d;
    use crate::lattice::potential::Potential;

    fn model(n: usize, v: impl Fn(f64) -> f64) -> DiracOperator<f64> {
        let g = Grid::centered(1, n, 0.25, Topology::TruncatedLine).unwrap();
        let pot = Potential::sigma3(&g.sample(|x| v(x[0]))).unwrap();
        build_dirac_1d(&g, &pot, DerivativeScheme::CentralDifference).unwrap()
    }

    fn eig(m: &Matrix<f64>) -> Vec<f64> {
        f64::hermitian_eigen(m, false).unwrap().0
    }

    #[test]
    fn boundary_operator_is_v_sigma2() {
        let a = model(32, |_| 1.0);
        let b = restrict_to_boundary(&a, 16).unwrap();
        assert!((b.matrix()[(0, 1)] - Complex::new(0.0, -1.0)).norm() < 1e-15);
        assert!((b.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((b.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let b3 = restrict_to_boundary(&model(32, |_| -3.0), 16).unwrap();
        assert!((b3.eigenvalues()[0] + 3.0).abs() < 1e-14 && (b3.eigenvalues()[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_and_non_product_rejected() {
        let err = restrict_to_boundary(&model(32, |_| 0.0), 16).unwrap_err();
        assert!(matches!(err, Error::SingularBoundaryOperator { .. }));
        let err = restrict_to_boundary(&model(32, |x| 1.0 + x), 16).unwrap_err();
        assert!(matches!(err, Error::NotProductNearCut(_)));
    }

    #[test]
    fn transmission_compression_reproduces_uncut() {
        let a = model(24, |x| if x.abs() < 1.0 { 1.0 } else { 1.0 + (x.abs() - 1.0) });
        let cut = 12;
        let folded = fold_at_cut(&a, cut).unwrap();
        let (minus, plus) = cut_copies(cut);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let basis = Matrix::from_fn(4, 2, |i, j| Complex::new(if i % 2 == j { s } else { 0.0 }, 0.0));
        let local = vec![minus[0], minus[1], plus[0], plus[1]];
        let c = Constraint::new(folded.rows(), local, basis);
        let m = c.compress(&folded);
        assert_eq!(m.rows(), a.dim());
        let diff = m.sub(a.matrix()).max_abs();
        assert!(diff < 1e-14, "{diff}");
    }

    #[test]
    fn compress_matches_dense_projection() {
        let a = model(10, |_| 0.5);
        let basis = Matrix::from_fn(2, 1, |i, _| if i == 0 { Complex::new(0.6, 0.0) } else { Complex::new(0.0, 0.8) });
        let c = Constraint::new(a.dim(), vec![6, 7], basis);
        let q = c.to_dense();
        let dense = q.adjoint().matmul(a.matrix()).matmul(&q);
        assert!(c.compress(a.matrix()).sub(&dense).max_abs() < 1e-15);
        let qtq = q.adjoint().matmul(&q);
        assert!(qtq.sub(&Matrix::identity(c.dim())).max_abs() < 1e-15);
    }

    #[test]
    fn aps_constrains_to_negative_sigma2_eigenvector() {
        let a = model(32, |_| 1.0);
        let h = build_aps_halfline(&a, 16, Side::Right, false).unwrap();
        let c = h.constraint().unwrap();
        let v = c.local_basis();
        assert_eq!(v.cols(), 1);
        // span{(1, −i)/√2}: second component is −i times the first
        let ratio = v[(1, 0)] / v[(0, 0)];
        assert!((ratio - Complex::new(0.0, -1.0)).norm() < 1e-12);
        assert!(h.matrix().is_hermitian(1e-12));
        // half block has 16 nodes of rank 2, minus one constrained component
        assert_eq!(h.dim(), 2 * 16 - 1);
        let dual = build_aps_halfline(&a, 16, Side::Right, true).unwrap();
        assert!(dual.matrix().sub(h.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn left_piece_uses_outward_orientation() {
        let a = model(32, |_| 2.0);
        let h = build_aps_halfline(&a, 16, Side::Left, false).unwrap();
        let v = h.constraint().unwrap().local_basis();
        // Π_{≥0}(−ℬ) u = 0 keeps the positive eigenvector of ℬ = 2σ₂: (1, i)/√2
        let ratio = v[(1, 0)] / v[(0, 0)];
        assert!((ratio - Complex::new(0.0, 1.0)).norm() < 1e-12);
        assert_eq!(h.dim(), 2 * 17 - 1);
        assert!(eig(h.matrix()).len() == h.dim());
    }
}
