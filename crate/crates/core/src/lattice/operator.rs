use num_complex::Complex;
use num_traits::Zero;

use super::boundary::Constraint;
use super::grid::{Grid, Topology};
use super::potential::Potential;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Discretization of the first derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeScheme {
    /// Nearest-neighbour `(u_{i+1} − u_{i−1})/2h`. Exhibits fermion doubling.
    CentralDifference,
    /// Fourier differentiation on a periodic grid.
    Spectral,
    /// No differential structure: the operator was supplied as a raw matrix.
    Matrix,
}

/// Where the degrees of freedom live.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry<T> {
    Lattice(Grid<T>),
    /// Abstract sites without a metric; no site counts as a boundary site.
    Sites(usize),
}

impl<T: Real> Geometry<T> {
    pub fn num_nodes(&self) -> usize {
        match self {
            Geometry::Lattice(g) => g.num_nodes(),
            Geometry::Sites(n) => *n,
        }
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        match self {
            Geometry::Lattice(g) => g.is_boundary(node),
            Geometry::Sites(_) => false,
        }
    }

    pub fn grid(&self) -> Option<&Grid<T>> {
        match self {
            Geometry::Lattice(g) => Some(g),
            Geometry::Sites(_) => None,
        }
    }
}

/// Self-adjoint Dirac-type operator as a dense Hermitian matrix with its
/// geometric metadata. Matrix indices are `node·bundle_rank + component`
/// unless the operator was compressed onto a boundary-condition subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracOperator<T> {
    matrix: Matrix<T>,
    bundle_rank: usize,
    manifold_dim: usize,
    geometry: Geometry<T>,
    scheme: DerivativeScheme,
    constraint: Option<Constraint<T>>,
}

fn check_hermitian<T: Real>(m: &Matrix<T>) -> Result<()> {
    let defect = m.hermiticity_defect();
    let tol = T::hermitian_tol() * m.max_abs().max(T::min_positive_value());
    if defect > tol {
        return Err(Error::NotSelfAdjoint {
            defect: defect.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    Ok(())
}

impl<T: Real> DiracOperator<T> {
    /// Wraps a raw Hermitian matrix as `sites × bundle_rank` degrees of freedom.
    pub fn from_matrix(matrix: Matrix<T>, bundle_rank: usize, manifold_dim: usize) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Incompatible(format!(
                "matrix is {}x{}, not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if bundle_rank == 0 || !matrix.rows().is_multiple_of(bundle_rank) {
            return Err(Error::Incompatible(format!(
                "dimension {} is not a multiple of bundle rank {bundle_rank}",
                matrix.rows()
            )));
        }
        check_hermitian(&matrix)?;
        let sites = matrix.rows() / bundle_rank;
        Ok(Self {
            matrix,
            bundle_rank,
            manifold_dim,
            geometry: Geometry::Sites(sites),
            scheme: DerivativeScheme::Matrix,
            constraint: None,
        })
    }

    pub(crate) fn assemble(
        matrix: Matrix<T>,
        bundle_rank: usize,
        manifold_dim: usize,
        geometry: Geometry<T>,
        scheme: DerivativeScheme,
        constraint: Option<Constraint<T>>,
    ) -> Self {
        Self {
            matrix,
            bundle_rank,
            manifold_dim,
            geometry,
            scheme,
            constraint,
        }
    }

    /// Same metadata, new matrix (used for paths and pairs).
    pub(crate) fn with_matrix(&self, matrix: Matrix<T>) -> Self {
        Self {
            matrix,
            ..self.clone()
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn bundle_rank(&self) -> usize {
        self.bundle_rank
    }

    pub fn manifold_dim(&self) -> usize {
        self.manifold_dim
    }

    pub fn geometry(&self) -> &Geometry<T> {
        &self.geometry
    }

    pub fn grid(&self) -> Option<&Grid<T>> {
        self.geometry.grid()
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    /// Boundary-condition subspace, present for cut-domain operators.
    pub fn constraint(&self) -> Option<&Constraint<T>> {
        self.constraint.as_ref()
    }

    pub fn num_nodes(&self) -> usize {
        self.geometry.num_nodes()
    }

    /// Diagonal `rank × rank` block of a node (uncompressed operators only).
    pub fn node_block(&self, node: usize) -> Matrix<T> {
        let r = self.bundle_rank;
        Matrix::from_fn(r, r, |a, b| self.matrix[(node * r + a, node * r + b)])
    }

    /// Returns `c·A` with the same metadata.
    pub fn scaled(&self, c: T) -> Self {
        self.with_matrix(self.matrix.scale(c))
    }

    /// Returns `U A Uᴴ` for a unitary `U` of matching size.
    pub fn conjugated(&self, u: &Matrix<T>) -> Self {
        let mut m = u.matmul(&self.matrix).matmul(&u.adjoint());
        m.symmetrize();
        self.with_matrix(m)
    }
}

/// First-derivative matrix `D` on one axis; `−iD` is Hermitian.
pub fn derivative_matrix<T: Real>(
    points: usize,
    spacing: T,
    topology: Topology,
    scheme: DerivativeScheme,
) -> Result<Matrix<T>> {
    match scheme {
        DerivativeScheme::CentralDifference => {
            let c = T::one() / (T::lit(2.0) * spacing);
            let mut d = Matrix::zeros(points, points);
            for i in 0..points {
                if i + 1 < points {
                    d[(i, i + 1)] = Complex::new(c, T::zero());
                    d[(i + 1, i)] = Complex::new(-c, T::zero());
                } else if topology == Topology::Periodic {
                    d[(i, 0)] = Complex::new(c, T::zero());
                    d[(0, i)] = Complex::new(-c, T::zero());
                }
            }
            Ok(d)
        }
        DerivativeScheme::Spectral => {
            if topology != Topology::Periodic {
                return Err(Error::SchemeMismatch(
                    "spectral differentiation needs a periodic grid".into(),
                ));
            }
            // D_jk depends only on (j − k) mod N: (1/N) Σ_m iξ_m e^{iξ_m (j−k) h}.
            let n = points as isize;
            let nf = T::from_usize_lossy(points);
            let two_pi = T::lit(2.0) * T::PI();
            let stencil: Vec<Complex<T>> = (0..n)
                .map(|l| {
                    let mut acc = Complex::zero();
                    for m in -(n / 2)..(n - n / 2) {
                        let xi = two_pi * T::from_isize(m).unwrap() / (nf * spacing);
                        let phase = xi * T::from_isize(l).unwrap() * spacing;
                        acc += Complex::new(T::zero(), xi) * Complex::new(phase.cos(), phase.sin());
                    }
                    acc / nf
                })
                .collect();
            Ok(Matrix::from_fn(points, points, |j, k| {
                stencil[(j + points - k) % points]
            }))
        }
        DerivativeScheme::Matrix => Err(Error::SchemeMismatch(
            "raw matrices carry no derivative".into(),
        )),
    }
}

/// Frequencies `ξ_m = 2πm/(N h)`, `m ∈ [−N/2, N/2)`, of the spectral scheme.
pub fn symbol_frequencies<T: Real>(points: usize, spacing: T) -> Vec<T> {
    let n = points as isize;
    let two_pi = T::lit(2.0) * T::PI();
    ((-(n / 2))..(n - n / 2))
        .map(|m| two_pi * T::from_isize(m).unwrap() / (T::from_usize_lossy(points) * spacing))
        .collect()
}

/// `A = −iσ₁ d/dx + V(x)` on a rank-2 bundle over a one-dimensional grid.
pub fn build_dirac_1d<T: Real>(
    grid: &Grid<T>,
    v: &Potential<T>,
    scheme: DerivativeScheme,
) -> Result<DiracOperator<T>> {
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid("build_dirac_1d needs a 1D grid".into()));
    }
    if v.rank() != 2 || v.num_nodes() != grid.num_nodes() {
        return Err(Error::InvalidPotential(format!(
            "expected {} rank-2 blocks, got {} of rank {}",
            grid.num_nodes(),
            v.num_nodes(),
            v.rank()
        )));
    }
    let n = grid.num_nodes();
    let d = derivative_matrix(n, grid.spacing(), grid.topology(), scheme)?;
    let mi = Complex::new(T::zero(), -T::one());
    let mut m = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = mi * d[(i, j)];
            if !z.is_zero() {
                m[(2 * i, 2 * j + 1)] = z;
                m[(2 * i + 1, 2 * j)] = z;
            }
        }
    }
    v.add_into(&mut m, T::one());
    check_hermitian(&m)?;
    Ok(DiracOperator::assemble(
        m,
        2,
        1,
        Geometry::Lattice(grid.clone()),
        scheme,
        None,
    ))
}

/// `A = −iσ₁∂₁ − iσ₂∂₂ + diag(f, −f)` on a two-dimensional grid.
pub fn build_dirac_2d<T: Real>(grid: &Grid<T>, f: &[T], scheme: DerivativeScheme) -> Result<DiracOperator<T>> {
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid("build_dirac_2d needs a 2D grid".into()));
    }
    if f.len() != grid.num_nodes() {
        return Err(Error::InvalidPotential(format!(
            "expected {} samples of f, got {}",
            grid.num_nodes(),
            f.len()
        )));
    }
    if let Some(i) = f.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidPotential(format!("f is not finite at node {i}")));
    }
    let p = grid.points_per_axis();
    let d = derivative_matrix(p, grid.spacing(), grid.topology(), scheme)?;
    let nodes = grid.num_nodes();
    let mut m = Matrix::zeros(2 * nodes, 2 * nodes);
    let mi = Complex::new(T::zero(), -T::one());
    for iy in 0..p {
        for ix in 0..p {
            let row = ix + p * iy;
            for k in 0..p {
                // ∂₁ couples along x, ∂₂ along y.
                let dx = d[(ix, k)];
                if !dx.is_zero() {
                    let col = k + p * iy;
                    m[(2 * row, 2 * col + 1)] += mi * dx;
                    m[(2 * row + 1, 2 * col)] += mi * dx;
                }
                let dy = d[(iy, k)];
                if !dy.is_zero() {
                    let col = ix + p * k;
                    m[(2 * row, 2 * col + 1)] -= dy;
                    m[(2 * row + 1, 2 * col)] += dy;
                }
            }
        }
    }
    Potential::sigma3(f)?.add_into(&mut m, T::one());
    check_hermitian(&m)?;
    Ok(DiracOperator::assemble(
        m,
        2,
        2,
        Geometry::Lattice(grid.clone()),
        scheme,
        None,
    ))
}

/// Converts complex samples of a scalar field to reals, rejecting any
/// imaginary part above `tol`.
pub fn real_field<T: Real>(samples: &[Complex<T>], tol: T) -> Result<Vec<T>> {
    samples
        .iter()
        .enumerate()
        .map(|(i, z)| {
            if z.im.abs() > tol {
                Err(Error::InvalidPotential(format!(
                    "field is complex at node {i} (imaginary part {})",
                    z.im
                )))
            } else {
                Ok(z.re)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::potential::PotentialKind;

    fn eig(a: &DiracOperator<f64>) -> Vec<f64> {
        f64::hermitian_eigen(a.matrix(), false).unwrap().0
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn free_spectral_1d_matches_symbol() {
        let g = Grid::centered(1, 8, 1.0, Topology::Periodic).unwrap();
        let a = build_dirac_1d(&g, &Potential::zeros(8, 2), DerivativeScheme::Spectral).unwrap();
        let mut expect = Vec::new();
        for xi in symbol_frequencies(8, 1.0) {
            expect.push(xi);
            expect.push(-xi);
        }
        let got = eig(&a);
        let expect = sorted(expect);
        for (x, y) in got.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-10, "{got:?} vs {expect:?}");
        }
        assert_eq!(got.iter().filter(|x| x.abs() < 1e-10).count(), 2);
        // frequencies are 2πk/8
        assert!(expect.iter().any(|&x| (x - 2.0 * std::f64::consts::PI / 8.0).abs() < 1e-14));
    }

    #[test]
    fn massive_dispersion_relation() {
        // Oracle: each Fourier mode carries the 2×2 symbol ξσ₁ + σ₃ with λ² = ξ² + 1.
        let g = Grid::centered(1, 4, 1.0, Topology::Periodic).unwrap();
        let v = Potential::sigma3(&[1.0; 4]).unwrap();
        let a = build_dirac_1d(&g, &v, DerivativeScheme::Spectral).unwrap();
        let mut expect = Vec::new();
        for xi in symbol_frequencies(4, 1.0) {
            let l = (xi * xi + 1.0f64).sqrt();
            expect.push(l);
            expect.push(-l);
        }
        let expect = sorted(expect);
        for (x, y) in eig(&a).iter().zip(&expect) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_potential_block_rejected() {
        let mut blocks = vec![Matrix::<f64>::zeros(2, 2); 8];
        blocks[3][(0, 1)] = Complex::new(0.0, 1.0);
        let err = Potential::from_blocks(PotentialKind::MatrixValued, blocks).unwrap_err();
        assert!(matches!(err, Error::InvalidPotential(_)));
    }

    #[test]
    fn spectral_needs_periodic() {
        let g = Grid::centered(1, 8, 1.0, Topology::TruncatedLine).unwrap();
        let err = build_dirac_1d(&g, &Potential::zeros(8, 2), DerivativeScheme::Spectral).unwrap_err();
        assert!(matches!(err, Error::SchemeMismatch(_)));
    }

    #[test]
    fn central_difference_is_hermitian_and_real_antisymmetric() {
        let g = Grid::<f64>::centered(1, 10, 0.3, Topology::TruncatedLine).unwrap();
        let d = derivative_matrix(10, 0.3, Topology::TruncatedLine, DerivativeScheme::CentralDifference).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(d[(i, j)].re, -d[(j, i)].re);
                assert_eq!(d[(i, j)].im, 0.0);
            }
        }
        let v = Potential::sigma3(&g.sample(|x| x[0].tanh())).unwrap();
        let a = build_dirac_1d(&g, &v, DerivativeScheme::CentralDifference).unwrap();
        assert!(a.matrix().is_hermitian(1e-12));
    }

    #[test]
    fn free_2d_spectrum_symmetric() {
        let g = Grid::centered(2, 8, 1.0, Topology::Periodic).unwrap();
        let a = build_dirac_2d(&g, &vec![0.0; 64], DerivativeScheme::Spectral).unwrap();
        let ev = eig(&a);
        let mut neg: Vec<f64> = ev.iter().map(|x| -x).collect();
        neg.reverse();
        for (x, y) in ev.iter().zip(&neg) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_mass_2d_bounds_spectrum() {
        // λ² = ξ₁² + ξ₂² + c² per Fourier mode, so λ² ≥ c².
        let c = 0.7f64;
        let g = Grid::centered(2, 8, 0.5, Topology::Periodic).unwrap();
        let a = build_dirac_2d(&g, &vec![c; 64], DerivativeScheme::Spectral).unwrap();
        let freqs = symbol_frequencies(8, 0.5);
        let mut expect = Vec::new();
        for &x in &freqs {
            for &y in &freqs {
                let l = (x * x + y * y + c * c).sqrt();
                expect.push(l);
                expect.push(-l);
            }
        }
        let expect = sorted(expect);
        let got = eig(&a);
        for (x, y) in got.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-10);
            assert!(x * x >= c * c - 1e-10);
        }
    }

    #[test]
    fn confining_2d_potential_opens_gap() {
        let g = Grid::<f64>::centered(2, 16, 0.5, Topology::TruncatedLine).unwrap();
        let f = g.sample(|x| (x[0] * x[0] + x[1] * x[1]).sqrt());
        let a = build_dirac_2d(&g, &f, DerivativeScheme::CentralDifference).unwrap();
        let min_abs = eig(&a).iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        assert!(min_abs > 1e-3, "gap {min_abs}");
    }

    #[test]
    fn complex_field_rejected() {
        let s = vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.5)];
        assert!(matches!(real_field(&s, 1e-12), Err(Error::InvalidPotential(_))));
        assert_eq!(real_field(&s[..1], 1e-12).unwrap(), vec![1.0]);
    }
}
