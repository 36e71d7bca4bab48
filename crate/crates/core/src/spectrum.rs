//! Hermitian eigen-decomposition and heat traces evaluated from spectra.

use crate::error::{Error, Result};
use crate::lattice::{DiracOperator, OperatorPair};
use crate::matrix::{inner, Matrix};
use crate::scalar::Real;

/// Sorted real spectrum of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    eigenvalues: Vec<T>,
    eigenvectors: Option<Matrix<T>>,
    kernel_tol: T,
    source_dim: usize,
}

/// Full eigen-decomposition of an operator's matrix.
pub fn eigensolve<T: Real>(a: &DiracOperator<T>, want_vectors: bool) -> Result<Spectrum<T>> {
    eigensolve_matrix(a.matrix(), want_vectors)
}

/// Eigen-decomposition of a bare Hermitian matrix.
pub fn eigensolve_matrix<T: Real>(m: &Matrix<T>, want_vectors: bool) -> Result<Spectrum<T>> {
    let defect = m.hermiticity_defect();
    let tol = T::hermitian_tol() * m.max_abs().max(T::min_positive_value());
    if defect > tol {
        return Err(Error::NotSelfAdjoint {
            defect: defect.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    let (eigenvalues, eigenvectors) = T::hermitian_eigen(m, want_vectors)?;
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        kernel_tol: T::default_kernel_tol(),
        source_dim: m.rows(),
    })
}

impl<T: Real> Spectrum<T> {
    /// Spectrum from given eigenvalues (sorted here), without vectors.
    pub fn from_eigenvalues(mut eigenvalues: Vec<T>, kernel_tol: T) -> Self {
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let source_dim = eigenvalues.len();
        Self {
            eigenvalues,
            eigenvectors: None,
            kernel_tol,
            source_dim,
        }
    }

    pub fn with_kernel_tol(mut self, kernel_tol: T) -> Self {
        self.kernel_tol = kernel_tol;
        self
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, if requested.
    pub fn eigenvectors(&self) -> Option<&Matrix<T>> {
        self.eigenvectors.as_ref()
    }

    pub fn kernel_tol(&self) -> T {
        self.kernel_tol
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn spectral_radius(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Absolute threshold `kernel_tol·(1 + ρ)` below which eigenvalues count as zero.
    pub fn kernel_threshold(&self) -> T {
        self.kernel_tol * (T::one() + self.spectral_radius())
    }

    pub fn is_kernel(&self, lambda: T) -> bool {
        lambda.abs() < self.kernel_threshold()
    }

    /// Eigenvalues outside the kernel.
    pub fn nonzero(&self) -> impl Iterator<Item = T> + '_ {
        let thr = self.kernel_threshold();
        self.eigenvalues.iter().copied().filter(move |v| v.abs() >= thr)
    }

    /// Number of eigenvalues strictly below `−threshold`.
    pub fn negative_count(&self) -> usize {
        let thr = self.kernel_threshold();
        self.eigenvalues.iter().filter(|&&v| v <= -thr).count()
    }

    pub fn positive_count(&self) -> usize {
        let thr = self.kernel_threshold();
        self.eigenvalues.iter().filter(|&&v| v >= thr).count()
    }

    /// `#positive − #negative` over the nonzero spectrum.
    pub fn signature(&self) -> i64 {
        self.positive_count() as i64 - self.negative_count() as i64
    }

    /// Largest `‖V^H V − I‖` entry and largest `‖AV − VΛ‖` entry.
    pub fn residuals(&self, a: &Matrix<T>) -> Option<(T, T)> {
        let v = self.eigenvectors.as_ref()?;
        let n = v.cols();
        let cols: Vec<_> = (0..n).map(|j| v.column(j)).collect();
        let mut ortho = T::zero();
        let mut resid = T::zero();
        for i in 0..n {
            for j in i..n {
                let target = if i == j { T::one() } else { T::zero() };
                let z = inner(&cols[i], &cols[j]);
                ortho = ortho.max((z.re - target).abs().max(z.im.abs()));
            }
            let av = a.matvec(&cols[i]);
            for (x, y) in av.iter().zip(&cols[i]) {
                resid = resid.max((x - y * self.eigenvalues[i]).norm());
            }
        }
        Some((ortho, resid))
    }
}

/// Spectra of the two operators of a pair `(A₀, A₁)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPair<T> {
    pub s0: Spectrum<T>,
    pub s1: Spectrum<T>,
}

impl<T: Real> SpectralPair<T> {
    pub fn new(s0: Spectrum<T>, s1: Spectrum<T>) -> Self {
        Self { s0, s1 }
    }

    /// Eigenvalues of both operators (no vectors).
    pub fn from_operators(a0: &DiracOperator<T>, a1: &DiracOperator<T>) -> Result<Self> {
        Ok(Self::new(eigensolve(a0, false)?, eigensolve(a1, false)?))
    }

    pub fn from_pair(pair: &OperatorPair<T>) -> Result<Self> {
        Self::from_operators(&pair.a0, &pair.a1)
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.s1.clone(), self.s0.clone())
    }

    /// `(dim ker A₀, dim ker A₁)`.
    pub fn kernel_dims(&self) -> (usize, usize) {
        (kernel_dim(&self.s0), kernel_dim(&self.s1))
    }

    /// Largest spectral radius of the two operators.
    pub fn spectral_radius(&self) -> T {
        self.s0.spectral_radius().max(self.s1.spectral_radius())
    }

    /// `Σ sign λ₁ − Σ sign λ₀` over the nonzero spectra.
    pub fn signature_difference(&self) -> i64 {
        self.s1.signature() - self.s0.signature()
    }

    /// `n₋(A₀) − n₋(A₁) + (dim A₁ − dim A₀)/2`, the reduced invariant of a finite pair.
    pub fn negative_count_xi(&self) -> T {
        let dn = self.s0.negative_count() as i64 - self.s1.negative_count() as i64;
        let dd = self.s1.len() as i64 - self.s0.len() as i64;
        T::from_i64(2 * dn + dd).unwrap() * T::lit(0.5)
    }
}

/// Dimension of the kernel.
pub fn kernel_dim<T: Real>(s: &Spectrum<T>) -> usize {
    let thr = s.kernel_threshold();
    s.eigenvalues.iter().filter(|v| v.abs() < thr).count()
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTime(t.to_f64_lossy()))
    }
}

/// `Tr e^{−tA²} = Σ e^{−tλ²}`.
pub fn heat_trace<T: Real>(s: &Spectrum<T>, t: T) -> Result<T> {
    check_time(t)?;
    Ok(s.eigenvalues.iter().map(|&l| (-t * l * l).exp()).sum())
}

/// `Tr A e^{−tA²} = Σ λ e^{−tλ²}`.
pub fn eta_trace<T: Real>(s: &Spectrum<T>, t: T) -> Result<T> {
    check_time(t)?;
    Ok(s.eigenvalues.iter().map(|&l| l * (-t * l * l).exp()).sum())
}

/// `Tr(A₁e^{−tA₁²} − A₀e^{−tA₀²})` when `weighted`, else the plain heat-trace difference.
pub fn relative_trace<T: Real>(s0: &Spectrum<T>, s1: &Spectrum<T>, t: T, weighted: bool) -> Result<T> {
    if weighted {
        Ok(eta_trace(s1, t)? - eta_trace(s0, t)?)
    } else {
        Ok(heat_trace(s1, t)? - heat_trace(s0, t)?)
    }
}

/// Smallest nonzero `|λ|` over both spectra.
pub fn spectral_gap<T: Real>(s0: &Spectrum<T>, s1: &Spectrum<T>) -> Result<T> {
    let gap = s0
        .nonzero()
        .chain(s1.nonzero())
        .fold(T::infinity(), |m, v| m.min(v.abs()));
    if s0.nonzero().next().is_none() || s1.nonzero().next().is_none() {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(gap)
}

/// What a sampled trace represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    Plain,
    EtaWeighted,
    Relative,
    RelativeEtaWeighted,
    /// `Tr(Ȧ e^{−tA²})` along a path.
    DerivativeWeighted,
}

/// A trace sampled on a strictly increasing grid of positive times.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatTraceSamples<T> {
    pub t_grid: Vec<T>,
    pub values: Vec<T>,
    pub kind: TraceKind,
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::from_usize_lossy(count - 1);
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + step * T::from_usize_lossy(i)).exp()
            }
        })
        .collect()
}

impl<T: Real> HeatTraceSamples<T> {
    /// Samples `f` on `t_grid`, which must be strictly increasing and positive.
    pub fn sample(t_grid: Vec<T>, kind: TraceKind, f: impl Fn(T) -> Result<T>) -> Result<Self> {
        if let Some(&t) = t_grid.iter().find(|&&t| !(t > T::zero())) {
            return Err(Error::InvalidTime(t.to_f64_lossy()));
        }
        if t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTime(f64::NAN));
        }
        let values = t_grid.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        Ok(Self { t_grid, values, kind })
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use proptest::prelude::*;

    fn spec(v: &[f64]) -> Spectrum<f64> {
        Spectrum::from_eigenvalues(v.to_vec(), 1e-8)
    }

    #[test]
    fn eigensolve_examples() {
        let a = DiracOperator::from_matrix(Matrix::from_real_diagonal(&[3.0, -1.0, 0.0]), 1, 1).unwrap();
        assert_eq!(eigensolve(&a, false).unwrap().eigenvalues(), &[-1.0, 0.0, 3.0]);
        let mut s2 = Matrix::<f64>::zeros(2, 2);
        s2[(0, 1)] = Complex::new(0.0, -1.0);
        s2[(1, 0)] = Complex::new(0.0, 1.0);
        let s = eigensolve_matrix(&s2, true).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-15 && (s.eigenvalues()[1] - 1.0).abs() < 1e-15);
        let (ortho, resid) = s.residuals(&s2).unwrap();
        assert!(ortho < 1e-10 && resid < 1e-8);
        let mut bad = Matrix::<f64>::identity(2);
        bad[(0, 1)] = Complex::new(1.0, 0.0);
        assert!(matches!(eigensolve_matrix(&bad, false), Err(Error::NotSelfAdjoint { .. })));
    }

    #[test]
    fn kernel_dim_examples() {
        assert_eq!(kernel_dim(&spec(&[0.0, 1e-12, 0.5])), 2);
        assert_eq!(kernel_dim(&spec(&[1.0, -2.0, 3.0])), 0);
        assert_eq!(kernel_dim(&spec(&[-1e-9, 1e-9, 1e-9])), 3);
    }

    #[test]
    fn trace_examples() {
        for &t in &[0.1_f64, 1.0, 7.0] {
            assert_eq!(heat_trace(&spec(&[0.0]), t).unwrap(), 1.0);
            assert!((heat_trace(&spec(&[1.0, -1.0]), t).unwrap() - 2.0 * (-t).exp()).abs() < 1e-15);
            assert_eq!(eta_trace(&spec(&[1.0, -1.0]), t).unwrap(), 0.0);
        }
        assert!((eta_trace(&spec(&[2.0]), 0.25).unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(matches!(heat_trace(&spec(&[1.0]), 0.0), Err(Error::InvalidTime(_))));
    }

    #[test]
    fn relative_trace_examples() {
        let s = spec(&[0.3, -2.0]);
        assert_eq!(relative_trace(&s, &s, 0.5, true).unwrap(), 0.0);
        let t = 0.7f64;
        let r = relative_trace(&spec(&[-1.0]), &spec(&[1.0]), t, true).unwrap();
        assert!((r - 2.0 * (-t).exp()).abs() < 1e-15);
        let r = relative_trace(&spec(&[1.0, -1.0]), &spec(&[1.0, 1.0]), 1.0, true).unwrap();
        assert!((r - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn spectral_gap_examples() {
        assert_eq!(spectral_gap(&spec(&[-2.0, 0.0, 3.0]), &spec(&[1.0, -5.0])).unwrap(), 1.0);
        assert_eq!(spectral_gap(&spec(&[0.0, 0.0]), &spec(&[0.0, 0.0])), Err(Error::DegenerateSpectrum));
        assert_eq!(spectral_gap(&spec(&[0.0, 1e-3]), &spec(&[0.0, 1e-3])).unwrap(), 1e-3);
    }

    #[test]
    fn heat_trace_small_time_counts_dimension() {
        let s = spec(&[-4.0, -1.0, 0.0, 2.5, 3.0]);
        let t = 1e-8 / (s.spectral_radius() * s.spectral_radius());
        assert!((heat_trace(&s, t).unwrap() - 5.0).abs() < 1e-6);
    }

    #[test]
    fn plain_samples_positive_and_non_increasing() {
        let s = spec(&[-4.0, -1.0, 0.0, 2.5]);
        let samples = HeatTraceSamples::sample(log_spaced(1e-3, 10.0, 30), TraceKind::Plain, |t| heat_trace(&s, t)).unwrap();
        assert!(samples.values.iter().all(|&v| v > 0.0));
        assert!(samples.values.windows(2).all(|w| w[1] <= w[0]));
        assert!(HeatTraceSamples::sample(vec![1.0, 0.5], TraceKind::Plain, |t| heat_trace(&s, t)).is_err());
    }

    proptest! {
        #[test]
        fn eta_trace_derivative(vals in prop::collection::vec(-3.0f64..3.0, 1..12), t in 0.05f64..2.0) {
            let s = spec(&vals);
            let h = 1e-5 * t;
            let fd = (eta_trace(&s, t + h).unwrap() - eta_trace(&s, t - h).unwrap()) / (2.0 * h);
            let exact: f64 = vals.iter().map(|l| -l * l * l * (-t * l * l).exp()).sum();
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3));
        }

        #[test]
        fn weighted_relative_trace_antisymmetric(
            a in prop::collection::vec(-3.0f64..3.0, 1..10),
            b in prop::collection::vec(-3.0f64..3.0, 1..10),
            t in 0.01f64..5.0,
        ) {
            let (sa, sb) = (spec(&a), spec(&b));
            let x = relative_trace(&sa, &sb, t, true).unwrap();
            let y = relative_trace(&sb, &sa, t, true).unwrap();
            prop_assert_eq!(x, -y);
        }
    }
}
