//! Krein spectral shift function of a finite pair and the large-time decay of
//! the relative weighted heat trace.

use crate::error::{Error, Result};
use crate::eta_zeta::TraceMeasure;
use crate::scalar::Real;
use crate::spectrum::{log_spaced, spectral_gap, SpectralPair, Spectrum};

/// How the additive constant of `σ` is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftNormalization {
    /// `σ = N₀ − N₁`, vanishing below both spectra.
    Counting,
    /// `σ = dim ker A₀ − dim ker A₁` on `(0, δ)`; differs from `Counting` by
    /// `n₋(A₀) − n₋(A₁)`.
    PinnedAtZero,
}

/// Piecewise constant, integer-valued `σ`. `values[j]` holds on the open
/// interval between `breakpoints[j−1]` and `breakpoints[j]`, with the two
/// unbounded intervals at either end, so `values.len() = breakpoints.len() + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralShift<T> {
    pub breakpoints: Vec<T>,
    pub values: Vec<i64>,
    /// Smallest positive eigenvalue of either operator: `(0, δ)` is free of spectrum.
    pub delta: T,
    pub normalization: ShiftNormalization,
}

/// Eigenvalues with the kernel snapped to exactly zero.
fn snapped<T: Real>(s: &Spectrum<T>) -> Vec<T> {
    s.eigenvalues()
        .iter()
        .map(|&l| if s.is_kernel(l) { T::zero() } else { l })
        .collect()
}

fn count_le<T: Real>(sorted: &[T], x: T) -> i64 {
    sorted.partition_point(|&v| v <= x) as i64
}

impl<T: Real> SpectralShift<T> {
    /// `σ(λ) = N₀(λ) − N₁(λ)` with `N_j(λ) = #{eigenvalues of A_j ≤ λ}`.
    pub fn new(pair: &SpectralPair<T>, normalization: ShiftNormalization) -> Self {
        let e0 = snapped(&pair.s0);
        let e1 = snapped(&pair.s1);
        let mut breakpoints: Vec<T> = e0.iter().chain(&e1).copied().collect();
        breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        breakpoints.dedup();
        let shift = match normalization {
            ShiftNormalization::Counting => 0,
            ShiftNormalization::PinnedAtZero => {
                pair.s0.negative_count() as i64 - pair.s1.negative_count() as i64
            }
        };
        let mut values = Vec::with_capacity(breakpoints.len() + 1);
        values.push(-shift);
        for &b in &breakpoints {
            values.push(count_le(&e0, b) - count_le(&e1, b) - shift);
        }
        let delta = e0
            .iter()
            .chain(&e1)
            .filter(|&&v| v > T::zero())
            .fold(T::infinity(), |m, &v| m.min(v));
        Self {
            breakpoints,
            values,
            delta,
            normalization,
        }
    }

    /// `σ(λ)` for `λ` off the breakpoints.
    pub fn value(&self, lambda: T) -> i64 {
        self.values[self.breakpoints.partition_point(|&b| b <= lambda)]
    }

    /// `σ` on `(0, δ)`.
    pub fn near_zero_value(&self) -> i64 {
        self.values[self.breakpoints.partition_point(|&b| b <= T::zero())]
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// `∫_{lo}^{hi} φ'(λ)σ(λ)dλ` summed exactly over the constant pieces.
    pub fn integrate_derivative(&self, phi: &TestFunction<T>) -> T {
        let mut edges = Vec::with_capacity(self.breakpoints.len() + 2);
        edges.push(phi.lo);
        edges.extend(self.breakpoints.iter().copied());
        edges.push(phi.hi);
        edges
            .windows(2)
            .zip(&self.values)
            .filter(|(_, &v)| v != 0)
            .map(|(w, &v)| T::from_i64(v).unwrap() * (phi.eval(w[1]) - phi.eval(w[0])))
            .sum()
    }
}

/// A smooth test function with `φ = 0` outside `[lo, hi]`.
pub struct TestFunction<T> {
    f: Box<dyn Fn(T) -> T + Send + Sync>,
    pub lo: T,
    pub hi: T,
}

impl<T: Real> TestFunction<T> {
    pub fn new(lo: T, hi: T, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self { f: Box::new(f), lo, hi }
    }

    /// `exp(−1/(1 − x²))` rescaled to `[c − r, c + r]`.
    pub fn bump(center: T, radius: T) -> Self {
        Self::new(center - radius, center + radius, move |x| {
            let y = (x - center) / radius;
            if y.abs() < T::one() {
                (-T::one() / (T::one() - y * y)).exp()
            } else {
                T::zero()
            }
        })
    }

    /// A Gaussian `e^{−(x−c)²/w²}` multiplied by the bump of radius `r`.
    pub fn gaussian_bump(center: T, width: T, radius: T) -> Self {
        let b = Self::bump(center, radius);
        Self::new(center - radius, center + radius, move |x| {
            let g = ((x - center) / width).powi(2);
            (-g).exp() * (b.f)(x)
        })
    }

    /// `(1 − y²)^4 (1 + y/2)` on `[c − r, c + r]`: a smooth, asymmetric
    /// polynomial bump.
    pub fn polynomial_bump(center: T, radius: T) -> Self {
        Self::new(center - radius, center + radius, move |x| {
            let y = (x - center) / radius;
            if y.abs() < T::one() {
                (T::one() - y * y).powi(4) * (T::one() + y * T::lit(0.5))
            } else {
                T::zero()
            }
        })
    }

    pub fn zero(lo: T, hi: T) -> Self {
        Self::new(lo, hi, |_| T::zero())
    }

    pub fn eval(&self, x: T) -> T {
        if x <= self.lo || x >= self.hi {
            T::zero()
        } else {
            (self.f)(x)
        }
    }
}

/// `|Σφ(λ₁) − Σφ(λ₀) − ∫φ'σ|`, the Krein trace identity residual.
pub fn krein_check<T: Real>(pair: &SpectralPair<T>, phi: &TestFunction<T>) -> Result<T> {
    let all = pair.s0.eigenvalues().iter().chain(pair.s1.eigenvalues());
    if all.clone().any(|&l| l <= phi.lo || l >= phi.hi) {
        return Err(Error::SupportTooSmall {
            lo: phi.lo.to_f64_lossy(),
            hi: phi.hi.to_f64_lossy(),
        });
    }
    let shift = SpectralShift::new(pair, ShiftNormalization::Counting);
    let e0 = snapped(&pair.s0);
    let e1 = snapped(&pair.s1);
    let lhs: T = e1.iter().map(|&l| phi.eval(l)).sum::<T>() - e0.iter().map(|&l| phi.eval(l)).sum::<T>();
    Ok((lhs - shift.integrate_derivative(phi)).abs())
}

/// Least-squares fit of `log|Tr(A₁e^{−tA₁²} − A₀e^{−tA₀²})|` against `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit<T> {
    /// `−slope`.
    pub rate: T,
    pub intercept: T,
    /// The smallest nonzero `|λ|` over both spectra.
    pub gap: T,
    /// `δ²/2`.
    pub bound: T,
    /// `δ²`, the matrix-level rate.
    pub matrix_rate: T,
    pub t_grid: Vec<T>,
    pub log_trace: Vec<T>,
}

impl<T: Real> DecayFit<T> {
    pub fn meets_bound(&self) -> bool {
        self.rate >= self.bound
    }

    pub fn meets_matrix_rate(&self, fraction: T) -> bool {
        self.rate >= fraction * self.matrix_rate
    }
}

/// Decay rate over `t ∈ [lo/δ², hi/δ²]` when `t_range` is `None`, else over
/// the given range.
pub fn decay_check<T: Real>(pair: &SpectralPair<T>, t_range: Option<(T, T)>, points: usize) -> Result<DecayFit<T>> {
    let measure = TraceMeasure::eta(pair);
    if measure.is_zero() {
        return Err(Error::NoSignal);
    }
    let gap = spectral_gap(&pair.s0, &pair.s1)?;
    let (lo, hi) = t_range.unwrap_or((T::lit(10.0) / (gap * gap), T::lit(40.0) / (gap * gap)));
    let t_grid = log_spaced(lo, hi, points.max(2));
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for &t in &t_grid {
        let h = measure.value(t).abs();
        if h > T::zero() && h.is_finite() {
            ts.push(t);
            ys.push(h.ln());
        }
    }
    if ts.len() < 2 {
        return Err(Error::NoSignal);
    }
    let m = T::from_usize_lossy(ts.len());
    let tm = ts.iter().copied().sum::<T>() / m;
    let ym = ys.iter().copied().sum::<T>() / m;
    let sxy: T = ts.iter().zip(&ys).map(|(&t, &y)| (t - tm) * (y - ym)).sum();
    let sxx: T = ts.iter().map(|&t| (t - tm) * (t - tm)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        rate: -slope,
        intercept: ym - slope * tm,
        gap,
        bound: gap * gap * T::lit(0.5),
        matrix_rate: gap * gap,
        t_grid: ts,
        log_trace: ys,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{hermitian_with_spectrum, random_operator_pair, seeded};
    use crate::spectrum::eigensolve_matrix;
    use proptest::prelude::*;

    fn spec(v: &[f64]) -> Spectrum<f64> {
        Spectrum::from_eigenvalues(v.to_vec(), 1e-10)
    }

    fn pair(a: &[f64], b: &[f64]) -> SpectralPair<f64> {
        SpectralPair::new(spec(a), spec(b))
    }

    #[test]
    fn single_eigenvalue_moved_across_zero() {
        let s = SpectralShift::new(&pair(&[-1.0], &[1.0]), ShiftNormalization::Counting);
        assert_eq!(s.value(-2.0), 0);
        assert_eq!(s.value(0.0), 1);
        assert_eq!(s.value(0.99), 1);
        assert_eq!(s.value(1.5), 0);
        // ∫φ'·1 over (−1, 1) = φ(1) − φ(−1).
        let phi = TestFunction::new(-3.0, 3.0, |x: f64| (x + 3.0).powi(2) * (3.0 - x).powi(2));
        let want = phi.eval(1.0) - phi.eval(-1.0);
        assert!((s.integrate_derivative(&phi) - want).abs() < 1e-12);
    }

    #[test]
    fn identical_spectra_give_zero_shift() {
        let s = SpectralShift::new(&pair(&[-1.0, 0.5, 2.0], &[-1.0, 0.5, 2.0]), ShiftNormalization::Counting);
        assert!(s.is_identically_zero());
    }

    #[test]
    fn kernel_example() {
        let s = SpectralShift::new(&pair(&[0.0], &[1.0]), ShiftNormalization::Counting);
        assert_eq!(s.value(0.5), 1);
        assert_eq!(s.near_zero_value(), 1);
        assert_eq!(s.delta, 1.0);
        assert_eq!(s.value(-0.5), 0);
        assert_eq!(s.value(1.5), 0);
    }

    #[test]
    fn pinned_normalization_shifts_by_negative_counts() {
        let p = pair(&[-2.0, -1.0, 0.0], &[-2.0, 0.5, 0.0]);
        let c = SpectralShift::new(&p, ShiftNormalization::Counting);
        let z = SpectralShift::new(&p, ShiftNormalization::PinnedAtZero);
        assert_eq!(c.near_zero_value(), 1);
        assert_eq!(z.near_zero_value(), 0);
        assert_eq!(z.value(-5.0), -1);
    }

    #[test]
    fn krein_examples() {
        let p = pair(&[-1.0], &[1.0]);
        let bump = TestFunction::gaussian_bump(0.0, 1.0, 2.0);
        assert!(krein_check(&p, &bump).unwrap() < 1e-12);
        assert_eq!(krein_check(&p, &TestFunction::zero(-2.0, 2.0)).unwrap(), 0.0);
        let same = pair(&[-1.0, 0.3], &[-1.0, 0.3]);
        assert_eq!(krein_check(&same, &bump).unwrap(), 0.0);
        let err = krein_check(&p, &TestFunction::bump(0.0, 0.5)).unwrap_err();
        assert!(matches!(err, Error::SupportTooSmall { .. }));
    }

    #[test]
    fn decay_examples() {
        let d = decay_check(&pair(&[-1.0], &[1.0]), Some((1.0, 20.0)), 30).unwrap();
        assert!((d.rate - 1.0).abs() < 1e-12);
        assert!((d.intercept - 2f64.ln()).abs() < 1e-10);
        assert!(d.meets_bound());
        assert!(matches!(
            decay_check(&pair(&[-1.0, 2.0], &[-1.0, 2.0]), None, 30),
            Err(Error::NoSignal)
        ));
    }

    #[test]
    fn engineered_kernels_pin_the_shift() {
        let mut rng = seeded(9);
        let a = hermitian_with_spectrum::<f64>(&mut rng, &[-1.0, -0.4, 0.0, 0.0, 0.7, 1.2]).unwrap();
        let b = hermitian_with_spectrum::<f64>(&mut rng, &[-0.9, -0.5, 0.0, 0.3, 0.8, 1.1]).unwrap();
        let p = SpectralPair::new(eigensolve_matrix(&a, false).unwrap(), eigensolve_matrix(&b, false).unwrap());
        let s = SpectralShift::new(&p, ShiftNormalization::Counting);
        assert_eq!(s.near_zero_value(), 1);
        assert!((s.delta - 0.3).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn krein_identity_on_random_pairs(seed in 0u64..10_000, c in -0.5f64..0.5) {
            let p = SpectralPair::from_pair(&random_operator_pair::<f64>(&mut seeded(seed), 30, 6, 1.5).unwrap()).unwrap();
            let r = p.spectral_radius() + 1.0;
            for phi in [
                TestFunction::bump(c, r + 1.0),
                TestFunction::gaussian_bump(c, 0.7, r + 1.0),
                TestFunction::polynomial_bump(c, r + 1.0),
            ] {
                prop_assert!(krein_check(&p, &phi).unwrap() < 1e-10);
            }
        }

        #[test]
        fn shift_is_compactly_supported(seed in 0u64..10_000) {
            let p = SpectralPair::from_pair(&random_operator_pair::<f64>(&mut seeded(seed), 30, 6, 1.5).unwrap()).unwrap();
            let s = SpectralShift::new(&p, ShiftNormalization::Counting);
            prop_assert_eq!(s.values[0], 0);
            prop_assert_eq!(*s.values.last().unwrap(), 0);
        }

        #[test]
        fn decay_rate_beats_gap(seed in 0u64..10_000) {
            let p = SpectralPair::from_pair(&random_operator_pair::<f64>(&mut seeded(seed), 30, 6, 1.5).unwrap()).unwrap();
            let d = decay_check(&p, None, 40).unwrap();
            prop_assert!(d.meets_bound());
            prop_assert!(d.meets_matrix_rate(0.9), "rate {} vs δ² {}", d.rate, d.matrix_rate);
        }
    }
}
