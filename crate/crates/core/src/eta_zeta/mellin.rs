//! Mellin continuation of relative traces and generalized values at `s = 0`.
//!
//! For a measure `h` with offset `o` and fit `Σ b_k t^{(k−n−o)/2}` on
//! `(0, t_c]`, the transform is split as
//!
//! ```text
//! F(s) = 1/Γ((s+o)/2) · [ Σ_k 2b_k t_c^{(s+k−n)/2}/(s+k−n) + R(s) + L(s) ]
//! R(s) = 2∫ u^{s+o−1} (h − fit)(u²) du   over u ∈ (0, √t_c]
//! L(s) = ∫_{t_c}^∞ t^{(s+o)/2 − 1} h(t) dt
//! ```
//!
//! `L` is a finite sum of incomplete Gamma functions, or a dyadic quadrature
//! when the closed form is switched off.

use num_complex::Complex;
use num_traits::Zero;

use super::fit::{fit_short_time, AsymptoticFit, FitConfig, FitMode, TraceMeasure};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::scalar::Real;
use crate::special::{erfc, recip_gamma, upper_incomplete_gamma, EULER_GAMMA};
use crate::spectrum::{SpectralPair, Spectrum};

/// Evaluation of the large-time part `L(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMode {
    /// Incomplete Gamma functions of the spectrum.
    ClosedForm,
    /// Adaptive quadrature on dyadic panels `[2^j t_c, 2^{j+1} t_c]`.
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaConfig<T> {
    pub fit: FitConfig<T>,
    pub tail: TailMode,
    /// Relative accuracy asked of every quadrature, against `Σ|w|`.
    pub quad_tol: T,
    pub max_panels: usize,
    pub max_tail_panels: usize,
    /// `|residue|` above this marks the value as irregular at zero.
    pub residue_tol: T,
    pub pole_distance: T,
    /// Fitted coefficients below `pole_threshold·max|b_k|` do not produce poles.
    pub pole_threshold: T,
}

impl<T: Real> Default for EtaConfig<T> {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            tail: TailMode::ClosedForm,
            quad_tol: T::lit(1e-13),
            max_panels: 400,
            max_tail_panels: 400,
            residue_tol: T::lit(1e-6),
            pole_distance: T::lit(1e-6),
            pole_threshold: T::lit(1e-10),
        }
    }
}

impl<T: Real> EtaConfig<T> {
    pub fn with_fit_mode(mut self, mode: FitMode) -> Self {
        self.fit.mode = mode;
        self
    }

    pub fn with_tail(mut self, tail: TailMode) -> Self {
        self.tail = tail;
        self
    }
}

/// Error budget of one evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics<T> {
    pub fit_residual: T,
    pub fit_condition: Option<T>,
    /// Estimated error of the short-time remainder integral.
    pub quadrature_error: T,
    /// Estimated error of the large-time integral (zero in closed form).
    pub tail_error: T,
    pub t_cut: T,
    pub evaluations: usize,
}

/// Generalized value of a relative eta function at `s = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaValue<T> {
    /// `η₀`, the constant Laurent coefficient.
    pub finite_part: T,
    /// `(2/√π)·b_n`.
    pub residue: T,
    /// `(dim ker A₀, dim ker A₁)`.
    pub kernel_dims: (usize, usize),
    /// Set when `|residue|` exceeds the configured tolerance.
    pub irregular: bool,
    pub diagnostics: Diagnostics<T>,
    pub fit: AsymptoticFit<T>,
}

/// `ξ = ½(η₀ + dim ker A₁ − dim ker A₀)`.
pub fn reduced_eta<T: Real>(e: &EtaValue<T>) -> T {
    let (k0, k1) = e.kernel_dims;
    (e.finite_part + T::from_usize_lossy(k1) - T::from_usize_lossy(k0)) * T::lit(0.5)
}

/// `Σ sign(λ)|λ|^{−s}` over the nonzero spectrum.
pub fn eta_direct<T: Real>(s0: &Spectrum<T>, s: Complex<T>) -> Complex<T> {
    s0.nonzero()
        .map(|l| {
            let p = (-s * l.abs().ln()).exp();
            if l > T::zero() {
                p
            } else {
                -p
            }
        })
        .fold(Complex::zero(), |a, b| a + b)
}

/// Large-time tail at `s = 0` for one spectrum. Weighted:
/// `∫_{t_c}^∞ t^{−1/2} Σ λe^{−tλ²} dt = Σ sign(λ)√π erfc(|λ|√t_c)`.
/// Unweighted: `∫_{t_c}^∞ t^{−1} Σ e^{−tλ²} dt = Σ Γ(0, t_cλ²)`, both over the
/// nonzero spectrum.
pub fn closed_form_tail<T: Real>(s0: &Spectrum<T>, t_cut: T, weighted: bool) -> Result<T> {
    if !(t_cut > T::zero()) {
        return Err(Error::InvalidTime(t_cut.to_f64_lossy()));
    }
    let sqrt_pi = T::PI().sqrt();
    Ok(s0
        .nonzero()
        .map(|l| {
            if weighted {
                l.signum() * sqrt_pi * erfc(l.abs() * t_cut.sqrt())
            } else {
                upper_incomplete_gamma(Complex::zero(), t_cut * l * l).re
            }
        })
        .sum())
}

/// A trace measure prepared for Mellin evaluation: fit once, evaluate at
/// many `s`.
#[derive(Clone, Debug)]
pub struct MellinTransform<T> {
    measure: TraceMeasure<T>,
    fit: AsymptoticFit<T>,
    cfg: EtaConfig<T>,
}

fn cpow<T: Real>(x: T, e: Complex<T>) -> Complex<T> {
    (e * x.ln()).exp()
}

/// `Some(j)` when `z = −j` for an integer `j ≥ 0`.
fn nonpositive_integer<T: Real>(z: Complex<T>) -> Option<usize> {
    (z.im == T::zero() && z.re <= T::zero() && z.re == z.re.round()).then(|| (-z.re).to_usize().unwrap_or(0))
}

impl<T: Real> MellinTransform<T> {
    pub fn new(measure: TraceMeasure<T>, n: usize, cfg: &EtaConfig<T>) -> Result<Self> {
        let fit = fit_short_time(&measure, n, &cfg.fit)?;
        Ok(Self {
            measure,
            fit,
            cfg: *cfg,
        })
    }

    pub fn fit(&self) -> &AsymptoticFit<T> {
        &self.fit
    }

    pub fn measure(&self) -> &TraceMeasure<T> {
        &self.measure
    }

    fn offset(&self) -> T {
        T::from_usize_lossy(self.fit.offset as usize)
    }

    fn significant(&self, k: usize) -> bool {
        let max = self.fit.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        self.fit.coeff(k).abs() > self.cfg.pole_threshold * max
    }

    /// Poles `s = n − k` of the continuation, excluding those cancelled by
    /// zeros of `1/Γ((s+o)/2)`.
    pub fn poles(&self) -> Vec<T> {
        let o = self.fit.offset as i64;
        let n = self.fit.n as i64;
        (0..=self.fit.k_max)
            .filter(|&k| self.significant(k))
            .map(|k| n - k as i64)
            .filter(|&p| !(p + o <= 0 && (p + o) % 2 == 0))
            .map(|p| T::from_i64(p).unwrap())
            .collect()
    }

    /// `R(s)`, the integral of the fit remainder over `(0, t_c]`.
    fn remainder_integral(&self, s: Complex<T>) -> (Complex<T>, T, usize) {
        let tol = self.cfg.quad_tol * self.measure.total_weight().max(T::min_positive_value());
        let e = s + self.offset() - T::one();
        let two = T::lit(2.0);
        let q = match self.fit.mode {
            FitMode::ExactTaylor => {
                let degree = self.fit.taylor_degree;
                integrate(
                    |u: T| cpow(u, e) * self.measure.taylor_remainder(u * u, degree) * two,
                    T::zero(),
                    self.fit.t_cut.sqrt(),
                    tol,
                    self.cfg.quad_tol,
                    self.cfg.max_panels,
                )
            }
            FitMode::LeastSquares => integrate(
                |u: T| {
                    let t = u * u;
                    cpow(u, e) * (self.measure.value(t) - self.fit.evaluate(t)) * two
                },
                self.fit.t_min.sqrt(),
                self.fit.t_cut.sqrt(),
                tol,
                self.cfg.quad_tol,
                self.cfg.max_panels,
            ),
        };
        (q.value, q.error, q.evaluations)
    }

    /// `L(s) = ∫_{t_c}^∞ t^{(s+o)/2−1} h(t) dt`.
    fn tail_integral(&self, s: Complex<T>) -> (Complex<T>, T, usize) {
        let z = (s + self.offset()) * T::lit(0.5);
        let tc = self.fit.t_cut;
        match self.cfg.tail {
            TailMode::ClosedForm => {
                let v = self
                    .measure
                    .atoms()
                    .map(|(l, w)| {
                        let a = l.abs();
                        cpow(a, -(s + self.offset())) * upper_incomplete_gamma(z, tc * l * l) * w
                    })
                    .fold(Complex::zero(), |a, b| a + b);
                (v, T::zero(), 0)
            }
            TailMode::Quadrature => {
                let weight = self.measure.total_weight();
                let tol = self.cfg.quad_tol * weight.max(T::min_positive_value());
                let m = self.measure.min_square();
                let mut sum = Complex::<T>::zero();
                let mut err = T::zero();
                let mut evals = 0;
                let mut a = tc;
                let zr = z.re;
                for _ in 0..self.cfg.max_tail_panels {
                    let b = a * T::lit(2.0);
                    let q = integrate(
                        |t: T| cpow(t, z - T::one()) * self.measure.value(t),
                        a,
                        b,
                        tol,
                        self.cfg.quad_tol,
                        self.cfg.max_panels,
                    );
                    sum += q.value;
                    err += q.error;
                    evals += q.evaluations;
                    a = b;
                    // ∫_a^∞ t^{x−1}e^{−mt} dt ≤ a^{x−1}e^{−ma}/(m − (x−1)/a) once ma > 2(x−1).
                    let slack = m - (zr - T::one()).max(T::zero()) / a;
                    if m > T::zero() && a * m > T::lit(2.0) * zr.max(T::one()) && slack > T::zero() {
                        let bound = weight * a.powf(zr - T::one()) * (-m * a).exp() / slack;
                        if bound < tol {
                            return (sum, err + bound, evals);
                        }
                    }
                    if m == T::zero() || self.measure.is_zero() {
                        break;
                    }
                }
                let bound = if m > T::zero() {
                    weight * a.powf(zr - T::one()) * (-m * a).exp() / m
                } else {
                    T::infinity()
                };
                (sum, err + bound, evals)
            }
        }
    }

    fn diagnostics(&self, qerr: T, terr: T, evals: usize) -> Diagnostics<T> {
        Diagnostics {
            fit_residual: self.fit.residual,
            fit_condition: self.fit.condition,
            quadrature_error: qerr,
            tail_error: terr,
            t_cut: self.fit.t_cut,
            evaluations: evals,
        }
    }

    /// The continued transform at `s`, away from poles.
    pub fn evaluate(&self, s: Complex<T>) -> Result<(Complex<T>, Diagnostics<T>)> {
        for p in self.poles() {
            let d = (s - p).norm();
            if d < self.cfg.pole_distance {
                return Err(Error::NearPole {
                    s: format!("{s}"),
                    pole: p.to_f64_lossy(),
                    distance: d.to_f64_lossy(),
                });
            }
        }
        if self.measure.is_zero() {
            return Ok((Complex::zero(), self.diagnostics(T::zero(), T::zero(), 0)));
        }
        let z = (s + self.offset()) * T::lit(0.5);
        let n = T::from_usize_lossy(self.fit.n);
        let tc = self.fit.t_cut;
        if let Some(j) = nonpositive_integer(z) {
            // 1/Γ vanishes; only the matching pole term survives, with limit (−1)^j j!·b_k.
            let k = self.fit.n + self.fit.offset as usize + 2 * j;
            let mut fact = T::one();
            for i in 1..=j {
                fact *= T::from_usize_lossy(i);
            }
            let sign = if j % 2 == 0 { T::one() } else { -T::one() };
            let v = Complex::new(sign * fact * self.fit.coeff(k), T::zero());
            return Ok((v, self.diagnostics(T::zero(), T::zero(), 0)));
        }
        let mut bracket = Complex::<T>::zero();
        for (k, &b) in self.fit.coeffs.iter().enumerate() {
            if b == T::zero() {
                continue;
            }
            let d = s + T::from_usize_lossy(k) - n;
            bracket += cpow(tc, d * T::lit(0.5)) * b * T::lit(2.0) / d;
        }
        let (r, qerr, e1) = self.remainder_integral(s);
        let (l, terr, e2) = self.tail_integral(s);
        let g = recip_gamma(z);
        Ok((g * (bracket + r + l), self.diagnostics(qerr, terr, e1 + e2)))
    }

    /// Constant Laurent coefficient and residue at `s = 0`.
    pub fn value_at_zero(&self) -> Result<(T, T, Diagnostics<T>)> {
        if self.measure.is_zero() {
            return Ok((T::zero(), T::zero(), self.diagnostics(T::zero(), T::zero(), 0)));
        }
        let n = self.fit.n;
        let tc = self.fit.t_cut;
        let bn = self.fit.coeff(n);
        match self.fit.offset {
            0 => Ok((bn, T::zero(), self.diagnostics(T::zero(), T::zero(), 0))),
            1 => {
                let mut sum = T::zero();
                for (k, &b) in self.fit.coeffs.iter().enumerate() {
                    if k == n || b == T::zero() {
                        continue;
                    }
                    let d = T::from_usize_lossy(k) - T::from_usize_lossy(n);
                    sum += T::lit(2.0) * b * tc.powf(d * T::lit(0.5)) / d;
                }
                let s0 = Complex::zero();
                let (r, qerr, e1) = self.remainder_integral(s0);
                let (l, terr, e2) = self.tail_integral(s0);
                let sqrt_pi = T::PI().sqrt();
                let cross = tc.ln() + T::lit(EULER_GAMMA) + T::lit(2.0) * T::LN_2();
                let finite = (sum + r.re + l.re) / sqrt_pi + bn * cross / sqrt_pi;
                let residue = T::lit(2.0) * bn / sqrt_pi;
                Ok((finite, residue, self.diagnostics(qerr, terr, e1 + e2)))
            }
            o => Err(Error::Incompatible(format!("unsupported Mellin offset {o}"))),
        }
    }
}

/// `η(s; A₁, A₀)` from the two spectra, `n` the manifold dimension.
pub fn relative_eta_function<T: Real>(
    pair: &SpectralPair<T>,
    n: usize,
    s: Complex<T>,
    cfg: &EtaConfig<T>,
) -> Result<Complex<T>> {
    Ok(MellinTransform::new(TraceMeasure::eta(pair), n, cfg)?.evaluate(s)?.0)
}

/// Generalized value `η₀` of `η(s; A₁, A₀)` at zero with its residue.
pub fn relative_eta_invariant<T: Real>(pair: &SpectralPair<T>, n: usize, cfg: &EtaConfig<T>) -> Result<EtaValue<T>> {
    let mt = MellinTransform::new(TraceMeasure::eta(pair), n, cfg)?;
    let (finite_part, residue, diagnostics) = mt.value_at_zero()?;
    Ok(EtaValue {
        finite_part,
        residue,
        kernel_dims: pair.kernel_dims(),
        irregular: residue.abs() > cfg.residue_tol,
        diagnostics,
        fit: mt.fit,
    })
}

/// `ζ(s; A₁, A₀)` built from the kernel-subtracted heat-trace difference.
pub fn relative_zeta_function<T: Real>(
    pair: &SpectralPair<T>,
    n: usize,
    s: Complex<T>,
    cfg: &EtaConfig<T>,
) -> Result<Complex<T>> {
    Ok(MellinTransform::new(TraceMeasure::zeta(pair), n, cfg)?.evaluate(s)?.0)
}

/// `ζ(0; A₁, A₀)`: the zero of `1/Γ(s/2)` leaves only the `t⁰` coefficient.
pub fn relative_zeta_invariant<T: Real>(pair: &SpectralPair<T>, n: usize, cfg: &EtaConfig<T>) -> Result<T> {
    let mt = MellinTransform::new(TraceMeasure::zeta(pair), n, cfg)?;
    Ok(mt.value_at_zero()?.0)
}

/// Largest violation of `η(s;A₂,A₁) + η(s;A₁,A₀) = η(s;A₂,A₀)` over
/// `s_samples` and the generalized value at zero.
pub fn additivity_check<T: Real>(
    s0: &Spectrum<T>,
    s1: &Spectrum<T>,
    s2: &Spectrum<T>,
    n: usize,
    s_samples: &[Complex<T>],
    cfg: &EtaConfig<T>,
) -> Result<T> {
    let p10 = MellinTransform::new(TraceMeasure::eta(&SpectralPair::new(s0.clone(), s1.clone())), n, cfg)?;
    let p21 = MellinTransform::new(TraceMeasure::eta(&SpectralPair::new(s1.clone(), s2.clone())), n, cfg)?;
    let p20 = MellinTransform::new(TraceMeasure::eta(&SpectralPair::new(s0.clone(), s2.clone())), n, cfg)?;
    let mut worst = (p21.value_at_zero()?.0 + p10.value_at_zero()?.0 - p20.value_at_zero()?.0).abs();
    for &s in s_samples {
        if s.is_zero() {
            continue;
        }
        let d = p21.evaluate(s)?.0 + p10.evaluate(s)?.0 - p20.evaluate(s)?.0;
        worst = worst.max(d.norm());
    }
    Ok(worst)
}

/// `η₀` of a single finite spectrum: its signature over the nonzero part.
pub fn finite_eta<T: Real>(s0: &Spectrum<T>) -> T {
    T::from_i64(s0.signature()).unwrap()
}

/// `ξ = ½(η + dim ker)` of a single finite spectrum; always a half-integer.
pub fn finite_xi<T: Real>(s0: &Spectrum<T>) -> T {
    let k = crate::spectrum::kernel_dim(s0);
    (finite_eta(s0) + T::from_usize_lossy(k)) * T::lit(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_operator_pair, seeded};
    use crate::spectrum::eigensolve;
    use proptest::prelude::*;

    fn spec(v: &[f64]) -> Spectrum<f64> {
        Spectrum::from_eigenvalues(v.to_vec(), 1e-10)
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_pair(seed: u64, dim: usize) -> SpectralPair<f64> {
        let p = random_operator_pair::<f64>(&mut seeded(seed), dim, 10, 1.0).unwrap();
        SpectralPair::from_pair(&p).unwrap()
    }

    #[test]
    fn eta_direct_examples() {
        for s in [c(0.0, 0.0), c(1.3, 0.0), c(2.0, -1.0)] {
            assert!(eta_direct(&spec(&[1.0, -1.0]), s).norm() < 1e-15);
        }
        assert_eq!(eta_direct(&spec(&[1.0, -2.0, 3.0]), c(0.0, 0.0)).re, 1.0);
        assert!((eta_direct(&spec(&[2.0]), c(1.0, 0.0)).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_tail_examples() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((closed_form_tail(&spec(&[1.0]), 1e-300, true).unwrap() - sqrt_pi).abs() < 1e-14);
        assert_eq!(closed_form_tail(&spec(&[1.0, -1.0]), 0.7, true).unwrap(), 0.0);
        // erfc(2) = 4.677734981047266e-3
        let want = sqrt_pi * 4.677_734_981_047_266e-3;
        assert!((closed_form_tail(&spec(&[2.0]), 1.0, true).unwrap() - want).abs() < 1e-16);
        // Γ(0, 1) = E₁(1)
        let e1 = closed_form_tail(&spec(&[1.0]), 1.0, false).unwrap();
        assert!((e1 - 0.219_383_934_395_520_27).abs() < 1e-15);
        assert!(closed_form_tail(&spec(&[1.0]), 0.0, true).is_err());
    }

    #[test]
    fn signature_pair_example() {
        let pair = SpectralPair::new(spec(&[1.0, -1.0]), spec(&[1.0, 1.0]));
        let e = relative_eta_invariant(&pair, 1, &EtaConfig::default()).unwrap();
        assert!((e.finite_part - 2.0).abs() < 1e-12, "{}", e.finite_part);
        assert_eq!(e.residue, 0.0);
        assert!(!e.irregular);
        assert!((reduced_eta(&e) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_pair_vanishes() {
        let s = spec(&[-3.0, 0.5, 2.0]);
        let pair = SpectralPair::new(s.clone(), s);
        let cfg = EtaConfig::default();
        let e = relative_eta_invariant(&pair, 1, &cfg).unwrap();
        assert_eq!((e.finite_part, e.residue), (0.0, 0.0));
        for s in [c(0.5, 0.0), c(3.0, 1.0)] {
            assert_eq!(relative_eta_function(&pair, 1, s, &cfg).unwrap(), c(0.0, 0.0));
        }
        assert_eq!(relative_zeta_invariant(&pair, 1, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn reduced_eta_examples() {
        let mk = |eta, dims| EtaValue {
            finite_part: eta,
            residue: 0.0,
            kernel_dims: dims,
            irregular: false,
            diagnostics: Diagnostics::default(),
            fit: fit_short_time(&TraceMeasure::new(vec![], 1), 1, &FitConfig::default()).unwrap(),
        };
        assert_eq!(reduced_eta(&mk(2.0, (0, 0))), 1.0);
        assert_eq!(reduced_eta(&mk(0.0, (0, 2))), 1.0);
    }

    #[test]
    fn reduced_eta_is_negative_count_difference() {
        for seed in 0..20 {
            let pair = random_pair(seed, 40);
            let e = relative_eta_invariant(&pair, 1, &EtaConfig::default()).unwrap();
            let want = pair.s0.negative_count() as f64 - pair.s1.negative_count() as f64;
            assert!((reduced_eta(&e) - want).abs() < 1e-8, "seed {seed}");
        }
    }

    #[test]
    fn zeta_counting_examples() {
        let cfg = EtaConfig::default();
        let p = SpectralPair::new(spec(&[1.0, -1.0]), spec(&[1.0, 1.0]));
        assert_eq!(relative_zeta_invariant(&p, 1, &cfg).unwrap(), 0.0);
        let p = SpectralPair::new(spec(&[0.0, 1.0]), spec(&[2.0, 1.0]));
        assert!((relative_zeta_invariant(&p, 1, &cfg).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zeta_function_matches_direct_sum() {
        let pair = random_pair(5, 30);
        let direct = |s: Complex<f64>| {
            let f = |sp: &Spectrum<f64>| {
                sp.nonzero().map(|l| (-s * l.abs().ln()).exp()).fold(c(0.0, 0.0), |a, b| a + b)
            };
            f(&pair.s1) - f(&pair.s0)
        };
        for s in [c(1.5, 0.0), c(3.0, 0.7), c(-0.5, 0.2)] {
            let z = relative_zeta_function(&pair, 1, s, &EtaConfig::default()).unwrap();
            assert!((z - direct(s)).norm() < 1e-9 * (1.0 + direct(s).norm()), "s={s}");
        }
    }

    #[test]
    fn random_block_pair_matches_signature() {
        let mut rng = seeded(11);
        let a0 = random_hermitian::<f64>(&mut rng, 50, 1.0);
        let mut a1 = a0.clone();
        let block = random_hermitian::<f64>(&mut rng, 10, 1.5);
        for i in 0..10 {
            for j in 0..10 {
                a1[(20 + i, 20 + j)] += block[(i, j)];
            }
        }
        let s0 = crate::spectrum::eigensolve_matrix(&a0, false).unwrap();
        let s1 = crate::spectrum::eigensolve_matrix(&a1, false).unwrap();
        let want = (s1.signature() - s0.signature()) as f64;
        let pair = SpectralPair::new(s0, s1);
        let e = relative_eta_invariant(&pair, 1, &EtaConfig::default()).unwrap();
        assert!((e.finite_part - want).abs() < 1e-8);
        let q = EtaConfig::default().with_tail(TailMode::Quadrature);
        let e = relative_eta_invariant(&pair, 1, &q).unwrap();
        assert!((e.finite_part - want).abs() < 1e-4);
    }

    #[test]
    fn function_matches_direct_mellin_quadrature() {
        // Independent oracle: integrate t^{(s−1)/2} h(t) over (0, ∞) directly.
        let pair = random_pair(2, 30);
        let m = TraceMeasure::eta(&pair);
        let s = c(2.5, 0.5);
        let z = (s + 1.0) * 0.5;
        let f = |t: f64| cpow(t, z - 1.0) * m.value(t);
        let mut total = c(0.0, 0.0);
        let mut a = 0.0;
        let mut b = 1e-3;
        while b < 1e9 {
            total += integrate(f, a, b, 1e-15, 1e-13, 400).value;
            a = b;
            b *= 2.0;
        }
        let oracle = recip_gamma(z) * total;
        let got = relative_eta_function(&pair, 1, s, &EtaConfig::default()).unwrap();
        assert!((got - oracle).norm() < 1e-8 * (1.0 + oracle.norm()), "{got} vs {oracle}");
        let direct = eta_direct(&pair.s1, s) - eta_direct(&pair.s0, s);
        assert!((got - direct).norm() < 1e-10 * (1.0 + direct.norm()));
    }

    #[test]
    fn continuation_matches_finite_sum_at_negative_s() {
        let pair = random_pair(4, 30);
        let direct = eta_direct(&pair.s1, c(-2.5, 0.3)) - eta_direct(&pair.s0, c(-2.5, 0.3));
        let got = relative_eta_function(&pair, 1, c(-2.5, 0.3), &EtaConfig::default()).unwrap();
        assert!((got - direct).norm() < 1e-9 * (1.0 + direct.norm()));
        // s = −1: only the Tr A₁ − Tr A₀ term survives.
        let d1 = eta_direct(&pair.s1, c(-1.0, 0.0)) - eta_direct(&pair.s0, c(-1.0, 0.0));
        let got = relative_eta_function(&pair, 1, c(-1.0, 0.0), &EtaConfig::default()).unwrap();
        assert!((got - d1).norm() < 1e-10 * (1.0 + d1.norm()));
    }

    #[test]
    fn near_pole_reported() {
        let pair = random_pair(8, 20);
        let cfg = EtaConfig::default().with_fit_mode(FitMode::LeastSquares);
        let mt = MellinTransform::new(TraceMeasure::eta(&pair), 1, &cfg).unwrap();
        let pole = mt.poles()[0];
        let err = mt.evaluate(c(pole + 1e-8, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NearPole { .. }));
    }

    #[test]
    fn least_squares_mode_is_regular_on_matrices() {
        for seed in 0..5 {
            let pair = random_pair(100 + seed, 40);
            let cfg = EtaConfig::default().with_fit_mode(FitMode::LeastSquares);
            let e = relative_eta_invariant(&pair, 1, &cfg).unwrap();
            assert!(e.residue.abs() < 1e-3, "residue {}", e.residue);
            let want = pair.signature_difference() as f64;
            assert!((e.finite_part - want).abs() < 1e-3, "{} vs {want}", e.finite_part);
        }
    }

    #[test]
    fn scale_and_unitary_invariance() {
        let mut rng = seeded(21);
        let p = random_operator_pair::<f64>(&mut rng, 30, 6, 1.0).unwrap();
        let cfg = EtaConfig::default();
        let base = relative_eta_invariant(&SpectralPair::from_pair(&p).unwrap(), 1, &cfg).unwrap();
        let scaled = SpectralPair::from_operators(&p.a0.scaled(3.7), &p.a1.scaled(3.7)).unwrap();
        assert!((relative_eta_invariant(&scaled, 1, &cfg).unwrap().finite_part - base.finite_part).abs() < 1e-9);
        let u = crate::random::random_unitary::<f64>(&mut rng, 30).unwrap();
        let conj = SpectralPair::new(
            eigensolve(&p.a0.conjugated(&u), false).unwrap(),
            eigensolve(&p.a1.conjugated(&u), false).unwrap(),
        );
        let orig = SpectralPair::from_pair(&p).unwrap();
        for s in [c(0.7, 0.0), c(2.0, 1.0), c(4.0, 0.5)] {
            let a = relative_eta_function(&orig, 1, s, &cfg).unwrap();
            let b = relative_eta_function(&conj, 1, s, &cfg).unwrap();
            assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()), "s={s}");
        }
    }

    #[test]
    fn additivity_of_identical_triple_is_zero() {
        let s = spec(&[-1.0, 2.0]);
        let r = additivity_check(&s, &s, &s, 1, &[c(2.0, 0.0)], &EtaConfig::default()).unwrap();
        assert_eq!(r, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn antisymmetry(seed in 0u64..10_000, re in 0.5f64..5.0, im in -1.0f64..1.0) {
            let pair = random_pair(seed, 30);
            let cfg = EtaConfig::default();
            let s = c(re, im);
            let a = relative_eta_function(&pair, 1, s, &cfg).unwrap();
            let b = relative_eta_function(&pair.swapped(), 1, s, &cfg).unwrap();
            prop_assert!((a + b).norm() < 1e-10 * (1.0 + a.norm()));
        }

        #[test]
        fn finite_part_equals_signature_difference(seed in 0u64..10_000) {
            let pair = random_pair(seed, 40);
            let e = relative_eta_invariant(&pair, 1, &EtaConfig::default()).unwrap();
            prop_assert!((e.finite_part - pair.signature_difference() as f64).abs() < 1e-8);
            prop_assert_eq!(e.residue, 0.0);
        }

        #[test]
        fn additivity_on_random_triples(seed in 0u64..10_000) {
            let [s0, s1, s2] = crate::random::random_gapped_triple::<f64>(&mut seeded(seed), 30, 6, 0.1).unwrap();
            let r = additivity_check(&s0, &s1, &s2, 1, &[c(2.0, 0.0), c(4.0, 0.5)], &EtaConfig::default()).unwrap();
            prop_assert!(r < 1e-8, "residual {}", r);
        }
    }
}
