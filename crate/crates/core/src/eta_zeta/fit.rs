//! Weighted heat-trace measures and their short-time expansions.

use crate::error::{Error, Result};
use crate::lattice::Potential;
use crate::scalar::Real;
use crate::spectrum::{log_spaced, SpectralPair, Spectrum};

/// A trace of the form `h(t) = Σ wᵢ e^{−tλᵢ²}` together with the Mellin
/// offset `o`: the transform is `∫ t^{(s+o)/2 − 1} h(t) dt`, and the
/// short-time basis is `t^{(k−n−o)/2}`.
///
/// Relative eta traces have `o = 1`, `w = ±λ`; relative zeta traces have
/// `o = 0`, `w = ±1`; variation traces have `o = 1`, `w = ⟨v, Ȧv⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceMeasure<T> {
    lambdas: Vec<T>,
    weights: Vec<T>,
    offset: u32,
}

impl<T: Real> TraceMeasure<T> {
    /// Collects `(λ, w)` atoms, merging bitwise-equal `λ` so that identical
    /// spectra cancel exactly, and dropping zero weights.
    pub fn new(mut atoms: Vec<(T, T)>, offset: u32) -> Self {
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut lambdas = Vec::with_capacity(atoms.len());
        let mut weights: Vec<T> = Vec::with_capacity(atoms.len());
        for (l, w) in atoms {
            if lambdas.last() == Some(&l) {
                *weights.last_mut().unwrap() += w;
            } else {
                lambdas.push(l);
                weights.push(w);
            }
        }
        let (lambdas, weights) = lambdas
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w != T::zero())
            .unzip();
        Self {
            lambdas,
            weights,
            offset,
        }
    }

    /// `Tr(A₁e^{−tA₁²} − A₀e^{−tA₀²})` restricted to nonzero eigenvalues.
    pub fn eta(pair: &SpectralPair<T>) -> Self {
        let atoms = pair
            .s1
            .nonzero()
            .map(|l| (l, l))
            .chain(pair.s0.nonzero().map(|l| (l, -l)))
            .collect();
        Self::new(atoms, 1)
    }

    /// Kernel-subtracted `Tr(e^{−tA₁²} − e^{−tA₀²})`.
    pub fn zeta(pair: &SpectralPair<T>) -> Self {
        let atoms = pair
            .s1
            .nonzero()
            .map(|l| (l, T::one()))
            .chain(pair.s0.nonzero().map(|l| (l, -T::one())))
            .collect();
        Self::new(atoms, 0)
    }

    /// `Tr(Ȧ e^{−tA²})` for `Ȧ = scale·patch`; needs eigenvectors.
    pub fn variation(spectrum: &Spectrum<T>, patch: &Potential<T>, scale: T) -> Result<Self> {
        let v = spectrum
            .eigenvectors()
            .ok_or_else(|| Error::Incompatible("variation traces need eigenvectors".into()))?;
        let r = patch.rank();
        if v.rows() != patch.num_nodes() * r {
            return Err(Error::Incompatible("patch does not match the operator size".into()));
        }
        let atoms = spectrum
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(j, &l)| {
                let mut w = T::zero();
                for &node in patch.support() {
                    let b = patch.block(node);
                    for a in 0..r {
                        let va = v[(node * r + a, j)].conj();
                        for c in 0..r {
                            w += (va * b[(a, c)] * v[(node * r + c, j)]).re;
                        }
                    }
                }
                (l, w * scale)
            })
            .collect();
        Ok(Self::new(atoms, 1))
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn atoms(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.lambdas.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ |w|`, the scale against which absolute errors are measured.
    pub fn total_weight(&self) -> T {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn spectral_radius(&self) -> T {
        self.lambdas.iter().fold(T::zero(), |m, l| m.max(l.abs()))
    }

    /// Smallest `λ²` carrying weight; governs the large-time decay.
    pub fn min_square(&self) -> T {
        self.lambdas.iter().fold(T::infinity(), |m, l| m.min(*l * *l))
    }

    pub fn value(&self, t: T) -> T {
        self.atoms().map(|(l, w)| w * (-t * l * l).exp()).sum()
    }

    /// `μ_m = Σ w λ^{2m}`; the Taylor coefficient of `t^m` is `(−1)^m μ_m/m!`.
    pub fn moment(&self, m: usize) -> T {
        self.atoms().map(|(l, w)| w * (l * l).powi(m as i32)).sum()
    }

    /// `h(t)` minus its Taylor polynomial of degree `degree`, evaluated atom by
    /// atom without cancellation.
    pub fn taylor_remainder(&self, t: T, degree: Option<usize>) -> T {
        match degree {
            None => self.value(t),
            Some(d) => self.atoms().map(|(l, w)| w * exp_remainder(t * l * l, d)).sum(),
        }
    }
}

/// `e^{−x} − Σ_{m≤d} (−x)^m/m!` for `x ≥ 0`.
pub fn exp_remainder<T: Real>(x: T, degree: usize) -> T {
    if x > T::lit(2.0) {
        let mut poly = T::zero();
        let mut term = T::one();
        for m in 0..=degree {
            if m > 0 {
                term = -term * x / T::from_usize_lossy(m);
            }
            poly += term;
        }
        return (-x).exp() - poly;
    }
    let mut term = T::one();
    for m in 1..=degree {
        term = -term * x / T::from_usize_lossy(m);
    }
    let mut sum = T::zero();
    for m in degree + 1..200 {
        term = -term * x / T::from_usize_lossy(m);
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMode {
    /// Coefficients read off the Taylor series of a finite spectrum.
    ExactTaylor,
    /// Least-squares fit to sampled values on the window.
    LeastSquares,
}

/// How the short-time window is placed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window<T> {
    /// `t_cut = min(1, c/ρ²)` with `ρ` the spectral radius, window
    /// `[ratio·t_cut, t_cut]`.
    Auto { c: T, ratio: T },
    /// Explicit window `[lo, hi]` with `t_cut = hi`.
    Fixed { lo: T, hi: T },
}

impl<T: Real> Window<T> {
    /// `(t_min, t_cut)` for a measure of spectral radius `rho`.
    pub fn resolve(&self, rho: T) -> Result<(T, T)> {
        let (lo, hi) = match *self {
            Window::Auto { c, ratio } => {
                let tc = if rho > T::zero() { (c / (rho * rho)).min(T::one()) } else { T::one() };
                (ratio * tc, tc)
            }
            Window::Fixed { lo, hi } => (lo, hi),
        };
        if !(lo > T::zero() && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidTime(lo.to_f64_lossy()));
        }
        Ok((lo, hi))
    }
}

/// Knobs of the short-time fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig<T> {
    pub mode: FitMode,
    pub window: Window<T>,
    /// Number of log-spaced samples on the window.
    pub samples: usize,
    /// Highest fitted index `K`; `None` means `n + 7`.
    pub k_max: Option<usize>,
    pub max_condition: T,
}

impl<T: Real> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            mode: FitMode::ExactTaylor,
            window: Window::Auto {
                c: T::lit(0.25),
                ratio: T::lit(1e-4),
            },
            samples: 60,
            k_max: None,
            max_condition: T::lit(1e12),
        }
    }
}

impl<T: Real> FitConfig<T> {
    pub fn least_squares() -> Self {
        Self {
            mode: FitMode::LeastSquares,
            ..Self::default()
        }
    }
}

/// Coefficients of `h(t) ≈ Σ_{k≤K} coeffs[k]·t^{(k−n−o)/2}` for `t ≤ t_cut`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticFit<T> {
    pub n: usize,
    pub k_max: usize,
    pub offset: u32,
    pub coeffs: Vec<T>,
    pub t_min: T,
    pub t_cut: T,
    /// Sup-norm of `samples − fit` on the window.
    pub residual: T,
    pub mode: FitMode,
    /// Condition number of the column-normalized design matrix (least squares only).
    pub condition: Option<T>,
    /// Highest Taylor degree absorbed into the fit (exact mode only).
    pub taylor_degree: Option<usize>,
}

impl<T: Real> AsymptoticFit<T> {
    /// Exponent `(k − n − o)/2` of the `k`-th basis function.
    pub fn exponent(&self, k: usize) -> T {
        basis_exponent(k, self.n, self.offset)
    }

    pub fn evaluate(&self, t: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != T::zero())
            .map(|(k, &c)| c * t.powf(self.exponent(k)))
            .sum()
    }

    /// Coefficient of `t^{(k−n−o)/2}`, zero beyond `K`.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or(T::zero())
    }

    /// Largest `|coeffs[k]|` over even or odd `k`.
    pub fn max_parity(&self, even: bool) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| (k % 2 == 0) == even)
            .fold(T::zero(), |m, (_, c)| m.max(c.abs()))
    }

    /// `max|c_even| / max|c_odd|`; zero when every coefficient vanishes.
    pub fn even_to_odd_ratio(&self) -> T {
        let (e, o) = (self.max_parity(true), self.max_parity(false));
        if e == T::zero() {
            T::zero()
        } else {
            e / o
        }
    }
}

fn basis_exponent<T: Real>(k: usize, n: usize, offset: u32) -> T {
    (T::from_usize_lossy(k) - T::from_usize_lossy(n) - T::from_usize_lossy(offset as usize)) * T::lit(0.5)
}

/// Fits the short-time expansion of `measure` in dimension `n`.
pub fn fit_short_time<T: Real>(measure: &TraceMeasure<T>, n: usize, cfg: &FitConfig<T>) -> Result<AsymptoticFit<T>> {
    let k_max = cfg.k_max.unwrap_or(n + 7);
    let (t_min, t_cut) = cfg.window.resolve(measure.spectral_radius())?;
    let grid = log_spaced(t_min, t_cut, cfg.samples.max(2));
    let values: Vec<T> = grid.iter().map(|&t| measure.value(t)).collect();
    match cfg.mode {
        FitMode::LeastSquares => fit_samples(&grid, &values, n, k_max, measure.offset(), cfg.max_condition),
        FitMode::ExactTaylor => {
            let o = measure.offset() as usize;
            let mut coeffs = vec![T::zero(); k_max + 1];
            let mut degree = None;
            let mut factorial = T::one();
            let mut m = 0;
            while n + o + 2 * m <= k_max {
                if m > 0 {
                    factorial *= T::from_usize_lossy(m);
                }
                let sign = if m % 2 == 0 { T::one() } else { -T::one() };
                coeffs[n + o + 2 * m] = sign * measure.moment(m) / factorial;
                degree = Some(m);
                m += 1;
            }
            let mut fit = AsymptoticFit {
                n,
                k_max,
                offset: measure.offset(),
                coeffs,
                t_min,
                t_cut,
                residual: T::zero(),
                mode: FitMode::ExactTaylor,
                condition: None,
                taylor_degree: degree,
            };
            fit.residual = grid
                .iter()
                .map(|&t| measure.taylor_remainder(t, degree).abs())
                .fold(T::zero(), T::max);
            Ok(fit)
        }
    }
}

/// Least-squares fit of sampled values `h(tᵢ)` against `{t^{(k−n−o)/2}}_{k≤K}`
/// using a column-normalized SVD.
pub fn fit_samples<T: Real>(
    t_grid: &[T],
    values: &[T],
    n: usize,
    k_max: usize,
    offset: u32,
    max_condition: T,
) -> Result<AsymptoticFit<T>> {
    let rows = t_grid.len();
    let cols = k_max + 1;
    if rows < cols || values.len() != rows {
        return Err(Error::FitUnstable { condition: f64::INFINITY });
    }
    let mut design = vec![T::zero(); rows * cols];
    for (i, &t) in t_grid.iter().enumerate() {
        for k in 0..cols {
            design[i * cols + k] = t.powf(basis_exponent(k, n, offset));
        }
    }
    let norms: Vec<T> = (0..cols)
        .map(|k| (0..rows).map(|i| design[i * cols + k].powi(2)).sum::<T>().sqrt())
        .collect();
    for i in 0..rows {
        for k in 0..cols {
            design[i * cols + k] /= norms[k];
        }
    }
    let (u, s, v) = T::real_svd(rows, cols, &design)?;
    let smax = s.iter().copied().fold(T::zero(), T::max);
    let smin = s.iter().copied().fold(T::infinity(), T::min);
    let condition = smax / smin;
    if !(condition <= max_condition) {
        return Err(Error::FitUnstable {
            condition: condition.to_f64_lossy(),
        });
    }
    let r = s.len();
    let mut coeffs = vec![T::zero(); cols];
    for j in 0..r {
        let proj: T = (0..rows).map(|i| u[i * r + j] * values[i]).sum::<T>() / s[j];
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c += v[k * r + j] * proj;
        }
    }
    for (c, nrm) in coeffs.iter_mut().zip(&norms) {
        *c /= *nrm;
    }
    let mut fit = AsymptoticFit {
        n,
        k_max,
        offset,
        coeffs,
        t_min: t_grid[0],
        t_cut: t_grid[rows - 1],
        residual: T::zero(),
        mode: FitMode::LeastSquares,
        condition: Some(condition),
        taylor_degree: None,
    };
    fit.residual = t_grid
        .iter()
        .zip(values)
        .map(|(&t, &h)| (h - fit.evaluate(t)).abs())
        .fold(T::zero(), T::max);
    Ok(fit)
}
