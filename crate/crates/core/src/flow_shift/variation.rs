//! Variation of the relative eta invariant along a path and the identity
//! linking it to spectral flow.

use super::flow::{spectral_flow, FlowConfig, FlowResult};
use crate::error::{Error, Result};
use crate::eta_zeta::{fit_short_time, reduced_eta, relative_eta_invariant, AsymptoticFit, EtaConfig, FitConfig, TraceMeasure};
use crate::lattice::OperatorPath;
use crate::scalar::Real;
use crate::spectrum::{eigensolve, SpectralPair, Spectrum};

/// Short-time coefficients `c_k(r)` of `Tr(Ȧ_r e^{−tA_r²})`.
pub fn variation_coefficient<T: Real>(path: &OperatorPath<T>, r: T, cfg: &FitConfig<T>) -> Result<AsymptoticFit<T>> {
    let spectrum = eigensolve(&path.evaluate(r), true)?;
    variation_fit(path, &spectrum, r, cfg)
}

fn variation_fit<T: Real>(
    path: &OperatorPath<T>,
    spectrum: &Spectrum<T>,
    r: T,
    cfg: &FitConfig<T>,
) -> Result<AsymptoticFit<T>> {
    let measure = TraceMeasure::variation(spectrum, path.patch(), path.schedule().derivative(r))?;
    fit_short_time(&measure, path.base().manifold_dim(), cfg)
}

/// `r_j = (1 − cos(πj/(m−1)))/2`, clustered at both ends.
pub fn chebyshev_grid<T: Real>(m: usize) -> Vec<T> {
    if m < 2 {
        return vec![T::zero(); m];
    }
    let d = T::from_usize_lossy(m - 1);
    (0..m)
        .map(|j| (T::one() - (T::PI() * T::from_usize_lossy(j) / d).cos()) * T::lit(0.5))
        .collect()
}

/// One row of a variation check.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationRow<T> {
    pub r: T,
    /// Central difference of `η₀(A_r, A_0)` in `r`.
    pub d_eta: T,
    /// `(2/√π)·c_n(r)`.
    pub predicted: T,
    /// Stencil half-width actually used.
    pub step: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariationReport<T> {
    pub rows: Vec<VariationRow<T>>,
    /// `max |d_eta + predicted|`.
    pub max_residual: T,
}

fn eta_at<T: Real>(path: &OperatorPath<T>, start: &Spectrum<T>, r: T, cfg: &EtaConfig<T>) -> Result<(T, usize)> {
    let s = eigensolve(&path.evaluate(r), false)?;
    let neg = s.negative_count();
    let kernel = crate::spectrum::kernel_dim(&s);
    let e = relative_eta_invariant(&SpectralPair::new(start.clone(), s), path.base().manifold_dim(), cfg)?;
    // A kernel inside the stencil is a crossing in progress.
    Ok((e.finite_part, if kernel > 0 { usize::MAX } else { neg }))
}

/// Compares `d/dr η₀(A_r, A_0)` with `−(2/√π)c_n(r)` on `r_grid`. Stencils
/// containing a zero crossing are halved up to `retries` times, after which
/// `StencilStraddlesCrossing` is returned.
pub fn variation_check<T: Real>(
    path: &OperatorPath<T>,
    r_grid: &[T],
    step: T,
    retries: usize,
    eta_cfg: &EtaConfig<T>,
    fit_cfg: &FitConfig<T>,
) -> Result<VariationReport<T>> {
    let start = eigensolve(&path.evaluate(T::zero()), false)?;
    let n = path.base().manifold_dim();
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let mut h = step;
        let mut found = None;
        for _ in 0..=retries {
            let lo = (r - h).max(T::zero());
            let hi = (r + h).min(T::one());
            let (el, nl) = eta_at(path, &start, lo, eta_cfg)?;
            let (eh, nh) = eta_at(path, &start, hi, eta_cfg)?;
            if nl == nh && nl != usize::MAX {
                found = Some(((eh - el) / (hi - lo), h));
                break;
            }
            h *= T::lit(0.5);
        }
        let (d_eta, used) = found.ok_or(Error::StencilStraddlesCrossing { r: r.to_f64_lossy() })?;
        let fit = variation_coefficient(path, r, fit_cfg)?;
        let predicted = T::lit(2.0) / T::PI().sqrt() * fit.coeff(n);
        rows.push(VariationRow {
            r,
            d_eta,
            predicted,
            step: used,
        });
    }
    let max_residual = rows.iter().fold(T::zero(), |m, row| m.max((row.d_eta + row.predicted).abs()));
    Ok(VariationReport { rows, max_residual })
}

/// Both sides of `ξ(0; A_1, A_0) − ½∫₀¹ (d/dr η̄₀) dr = sf`, where the
/// integrand is `−(2/√π)c_n(r)` integrated by the trapezoid rule.
#[derive(Clone, Debug, PartialEq)]
pub struct SfIdentityReport<T> {
    pub xi: T,
    pub eta0: T,
    pub kernel_dims: (usize, usize),
    pub variation_integral: T,
    pub sf: i64,
    pub residual: T,
    pub flow: FlowResult<T>,
    pub c_n: Vec<(T, T)>,
}

impl<T: Real> SfIdentityReport<T> {
    /// `ξ − ½∫` rounds to `sf` and sits within `tol` of it.
    pub fn integer_match(&self, tol: T) -> bool {
        let lhs = self.xi - self.variation_integral;
        lhs.round() == T::from_i64(self.sf).unwrap() && self.residual < tol
    }

    /// `η₀ − (2·sf − dim ker A₁ + dim ker A₀)`.
    pub fn eta_identity_residual(&self) -> T {
        let (k0, k1) = self.kernel_dims;
        let rhs = T::from_i64(2 * self.sf).unwrap() - T::from_usize_lossy(k1) + T::from_usize_lossy(k0);
        (self.eta0 - rhs).abs()
    }
}

pub fn sf_eta_identity<T: Real>(
    path: &OperatorPath<T>,
    r_grid: &[T],
    eta_cfg: &EtaConfig<T>,
    fit_cfg: &FitConfig<T>,
    flow_cfg: &FlowConfig<T>,
) -> Result<SfIdentityReport<T>> {
    let s0 = eigensolve(&path.evaluate(T::zero()), false)?;
    let s1 = eigensolve(&path.evaluate(T::one()), false)?;
    let e = relative_eta_invariant(&SpectralPair::new(s0, s1), path.base().manifold_dim(), eta_cfg)?;
    let xi = reduced_eta(&e);
    let flow = spectral_flow(path, flow_cfg)?;
    let n = path.base().manifold_dim();
    let mut c_n = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        c_n.push((r, variation_coefficient(path, r, fit_cfg)?.coeff(n)));
    }
    let factor = T::lit(2.0) / T::PI().sqrt();
    let integral: T = c_n
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * T::lit(0.5))
        .sum();
    let variation_integral = -factor * integral * T::lit(0.5);
    let residual = (xi - variation_integral - T::from_i64(flow.sf).unwrap()).abs();
    Ok(SfIdentityReport {
        xi,
        eta0: e.finite_part,
        kernel_dims: e.kernel_dims,
        variation_integral,
        sf: flow.sf,
        residual,
        flow,
        c_n,
    })
}
