//! Gluing-law checks: the θ-scan of the reduced eta invariant, the
//! splitting of `ξ(0; A₁, A₀)` into compact-piece contributions, and the
//! mod-2 identity between `η₀` and spectral flow.

use super::theta::build_theta_bvp;
use crate::error::{Error, Result};
use crate::eta_zeta::{finite_xi, reduced_eta, relative_eta_invariant, EtaConfig};
use crate::flow_shift::{spectral_flow, FlowConfig};
use crate::lattice::{build_aps_halfline, DiracOperator, OperatorPair, OperatorPath, Side};
use crate::scalar::Real;
use crate::spectrum::{eigensolve, eigensolve_matrix, SpectralPair};

/// Distance from `x` to the nearest integer.
pub fn distance_to_integer<T: Real>(x: T) -> T {
    (x - x.round()).abs()
}

/// Distance from `x` to the nearest even integer.
pub fn distance_to_even<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    (x - (x / two).round() * two).abs()
}

/// `x mod 1` in `[0, 1)`.
fn frac<T: Real>(x: T) -> T {
    let f = x - x.floor();
    if f >= T::one() {
        T::zero()
    } else {
        f
    }
}

/// Continuous lift of a sequence of values known modulo one: each step is
/// moved by an integer into `(−½, ½]`.
pub fn lift_mod_one<T: Real>(values: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(values.len());
    for &v in values {
        let f = frac(v);
        match out.last() {
            None => out.push(f),
            Some(&prev) => {
                let d = f - frac(prev);
                let d = d - d.round();
                out.push(prev + d);
            }
        }
    }
    out
}

/// `ξ̄(0; A₁(θ), A₀)` over a θ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaScan<T> {
    pub thetas: Vec<T>,
    /// Unreduced `ξ` from the eta pipeline.
    pub xi: Vec<T>,
    /// `ξ mod 1`, lifted continuously along the grid.
    pub xi_bar: Vec<T>,
    /// `max_θ |ξ̄(θ) − ξ̄(π/4)|`, with `π/4` taken from the grid point
    /// nearest to it.
    pub sup_variation: T,
}

/// Runs the θ-BVP of `pair.a1` at `cut` against the uncut `pair.a0`.
pub fn theta_xi_scan<T: Real>(
    pair: &OperatorPair<T>,
    cut: usize,
    thetas: &[T],
    cfg: &EtaConfig<T>,
) -> Result<ThetaScan<T>> {
    if thetas.is_empty() {
        return Err(Error::Incompatible("empty θ grid".into()));
    }
    let s0 = eigensolve(&pair.a0, false)?;
    let n = pair.a0.manifold_dim();
    let mut xi = Vec::with_capacity(thetas.len());
    for &th in thetas {
        let bvp = build_theta_bvp(&pair.a1, cut, th)?;
        let s1 = eigensolve(&bvp.operator, false)?;
        let e = relative_eta_invariant(&SpectralPair::new(s0.clone(), s1), n, cfg)?;
        xi.push(reduced_eta(&e));
    }
    let xi_bar = lift_mod_one(&xi);
    let quarter = T::FRAC_PI_4();
    let anchor = (0..thetas.len())
        .min_by(|&i, &j| {
            (thetas[i] - quarter)
                .abs()
                .partial_cmp(&(thetas[j] - quarter).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let sup_variation = xi_bar
        .iter()
        .fold(T::zero(), |m, &v| m.max((v - xi_bar[anchor]).abs()));
    Ok(ThetaScan {
        thetas: thetas.to_vec(),
        xi,
        xi_bar,
        sup_variation,
    })
}

/// `ξ(0; A₁, A₀) − ξ′(A₁') + ξ′(A₀')` reduced mod 1, where the primed
/// operators are the APS pieces on the side of the cut carrying the patch.
#[derive(Clone, Debug, PartialEq)]
pub struct GluingReport<T> {
    pub xi: T,
    pub xi_piece1: T,
    pub xi_piece0: T,
    pub side: Side,
    /// Distance of `xi − xi_piece1 + xi_piece0` to `ℤ`.
    pub residual: T,
}

/// The side of `cut` holding every node where the pair differs.
fn patch_side<T: Real>(pair: &OperatorPair<T>, cut: usize) -> Result<Side> {
    let support = pair.diff_support();
    if support.iter().all(|&s| s <= cut) {
        Ok(Side::Left)
    } else if support.iter().all(|&s| s > cut) {
        Ok(Side::Right)
    } else {
        Err(Error::NotProductNearCut(format!(
            "the pair differs on both sides of node {cut}"
        )))
    }
}

fn piece_xi<T: Real>(a: &DiracOperator<T>, cut: usize, side: Side) -> Result<T> {
    let piece = build_aps_halfline(a, cut, side, false)?;
    Ok(finite_xi(&eigensolve(&piece, false)?))
}

pub fn gluing_check<T: Real>(pair: &OperatorPair<T>, cut: usize, cfg: &EtaConfig<T>) -> Result<GluingReport<T>> {
    let side = patch_side(pair, cut)?;
    let sp = SpectralPair::from_pair(pair)?;
    let xi = reduced_eta(&relative_eta_invariant(&sp, pair.a0.manifold_dim(), cfg)?);
    let xi_piece1 = piece_xi(&pair.a1, cut, side)?;
    let xi_piece0 = piece_xi(&pair.a0, cut, side)?;
    Ok(GluingReport {
        xi,
        xi_piece1,
        xi_piece0,
        side,
        residual: distance_to_integer(xi - xi_piece1 + xi_piece0),
    })
}

/// `η₀(A₁, A₀) ≡ 2·sf − dim ker A₁ + dim ker A₀ (mod 2ℤ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mod2Report<T> {
    pub eta0: T,
    pub sf: i64,
    pub kernel_dims: (usize, usize),
    /// `|η₀ − (2sf − k₁ + k₀)|`.
    pub exact_residual: T,
    /// Distance of `η₀ − (2sf − k₁ + k₀)` to `2ℤ`.
    pub residual: T,
}

pub fn mod2z_check<T: Real>(
    path: &OperatorPath<T>,
    eta_cfg: &EtaConfig<T>,
    flow_cfg: &FlowConfig<T>,
) -> Result<Mod2Report<T>> {
    let s0 = eigensolve_matrix(path.start(), false)?;
    let s1 = eigensolve_matrix(path.end(), false)?;
    let e = relative_eta_invariant(&SpectralPair::new(s0, s1), path.base().manifold_dim(), eta_cfg)?;
    let sf = spectral_flow(path, flow_cfg)?.sf;
    let (k0, k1) = e.kernel_dims;
    let rhs = T::from_i64(2 * sf).unwrap() - T::from_usize_lossy(k1) + T::from_usize_lossy(k0);
    let diff = e.finite_part - rhs;
    Ok(Mod2Report {
        eta0: e.finite_part,
        sf,
        kernel_dims: e.kernel_dims,
        exact_residual: diff.abs(),
        residual: distance_to_even(diff),
    })
}
