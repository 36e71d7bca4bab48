//! Relative eta and zeta invariants from short-time fits and Mellin continuation.

mod fit;
mod mellin;

pub use fit::{
    exp_remainder, fit_samples, fit_short_time, AsymptoticFit, FitConfig, FitMode, TraceMeasure, Window,
};
pub use mellin::{
    additivity_check, closed_form_tail, eta_direct, finite_eta, finite_xi, reduced_eta, relative_eta_function,
    relative_eta_invariant, relative_zeta_function, relative_zeta_invariant, Diagnostics, EtaConfig, EtaValue,
    MellinTransform, TailMode,
};

use crate::error::Result;
use crate::lattice::OperatorPair;
use crate::scalar::Real;
use crate::spectrum::SpectralPair;

/// `η₀` of an operator pair, with `n` taken from the operators.
pub fn pair_eta_invariant<T: Real>(pair: &OperatorPair<T>, cfg: &EtaConfig<T>) -> Result<EtaValue<T>> {
    relative_eta_invariant(&SpectralPair::from_pair(pair)?, pair.a0.manifold_dim(), cfg)
}

/// `ζ(0)` of an operator pair.
pub fn pair_zeta_invariant<T: Real>(pair: &OperatorPair<T>, cfg: &EtaConfig<T>) -> Result<T> {
    relative_zeta_invariant(&SpectralPair::from_pair(pair)?, pair.a0.manifold_dim(), cfg)
}
