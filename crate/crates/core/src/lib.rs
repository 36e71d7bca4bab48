//! Relative eta and zeta invariants of pairs of lattice Dirac-type operators,
//! with spectral flow, spectral shift and gluing checks.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the precision for the common types.

// `!(x > 0)` is how NaN gets rejected along with the non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eta_zeta;
pub mod flow_shift;
pub mod gluing;
pub mod lattice;
pub mod matrix;
pub mod quadrature;
pub mod random;
pub mod scalar;
pub mod special;
pub mod spectrum;
pub mod verification;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Real;

pub type Matrix64 = matrix::Matrix<f64>;
pub type Matrix32 = matrix::Matrix<f32>;
pub type DiracOperator64 = lattice::DiracOperator<f64>;
pub type DiracOperator32 = lattice::DiracOperator<f32>;
pub type OperatorPair64 = lattice::OperatorPair<f64>;
pub type OperatorPair32 = lattice::OperatorPair<f32>;
pub type OperatorPath64 = lattice::OperatorPath<f64>;
pub type OperatorPath32 = lattice::OperatorPath<f32>;
pub type Spectrum64 = spectrum::Spectrum<f64>;
pub type Spectrum32 = spectrum::Spectrum<f32>;
pub type SpectralPair64 = spectrum::SpectralPair<f64>;
pub type SpectralPair32 = spectrum::SpectralPair<f32>;
pub type EtaValue64 = eta_zeta::EtaValue<f64>;
pub type EtaValue32 = eta_zeta::EtaValue<f32>;
pub type AsymptoticFit64 = eta_zeta::AsymptoticFit<f64>;
pub type AsymptoticFit32 = eta_zeta::AsymptoticFit<f32>;
pub type ThetaBVP64 = gluing::ThetaBVP<f64>;
pub type ThetaBVP32 = gluing::ThetaBVP<f32>;

/// Sizes the global rayon pool used for independent eigensolves and keeps
/// the dense kernels sequential, so results do not depend on the thread
/// count. Fails if the pool was already built.
pub fn configure_threads(threads: Option<usize>) -> Result<()> {
    faer::set_global_parallelism(faer::Par::Seq);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build_global()
        .map_err(|e| Error::Incompatible(format!("thread pool: {e}")))
}
