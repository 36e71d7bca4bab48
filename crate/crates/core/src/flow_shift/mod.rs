//! Spectral flow along paths, the Krein spectral shift function, large-time
//! decay and the variation formula for the relative eta invariant.

mod flow;
mod shift;
mod variation;

pub use flow::{endpoint_flow, min_abs_along, spectral_flow, Crossing, FlowConfig, FlowResult, FlowSample};
pub use shift::{decay_check, krein_check, DecayFit, ShiftNormalization, SpectralShift, TestFunction};
pub use variation::{
    chebyshev_grid, sf_eta_identity, variation_check, variation_coefficient, SfIdentityReport, VariationReport,
    VariationRow,
};
