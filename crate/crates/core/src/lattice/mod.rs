//! Discretized Dirac-type operators, Callias-type potentials, operator pairs
//! and paths, and cut-domain boundary-value problems.

mod boundary;
mod grid;
mod operator;
mod pair;
mod potential;

pub use boundary::{
    build_aps_halfline, cut_copies, fold_at_cut, restrict_to_boundary, restrict_to_boundary_with_collar,
    BoundaryOperator, Constraint, Side, DEFAULT_COLLAR,
};
pub use grid::{Grid, Topology};
pub use operator::{
    build_dirac_1d, build_dirac_2d, derivative_matrix, real_field, symbol_frequencies, DerivativeScheme,
    DiracOperator, Geometry,
};
pub use pair::{make_pair, OperatorPair, OperatorPath, Schedule};
pub use potential::{Potential, PotentialKind};
