//! Cutting and gluing of one-dimensional lattice operators: the θ family of
//! boundary conditions and the gluing and mod-2 identities built on it.

mod checks;
mod theta;

pub use checks::{
    distance_to_even, distance_to_integer, gluing_check, lift_mod_one, mod2z_check, theta_xi_scan, GluingReport,
    Mod2Report, ThetaScan,
};
pub use theta::{build_theta_bvp, doubled_boundary, multiset_distance, ThetaBVP};
