//! Scalar functionals on steady states and particle ensembles.

mod distance;
mod energy;
mod norms;

pub use distance::{
    d_distance, dd_identity_check, dd_identity_residual, e0_identity, energy_casimir, field_distance,
    steady_field_energy, Evaluation, FieldDistance, FunctionalReport, SteadyConstants,
};
pub use energy::{
    casimir_functional, kinetic_energy, pair_interaction, potential_energy_extrapolated, potential_energy_particles,
    potential_energy_radial, self_interaction, PairMethod, PairOptions, RadialDensity, RadialPotentialEnergy,
    UniformBall,
};
pub use norms::{lp_norm, lp_norm_ensemble};
