//! Particle evolution along the characteristics of the self-consistent field.

mod evolve;
mod force;
mod integrator;
mod snapshot;

pub use evolve::{
    angular_momenta, conserved_quantities, evolve, particle_energies, DiagnosticsRecord, EvolveOptions, Trajectory,
};
pub use force::{default_softening, force_solver, registry as force_registry, Direct, ForceParams, ForceSolver, Frozen, Shell, Tree};
pub use integrator::{integrator, leapfrog_step, registry as integrator_registry, DriftKickDrift, Integrator, KickDriftKick};
pub use snapshot::{read_snapshot, read_snapshot_from, write_snapshot, write_snapshot_to, SNAPSHOT_HEADER};
