//! Construction of polytropic and general-Casimir steady states.

pub mod casimir;
pub mod export;
pub mod moments;
pub mod sample;
pub mod shoot;
pub mod state;

pub use casimir::{polytrope_constant, qprime_inverse, Casimir, CasimirFunction};
pub use export::{export_steady, write_table, SteadyHeader, TABLE_HEADER};
pub use moments::h_phi_eval;
pub use shoot::{emden_fowler_shoot, scale_to_mass, shoot, DensityLaw, RadialSolution, ShootOptions};
pub use state::{build_steady, BuildOptions, GridSpec, RadialTable, SteadyEnergies, SteadyState};
pub use sample::{sample_f0, sampler, PhaseSampler};
