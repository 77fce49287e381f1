//! Perturbations of steady states, shifted stability metrics and the
//! experiment driver.

mod concentration;
mod config;
mod experiment;
mod perturb;
mod shift;

pub use concentration::{concentration_profile, ConcentrationOptions, ConcentrationPoint};
pub use config::{ExperimentConfig, FieldEstimate, IntegratorSpec, PerturbationSpec, SteadySpec};
pub use experiment::{measure, stability_experiment, steady_from_spec, ExperimentReport, MetricRecord};
pub use perturb::{
    perturb, perturbation, registry as perturbation_registry, reweight, Amplitude, Boost, Mode, Perturbation,
    RandomPhase, SplitBulk, Unperturbed,
};
pub use shift::{bulk_ball, bulk_centroid, optimal_shift, ShiftOptions, ShiftResult};
