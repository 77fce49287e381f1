//! Time integration driver and conserved-quantity diagnostics.

use serde::{Deserialize, Serialize};

use super::force::ForceSolver;
use super::integrator::Integrator;
use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::{Error, Result};
use crate::steady::SteadyState;

/// Monitored scalars of one ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: usize,
    pub mass: f64,
    pub momentum: [f64; 3],
    pub angular_momentum: [f64; 3],
    pub e_kin: f64,
    pub e_pot: f64,
    pub energy: f64,
    /// Mean and maximum of the per-particle `|L|`.
    pub l_mean: f64,
    pub l_max: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: [&'static str; 14] = [
        "t", "step", "mass", "p_x", "p_y", "p_z", "l_x", "l_y", "l_z", "e_kin", "e_pot", "energy", "l_mean", "l_max",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let mut row = vec![format!("{:e}", self.t), self.step.to_string(), format!("{:e}", self.mass)];
        row.extend(self.momentum.iter().chain(&self.angular_momentum).map(|v| format!("{v:e}")));
        row.extend([self.e_kin, self.e_pot, self.energy, self.l_mean, self.l_max].iter().map(|v| format!("{v:e}")));
        row
    }
}

fn arr(v: Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Per-particle angular momenta `x × v`.
pub fn angular_momenta(ens: &ParticleEnsemble) -> Vec<Vec3> {
    ens.pos.iter().zip(&ens.vel).map(|(x, v)| x.cross(v)).collect()
}

/// Per-particle energies `|v|²/2 + U0(|x|)` in the steady field.
pub fn particle_energies(ens: &ParticleEnsemble, steady: &SteadyState) -> Vec<f64> {
    ens.pos.iter().zip(&ens.vel).map(|(x, v)| 0.5 * v.norm_squared() + steady.u0(x.norm())).collect()
}

pub fn conserved_quantities(ens: &ParticleEnsemble, forces: &dyn ForceSolver, step: usize) -> DiagnosticsRecord {
    let e_kin: f64 = ens.vel.iter().zip(&ens.weight).map(|(v, w)| 0.5 * w * v.norm_squared()).sum();
    let e_pot = forces.potential_energy(ens);
    let l = angular_momenta(ens);
    let l_abs: Vec<f64> = l.iter().map(|l| l.norm()).collect();
    let n = ens.len().max(1) as f64;
    DiagnosticsRecord {
        t: ens.time,
        step,
        mass: ens.total_mass(),
        momentum: arr(ens.momentum()),
        angular_momentum: arr(ens.angular_momentum()),
        e_kin,
        e_pot,
        energy: e_kin + e_pot,
        l_mean: l_abs.iter().sum::<f64>() / n,
        l_max: l_abs.iter().cloned().fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub steps: usize,
    /// Steps between records; the initial and final states are always recorded.
    pub cadence: usize,
}

impl EvolveOptions {
    /// Options covering `duration` with records every `every` time units.
    pub fn covering(duration: f64, dt: f64, every: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::invalid("duration", format!("must be >= 0, got {duration}")));
        }
        if !(every > 0.0) {
            return Err(Error::invalid("cadence", format!("must be positive, got {every}")));
        }
        let steps = (duration / dt).round() as usize;
        let cadence = ((every / dt).round() as usize).max(1);
        Ok(EvolveOptions { dt, steps, cadence })
    }
}

/// Result of a run: the records, the final (or last finite) state, and the
/// reason for an early stop.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub state: ParticleEnsemble,
    pub halted: Option<String>,
}

fn is_finite_state(ens: &ParticleEnsemble) -> bool {
    ens.pos.iter().chain(&ens.vel).all(|v| v.iter().all(|c| c.is_finite()))
}

/// Advances `ens` by `opts.steps` steps. `monitor` is called on every
/// recorded state (step index given) after the diagnostics are taken; an
/// error from it aborts the run.
pub fn evolve<F>(
    ens: ParticleEnsemble,
    opts: &EvolveOptions,
    forces: &dyn ForceSolver,
    integrator: &dyn Integrator,
    mut monitor: F,
) -> Result<Trajectory>
where
    F: FnMut(&ParticleEnsemble, usize) -> Result<()>,
{
    ens.validate()?;
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive, got {}", opts.dt)));
    }
    let cadence = opts.cadence.max(1);
    let mut state = ens;
    let mut records = vec![conserved_quantities(&state, forces, 0)];
    monitor(&state, 0)?;
    let mut cache = None;
    let mut last_good = state.clone();
    for step in 1..=opts.steps {
        integrator.step(&mut state, opts.dt, forces, &mut cache);
        if !is_finite_state(&state) {
            let reason = format!("non-finite state at step {step} (t = {:e})", state.time);
            log::error!("{reason}");
            return Ok(Trajectory { records, state: last_good, halted: Some(reason) });
        }
        if step % cadence == 0 || step == opts.steps {
            records.push(conserved_quantities(&state, forces, step));
            monitor(&state, step)?;
            log::debug!("step {step}/{} t = {:.4e}", opts.steps, state.time);
        }
        last_good.clone_from(&state);
    }
    Ok(Trajectory { records, state, halted: None })
}
