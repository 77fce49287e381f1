//! Fixed-step symplectic integrators.

use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::{Error, Result};
use crate::registry::Registry;

use super::force::ForceSolver;

pub trait Integrator: Send + Sync {
    fn name(&self) -> &'static str;
    /// Advances `ens` by `dt` (which may be negative). `cache` holds the
    /// accelerations at the current positions when the scheme can reuse them.
    fn step(&self, ens: &mut ParticleEnsemble, dt: f64, forces: &dyn ForceSolver, cache: &mut Option<Vec<Vec3>>);
}

fn kick(ens: &mut ParticleEnsemble, acc: &[Vec3], dt: f64) {
    ens.vel.iter_mut().zip(acc).for_each(|(v, a)| *v += a * dt);
}

fn drift(ens: &mut ParticleEnsemble, dt: f64) {
    ens.pos.iter_mut().zip(&ens.vel).for_each(|(x, v)| *x += v * dt);
}

/// Kick-drift-kick leapfrog.
#[derive(Debug, Clone, Copy)]
pub struct KickDriftKick;

impl Integrator for KickDriftKick {
    fn name(&self) -> &'static str {
        "leapfrog"
    }
    fn step(&self, ens: &mut ParticleEnsemble, dt: f64, forces: &dyn ForceSolver, cache: &mut Option<Vec<Vec3>>) {
        let a0 = cache.take().unwrap_or_else(|| forces.accelerations(ens));
        kick(ens, &a0, 0.5 * dt);
        drift(ens, dt);
        let a1 = forces.accelerations(ens);
        kick(ens, &a1, 0.5 * dt);
        ens.time += dt;
        *cache = Some(a1);
    }
}

/// Drift-kick-drift leapfrog.
#[derive(Debug, Clone, Copy)]
pub struct DriftKickDrift;

impl Integrator for DriftKickDrift {
    fn name(&self) -> &'static str {
        "leapfrog-dkd"
    }
    fn step(&self, ens: &mut ParticleEnsemble, dt: f64, forces: &dyn ForceSolver, cache: &mut Option<Vec<Vec3>>) {
        drift(ens, 0.5 * dt);
        let a = forces.accelerations(ens);
        kick(ens, &a, dt);
        drift(ens, 0.5 * dt);
        ens.time += dt;
        *cache = None;
    }
}

pub type IntegratorBuilder = fn() -> Box<dyn Integrator>;

pub fn registry() -> Registry<IntegratorBuilder> {
    Registry::<IntegratorBuilder>::new("integrator")
        .with("leapfrog", "kick-drift-kick, one force evaluation per step", || Box::new(KickDriftKick))
        .with("leapfrog-dkd", "drift-kick-drift", || Box::new(DriftKickDrift))
}

pub fn integrator(name: &str) -> Result<Box<dyn Integrator>> {
    registry().get(name).map(|build| build())
}

/// One kick-drift-kick step without a force cache.
pub fn leapfrog_step(ens: &mut ParticleEnsemble, dt: f64, forces: &dyn ForceSolver) -> Result<()> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::invalid("dt", format!("step must be finite and nonzero, got {dt}")));
    }
    KickDriftKick.step(ens, dt, forces, &mut None);
    Ok(())
}
