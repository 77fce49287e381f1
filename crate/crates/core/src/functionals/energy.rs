//! Kinetic, potential and Casimir functionals on particles and radial profiles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ensemble::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::gravity::pair_potential_sum;
use crate::quad::{integrate, QuadOptions};
use crate::steady::{CasimirFunction, SteadyState};
use crate::tree::Octree;

/// How particle pair sums are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum PairMethod {
    Direct,
    Tree { theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairOptions {
    pub softening: f64,
    pub method: PairMethod,
    /// Estimate the continuum `∫∫ ρρ'/|x-y|` rather than the softened
    /// marker sum: softening extrapolated to zero, self-pairs compensated.
    #[serde(default)]
    pub continuum: bool,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions { softening: 0.0, method: PairMethod::Direct, continuum: false }
    }
}

/// `½ Σ w |v|²`.
pub fn kinetic_energy(ens: &ParticleEnsemble) -> f64 {
    ens.vel.iter().zip(&ens.weight).map(|(v, w)| 0.5 * w * v.norm_squared()).sum()
}

/// `Σ_{i≠j} w_i w_j / sqrt(|x_i-x_j|² + ε²)`, i.e. `∫∫ ρρ'/|x-y|` for the
/// markers without self-energy.
pub fn pair_interaction(ens: &ParticleEnsemble, opts: &PairOptions) -> f64 {
    let half = match opts.method {
        PairMethod::Direct => pair_potential_sum(&ens.pos, &ens.weight, opts.softening),
        PairMethod::Tree { theta } => Octree::build(&ens.pos, &ens.weight).pair_potential_sum(theta, opts.softening),
    };
    2.0 * half
}

/// Continuum estimate of `∫∫ ρρ'/|x-y|`: the pair sum extrapolated to zero
/// softening from `2ε, ε, ε/2`, divided by `1 - Σw²/M²` so that independent
/// markers give an unbiased estimate. Falls back to the softened sum when
/// `continuum` is off.
pub fn self_interaction(ens: &ParticleEnsemble, opts: &PairOptions) -> f64 {
    if !opts.continuum {
        return pair_interaction(ens, opts);
    }
    let at = |eps: f64| pair_interaction(ens, &PairOptions { softening: eps, continuum: false, ..*opts });
    let h = opts.softening;
    let raw = if h > 0.0 { at(2.0 * h) / 3.0 - 2.0 * at(h) + 8.0 / 3.0 * at(0.5 * h) } else { at(0.0) };
    let m = ens.total_mass();
    let w2: f64 = ens.weight.iter().map(|w| w * w).sum();
    if m > 0.0 && w2 < m * m {
        raw / (1.0 - w2 / (m * m))
    } else {
        raw
    }
}

/// `-½ Σ_{i≠j} w_i w_j / sqrt(|x_i-x_j|² + ε²)`.
pub fn potential_energy_particles(ens: &ParticleEnsemble, opts: &PairOptions) -> f64 {
    -0.5 * pair_interaction(ens, opts)
}

/// Particle potential energy extrapolated to zero softening from the
/// softenings `2h, h, h/2` (quadratic fit in ε).
pub fn potential_energy_extrapolated(ens: &ParticleEnsemble, h: f64, method: PairMethod) -> f64 {
    let at = |eps: f64| potential_energy_particles(ens, &PairOptions { softening: eps, method, continuum: false });
    at(2.0 * h) / 3.0 - 2.0 * at(h) + 8.0 / 3.0 * at(0.5 * h)
}

/// `∫∫ Q(f)` from carried f-values: `Σ w Q(f)/f`, exact because f is
/// transported along characteristics.
pub fn casimir_functional(ens: &ParticleEnsemble, casimir: &CasimirFunction) -> Result<f64> {
    let mut sum = 0.0;
    for (i, (&w, &f)) in ens.weight.iter().zip(&ens.f_init).enumerate() {
        if !(f > 0.0) {
            return Err(Error::invalid("ensemble", format!("particle {i} carries f = {f} with positive weight")));
        }
        sum += w * casimir.q(f) / f;
    }
    Ok(sum)
}

/// A spherically symmetric density on `[0, radius]`.
pub trait RadialDensity {
    fn density(&self, r: f64) -> f64;
    fn radius(&self) -> f64;
    /// Radial field `dU/dr`, when known independently of the density.
    fn field(&self, _r: f64) -> Option<f64> {
        None
    }
}

impl RadialDensity for SteadyState {
    fn density(&self, r: f64) -> f64 {
        self.rho0(r)
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn field(&self, r: f64) -> Option<f64> {
        Some(self.du0(r))
    }
}

/// Uniform ball of given mass and radius.
#[derive(Debug, Clone, Copy)]
pub struct UniformBall {
    pub mass: f64,
    pub radius: f64,
}

impl RadialDensity for UniformBall {
    fn density(&self, r: f64) -> f64 {
        if r <= self.radius {
            3.0 * self.mass / (4.0 * PI * self.radius.powi(3))
        } else {
            0.0
        }
    }
    fn radius(&self) -> f64 {
        self.radius
    }
}

/// Both representations of the potential energy of a radial density.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RadialPotentialEnergy {
    /// `-(1/8π) ∫ |∇U|² dx`.
    pub field_form: f64,
    /// `-½ ∫∫ ρ(x)ρ(y)/|x-y|`, reduced to `-∫ 4π r ρ(r) m(r) dr`.
    pub double_integral: f64,
}

impl RadialPotentialEnergy {
    pub fn discrepancy(&self) -> f64 {
        let scale = self.field_form.abs().max(self.double_integral.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.field_form - self.double_integral).abs() / scale
        }
    }
}

fn nested_opts() -> QuadOptions {
    QuadOptions { abs: 0.0, rel: 1e-12, max_intervals: 4000 }
}

fn enclosed<D: RadialDensity + ?Sized>(d: &D, r: f64) -> Result<f64> {
    integrate(|s| 4.0 * PI * s * s * d.density(s), 0.0, r.min(d.radius()), nested_opts())
}

/// Evaluates the potential energy of a radial density both as a field
/// integral and as a double integral over the density.
pub fn potential_energy_radial<D: RadialDensity + ?Sized>(d: &D) -> Result<RadialPotentialEnergy> {
    let radius = d.radius();
    let opts = QuadOptions { abs: 0.0, rel: 1e-10, max_intervals: 4000 };
    let mass = enclosed(d, radius)?;
    if mass == 0.0 {
        return Ok(RadialPotentialEnergy { field_form: 0.0, double_integral: 0.0 });
    }
    let mut failure = None;
    let mut guard = |v: Result<f64>| match v {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    // ∫_0^∞ r² (dU/dr)² dr with dU/dr = M/r² outside the support.
    let inner = integrate(
        |r| {
            let g = match d.field(r) {
                Some(g) => g,
                None if r > 0.0 => guard(enclosed(d, r)) / (r * r),
                None => 0.0,
            };
            r * r * g * g
        },
        0.0,
        radius,
        opts,
    )?;
    let field_form = -0.5 * (inner + mass * mass / radius);
    let double = integrate(|r| 4.0 * PI * r * d.density(r) * guard(enclosed(d, r)), 0.0, radius, opts)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RadialPotentialEnergy { field_form, double_integral: -double })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Vec3;
    use crate::steady::{build_steady, BuildOptions};
    use approx::assert_relative_eq;

    fn ens(pos: Vec<Vec3>, vel: Vec<Vec3>, w: Vec<f64>) -> ParticleEnsemble {
        let n = pos.len();
        ParticleEnsemble { pos, vel, weight: w, f_init: vec![1.0; n], ..ParticleEnsemble::empty() }
    }

    #[test]
    fn continuum_self_interaction_of_uniform_ball() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let n = 4000;
        let mut pos = Vec::with_capacity(n);
        while pos.len() < n {
            let x = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if x.norm() <= 1.0 {
                pos.push(x);
            }
        }
        let e = ens(pos, vec![Vec3::zeros(); n], vec![1.0 / n as f64; n]);
        let exact = 1.2;
        let opts = PairOptions { softening: 0.05, continuum: true, ..Default::default() };
        let est = self_interaction(&e, &opts);
        assert!((est / exact - 1.0).abs() < 0.01, "{est}");
        let bare = PairOptions { softening: 0.0, continuum: true, ..Default::default() };
        let raw = pair_interaction(&e, &PairOptions::default());
        assert_relative_eq!(self_interaction(&e, &bare), raw * n as f64 / (n as f64 - 1.0), max_relative = 1e-12);
        let soft = PairOptions { softening: 0.05, ..Default::default() };
        assert_eq!(self_interaction(&e, &soft), pair_interaction(&e, &soft));
    }

    #[test]
    fn kinetic_examples() {
        assert_eq!(kinetic_energy(&ParticleEnsemble::empty()), 0.0);
        let e = ens(vec![Vec3::zeros()], vec![Vec3::new(1.0, 0.0, 0.0)], vec![2.0]);
        assert_eq!(kinetic_energy(&e), 1.0);
    }

    #[test]
    fn galilean_kinetic_shift() {
        let e = ens(
            vec![Vec3::zeros(); 3],
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-0.5, 0.2, 0.0), Vec3::new(0.0, -0.4, 0.3)],
            vec![1.0, 2.0, 1.0 / 0.3],
        );
        let e = e.recentred();
        let boost = Vec3::new(0.3, -0.2, 0.7);
        let m = e.total_mass();
        assert_relative_eq!(
            kinetic_energy(&e.boosted(&boost)),
            kinetic_energy(&e) + 0.5 * m * boost.norm_squared(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn potential_examples() {
        let one = ens(vec![Vec3::zeros()], vec![Vec3::zeros()], vec![1.0]);
        assert_eq!(potential_energy_particles(&one, &PairOptions::default()), 0.0);
        let two = ens(vec![Vec3::zeros(), Vec3::new(0.0, 2.0, 0.0)], vec![Vec3::zeros(); 2], vec![1.0, 1.0]);
        assert_eq!(potential_energy_particles(&two, &PairOptions::default()), -0.5);
    }

    #[test]
    fn casimir_uniform_f() {
        let q = CasimirFunction::polytropic(1.0).unwrap();
        let mut e = ens(vec![Vec3::zeros(); 4], vec![Vec3::zeros(); 4], vec![0.5, 1.0, 0.25, 0.25]);
        e.f_init = vec![0.3; 4];
        assert_relative_eq!(casimir_functional(&e, &q).unwrap(), 0.3 * 2.0, max_relative = 1e-15);
        e.f_init[2] = 0.0;
        assert!(casimir_functional(&e, &q).is_err());
    }

    #[test]
    fn radial_zero_and_uniform_ball() {
        let zero = UniformBall { mass: 0.0, radius: 1.0 };
        let pe = potential_energy_radial(&zero).unwrap();
        assert_eq!(pe.field_form, 0.0);
        let ball = UniformBall { mass: 2.0, radius: 0.5 };
        let pe = potential_energy_radial(&ball).unwrap();
        let exact = -0.6 * 4.0 / 0.5;
        assert_relative_eq!(pe.field_form, exact, max_relative = 1e-10);
        assert_relative_eq!(pe.double_integral, exact, max_relative = 1e-10);
    }

    #[test]
    fn radial_forms_agree_on_polytrope() {
        let s = build_steady(&CasimirFunction::polytropic(1.0).unwrap(), 1.0, &BuildOptions::default()).unwrap();
        let pe = potential_energy_radial(&s).unwrap();
        assert!(pe.discrepancy() < 1e-6, "{pe:?}");
        assert_relative_eq!(pe.field_form, s.energies.e_pot, max_relative = 1e-9);
    }
}
