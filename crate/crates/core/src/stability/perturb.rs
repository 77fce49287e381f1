//! Admissible perturbations of a sampled steady state.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde_json::{Map, Value};

use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::steady::{PhaseSampler, SteadyState};

pub trait Perturbation: Send + Sync {
    fn kind(&self) -> &'static str;
    /// Turns a realization of `f0` into a realization of the perturbed state
    /// with the same total mass.
    fn apply(&self, steady: &SteadyState, base: ParticleEnsemble, seed: u64) -> Result<ParticleEnsemble>;
}

pub type PerturbationBuilder = fn(&Map<String, Value>) -> Result<Box<dyn Perturbation>>;

fn num(p: &Map<String, Value>, key: &'static str) -> Result<f64> {
    p.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Config(format!("perturbation.{key}: expected a number")))
}

fn num_or(p: &Map<String, Value>, key: &'static str, default: f64) -> Result<f64> {
    if p.contains_key(key) {
        num(p, key)
    } else {
        Ok(default)
    }
}

fn vector(p: &Map<String, Value>, key: &'static str) -> Result<Vec3> {
    let bad = || Error::Config(format!("perturbation.{key}: expected an array of three numbers"));
    let arr = p.get(key).and_then(Value::as_array).ok_or_else(bad)?;
    if arr.len() != 3 {
        return Err(bad());
    }
    let c: Vec<f64> = arr.iter().map(|v| v.as_f64().ok_or_else(bad)).collect::<Result<_>>()?;
    Ok(Vec3::new(c[0], c[1], c[2]))
}

fn check_keys(p: &Map<String, Value>, allowed: &[&str]) -> Result<()> {
    for key in p.keys() {
        if key != "kind" && !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "perturbation.{key}: unknown field (expected one of: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn amplitude_in_range(eps: f64) -> Result<f64> {
    if !(eps.abs() < 1.0) {
        return Err(Error::invalid("epsilon", format!("relative amplitude must satisfy |epsilon| < 1, got {eps}")));
    }
    Ok(eps)
}

/// The unperturbed realization.
#[derive(Debug, Clone, Copy)]
pub struct Unperturbed;

impl Perturbation for Unperturbed {
    fn kind(&self) -> &'static str {
        "none"
    }
    fn apply(&self, _: &SteadyState, base: ParticleEnsemble, _: u64) -> Result<ParticleEnsemble> {
        Ok(base)
    }
}

/// `f(0)(x, v) = f0(x, v - V)`.
#[derive(Debug, Clone, Copy)]
pub struct Boost {
    pub velocity: Vec3,
}

impl Perturbation for Boost {
    fn kind(&self) -> &'static str {
        "boost"
    }
    fn apply(&self, _: &SteadyState, base: ParticleEnsemble, _: u64) -> Result<ParticleEnsemble> {
        let mut out = base.boosted(&self.velocity);
        out.provenance.push_str("+boost");
        Ok(out)
    }
}

/// Reweights a realization of `f0` into one of `(1 + ε g) f0 / c`, with `c`
/// restoring the mass. Both the weights and the carried f-values scale by
/// `(1 + ε g) / c`.
pub fn reweight<G>(base: ParticleEnsemble, eps: f64, g: G, tag: &str) -> Result<ParticleEnsemble>
where
    G: Fn(&Vec3, &Vec3) -> f64,
{
    let mass = base.total_mass();
    let factors: Vec<f64> = base.pos.iter().zip(&base.vel).map(|(x, v)| 1.0 + eps * g(x, v)).collect();
    if let Some(i) = factors.iter().position(|f| !(*f > 0.0)) {
        return Err(Error::invalid("epsilon", format!("perturbation makes f non-positive at particle {i}")));
    }
    let c = base.weight.iter().zip(&factors).map(|(w, f)| w * f).sum::<f64>() / mass;
    let mut out = base;
    for ((w, f), s) in out.weight.iter_mut().zip(out.f_init.iter_mut()).zip(&factors) {
        *w *= s / c;
        *f *= s / c;
    }
    out.provenance.push('+');
    out.provenance.push_str(tag);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// `g = (x·n)/R`.
    Dipole(Vec3),
    /// `g = cos(π |x| / R)`.
    Radial,
}

#[derive(Debug, Clone, Copy)]
pub struct Amplitude {
    pub epsilon: f64,
    pub mode: Mode,
}

impl Perturbation for Amplitude {
    fn kind(&self) -> &'static str {
        "amplitude"
    }
    fn apply(&self, steady: &SteadyState, base: ParticleEnsemble, _: u64) -> Result<ParticleEnsemble> {
        let r = steady.radius;
        match self.mode {
            Mode::Dipole(n) => reweight(base, self.epsilon, |x, _| x.dot(&n) / r, "amplitude"),
            Mode::Radial => reweight(base, self.epsilon, |x, _| (std::f64::consts::PI * x.norm() / r).cos(), "amplitude"),
        }
    }
}

/// A fraction `μ` of the markers, chosen at random, receives `+V`; the rest
/// receives `-μV/(1-μ)`. Positions and velocities are then recentred so that
/// `∫∫ x f = ∫∫ v f = 0`.
#[derive(Debug, Clone, Copy)]
pub struct SplitBulk {
    pub fraction: f64,
    pub velocity: Vec3,
}

impl Perturbation for SplitBulk {
    fn kind(&self) -> &'static str {
        "split-bulk"
    }
    fn apply(&self, _: &SteadyState, base: ParticleEnsemble, seed: u64) -> Result<ParticleEnsemble> {
        let n = base.len();
        let mu = self.fraction;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5b1f_b0a7);
        let picked = sample_indices(&mut rng, n, ((mu * n as f64).round() as usize).min(n));
        let mut is_split = vec![false; n];
        picked.iter().for_each(|i| is_split[i] = true);
        let mass = base.total_mass();
        let split_mass: f64 = picked.iter().map(|i| base.weight[i]).sum();
        let bulk_mass = mass - split_mass;
        if split_mass == 0.0 || bulk_mass <= 0.0 {
            return Err(Error::invalid("fraction", "split selects no markers or all markers"));
        }
        let bulk_velocity = -self.velocity * (split_mass / bulk_mass);
        let mut out = base;
        for (v, s) in out.vel.iter_mut().zip(&is_split) {
            *v += if *s { self.velocity } else { bulk_velocity };
        }
        let mut out = out.recentred();
        out.provenance.push_str("+split-bulk");
        Ok(out)
    }
}

/// `g = (1/m) Σ cos(k·x/R + q·v/σ + φ)` with random wave vectors and phases.
#[derive(Debug, Clone, Copy)]
pub struct RandomPhase {
    pub epsilon: f64,
    pub modes: usize,
}

impl Perturbation for RandomPhase {
    fn kind(&self) -> &'static str {
        "random-phase"
    }
    fn apply(&self, steady: &SteadyState, base: ParticleEnsemble, seed: u64) -> Result<ParticleEnsemble> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0dd_face);
        let sigma = steady.escape_speed(0.0);
        let r = steady.radius;
        let modes: Vec<(Vec3, Vec3, f64)> = (0..self.modes.max(1))
            .map(|_| {
                let k: [f64; 3] = UnitSphere.sample(&mut rng);
                let q: [f64; 3] = UnitSphere.sample(&mut rng);
                let kn = 0.5 + 2.5 * rng.random::<f64>();
                let qn = 0.5 + 2.5 * rng.random::<f64>();
                let phase = std::f64::consts::TAU * rng.random::<f64>();
                (Vec3::from(k) * (kn / r), Vec3::from(q) * (qn / sigma), phase)
            })
            .collect();
        let m = modes.len() as f64;
        reweight(
            base,
            self.epsilon,
            |x, v| modes.iter().map(|(k, q, p)| (k.dot(x) + q.dot(v) + p).cos()).sum::<f64>() / m,
            "random-phase",
        )
    }
}

pub fn registry() -> Registry<PerturbationBuilder> {
    Registry::<PerturbationBuilder>::new("perturbation")
        .with("none", "the unperturbed realization", |p| {
            check_keys(p, &[])?;
            Ok(Box::new(Unperturbed))
        })
        .with("boost", "Galilean boost of every velocity by `velocity`", |p| {
            check_keys(p, &["velocity"])?;
            Ok(Box::new(Boost { velocity: vector(p, "velocity")? }))
        })
        .with("amplitude", "reweighting by (1 + epsilon g), g a dipole or radial mode", |p| {
            check_keys(p, &["epsilon", "mode", "direction"])?;
            let epsilon = amplitude_in_range(num(p, "epsilon")?)?;
            let mode = match p.get("mode").and_then(Value::as_str).unwrap_or("dipole") {
                "dipole" => {
                    let n = if p.contains_key("direction") { vector(p, "direction")? } else { Vec3::z() };
                    if n.norm() == 0.0 {
                        return Err(Error::invalid("direction", "must be nonzero"));
                    }
                    Mode::Dipole(n.normalize())
                }
                "radial" => Mode::Radial,
                other => return Err(Error::Config(format!("perturbation.mode: unknown mode `{other}` (dipole, radial)"))),
            };
            Ok(Box::new(Amplitude { epsilon, mode }))
        })
        .with("split-bulk", "fraction `fraction` kicked by `velocity`, bulk recoils", |p| {
            check_keys(p, &["fraction", "velocity"])?;
            let fraction = num(p, "fraction")?;
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::invalid("fraction", format!("must lie in (0, 1), got {fraction}")));
            }
            Ok(Box::new(SplitBulk { fraction, velocity: vector(p, "velocity")? }))
        })
        .with("random-phase", "reweighting by a random superposition of phase-space plane waves", |p| {
            check_keys(p, &["epsilon", "modes"])?;
            let epsilon = amplitude_in_range(num(p, "epsilon")?)?;
            let modes = num_or(p, "modes", 4.0)?;
            if !(modes >= 1.0 && modes.fract() == 0.0) {
                return Err(Error::invalid("modes", format!("must be a positive integer, got {modes}")));
            }
            Ok(Box::new(RandomPhase { epsilon, modes: modes as usize }))
        })
}

/// Builds a perturbation from `{"kind": ..., ...}`.
pub fn perturbation(kind: &str, params: &Map<String, Value>) -> Result<Box<dyn Perturbation>> {
    registry().get(kind).and_then(|build| build(params))
}

/// Samples `f0` and applies the perturbation.
pub fn perturb(
    steady: &SteadyState,
    pert: &dyn Perturbation,
    sampler: &dyn PhaseSampler,
    n: usize,
    seed: u64,
) -> Result<ParticleEnsemble> {
    let base = sampler.sample(steady, n, seed)?;
    let out = pert.apply(steady, base, seed)?;
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::{build_steady, sampler, BuildOptions, CasimirFunction};
    use serde_json::json;

    fn k1() -> SteadyState {
        build_steady(&CasimirFunction::polytropic(1.0).unwrap(), 1.0, &BuildOptions::default()).unwrap()
    }

    fn params(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    fn build(v: Value) -> Result<Box<dyn Perturbation>> {
        let p = params(v);
        perturbation(p["kind"].as_str().unwrap(), &p)
    }

    #[test]
    fn every_kind_preserves_mass() {
        let s = k1();
        let smp = sampler("quasi-random").unwrap();
        for spec in [
            json!({"kind": "none"}),
            json!({"kind": "boost", "velocity": [0.1, 0.0, 0.0]}),
            json!({"kind": "amplitude", "epsilon": 0.05}),
            json!({"kind": "amplitude", "epsilon": -0.2, "mode": "radial"}),
            json!({"kind": "split-bulk", "fraction": 0.3, "velocity": [0.0, 0.5, 0.0]}),
            json!({"kind": "random-phase", "epsilon": 0.1, "modes": 3}),
        ] {
            let p = build(spec.clone()).unwrap();
            let e = perturb(&s, p.as_ref(), smp.as_ref(), 2000, 5).unwrap();
            assert!((e.total_mass() - s.mass).abs() < 1e-12, "{spec}");
            assert!(e.f_init.iter().all(|f| *f > 0.0), "{spec}");
        }
    }

    #[test]
    fn boost_momentum() {
        let s = k1();
        let v = Vec3::new(0.1, -0.2, 0.05);
        let e = perturb(&s, &Boost { velocity: v }, sampler("quasi-random").unwrap().as_ref(), 1000, 2).unwrap();
        assert!((e.momentum() - v * s.mass).norm() < 1e-13);
    }

    #[test]
    fn split_bulk_is_centred() {
        let s = k1();
        let p = SplitBulk { fraction: 0.25, velocity: Vec3::new(1.0, 0.0, 0.0) };
        let e = perturb(&s, &p, sampler("rejection").unwrap().as_ref(), 3000, 9).unwrap();
        assert!(e.momentum().norm() < 1e-12);
        assert!(e.mass_moment().norm() < 1e-13);
        let fast = e.vel.iter().filter(|v| v.x > 0.5).count();
        assert!(fast > 500);
    }

    #[test]
    fn reweighting_scales_f_with_weight() {
        let s = k1();
        let base = sampler("quasi-random").unwrap().sample(&s, 1000, 1).unwrap();
        let e = Amplitude { epsilon: 0.3, mode: Mode::Dipole(Vec3::z()) }.apply(&s, base.clone(), 0).unwrap();
        for i in 0..base.len() {
            let r = e.weight[i] / base.weight[i];
            assert!((e.f_init[i] / base.f_init[i] - r).abs() < 1e-14);
        }
        assert!(e.mass_moment().z > 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        for spec in [
            json!({"kind": "amplitude", "epsilon": 1.5}),
            json!({"kind": "amplitude"}),
            json!({"kind": "amplitude", "epsilon": 0.1, "mode": "quadrupole"}),
            json!({"kind": "boost", "velocity": [1.0, 2.0]}),
            json!({"kind": "boost", "velocity": [0, 0, 0], "speed": 1}),
            json!({"kind": "split-bulk", "fraction": 1.0, "velocity": [1, 0, 0]}),
            json!({"kind": "random-phase", "epsilon": 0.1, "modes": 0.5}),
            json!({"kind": "wobble"}),
        ] {
            assert!(build(spec.clone()).is_err(), "{spec}");
        }
    }
}
