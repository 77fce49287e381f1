//! Force solvers: direct summation, Barnes–Hut, a spherical shell code, and
//! the frozen steady field.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::{Error, Result};
use crate::gravity::{direct_accelerations, pair_potential_sum};
use crate::registry::Registry;
use crate::steady::SteadyState;
use crate::tree::Octree;

pub trait ForceSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn accelerations(&self, ens: &ParticleEnsemble) -> Vec<Vec3>;
    /// Potential energy whose gradient gives the accelerations.
    fn potential_energy(&self, ens: &ParticleEnsemble) -> f64;
    fn params(&self) -> Value;
}

#[derive(Debug, Clone, Copy)]
pub struct Direct {
    pub softening: f64,
}

impl ForceSolver for Direct {
    fn name(&self) -> &'static str {
        "direct"
    }
    fn accelerations(&self, ens: &ParticleEnsemble) -> Vec<Vec3> {
        direct_accelerations(&ens.pos, &ens.weight, self.softening)
    }
    fn potential_energy(&self, ens: &ParticleEnsemble) -> f64 {
        -pair_potential_sum(&ens.pos, &ens.weight, self.softening)
    }
    fn params(&self) -> Value {
        json!({ "method": "direct", "softening": self.softening })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tree {
    pub theta: f64,
    pub softening: f64,
}

impl ForceSolver for Tree {
    fn name(&self) -> &'static str {
        "tree"
    }
    fn accelerations(&self, ens: &ParticleEnsemble) -> Vec<Vec3> {
        Octree::build(&ens.pos, &ens.weight).accelerations(self.theta, self.softening)
    }
    fn potential_energy(&self, ens: &ParticleEnsemble) -> f64 {
        -Octree::build(&ens.pos, &ens.weight).pair_potential_sum(self.theta, self.softening)
    }
    fn params(&self) -> Value {
        json!({ "method": "tree", "theta": self.theta, "softening": self.softening })
    }
}

/// Collisionless spherical shell code: every marker is pulled toward the
/// centre of mass by the mass at smaller distance from it, markers at equal
/// distance counting half. The potential energy is the pair sum with each
/// pair taken at its outer radius.
#[derive(Debug, Clone, Copy)]
pub struct Shell {
    pub softening: f64,
}

impl Shell {
    /// Offsets from the centre of mass and the mass inside each marker's shell.
    fn shells(ens: &ParticleEnsemble) -> (Vec<Vec3>, Vec<f64>) {
        if ens.is_empty() {
            return (Vec::new(), Vec::new());
        }
        let c = ens.center_of_mass();
        let rel: Vec<Vec3> = ens.pos.iter().map(|x| x - c).collect();
        let r: Vec<f64> = rel.iter().map(|x| x.norm()).collect();
        let mut order: Vec<usize> = (0..r.len()).collect();
        order.sort_unstable_by(|a, b| r[*a].total_cmp(&r[*b]));
        let mut inner = vec![0.0; r.len()];
        let mut below = 0.0;
        let mut start = 0;
        while start < order.len() {
            let mut end = start + 1;
            while end < order.len() && r[order[end]] == r[order[start]] {
                end += 1;
            }
            let group: f64 = order[start..end].iter().map(|&i| ens.weight[i]).sum();
            for &i in &order[start..end] {
                inner[i] = below + 0.5 * (group - ens.weight[i]);
            }
            below += group;
            start = end;
        }
        (rel, inner)
    }
}

impl ForceSolver for Shell {
    fn name(&self) -> &'static str {
        "shell"
    }
    fn accelerations(&self, ens: &ParticleEnsemble) -> Vec<Vec3> {
        let (rel, inner) = Self::shells(ens);
        let e2 = self.softening * self.softening;
        rel.iter()
            .zip(&inner)
            .map(|(x, m)| {
                let d2 = x.norm_squared() + e2;
                if d2 == 0.0 {
                    Vec3::zeros()
                } else {
                    x * (-m / (d2 * d2.sqrt()))
                }
            })
            .collect()
    }
    fn potential_energy(&self, ens: &ParticleEnsemble) -> f64 {
        let (rel, inner) = Self::shells(ens);
        let e2 = self.softening * self.softening;
        rel.iter()
            .zip(&inner)
            .zip(&ens.weight)
            .map(|((x, m), w)| {
                let d = (x.norm_squared() + e2).sqrt();
                if d == 0.0 {
                    0.0
                } else {
                    -w * m / d
                }
            })
            .sum()
    }
    fn params(&self) -> Value {
        json!({ "method": "shell", "softening": self.softening })
    }
}

/// Motion in the fixed potential `U0` of a steady state; markers do not
/// interact.
#[derive(Debug, Clone)]
pub struct Frozen {
    pub steady: Arc<SteadyState>,
}

impl ForceSolver for Frozen {
    fn name(&self) -> &'static str {
        "frozen"
    }
    fn accelerations(&self, ens: &ParticleEnsemble) -> Vec<Vec3> {
        ens.pos
            .iter()
            .map(|x| {
                let r = x.norm();
                if r == 0.0 {
                    Vec3::zeros()
                } else {
                    x * (-self.steady.du0(r) / r)
                }
            })
            .collect()
    }
    fn potential_energy(&self, ens: &ParticleEnsemble) -> f64 {
        ens.pos.iter().zip(&ens.weight).map(|(x, w)| w * self.steady.u0(x.norm())).sum()
    }
    fn params(&self) -> Value {
        json!({ "method": "frozen" })
    }
}

/// Parameters shared by every force solver constructor.
#[derive(Debug, Clone, Default)]
pub struct ForceParams {
    pub softening: f64,
    pub theta: f64,
    pub steady: Option<Arc<SteadyState>>,
}

pub type ForceBuilder = fn(&ForceParams) -> Result<Box<dyn ForceSolver>>;

fn check_softening(p: &ForceParams) -> Result<f64> {
    if !(p.softening >= 0.0 && p.softening.is_finite()) {
        return Err(Error::invalid("softening", format!("must be finite and >= 0, got {}", p.softening)));
    }
    Ok(p.softening)
}

pub fn registry() -> Registry<ForceBuilder> {
    Registry::<ForceBuilder>::new("force solver")
        .with("direct", "exact O(N²) pair sum", |p| Ok(Box::new(Direct { softening: check_softening(p)? })))
        .with("tree", "Barnes–Hut octree with opening angle theta", |p| {
            if !(p.theta >= 0.0 && p.theta < 1.5) {
                return Err(Error::invalid("theta", format!("opening angle must lie in [0, 1.5), got {}", p.theta)));
            }
            Ok(Box::new(Tree { theta: p.theta, softening: check_softening(p)? }))
        })
        .with("shell", "spherical shell code about the centre of mass (monopole field)", |p| {
            Ok(Box::new(Shell { softening: check_softening(p)? }))
        })
        .with("frozen", "fixed steady-state field, no self-gravity", |p| {
            let steady = p.steady.clone().ok_or_else(|| Error::invalid("method", "frozen forces need a steady state"))?;
            Ok(Box::new(Frozen { steady }))
        })
}

pub fn force_solver(name: &str, params: &ForceParams) -> Result<Box<dyn ForceSolver>> {
    registry().get(name).and_then(|build| build(params))
}

/// Default Plummer softening `0.02 R (10⁴/N)^{1/3}`.
pub fn default_softening(radius: f64, n: usize) -> f64 {
    0.02 * radius * (1e4 / n.max(1) as f64).cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(n: usize, mirrored: bool) -> ParticleEnsemble {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut pos = Vec::new();
        while pos.len() < n {
            let x = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            pos.push(x);
            if mirrored {
                pos.push(-x);
            }
        }
        pos.truncate(n);
        let weight = (0..n).map(|i| 0.5 + (i % 3) as f64 * 0.25).collect();
        ParticleEnsemble { vel: vec![Vec3::zeros(); n], f_init: vec![1.0; n], pos, weight, ..ParticleEnsemble::empty() }
    }

    #[test]
    fn shell_energy_is_outer_radius_pair_sum() {
        for mirrored in [false, true] {
            let e = cloud(200, mirrored);
            let c = e.center_of_mass();
            let r: Vec<f64> = e.pos.iter().map(|x| (x - c).norm()).collect();
            let mut brute = 0.0;
            for i in 0..e.len() {
                for j in 0..i {
                    brute -= e.weight[i] * e.weight[j] / r[i].max(r[j]);
                }
            }
            let w = Shell { softening: 0.0 }.potential_energy(&e);
            assert!((w - brute).abs() < 1e-12 * brute.abs(), "{w} {brute}");
        }
    }

    #[test]
    fn outermost_marker_feels_the_rest_as_a_point() {
        let mut e = cloud(100, true);
        e.pos.push(Vec3::new(5.0, 0.0, 0.0));
        e.weight.push(1e-9);
        e.vel.push(Vec3::zeros());
        e.f_init.push(1.0);
        let a = Shell { softening: 0.0 }.accelerations(&e);
        let c = e.center_of_mass();
        let rest: f64 = e.weight.iter().sum::<f64>() - 1e-9;
        let d = e.pos[100] - c;
        let expect = -d * rest / d.norm().powi(3);
        assert!((a[100] - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn shell_is_translation_covariant() {
        let e = cloud(300, false);
        let b = Vec3::new(3.0, -1.0, 2.0);
        let s = Shell { softening: 0.01 };
        let a0 = s.accelerations(&e);
        let a1 = s.accelerations(&e.translated(&b));
        for (x, y) in a0.iter().zip(&a1) {
            assert!((x - y).norm() < 1e-10 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn registry_lists_every_solver() {
        assert_eq!(registry().names(), vec!["direct", "tree", "shell", "frozen"]);
        assert!(force_solver("frozen", &ForceParams::default()).is_err());
        assert!(force_solver("direct", &ForceParams { softening: -1.0, ..Default::default() }).is_err());
        assert!(force_solver("pm", &ForceParams::default()).is_err());
    }
}
