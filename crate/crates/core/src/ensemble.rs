//! Weighted phase-space markers representing `f(t)`.

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// `N` markers with positions, velocities, mass weights and the f-value each
/// marker carries along its characteristic.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub pos: Vec<Vec3>,
    pub vel: Vec<Vec3>,
    pub weight: Vec<f64>,
    pub f_init: Vec<f64>,
    pub time: f64,
    pub softening: f64,
    pub seed: u64,
    pub provenance: String,
}

impl ParticleEnsemble {
    pub fn empty() -> Self {
        ParticleEnsemble {
            pos: vec![],
            vel: vec![],
            weight: vec![],
            f_init: vec![],
            time: 0.0,
            softening: 0.0,
            seed: 0,
            provenance: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.pos.len();
        if self.vel.len() != n || self.weight.len() != n || self.f_init.len() != n {
            return Err(Error::invalid("ensemble", "per-particle arrays differ in length"));
        }
        if let Some(i) = self.weight.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("ensemble", format!("particle {i} has non-positive weight")));
        }
        if let Some(i) = self.f_init.iter().position(|f| !(*f >= 0.0 && f.is_finite())) {
            return Err(Error::invalid("ensemble", format!("particle {i} has an invalid f-value")));
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.weight.iter().sum()
    }

    pub fn momentum(&self) -> Vec3 {
        self.vel.iter().zip(&self.weight).map(|(v, w)| v * *w).sum()
    }

    pub fn mass_moment(&self) -> Vec3 {
        self.pos.iter().zip(&self.weight).map(|(x, w)| x * *w).sum()
    }

    pub fn center_of_mass(&self) -> Vec3 {
        self.mass_moment() / self.total_mass()
    }

    pub fn angular_momentum(&self) -> Vec3 {
        (0..self.len()).map(|i| self.pos[i].cross(&self.vel[i]) * self.weight[i]).sum()
    }

    /// Rigid translation of every position by `b`.
    pub fn translated(&self, b: &Vec3) -> Self {
        let mut out = self.clone();
        out.pos.iter_mut().for_each(|x| *x += b);
        out
    }

    /// Galilean boost of every velocity by `v`; f-values are untouched.
    pub fn boosted(&self, v: &Vec3) -> Self {
        let mut out = self.clone();
        out.vel.iter_mut().for_each(|u| *u += v);
        out
    }

    /// Shifts positions and velocities so that centroid and momentum vanish.
    pub fn recentred(&self) -> Self {
        let m = self.total_mass();
        let xc = self.mass_moment() / m;
        let vc = self.momentum() / m;
        let mut out = self.clone();
        out.pos.iter_mut().for_each(|x| *x -= xc);
        out.vel.iter_mut().for_each(|v| *v -= vc);
        out
    }
}
