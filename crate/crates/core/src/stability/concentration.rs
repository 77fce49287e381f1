//! Mass in the best-placed ball of each radius.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    pub radius: f64,
    pub mass: f64,
    pub center: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
pub struct ConcentrationOptions {
    /// Particle positions tried as centres.
    pub candidates: usize,
    /// Mean-shift refinements of the best candidates.
    pub refine_steps: usize,
    pub refine_best: usize,
}

impl Default for ConcentrationOptions {
    fn default() -> Self {
        ConcentrationOptions { candidates: 256, refine_steps: 20, refine_best: 4 }
    }
}

fn mass_in(ens: &ParticleEnsemble, c: &Vec3, r2: f64) -> f64 {
    ens.pos.iter().zip(&ens.weight).filter(|(x, _)| (*x - c).norm_squared() <= r2).map(|(_, w)| w).sum()
}

fn centroid_in(ens: &ParticleEnsemble, c: &Vec3, r2: f64) -> Option<Vec3> {
    let (mut m, mut s) = (0.0, Vec3::zeros());
    for (x, w) in ens.pos.iter().zip(&ens.weight) {
        if (x - c).norm_squared() <= r2 {
            m += w;
            s += x * *w;
        }
    }
    (m > 0.0).then(|| s / m)
}

/// Lower estimate of `sup_a ∫_{a + B_r} ρ` for every radius, non-decreasing
/// in `r` by construction (radii are processed in increasing order and the
/// previous best centre is always a candidate).
pub fn concentration_profile(
    ens: &ParticleEnsemble,
    radii: &[f64],
    opts: &ConcentrationOptions,
) -> Result<Vec<ConcentrationPoint>> {
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::invalid("radii", format!("radii must be positive, got {r}")));
    }
    if ens.is_empty() {
        return Ok(radii.iter().map(|&radius| ConcentrationPoint { radius, mass: 0.0, center: [0.0; 3] }).collect());
    }
    let n = ens.len();
    let stride = (n / opts.candidates.max(1)).max(1);
    let mut base: Vec<Vec3> = (0..n).step_by(stride).map(|i| ens.pos[i]).collect();
    base.push(ens.center_of_mass());
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|a, b| radii[*a].total_cmp(&radii[*b]));
    let mut out = vec![ConcentrationPoint { radius: 0.0, mass: 0.0, center: [0.0; 3] }; radii.len()];
    let mut prev: Option<(Vec3, f64)> = None;
    for idx in order {
        let radius = radii[idx];
        let r2 = radius * radius;
        let mut cands = base.clone();
        if let Some((c, _)) = prev {
            cands.push(c);
        }
        let mut scored: Vec<(f64, Vec3)> = cands.par_iter().map(|c| (mass_in(ens, c, r2), *c)).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        let refined: Vec<(f64, Vec3)> = scored
            .iter()
            .take(opts.refine_best.max(1))
            .map(|&(m0, c0)| {
                let (mut best_m, mut best_c) = (m0, c0);
                let mut c = c0;
                for _ in 0..opts.refine_steps {
                    let Some(next) = centroid_in(ens, &c, r2) else { break };
                    if (next - c).norm() <= 1e-12 * radius {
                        break;
                    }
                    c = next;
                    let m = mass_in(ens, &c, r2);
                    if m > best_m {
                        best_m = m;
                        best_c = c;
                    }
                }
                (best_m, best_c)
            })
            .collect();
        let (mut mass, mut center) = refined.into_iter().fold((-1.0, Vec3::zeros()), |a, b| if b.0 > a.0 { b } else { a });
        if let Some((c, m)) = prev {
            if m > mass {
                mass = m;
                center = c;
            }
        }
        prev = Some((center, mass));
        out[idx] = ConcentrationPoint { radius, mass, center: [center.x, center.y, center.z] };
    }
    Ok(out)
}
