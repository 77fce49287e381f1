//! Choice of the spatial shift `a` minimizing the field distance.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::{Error, Result};
use crate::functionals::Evaluation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftOptions {
    /// Mass fraction defining the bulk whose centroid seeds the search.
    pub bulk_fraction: f64,
    /// Initial simplex edge in units of the support radius.
    pub simplex_size: f64,
    /// Stop when the simplex values spread less than this, relative to `∫∫ρ0ρ0/|x-y|`.
    pub ftol: f64,
    pub max_iter: u64,
    /// Candidate centres scanned for the bulk ball.
    pub scan_candidates: usize,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        ShiftOptions { bulk_fraction: 0.9, simplex_size: 0.1, ftol: 1e-13, max_iter: 2000, scan_candidates: 64 }
    }
}

impl ShiftOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.bulk_fraction > 0.0 && self.bulk_fraction <= 1.0) {
            return Err(Error::invalid("bulk_fraction", format!("must lie in (0, 1], got {}", self.bulk_fraction)));
        }
        if !(self.simplex_size > 0.0 && self.ftol > 0.0 && self.max_iter > 0 && self.scan_candidates > 0) {
            return Err(Error::invalid("shift", "simplex_size, ftol, max_iter and scan_candidates must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShiftResult {
    pub shift: [f64; 3],
    pub field_distance: f64,
    pub iterations: u64,
    pub converged: bool,
}

impl ShiftResult {
    pub fn vector(&self) -> Vec3 {
        Vec3::from(self.shift)
    }
}

/// Smallest ball, centred at one of a set of candidate points, holding a
/// mass fraction `fraction`: returns its centre and radius.
pub fn bulk_ball(ens: &ParticleEnsemble, fraction: f64, candidates: usize) -> (Vec3, f64) {
    let n = ens.len();
    let target = fraction * ens.total_mass();
    let stride = (n / candidates.max(1)).max(1);
    let mut centres: Vec<Vec3> = (0..n).step_by(stride).map(|i| ens.pos[i]).collect();
    centres.push(ens.center_of_mass());
    let radius_for = |c: &Vec3| {
        let mut d: Vec<(f64, f64)> = ens.pos.iter().zip(&ens.weight).map(|(x, w)| ((x - c).norm(), *w)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        for (r, w) in d {
            acc += w;
            if acc >= target * (1.0 - 1e-12) {
                return r;
            }
        }
        f64::INFINITY
    };
    let radii: Vec<f64> = centres.par_iter().map(radius_for).collect();
    let (best, radius) = radii
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, r)| if *r < acc.1 { (i, *r) } else { acc });
    (centres[best], radius)
}

/// Mass-weighted centroid of the markers inside the bulk ball.
pub fn bulk_centroid(ens: &ParticleEnsemble, fraction: f64, candidates: usize) -> Vec3 {
    let (c, r) = bulk_ball(ens, fraction, candidates);
    let (mut m, mut s) = (0.0, Vec3::zeros());
    for (x, w) in ens.pos.iter().zip(&ens.weight) {
        if (x - c).norm() <= r {
            m += w;
            s += x * *w;
        }
    }
    if m > 0.0 {
        s / m
    } else {
        c
    }
}

struct Objective<'a, 'b> {
    eval: &'b Evaluation<'a>,
}

impl CostFunction for Objective<'_, '_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        Ok(self.eval.field_distance(&Vec3::new(p[0], p[1], p[2])))
    }
}

/// Minimizes the field distance over shifts by Nelder–Mead, starting at
/// `start` (or the bulk centroid when `None`). The zero shift is returned
/// whenever it does at least as well as the optimizer.
pub fn optimal_shift(
    ens: &ParticleEnsemble,
    eval: &Evaluation<'_>,
    radius: f64,
    scale: f64,
    start: Option<Vec3>,
    opts: &ShiftOptions,
) -> Result<ShiftResult> {
    opts.validate()?;
    let a0 = start.unwrap_or_else(|| bulk_centroid(ens, opts.bulk_fraction, opts.scan_candidates));
    let h = opts.simplex_size * radius;
    let base = vec![a0.x, a0.y, a0.z];
    let mut simplex = vec![base.clone()];
    for d in 0..3 {
        let mut p = base.clone();
        p[d] += h;
        simplex.push(p);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.ftol * scale.abs().max(f64::MIN_POSITIVE))
        .map_err(|e| Error::numeric("optimal_shift", e.to_string()))?;
    let result = Executor::new(Objective { eval }, solver)
        .configure(|s| s.max_iters(opts.max_iter))
        .run()
        .map_err(|e| Error::numeric("optimal_shift", e.to_string()))?;
    let state = result.state();
    let converged = matches!(
        state.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::SolverConverged)
    );
    if !converged {
        log::warn!("shift optimizer stopped without converging: {:?}", state.get_termination_status());
    }
    let iterations = state.get_iter();
    let (best, value) = match state.get_best_param() {
        Some(p) => (Vec3::new(p[0], p[1], p[2]), state.get_best_cost()),
        None => (a0, eval.field_distance(&a0)),
    };
    let at_zero = eval.field_distance(&Vec3::zeros());
    let (shift, field_distance) = if at_zero <= value { (Vec3::zeros(), at_zero) } else { (best, value) };
    Ok(ShiftResult { shift: [shift.x, shift.y, shift.z], field_distance, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{PairOptions, SteadyConstants};
    use crate::steady::{build_steady, sampler, BuildOptions, CasimirFunction, SteadyState};

    fn k1() -> SteadyState {
        build_steady(&CasimirFunction::polytropic(1.0).unwrap(), 1.0, &BuildOptions::default()).unwrap()
    }

    #[test]
    fn recovers_translation() {
        let s = k1();
        let consts = SteadyConstants::new(&s).unwrap();
        let base = sampler("quasi-random").unwrap().sample(&s, 4000, 3).unwrap();
        let r = s.radius;
        for b in [Vec3::zeros(), Vec3::new(0.2 * r, -0.1 * r, 0.05 * r), Vec3::new(0.0, 0.0, 3.0 * r)] {
            let e = base.translated(&b);
            let eval = Evaluation::new(&e, &s, &consts, &PairOptions::default()).unwrap();
            let res = optimal_shift(&e, &eval, r, consts.i00, None, &ShiftOptions::default()).unwrap();
            assert!((res.vector() - b).norm() < 1e-3 * r, "b={b:?} a={:?}", res.shift);
            assert!(res.field_distance <= eval.field_distance(&b) + 1e-12 * consts.i00.abs());
        }
    }

    #[test]
    fn bulk_ball_of_whole_mass_covers_all() {
        let s = k1();
        let e = sampler("rejection").unwrap().sample(&s, 1000, 1).unwrap();
        let (c, r) = bulk_ball(&e, 1.0, 64);
        assert!(e.pos.iter().all(|x| (x - c).norm() <= r));
        let (_, r90) = bulk_ball(&e, 0.9, 64);
        assert!(r90 < r);
    }

    #[test]
    fn invalid_options() {
        let o = ShiftOptions { bulk_fraction: 0.0, ..Default::default() };
        assert!(o.validate().is_err());
        let o = ShiftOptions { ftol: -1.0, ..Default::default() };
        assert!(o.validate().is_err());
    }
}
