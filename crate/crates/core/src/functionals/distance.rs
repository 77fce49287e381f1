//! The stability distance `d(f, f0)`, the field distance and the identity
//! linking both to the energy-Casimir difference.

use serde::{Deserialize, Serialize};

use super::energy::{
    casimir_functional, kinetic_energy, potential_energy_radial, self_interaction, PairOptions,
};
use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::Result;
use crate::steady::SteadyState;

/// Integrals against `f0` needed by the distances, computed once per steady
/// state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SteadyConstants {
    /// `∫∫ [Q(f0) + (E - E0) f0]`.
    pub k0: f64,
    /// `∫∫ ρ0(x) ρ0(y) / |x - y|` from the double-integral representation.
    pub i00: f64,
    pub h_m: f64,
    pub e0: f64,
    pub mass: f64,
}

impl SteadyConstants {
    pub fn new(steady: &SteadyState) -> Result<Self> {
        let en = &steady.energies;
        let i00 = -2.0 * potential_energy_radial(steady)?.double_integral;
        Ok(SteadyConstants {
            k0: en.casimir + en.e_kin - i00 - steady.e0 * steady.mass,
            i00,
            h_m: steady.h_m,
            e0: steady.e0,
            mass: steady.mass,
        })
    }
}

/// `Σ w U0(|x - a|)`, the potential energy of `f^a` in the steady field.
pub fn steady_field_energy(ens: &ParticleEnsemble, steady: &SteadyState, a: &Vec3) -> f64 {
    ens.pos.iter().zip(&ens.weight).map(|(x, w)| w * steady.u0((x - a).norm())).sum()
}

/// `d(f^a, f0)` where `f^a(x, v) = f(x + a, v)`.
pub fn d_distance(
    ens: &ParticleEnsemble,
    steady: &SteadyState,
    consts: &SteadyConstants,
    a: &Vec3,
) -> Result<f64> {
    let c = casimir_functional(ens, &steady.casimir)?;
    Ok(d_from_parts(c, kinetic_energy(ens), steady_field_energy(ens, steady, a), ens.total_mass(), consts))
}

fn d_from_parts(casimir: f64, e_kin: f64, field_energy: f64, mass: f64, consts: &SteadyConstants) -> f64 {
    casimir + e_kin + field_energy - consts.e0 * mass - consts.k0
}

/// Field distance `(1/8π)‖∇U_{f^a} - ∇U0‖²` with the particle self-interaction
/// cached, so evaluating many shifts costs `O(N)` each.
#[derive(Debug, Clone, Copy)]
pub struct FieldDistance {
    /// Estimate of `∫∫ ρρ'/|x - y|` for the markers, see [`self_interaction`].
    pub i_ff: f64,
    pub i00: f64,
}

impl FieldDistance {
    pub fn new(ens: &ParticleEnsemble, consts: &SteadyConstants, pair: &PairOptions) -> Self {
        FieldDistance { i_ff: self_interaction(ens, pair), i00: consts.i00 }
    }

    pub fn at(&self, ens: &ParticleEnsemble, steady: &SteadyState, a: &Vec3) -> f64 {
        let i_f0 = -steady_field_energy(ens, steady, a);
        0.5 * (self.i_ff + self.i00 - 2.0 * i_f0)
    }
}

pub fn field_distance(
    ens: &ParticleEnsemble,
    steady: &SteadyState,
    consts: &SteadyConstants,
    a: &Vec3,
    pair: &PairOptions,
) -> f64 {
    FieldDistance::new(ens, consts, pair).at(ens, steady, a)
}

/// All functionals of a particle state measured against a steady state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub t: f64,
    pub shift: [f64; 3],
    pub e_kin: f64,
    pub e_pot: f64,
    pub casimir_value: f64,
    pub h_c: f64,
    pub p_value: f64,
    pub d_value: f64,
    pub field_distance: f64,
    /// `(p, ‖ρ‖_p)` pairs; empty unless requested.
    pub norms: Vec<(f64, f64)>,
}

impl FunctionalReport {
    pub const CSV_HEADER: [&'static str; 11] =
        ["t", "a_x", "a_y", "a_z", "e_kin", "e_pot", "casimir", "h_c", "p", "d", "field_dist"];

    pub fn csv_row(&self) -> Vec<String> {
        [
            self.t,
            self.shift[0],
            self.shift[1],
            self.shift[2],
            self.e_kin,
            self.e_pot,
            self.casimir_value,
            self.h_c,
            self.p_value,
            self.d_value,
            self.field_distance,
        ]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect()
    }

    /// `d + field distance`, the stability metric.
    pub fn total(&self) -> f64 {
        self.d_value + self.field_distance
    }
}

/// Everything needed to report on one ensemble at several shifts.
pub struct Evaluation<'a> {
    ens: &'a ParticleEnsemble,
    steady: &'a SteadyState,
    consts: &'a SteadyConstants,
    field: FieldDistance,
    e_kin: f64,
    casimir: f64,
}

impl<'a> Evaluation<'a> {
    pub fn new(
        ens: &'a ParticleEnsemble,
        steady: &'a SteadyState,
        consts: &'a SteadyConstants,
        pair: &PairOptions,
    ) -> Result<Self> {
        Ok(Evaluation {
            ens,
            steady,
            consts,
            field: FieldDistance::new(ens, consts, pair),
            e_kin: kinetic_energy(ens),
            casimir: casimir_functional(ens, &steady.casimir)?,
        })
    }

    pub fn field_distance(&self, a: &Vec3) -> f64 {
        self.field.at(self.ens, self.steady, a)
    }

    pub fn report(&self, a: &Vec3) -> FunctionalReport {
        let e_pot = -0.5 * self.field.i_ff;
        let w = steady_field_energy(self.ens, self.steady, a);
        FunctionalReport {
            t: self.ens.time,
            shift: [a.x, a.y, a.z],
            e_kin: self.e_kin,
            e_pot,
            casimir_value: self.casimir,
            h_c: self.casimir + self.e_kin + e_pot,
            p_value: self.casimir + self.e_kin,
            d_value: d_from_parts(self.casimir, self.e_kin, w, self.ens.total_mass(), self.consts),
            field_distance: 0.5 * (self.field.i_ff + self.field.i00) + w,
            norms: vec![],
        }
    }
}

/// Assembles every functional of `f^a` against `f0`.
pub fn energy_casimir(
    ens: &ParticleEnsemble,
    steady: &SteadyState,
    consts: &SteadyConstants,
    a: &Vec3,
    pair: &PairOptions,
) -> Result<FunctionalReport> {
    Ok(Evaluation::new(ens, steady, consts, pair)?.report(a))
}

/// `|[ℋ_C(f^a) - ℋ_C(f0)] - [d - field distance]| / max(1, |ℋ_C(f0)|)`.
pub fn dd_identity_residual(report: &FunctionalReport, consts: &SteadyConstants) -> f64 {
    let lhs = report.h_c - consts.h_m;
    let rhs = report.d_value - report.field_distance;
    (lhs - rhs).abs() / consts.h_m.abs().max(1.0)
}

pub fn dd_identity_check(
    ens: &ParticleEnsemble,
    steady: &SteadyState,
    consts: &SteadyConstants,
    a: &Vec3,
    pair: &PairOptions,
) -> Result<f64> {
    Ok(dd_identity_residual(&energy_casimir(ens, steady, consts, a, pair)?, consts))
}

/// `(1/M) ∫∫ (Q'(f0) + E) f0` by phase-space quadrature; equals `E0`.
pub fn e0_identity(steady: &SteadyState) -> Result<f64> {
    let q = &steady.casimir;
    let e0 = steady.e0;
    let total = steady.phase_space_integral(0, |e| {
        let f = q.qprime_inverse(e0 - e)?;
        Ok((q.dq(f) + e) * f)
    })?;
    Ok(total / steady.mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::{build_steady, sampler, BuildOptions, CasimirFunction};
    use std::sync::OnceLock;

    fn k1() -> &'static (SteadyState, SteadyConstants) {
        static S: OnceLock<(SteadyState, SteadyConstants)> = OnceLock::new();
        S.get_or_init(|| {
            let s = build_steady(&CasimirFunction::polytropic(1.0).unwrap(), 1.0, &BuildOptions::default()).unwrap();
            let c = SteadyConstants::new(&s).unwrap();
            (s, c)
        })
    }

    #[test]
    fn e0_identity_matches() {
        let (s, _) = k1();
        let e = e0_identity(s).unwrap();
        assert!((e - s.e0).abs() <= 1e-8 * s.e0.abs(), "{e} vs {}", s.e0);
    }

    #[test]
    fn constants_consistent() {
        let (s, c) = k1();
        assert!((c.i00 + 2.0 * s.energies.e_pot).abs() < 1e-8 * c.i00);
    }

    #[test]
    fn steady_sample_is_close_and_identity_holds() {
        let (s, c) = k1();
        let ens = sampler("quasi-random").unwrap().sample(s, 4000, 1).unwrap();
        let rep = energy_casimir(&ens, s, c, &Vec3::zeros(), &PairOptions::default()).unwrap();
        assert!(rep.d_value.abs() < 1e-2 * c.h_m.abs(), "{rep:?}");
        assert!(rep.field_distance.abs() < 1e-2 * c.i00, "{rep:?}");
        assert!(dd_identity_residual(&rep, c) < 1e-9);
        assert!((rep.h_c - rep.casimir_value - rep.e_kin - rep.e_pot).abs() == 0.0);
    }

    #[test]
    fn translation_covariance() {
        let (s, c) = k1();
        let ens = sampler("quasi-random").unwrap().sample(s, 2000, 2).unwrap();
        let b = Vec3::new(0.3, -0.1, 0.2) * s.radius;
        let moved = ens.translated(&b);
        let pair = PairOptions::default();
        let f0 = field_distance(&ens, s, c, &Vec3::zeros(), &pair);
        let fb = field_distance(&moved, s, c, &b, &pair);
        assert!((f0 - fb).abs() < 1e-10 * c.i00);
        let d0 = d_distance(&ens, s, c, &Vec3::zeros()).unwrap();
        let db = d_distance(&moved, s, c, &b).unwrap();
        assert!((d0 - db).abs() < 1e-10 * c.h_m.abs());
    }

    #[test]
    fn far_translation_approaches_twice_binding_energy() {
        let (s, c) = k1();
        let ens = sampler("quasi-random").unwrap().sample(s, 2000, 3).unwrap();
        let b = Vec3::new(0.0, 0.0, 50.0 * s.radius);
        let pair = PairOptions::default();
        let fd = field_distance(&ens.translated(&b), s, c, &Vec3::zeros(), &pair);
        let expected = c.i00 - s.mass * s.mass / b.norm();
        assert!((fd - expected).abs() < 5e-3 * c.i00, "{fd} vs {expected}");
    }
}
