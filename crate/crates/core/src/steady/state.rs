//! Steady states assembled from a shot radial solution.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::casimir::CasimirFunction;
use super::moments::velocity_integral;
use super::shoot::{scale_to_mass, shoot, DensityLaw, RadialSolution, ShootOptions};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::roots::brent;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    /// Nodes of the exported radial table.
    pub n_table: usize,
    /// Table extent in units of the support radius (at least 3).
    pub r_max_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n_table: 801, r_max_factor: 3.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub shoot: ShootOptions,
    pub grid: GridSpec,
    /// Central depth used for the first shot.
    pub z0_seed: f64,
    /// Multiplier on `c_k`; anything but 1 deliberately corrupts the state.
    pub ck_scale: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { shoot: ShootOptions::default(), grid: GridSpec::default(), z0_seed: 1.0, ck_scale: 1.0 }
    }
}

/// Tabulated radial profiles on `[0, r_max]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialTable {
    pub r: Vec<f64>,
    pub u0: Vec<f64>,
    pub du0: Vec<f64>,
    pub rho0: Vec<f64>,
}

/// Energies of the steady state evaluated by phase-space quadrature.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SteadyEnergies {
    pub e_kin: f64,
    /// Field form `-(1/8π)∫|∇U0|²`.
    pub e_pot: f64,
    pub casimir: f64,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub casimir: CasimirFunction,
    pub mass: f64,
    pub e0: f64,
    pub radius: f64,
    pub h_m: f64,
    pub energies: SteadyEnergies,
    pub table: RadialTable,
    profile: RadialSolution,
}

pub(crate) fn radial_opts() -> QuadOptions {
    QuadOptions { abs: 0.0, rel: 1e-11, max_intervals: 4000 }
}

impl SteadyState {
    pub fn profile(&self) -> &RadialSolution {
        &self.profile
    }

    /// Depth `z = E0 - U0` and its radial derivative.
    pub fn depth(&self, r: f64) -> (f64, f64) {
        self.profile.eval(r)
    }

    pub fn u0(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.profile.r[self.profile.r.len() - 1] {
            return -self.mass / r;
        }
        self.e0 - self.profile.eval(r).0
    }

    /// `dU0/dr`.
    pub fn du0(&self, r: f64) -> f64 {
        -self.profile.eval(r).1
    }

    /// Density from the field equation, `ρ0 = 4πρ(z)/4π` along the profile.
    pub fn rho0(&self, r: f64) -> f64 {
        let z = self.profile.eval(r).0;
        if z <= 0.0 || r.abs() >= self.radius {
            return 0.0;
        }
        self.profile.law.source(z).unwrap_or(f64::NAN) / (4.0 * PI)
    }

    /// Mass inside radius `r`, `-r² z'(r)`.
    pub fn enclosed_mass(&self, r: f64) -> f64 {
        if r >= self.radius {
            return self.mass;
        }
        let r = r.max(0.0);
        -r * r * self.profile.eval(r).1
    }

    /// Escape speed to the cut-off energy, `sqrt(2 (E0 - U0))`.
    pub fn escape_speed(&self, r: f64) -> f64 {
        (2.0 * self.profile.eval(r).0.max(0.0)).sqrt()
    }

    /// Orbital time scale `2π sqrt(R³/M)`.
    pub fn t_dyn(&self) -> f64 {
        2.0 * PI * (self.radius.powi(3) / self.mass).sqrt()
    }

    /// `|2 E_kin + E_pot| / |E_pot|`.
    pub fn virial_residual(&self) -> f64 {
        (2.0 * self.energies.e_kin + self.energies.e_pot).abs() / self.energies.e_pot.abs()
    }

    pub fn exponent(&self) -> Option<f64> {
        self.casimir.polytropic_exponent()
    }

    /// `φ(E) = (Q')^{-1}(E0 - E)`.
    pub fn phi(&self, energy: f64) -> f64 {
        self.casimir.qprime_inverse(self.e0 - energy).unwrap_or(f64::NAN)
    }

    /// `f0(x, v) = (Q')^{-1}(E0 - |v|²/2 - U0(|x|))`, zero outside the support.
    pub fn f0_eval(&self, x: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        self.f0_at(x.norm(), v.norm_squared())
    }

    pub(crate) fn f0_at(&self, r: f64, v2: f64) -> f64 {
        if r >= self.radius {
            return 0.0;
        }
        let s = self.profile.eval(r).0 - 0.5 * v2;
        self.casimir.qprime_inverse(s).unwrap_or(f64::NAN)
    }

    /// `∫∫ F(E) (|v|²/2)^j f-independent weight dv dx` over the support, for
    /// integrands depending on the particle energy only.
    pub fn phase_space_integral<F>(&self, j: i32, integrand: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let inner = QuadOptions { abs: 0.0, rel: 1e-12, max_intervals: 4000 };
        let mut failure = None;
        let value = integrate(
            |r| {
                let u = self.u0(r);
                match velocity_integral(self.e0, u, j, &integrand, inner) {
                    Ok(v) => 4.0 * PI * r * r * v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            0.0,
            self.radius,
            radial_opts(),
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

fn evaluate_energies(state: &SteadyState) -> Result<SteadyEnergies> {
    let q = &state.casimir;
    let e0 = state.e0;
    let e_kin = state.phase_space_integral(1, |e| q.qprime_inverse(e0 - e))?;
    let casimir = state.phase_space_integral(0, |e| Ok(q.q(q.qprime_inverse(e0 - e)?)))?;
    let field = integrate(
        |r| {
            let dz = state.profile.eval(r).1;
            r * r * dz * dz
        },
        0.0,
        state.radius,
        radial_opts(),
    )?;
    let e_pot = -0.5 * (field + state.mass * state.mass / state.radius);
    Ok(SteadyEnergies { e_kin, e_pot, casimir })
}

fn tabulate(state: &SteadyState, grid: &GridSpec) -> RadialTable {
    let r_max = grid.r_max_factor * state.radius;
    let n = grid.n_table.max(2);
    let r: Vec<f64> = (0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect();
    RadialTable {
        u0: r.iter().map(|&r| state.u0(r)).collect(),
        du0: r.iter().map(|&r| state.du0(r)).collect(),
        rho0: r.iter().map(|&r| state.rho0(r)).collect(),
        r,
    }
}

fn assemble(casimir: &CasimirFunction, profile: RadialSolution, grid: &GridSpec) -> Result<SteadyState> {
    if grid.r_max_factor < 3.0 {
        return Err(Error::invalid("r_max_factor", "the table must reach at least 3R"));
    }
    let mass = profile.mass;
    let radius = profile.radius;
    let mut state = SteadyState {
        casimir: casimir.clone(),
        mass,
        e0: -mass / radius,
        radius,
        h_m: f64::NAN,
        energies: SteadyEnergies { e_kin: f64::NAN, e_pot: f64::NAN, casimir: f64::NAN },
        table: RadialTable { r: vec![], u0: vec![], du0: vec![], rho0: vec![] },
        profile,
    };
    state.energies = evaluate_energies(&state)?;
    state.h_m = state.energies.casimir + state.energies.e_kin + state.energies.e_pot;
    state.table = tabulate(&state, grid);
    Ok(state)
}

/// Builds the steady state of mass `mass` for `casimir`.
///
/// Polytropes: one shot from `z0_seed`, then the scaling family carries it to
/// the target mass exactly. General Casimirs: the central depth is solved for
/// by root finding on `log M(z0)`.
pub fn build_steady(casimir: &CasimirFunction, mass: f64, opts: &BuildOptions) -> Result<SteadyState> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::invalid("mass", format!("must be positive, got {mass}")));
    }
    let law = DensityLaw::for_casimir(casimir)?.with_ck_scale(opts.ck_scale);
    let profile = match law.exponent() {
        Some(_) => scale_to_mass(&shoot(&law, opts.z0_seed, &opts.shoot)?, mass)?,
        None => shoot_to_mass(&law, mass, opts)?,
    };
    assemble(casimir, profile, &opts.grid)
}

fn shoot_to_mass(law: &DensityLaw, mass: f64, opts: &BuildOptions) -> Result<RadialSolution> {
    let coarse = ShootOptions { rtol: 1e-10, max_step_fraction: 0.05, ..opts.shoot };
    let log_mass = |lz: f64| shoot(law, lz.exp(), &coarse).map(|s| s.mass.ln());
    let target = mass.ln();
    let mut lo = opts.z0_seed.ln();
    let mut m_lo = log_mass(lo)?;
    // Walk outward until the target is bracketed; M(z0) is monotone for the
    // Casimirs in the registry but no assumption is made on its direction.
    let mut step = if m_lo < target { 1.0 } else { -1.0 };
    let mut hi = lo + step;
    let mut m_hi = log_mass(hi)?;
    if (m_hi - m_lo) * (target - m_lo) < 0.0 {
        step = -step;
        hi = lo + step;
        m_hi = log_mass(hi)?;
    }
    let mut tries = 0;
    while (m_lo - target) * (m_hi - target) > 0.0 {
        tries += 1;
        if tries > 60 {
            return Err(Error::numeric("build_steady", format!("cannot bracket mass {mass} by the central depth")));
        }
        lo = hi;
        m_lo = m_hi;
        step *= 1.5;
        hi = lo + step;
        m_hi = log_mass(hi)?;
    }
    let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
    let mut failure = None;
    let lz = brent(
        |lz| match log_mass(lz) {
            Ok(m) => m - target,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        1e-13,
        200,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    shoot(law, lz.exp(), &opts.shoot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k1() -> SteadyState {
        build_steady(&CasimirFunction::polytropic(1.0).unwrap(), 1.0, &BuildOptions::default()).unwrap()
    }

    #[test]
    fn cutoff_negative_and_support_compact() {
        let s = k1();
        assert!(s.e0 < 0.0);
        assert_relative_eq!(s.mass, 1.0, max_relative = 1e-12);
        for (r, rho) in s.table.r.iter().zip(&s.table.rho0) {
            if *r >= s.radius {
                assert_eq!(*rho, 0.0);
            }
        }
        assert!(s.table.r.last().unwrap() >= &(3.0 * s.radius * (1.0 - 1e-12)));
    }

    #[test]
    fn potential_increasing_and_bounded_below() {
        let s = k1();
        for w in s.table.u0.windows(2) {
            assert!(w[1] > w[0]);
        }
        let r = 2.5 * s.radius;
        assert!(-s.u0(r) * r >= s.mass / 3.0);
        for i in 0..200 {
            let r = s.radius * (2.0 + 0.1 * i as f64);
            assert!(-s.u0(r) >= s.mass / (3.0 * r));
        }
        assert!(s.u0(1e9).abs() < 1e-8);
    }

    #[test]
    fn f0_examples() {
        let s = k1();
        let x = Vector3::new(0.2 * s.radius, 0.0, 0.0);
        let fast = Vector3::new(0.0, 10.0 * s.escape_speed(0.0), 0.0);
        assert_eq!(s.f0_eval(&x, &fast), 0.0);
        let origin = Vector3::zeros();
        let peak = s.f0_eval(&origin, &origin);
        assert_relative_eq!(peak, s.phi(s.u0(0.0)), max_relative = 1e-15);
        let v = Vector3::new(0.3, -0.1, 0.2);
        assert!(s.f0_eval(&x, &v) <= peak);
    }

    #[test]
    fn f0_rotation_invariant() {
        let s = k1();
        let rot = nalgebra::Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let x = Vector3::new(0.01, 0.02, -0.015);
        let v = Vector3::new(0.5, -0.4, 0.3);
        let f = s.f0_eval(&x, &v);
        assert!((f - s.f0_eval(&(rot * x), &(rot * v))).abs() <= 1e-13 * f);
        // Coordinate permutations and reflections are exact in floating point.
        let (xp, vp) = (Vector3::new(-x.z, x.x, -x.y), Vector3::new(-v.z, v.x, -v.y));
        assert_eq!(f, s.f0_eval(&xp, &vp));
    }

    #[test]
    fn h_m_negative() {
        assert!(k1().h_m < 0.0);
    }

    #[test]
    fn invalid_mass() {
        let q = CasimirFunction::polytropic(1.0).unwrap();
        assert!(build_steady(&q, -1.0, &BuildOptions::default()).is_err());
    }
}
