//! Shooting for the singular radial equation `(1/r²)(r² z')' = -4πρ(z)`,
//! `z = E0 - U0`, from the regular centre `z(0) = z0`, `z'(0) = 0`.

use std::cell::RefCell;

use serde::Serialize;

use super::casimir::{polytrope_constant, CasimirFunction};
use super::moments::h_phi_eval;
use crate::error::{Error, Result};
use crate::ode::{dopri5_step, error_norm, hermite5, State};
use crate::roots::brent;

/// Source term `4πρ` as a function of the depth `z = E0 - U`.
#[derive(Debug, Clone)]
pub enum DensityLaw {
    /// `4πρ = c_k z_+^{k+3/2}`.
    Polytropic { k: f64, ck: f64 },
    /// `4πρ = 4π h_φ(E0 - z)` by velocity quadrature.
    General(CasimirFunction),
}

impl DensityLaw {
    pub fn polytropic(k: f64) -> Result<Self> {
        Ok(DensityLaw::Polytropic { k, ck: polytrope_constant(k)? })
    }

    /// Closed form for polytropic Casimirs, quadrature otherwise.
    pub fn for_casimir(casimir: &CasimirFunction) -> Result<Self> {
        match casimir.polytropic_exponent() {
            Some(k) => Self::polytropic(k),
            None => Ok(DensityLaw::General(casimir.clone())),
        }
    }

    /// Multiplies `c_k` by `factor`. Only used to inject faults into the checks.
    pub fn with_ck_scale(self, factor: f64) -> Self {
        match self {
            DensityLaw::Polytropic { k, ck } => DensityLaw::Polytropic { k, ck: ck * factor },
            other => other,
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            DensityLaw::Polytropic { k, .. } => Some(*k),
            DensityLaw::General(_) => None,
        }
    }

    pub fn source(&self, z: f64) -> Result<f64> {
        if z <= 0.0 {
            return Ok(0.0);
        }
        match self {
            DensityLaw::Polytropic { k, ck } => Ok(ck * z.powf(k + 1.5)),
            DensityLaw::General(q) => Ok(4.0 * std::f64::consts::PI * h_phi_eval(q, 0.0, -z)?),
        }
    }

    fn source_slope(&self, z: f64) -> Result<f64> {
        match self {
            DensityLaw::Polytropic { k, ck } => Ok(ck * (k + 1.5) * z.powf(k + 0.5)),
            DensityLaw::General(_) => {
                let dz = 1e-4 * z;
                Ok((self.source(z + dz)? - self.source(z - dz)?) / (2.0 * dz))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    pub rtol: f64,
    /// Tabulate the exterior out to this multiple of the support radius.
    pub exterior_extent: f64,
    /// Maximum step as a fraction of the central length scale.
    pub max_step_fraction: f64,
    /// Radius (fraction of the central length scale) where the series start hands over.
    pub series_fraction: f64,
    pub max_steps: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            rtol: 1e-13,
            exterior_extent: 4.0,
            max_step_fraction: 1e-2,
            series_fraction: 1e-3,
            max_steps: 200_000,
        }
    }
}

/// Solution of the radial equation: nodes `(r, z, z', z'')`, the first root
/// `radius` of `z` and the mass `-R² z'(R)`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub dz: Vec<f64>,
    pub d2z: Vec<f64>,
    pub radius: f64,
    pub mass: f64,
    #[serde(skip)]
    pub law: DensityLaw,
}

impl RadialSolution {
    pub fn z0(&self) -> f64 {
        self.z[0]
    }

    /// `(z, z')` at radius `r`; beyond the last node the exact exterior
    /// solution `z = M/r - M/R` is used.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        let last = self.r.len() - 1;
        if r >= self.r[last] {
            return (self.mass / r - self.mass / self.radius, -self.mass / (r * r));
        }
        let i = self.r.partition_point(|&x| x <= r).saturating_sub(1).min(last - 1);
        hermite5(
            self.r[i],
            self.r[i + 1],
            [self.z[i], self.dz[i], self.d2z[i]],
            [self.z[i + 1], self.dz[i + 1], self.d2z[i + 1]],
            r,
        )
    }

    /// `z_α(r) = α z(α^γ r)` with `γ = (k + 1/2)/2`. Polytropes only.
    pub fn scaled(&self, alpha: f64) -> Result<RadialSolution> {
        let k = self
            .law
            .exponent()
            .ok_or_else(|| Error::invalid("law", "the scaling family exists for polytropic Casimirs only"))?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        let gamma = (k + 0.5) / 2.0;
        let ag = alpha.powf(gamma);
        Ok(RadialSolution {
            r: self.r.iter().map(|r| r / ag).collect(),
            z: self.z.iter().map(|z| alpha * z).collect(),
            dz: self.dz.iter().map(|d| alpha * ag * d).collect(),
            d2z: self.d2z.iter().map(|d| alpha * ag * ag * d).collect(),
            radius: self.radius / ag,
            mass: self.mass * alpha.powf(1.0 - gamma),
            law: self.law.clone(),
        })
    }
}

/// Mass exponent of the scaling family: `M(z_α) = α^{k+3/2-3γ} M(z)`.
pub fn mass_exponent(k: f64) -> f64 {
    let gamma = (k + 0.5) / 2.0;
    k + 1.5 - 3.0 * gamma
}

/// The member of the scaling family with mass `m_target`.
pub fn scale_to_mass(sol: &RadialSolution, m_target: f64) -> Result<RadialSolution> {
    if !(m_target > 0.0 && m_target.is_finite()) {
        return Err(Error::invalid("mass", format!("must be positive, got {m_target}")));
    }
    let k = sol
        .law
        .exponent()
        .ok_or_else(|| Error::invalid("law", "mass rescaling exists for polytropic Casimirs only"))?;
    if m_target == sol.mass {
        return Ok(sol.clone());
    }
    let alpha = (m_target / sol.mass).powf(1.0 / mass_exponent(k));
    let mut out = sol.scaled(alpha)?;
    out.mass = m_target;
    Ok(out)
}

/// Polytropic shooting with exponent `k` from central depth `z0`.
pub fn emden_fowler_shoot(k: f64, z0: f64, opts: &ShootOptions) -> Result<RadialSolution> {
    shoot(&DensityLaw::polytropic(k)?, z0, opts)
}

/// Integrates outward from the centre, refines the first root of `z`, and
/// continues through the exterior to `exterior_extent · R`.
pub fn shoot(law: &DensityLaw, z0: f64, opts: &ShootOptions) -> Result<RadialSolution> {
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::invalid("z0", format!("central value must be positive, got {z0}")));
    }
    let g0 = law.source(z0)?;
    if g0 <= 0.0 {
        return Err(Error::numeric("shoot", "density vanishes at the centre"));
    }
    let length = (z0 / g0).sqrt();

    let failure = RefCell::new(None::<Error>);
    let source = |z: f64| match law.source(z) {
        Ok(s) => s,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let rhs = |r: f64, y: &State| [y[1], -2.0 * y[1] / r - source(y[0])];
    let check = || match failure.borrow_mut().take() {
        Some(e) => Err(e),
        None => Ok(()),
    };

    // z = z0 - a r² + b r⁴ + O(r⁶) near the regular singular point.
    let a = g0 / 6.0;
    let b = law.source_slope(z0)? * a / 20.0;
    let rs = opts.series_fraction * length;
    let mut r = rs;
    let mut y: State = [z0 - a * rs * rs + b * rs.powi(4), -2.0 * a * rs + 4.0 * b * rs.powi(3)];

    let mut sol = RadialSolution {
        r: vec![0.0, r],
        z: vec![z0, y[0]],
        dz: vec![0.0, y[1]],
        d2z: vec![-g0 / 3.0, rhs(r, &y)[1]],
        radius: f64::NAN,
        mass: f64::NAN,
        law: law.clone(),
    };
    let push = |sol: &mut RadialSolution, r: f64, y: &State| {
        sol.r.push(r);
        sol.z.push(y[0]);
        sol.dz.push(y[1]);
        sol.d2z.push(rhs(r, y)[1]);
    };

    let atol = opts.rtol * z0;
    let hmax = opts.max_step_fraction * length;
    let mut h = hmax * 0.1;
    let r_limit = 1e4 * length;
    let mut steps = 0usize;
    let mut r_end = f64::INFINITY;

    loop {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::numeric("shoot", format!("step budget exhausted at r = {r:e}")));
        }
        if h < 1e-14 * r.max(length) {
            return Err(Error::numeric("shoot", format!("step size underflow at r = {r:e}, z = {:e}", y[0])));
        }
        if sol.radius.is_nan() && r > r_limit {
            return Err(Error::numeric(
                "shoot",
                format!("no root of z before r = {r_limit:e}; the exponent violates k < 3/2?"),
            ));
        }
        let step = h.min(hmax).min(r_end - r);
        let (y_new, err) = dopri5_step(&rhs, r, &y, step);
        check()?;
        let en = error_norm(&y, &y_new, &err, atol, opts.rtol);
        if !en.is_finite() || en > 1.0 {
            h = step * (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
            if !en.is_finite() {
                h = step * 0.1;
            }
            continue;
        }
        if sol.radius.is_nan() && y_new[0] <= 0.0 {
            // Land exactly on the root: solve z(r + s) = 0 over single steps of size s.
            let s = brent(|s| dopri5_step(&rhs, r, &y, s).0[0], 0.0, step, 1e-16 * r, 200)?;
            let (y_root, _) = dopri5_step(&rhs, r, &y, s);
            check()?;
            r += s;
            y = [0.0, y_root[1]];
            push(&mut sol, r, &y);
            sol.radius = r;
            sol.mass = -r * r * y[1];
            r_end = opts.exterior_extent * r;
            continue;
        }
        r += step;
        y = y_new;
        push(&mut sol, r, &y);
        if r >= r_end {
            break;
        }
        h = step * (0.9 * en.max(1e-10).powf(-0.2)).min(5.0);
    }
    if !(sol.mass > 0.0) {
        return Err(Error::numeric("shoot", format!("non-positive mass {}", sol.mass)));
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn regular_start_and_monotone_interior() {
        let sol = emden_fowler_shoot(1.0, 1.0, &ShootOptions::default()).unwrap();
        assert_eq!(sol.dz[0], 0.0);
        assert!(sol.z[0] > 0.0);
        let inside: Vec<usize> = (0..sol.r.len()).filter(|&i| sol.r[i] <= sol.radius).collect();
        for w in inside.windows(2) {
            assert!(sol.z[w[1]] < sol.z[w[0]]);
        }
        let (zr, dzr) = sol.eval(sol.radius);
        assert!(zr.abs() < 1e-14);
        assert!(dzr < 0.0);
        assert_relative_eq!(sol.mass, -sol.radius.powi(2) * dzr, max_relative = 1e-12);
    }

    #[test]
    fn lane_emden_index_two_and_a_half() {
        // k = 1 is the n = 5/2 Lane–Emden polytrope: with ξ = r √(c z0^{3/2}),
        // the first zero is ξ₁ = 5.355275459 and ξ₁²|θ'(ξ₁)| = 2.187200.
        let k = 1.0;
        let ck = polytrope_constant(k).unwrap();
        let sol = emden_fowler_shoot(k, 1.0, &ShootOptions::default()).unwrap();
        let scale = ck.sqrt();
        assert_relative_eq!(sol.radius * scale, 5.355_275_459, max_relative = 1e-9);
        assert_relative_eq!(sol.mass * scale, 2.187_200, max_relative = 1e-6);
    }

    #[test]
    fn exterior_is_keplerian() {
        let sol = emden_fowler_shoot(1.25, 0.7, &ShootOptions::default()).unwrap();
        for i in 0..sol.r.len() {
            let r = sol.r[i];
            if r >= 1.5 * sol.radius {
                let exact = sol.mass / r - sol.mass / sol.radius;
                assert!((sol.z[i] - exact).abs() <= 1e-10 * sol.mass / r);
            }
        }
    }

    #[test]
    fn scaling_identity_and_round_trip() {
        let sol = emden_fowler_shoot(1.0, 1.0, &ShootOptions::default()).unwrap();
        let same = scale_to_mass(&sol, sol.mass).unwrap();
        assert_eq!(same.z, sol.z);

        let target = 2f64.powf(0.25) * sol.mass;
        let scaled = scale_to_mass(&sol, target).unwrap();
        assert_relative_eq!(scaled.z0(), 2.0, max_relative = 1e-13);
        assert_relative_eq!(scaled.radius, sol.radius * 2f64.powf(-0.75), max_relative = 1e-13);
        assert_relative_eq!(scaled.mass, target, max_relative = 1e-10);

        let back = scale_to_mass(&scaled, sol.mass).unwrap();
        for (a, b) in back.z.iter().zip(&sol.z) {
            assert!((a - b).abs() <= 1e-10 * sol.z0());
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(emden_fowler_shoot(1.0, -1.0, &ShootOptions::default()).is_err());
        assert!(emden_fowler_shoot(1.6, 1.0, &ShootOptions::default()).is_err());
        let sol = emden_fowler_shoot(1.0, 1.0, &ShootOptions::default()).unwrap();
        assert!(scale_to_mass(&sol, 0.0).is_err());
    }

    #[test]
    fn general_law_shoots() {
        let q = CasimirFunction::polytropic(0.8).unwrap();
        let general = shoot(&DensityLaw::General(q), 1.0, &ShootOptions::default()).unwrap();
        let closed = emden_fowler_shoot(0.8, 1.0, &ShootOptions::default()).unwrap();
        assert_relative_eq!(general.radius, closed.radius, max_relative = 1e-8);
        assert_relative_eq!(general.mass, closed.mass, max_relative = 1e-8);
    }
}
