//! Velocity-space integrals of energy-dependent phase-space functions.
//!
//! For `F = F(E)` with `E = |v|²/2 + u`, `∫ F (|v|²/2)^j d³v` reduces to
//! `4π√2 ∫_u^{E0} F(E) (E-u)^{j+1/2} dE`. The square-root endpoint at `E = u`
//! is removed by substituting `E = u + t²`.

use std::cell::RefCell;
use std::f64::consts::PI;

use super::casimir::CasimirFunction;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

pub(crate) const FOUR_PI_SQRT2: f64 = 4.0 * PI * std::f64::consts::SQRT_2;

/// `4π√2 ∫_u^{e0} F(E) (E-u)^{j+1/2} dE` with `j` the power of `|v|²/2`.
pub fn velocity_integral<F>(e0: f64, u: f64, j: i32, mut integrand: F, opts: QuadOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if u >= e0 {
        return Ok(0.0);
    }
    let tmax = (e0 - u).sqrt();
    let failure = RefCell::new(None);
    // (E-u)^{j+1/2} dE = t^{2j+1} · 2t dt
    let v = integrate(
        |t| match integrand(u + t * t) {
            Ok(f) => 2.0 * f * t.powi(2 * j + 2),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        tmax,
        opts,
    )
    .map_err(|e| match e {
        Error::Quadrature { error, .. } => Error::Quadrature { lo: u, hi: e0, error },
        other => other,
    })?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(FOUR_PI_SQRT2 * v)
}

/// Spatial density `h_φ(u) = 4π√2 ∫_u^{E0} φ(E) √(E-u) dE` of the profile
/// `φ(E) = (Q')^{-1}(E0 - E)`. Vanishes for `u >= E0`.
pub fn h_phi_eval(casimir: &CasimirFunction, e0: f64, u: f64) -> Result<f64> {
    velocity_integral(e0, u, 0, |e| casimir.qprime_inverse(e0 - e), QuadOptions::rel(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::casimir::polytrope_constant;
    use approx::assert_relative_eq;

    #[test]
    fn vanishes_at_and_above_cutoff() {
        let q = CasimirFunction::polytropic(1.0).unwrap();
        assert_eq!(h_phi_eval(&q, -1.0, -1.0).unwrap(), 0.0);
        assert_eq!(h_phi_eval(&q, -1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn k1_matches_closed_form() {
        let q = CasimirFunction::polytropic(1.0).unwrap();
        let c1 = polytrope_constant(1.0).unwrap();
        let h = h_phi_eval(&q, -1.0, -2.0).unwrap();
        assert_relative_eq!(h, c1 / (4.0 * PI), max_relative = 1e-11);
    }

    #[test]
    fn ratio_constant_in_u() {
        // 4π h_φ(u) / (E0-u)^{k+3/2} is independent of u and equals c_k.
        for k in [0.1, 0.5, 0.75, 1.0, 1.25, 1.4] {
            let q = CasimirFunction::polytropic(k).unwrap();
            let ck = polytrope_constant(k).unwrap();
            let e0 = -0.3;
            for i in 1..=20 {
                let u = -1.0 + (e0 + 1.0) * (i as f64 - 0.5) / 20.0;
                let ratio = 4.0 * PI * h_phi_eval(&q, e0, u).unwrap() / (e0 - u).powf(k + 1.5);
                assert_relative_eq!(ratio, ck, max_relative = 1e-8);
            }
            assert!(ck.is_finite() && ck > 0.0);
        }
    }

    #[test]
    fn linear_in_amplitude() {
        let q = CasimirFunction::polytropic(0.75).unwrap();
        let single = velocity_integral(-0.2, -1.0, 0, |e| q.qprime_inverse(-0.2 - e), QuadOptions::default()).unwrap();
        let double =
            velocity_integral(-0.2, -1.0, 0, |e| Ok(2.0 * q.qprime_inverse(-0.2 - e)?), QuadOptions::default()).unwrap();
        assert_relative_eq!(double, 2.0 * single, max_relative = 1e-14);
    }
}
