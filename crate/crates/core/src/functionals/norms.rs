//! `L^p` norms of spatial densities.

use std::f64::consts::PI;

use super::energy::RadialDensity;
use crate::ensemble::ParticleEnsemble;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid("p", format!("L^p norms need finite p >= 1, got {p}")));
    }
    Ok(())
}

/// `‖ρ‖_p` of a radial density by quadrature.
pub fn lp_norm<D: RadialDensity + ?Sized>(d: &D, p: f64) -> Result<f64> {
    check_p(p)?;
    let opts = QuadOptions { abs: 0.0, rel: 1e-12, max_intervals: 4000 };
    let integral = integrate(|r| 4.0 * PI * r * r * d.density(r).powf(p), 0.0, d.radius(), opts)?;
    Ok(integral.powf(1.0 / p))
}

/// Diagnostic `‖ρ‖_p` of an ensemble from a radial shell histogram about the
/// centre of mass, with bins holding about `per_bin` markers each.
pub fn lp_norm_ensemble(ens: &ParticleEnsemble, p: f64, per_bin: usize) -> Result<f64> {
    check_p(p)?;
    if ens.is_empty() {
        return Ok(0.0);
    }
    let c = ens.center_of_mass();
    let mut shells: Vec<(f64, f64)> = ens.pos.iter().zip(&ens.weight).map(|(x, w)| ((x - c).norm(), *w)).collect();
    shells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let per_bin = per_bin.max(1);
    let mut total = 0.0;
    let mut inner = 0.0_f64;
    for chunk in shells.chunks(per_bin) {
        let outer = chunk[chunk.len() - 1].0;
        let mass: f64 = chunk.iter().map(|s| s.1).sum();
        let volume = 4.0 / 3.0 * PI * (outer.powi(3) - inner.powi(3));
        if volume > 0.0 {
            total += volume * (mass / volume).powf(p);
        }
        inner = outer;
    }
    Ok(total.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::super::energy::UniformBall;
    use super::*;
    use crate::steady::{build_steady, BuildOptions, CasimirFunction};

    #[test]
    fn ball_closed_form() {
        let ball = UniformBall { mass: 2.5, radius: 1.0 };
        for p in [1.0, 1.2, 2.0, 3.5] {
            let exact = 2.5 * (3.0 / (4.0 * PI)).powf(1.0 - 1.0 / p);
            assert!((lp_norm(&ball, p).unwrap() - exact).abs() < 1e-11 * exact);
        }
        assert!(lp_norm(&ball, 0.5).is_err());
    }

    #[test]
    fn mass_and_interpolation() {
        for k in [0.5, 1.0, 1.25] {
            let s = build_steady(&CasimirFunction::polytropic(k).unwrap(), 1.0, &BuildOptions::default()).unwrap();
            assert!((lp_norm(&s, 1.0).unwrap() - 1.0).abs() < 1e-8);
            let n1 = k + 1.5;
            let q = 1.0 + 1.0 / n1;
            let theta = (n1 + 1.0) / 6.0;
            let lhs = lp_norm(&s, 1.2).unwrap();
            let rhs = lp_norm(&s, 1.0).unwrap().powf(1.0 - theta) * lp_norm(&s, q).unwrap().powf(theta);
            assert!(lhs <= rhs * (1.0 + 1e-10), "k={k}: {lhs} > {rhs}");
        }
    }
}
