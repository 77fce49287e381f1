//! Monte Carlo realizations of `f0` as equal-weight particle ensembles.
//!
//! Both samplers draw `(r, |v|)` from the marginal `16π² r² v² f0` and attach
//! isotropic directions. Work is split into fixed blocks, each with its own
//! ChaCha stream, so the result depends on the seed but not on thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;

use super::state::SteadyState;
use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::registry::Registry;
use crate::roots::brent;

const BLOCK: usize = 2048;

pub trait PhaseSampler: Send + Sync {
    fn name(&self) -> &'static str;
    fn sample(&self, steady: &SteadyState, n: usize, seed: u64) -> Result<ParticleEnsemble>;
}

pub type SamplerBuilder = fn() -> Box<dyn PhaseSampler>;

pub fn registry() -> Registry<SamplerBuilder> {
    Registry::<SamplerBuilder>::new("sampler")
        .with("rejection", "uniform box proposal in (r, |v|) with a scanned envelope", || Box::new(Rejection::default()))
        .with(
            "quasi-random",
            "shifted Halton points through the conditional inverse CDFs, in mirrored pairs",
            || Box::new(QuasiRandom),
        )
}

pub fn sampler(name: &str) -> Result<Box<dyn PhaseSampler>> {
    registry().get(name).map(|build| build())
}

/// Draws `n` markers from `f0 / M` by rejection sampling.
pub fn sample_f0(steady: &SteadyState, n: usize, seed: u64) -> Result<ParticleEnsemble> {
    Rejection::default().sample(steady, n, seed)
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64 + 1);
    rng
}

fn direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let d: [f64; 3] = UnitSphere.sample(rng);
    Vec3::new(d[0], d[1], d[2])
}

fn assemble(steady: &SteadyState, n: usize, seed: u64, tag: &str, parts: Vec<(Vec3, Vec3)>) -> ParticleEnsemble {
    let w = steady.mass / n as f64;
    let f_init = parts.iter().map(|(x, v)| steady.f0_eval(x, v)).collect();
    let (pos, vel) = parts.into_iter().unzip();
    ParticleEnsemble {
        pos,
        vel,
        weight: vec![w; n],
        f_init,
        time: 0.0,
        softening: 0.0,
        seed,
        provenance: tag.to_string(),
    }
}

/// Uniform proposal over `r ∈ [0, R]`, `v ∈ [0, v_esc(0)]` against
/// `r² v² f0(r, v)`, bounded by a grid scan times a safety factor.
#[derive(Debug, Clone, Copy)]
pub struct Rejection {
    pub scan: usize,
    pub safety: f64,
    pub min_efficiency: f64,
}

impl Default for Rejection {
    fn default() -> Self {
        Rejection { scan: 256, safety: 1.3, min_efficiency: 1e-3 }
    }
}

impl Rejection {
    fn envelope(&self, steady: &SteadyState) -> (f64, f64) {
        let v_max = steady.escape_speed(0.0);
        let mut peak: f64 = 0.0;
        for i in 1..=self.scan {
            let r = steady.radius * i as f64 / self.scan as f64;
            for j in 1..=self.scan {
                let v = v_max * j as f64 / self.scan as f64;
                peak = peak.max(r * r * v * v * steady.f0_at(r, v * v));
            }
        }
        (v_max, peak * self.safety)
    }
}

impl PhaseSampler for Rejection {
    fn name(&self) -> &'static str {
        "rejection"
    }

    fn sample(&self, steady: &SteadyState, n: usize, seed: u64) -> Result<ParticleEnsemble> {
        if n == 0 {
            return Err(Error::invalid("n", "need at least one particle"));
        }
        let (v_max, bound) = self.envelope(steady);
        let radius = steady.radius;
        let blocks: Vec<usize> = (0..n.div_ceil(BLOCK)).collect();
        let parts: Vec<Vec<(Vec3, Vec3)>> = blocks
            .par_iter()
            .map(|&b| {
                let count = BLOCK.min(n - b * BLOCK);
                let mut rng = block_rng(seed, b);
                let mut out = Vec::with_capacity(count);
                let mut trials = 0usize;
                while out.len() < count {
                    trials += 1;
                    if trials > 1000 && (out.len() as f64) < self.min_efficiency * trials as f64 {
                        return Err(Error::numeric(
                            "sample_f0",
                            format!("acceptance {}/{trials} below floor (envelope {bound:e}, v_max {v_max:e})", out.len()),
                        ));
                    }
                    let r = radius * rng.random::<f64>();
                    let v = v_max * rng.random::<f64>();
                    let p = r * r * v * v * steady.f0_at(r, v * v);
                    if p > bound {
                        return Err(Error::numeric(
                            "sample_f0",
                            format!("density {p:e} exceeds envelope {bound:e} at r = {r:e}, v = {v:e}"),
                        ));
                    }
                    if rng.random::<f64>() * bound < p {
                        out.push((direction(&mut rng) * r, direction(&mut rng) * v));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(assemble(steady, n, seed, "sample:rejection", parts.into_iter().flatten().collect()))
    }
}

/// Conditional law of `t = v² / (2 z)` at depth `z`: density `∝ √t ψ(z(1-t))`.
/// For polytropes it does not depend on `z` and one table suffices.
struct SpeedTable {
    log_depths: Vec<f64>,
    cdfs: Vec<Vec<f64>>,
}

const SPEED_CELLS: usize = 4096;

fn t_of(theta: f64) -> f64 {
    0.5 * (1.0 - (PI * theta).cos())
}

impl SpeedTable {
    fn build(steady: &SteadyState) -> Result<Self> {
        let depths: Vec<f64> = if steady.exponent().is_some() {
            vec![1.0]
        } else {
            let z0 = steady.depth(0.0).0;
            (0..48).map(|i| z0 * 10f64.powf(-8.0 * (1.0 - i as f64 / 47.0))).collect()
        };
        let opts = QuadOptions { abs: 0.0, rel: 1e-10, max_intervals: 200 };
        let mut cdfs = Vec::with_capacity(depths.len());
        for &z in &depths {
            let density = |theta: f64| {
                let t = t_of(theta);
                let dt = 0.5 * PI * (PI * theta).sin();
                t.sqrt() * steady.casimir.qprime_inverse(z * (1.0 - t)).unwrap_or(0.0) * dt
            };
            let mut cdf = vec![0.0; SPEED_CELLS + 1];
            for j in 0..SPEED_CELLS {
                let a = j as f64 / SPEED_CELLS as f64;
                let b = (j + 1) as f64 / SPEED_CELLS as f64;
                cdf[j + 1] = cdf[j] + integrate(density, a, b, opts)?;
            }
            let total = cdf[SPEED_CELLS];
            cdf.iter_mut().for_each(|c| *c /= total);
            cdfs.push(cdf);
        }
        Ok(SpeedTable { log_depths: depths.iter().map(|z| z.ln()).collect(), cdfs })
    }

    fn invert(cdf: &[f64], u: f64) -> f64 {
        let j = cdf.partition_point(|&c| c <= u).clamp(1, SPEED_CELLS) - 1;
        let span = cdf[j + 1] - cdf[j];
        let frac = if span > 0.0 { (u - cdf[j]) / span } else { 0.5 };
        t_of((j as f64 + frac) / SPEED_CELLS as f64)
    }

    fn quantile(&self, z: f64, u: f64) -> f64 {
        if self.cdfs.len() == 1 {
            return Self::invert(&self.cdfs[0], u);
        }
        let lz = z.ln();
        let n = self.log_depths.len();
        let i = self.log_depths.partition_point(|&l| l <= lz).clamp(1, n - 1) - 1;
        let lam = ((lz - self.log_depths[i]) / (self.log_depths[i + 1] - self.log_depths[i])).clamp(0.0, 1.0);
        (1.0 - lam) * Self::invert(&self.cdfs[i], u) + lam * Self::invert(&self.cdfs[i + 1], u)
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    x
}

/// Randomly shifted two-dimensional Halton points mapped through the radial
/// mass profile and the conditional speed law. Markers come in pairs
/// `(x, v)`, `(-x, -v)`, so the centroid and momentum vanish to rounding.
#[derive(Debug, Clone, Copy)]
pub struct QuasiRandom;

impl PhaseSampler for QuasiRandom {
    fn name(&self) -> &'static str {
        "quasi-random"
    }

    fn sample(&self, steady: &SteadyState, n: usize, seed: u64) -> Result<ParticleEnsemble> {
        if n == 0 {
            return Err(Error::invalid("n", "need at least one particle"));
        }
        let table = SpeedTable::build(steady)?;
        let mut shift_rng = block_rng(seed, usize::MAX - 1);
        let shift: [f64; 2] = [shift_rng.random(), shift_rng.random()];
        let points = n.div_ceil(2);
        let blocks: Vec<usize> = (0..points.div_ceil(BLOCK)).collect();
        let mass = steady.mass;
        let radius = steady.radius;
        // Keep off the boundary of the support, where f0 vanishes.
        let top = 1.0 - 0.25 / points as f64;
        let parts: Vec<Vec<(Vec3, Vec3)>> = blocks
            .par_iter()
            .map(|&b| {
                let mut rng = block_rng(seed, b);
                let lo = b * BLOCK;
                let hi = (lo + BLOCK).min(points);
                let mut out = Vec::with_capacity(2 * (hi - lo));
                for i in lo..hi {
                    let u1 = (radical_inverse(i as u64 + 1, 2) + shift[0]).fract().min(top);
                    let u2 = (radical_inverse(i as u64 + 1, 3) + shift[1]).fract().min(top);
                    let target = u1 * mass;
                    let r = brent(|r| steady.enclosed_mass(r) - target, 0.0, radius, 1e-15 * radius, 200)?;
                    let z = steady.depth(r).0.max(0.0);
                    let v = (2.0 * z * table.quantile(z, u2)).sqrt();
                    let x = direction(&mut rng) * r;
                    let u = direction(&mut rng) * v;
                    out.push((x, u));
                    out.push((-x, -u));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut flat: Vec<(Vec3, Vec3)> = parts.into_iter().flatten().collect();
        flat.truncate(n);
        Ok(assemble(steady, n, seed, "sample:quasi-random", flat))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::{build_steady, BuildOptions, CasimirFunction};

    fn k1() -> SteadyState {
        build_steady(&CasimirFunction::polytropic(1.0).unwrap(), 1.0, &BuildOptions::default()).unwrap()
    }

    #[test]
    fn weights_sum_to_mass_and_deterministic() {
        let s = k1();
        for name in ["rejection", "quasi-random"] {
            let smp = sampler(name).unwrap();
            let a = smp.sample(&s, 5001, 7).unwrap();
            assert_eq!(a.len(), 5001);
            assert!((a.total_mass() - s.mass).abs() < 1e-12);
            a.validate().unwrap();
            assert!(a.pos.iter().all(|x| x.norm() <= s.radius));
            let b = smp.sample(&s, 5001, 7).unwrap();
            assert_eq!(a, b);
            let c = smp.sample(&s, 5001, 8).unwrap();
            assert_ne!(a.pos, c.pos);
        }
    }

    #[test]
    fn mirrored_pairs_cancel_momentum() {
        let e = QuasiRandom.sample(&k1(), 1000, 3).unwrap();
        assert!(e.momentum().norm() < 1e-13);
        assert!(e.mass_moment().norm() < 1e-15);
    }

    #[test]
    fn quasi_random_f_positive() {
        let s = k1();
        for n in [2, 3, 100, 4096] {
            let e = QuasiRandom.sample(&s, n, 11).unwrap();
            assert!(e.f_init.iter().all(|f| *f > 0.0));
        }
    }

    #[test]
    fn unknown_sampler() {
        assert!(sampler("gibbs").is_err());
    }

    #[test]
    fn speed_quantiles_match_beta_law() {
        // For polytropes t = v²/(2z) follows Beta(3/2, k+1).
        use statrs::distribution::{Beta, ContinuousCDF};
        let s = k1();
        let table = SpeedTable::build(&s).unwrap();
        let beta = Beta::new(1.5, 2.0).unwrap();
        for u in [0.01, 0.1, 0.37, 0.5, 0.8, 0.99] {
            let t = table.quantile(0.3, u);
            assert!((beta.cdf(t) - u).abs() < 1e-6, "u={u} t={t}");
        }
    }
}
