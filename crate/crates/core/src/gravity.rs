//! Direct-summation gravity kernels with Plummer softening.
//!
//! Inner loops keep `LANES` independent partial sums so they vectorize
//! without reassociating floating-point additions; every reduction happens
//! in a fixed order, so results depend only on the thread count.

use rayon::prelude::*;

use crate::ensemble::Vec3;

const LANES: usize = 8;

/// Structure-of-arrays copy of positions for the inner loops.
pub(crate) struct Soa {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl Soa {
    pub fn new(pos: &[Vec3]) -> Self {
        Soa {
            x: pos.iter().map(|p| p.x).collect(),
            y: pos.iter().map(|p| p.y).collect(),
            z: pos.iter().map(|p| p.z).collect(),
        }
    }
}

#[inline(always)]
fn inv_dist(dx: f64, dy: f64, dz: f64, eps2: f64) -> f64 {
    1.0 / (dx * dx + dy * dy + dz * dz + eps2).sqrt()
}

/// `Σ_j w_j / sqrt(|x_j - p|² + ε²)` over the given slices.
fn potential_row(p: [f64; 3], x: &[f64], y: &[f64], z: &[f64], w: &[f64], eps2: f64) -> f64 {
    let body = x.len() - x.len() % LANES;
    let mut lanes = [0.0; LANES];
    for (((x, y), z), w) in x[..body]
        .chunks_exact(LANES)
        .zip(y[..body].chunks_exact(LANES))
        .zip(z[..body].chunks_exact(LANES))
        .zip(w[..body].chunks_exact(LANES))
    {
        let mut r2 = [0.0; LANES];
        for l in 0..LANES {
            let (dx, dy, dz) = (x[l] - p[0], y[l] - p[1], z[l] - p[2]);
            r2[l] = dx * dx + dy * dy + dz * dz + eps2;
        }
        for l in 0..LANES {
            lanes[l] += w[l] / r2[l].sqrt();
        }
    }
    let mut s: f64 = lanes.iter().sum();
    for j in body..x.len() {
        s += w[j] * inv_dist(x[j] - p[0], y[j] - p[1], z[j] - p[2], eps2);
    }
    s
}

/// `Σ_j w_j (x_j - p) / (|x_j - p|² + ε²)^{3/2}` over the given slices.
fn field_row(p: [f64; 3], x: &[f64], y: &[f64], z: &[f64], w: &[f64], eps2: f64) -> [f64; 3] {
    let n = x.len();
    let body = n - n % LANES;
    let mut lanes = [[0.0; LANES]; 3];
    for c in (0..body).step_by(LANES) {
        for l in 0..LANES {
            let j = c + l;
            let (dx, dy, dz) = (x[j] - p[0], y[j] - p[1], z[j] - p[2]);
            let inv = inv_dist(dx, dy, dz, eps2);
            let f = w[j] * inv * inv * inv;
            lanes[0][l] += f * dx;
            lanes[1][l] += f * dy;
            lanes[2][l] += f * dz;
        }
    }
    let mut out = [lanes[0].iter().sum(), lanes[1].iter().sum(), lanes[2].iter().sum::<f64>()];
    for j in body..n {
        let (dx, dy, dz) = (x[j] - p[0], y[j] - p[1], z[j] - p[2]);
        let inv = inv_dist(dx, dy, dz, eps2);
        let f = w[j] * inv * inv * inv;
        out[0] += f * dx;
        out[1] += f * dy;
        out[2] += f * dz;
    }
    out
}

/// `Σ_{i<j} w_i w_j / sqrt(|x_i - x_j|² + ε²)`.
pub fn pair_potential_sum(pos: &[Vec3], weight: &[f64], softening: f64) -> f64 {
    let soa = Soa::new(pos);
    let eps2 = softening * softening;
    let n = pos.len();
    let row = |i: usize| {
        let s = i + 1;
        let p = [soa.x[i], soa.y[i], soa.z[i]];
        weight[i] * potential_row(p, &soa.x[s..], &soa.y[s..], &soa.z[s..], &weight[s..], eps2)
    };
    let partial: Vec<f64> = if rayon::current_num_threads() == 1 {
        (0..n).map(row).collect()
    } else {
        (0..n).into_par_iter().map(row).collect()
    };
    partial.iter().sum()
}

const TILE: usize = 8;
const JL: usize = 4;

#[inline(always)]
fn pair(dx: f64, dy: f64, dz: f64, eps2: f64) -> f64 {
    let inv = inv_dist(dx, dy, dz, eps2);
    inv * inv * inv
}

/// Pairwise-symmetric accumulation: each pair is visited once and applied to
/// both particles. Rows are processed in tiles of `TILE` so each column
/// chunk is loaded once per tile.
fn accelerations_symmetric(soa: &Soa, w: &[f64], eps2: f64) -> Vec<Vec3> {
    let (x, y, z) = (&soa.x, &soa.y, &soa.z);
    let n = w.len();
    let mut ax = vec![0.0; n];
    let mut ay = vec![0.0; n];
    let mut az = vec![0.0; n];
    let scalar = |i: usize, j: usize, ax: &mut [f64], ay: &mut [f64], az: &mut [f64]| {
        let (dx, dy, dz) = (x[j] - x[i], y[j] - y[i], z[j] - z[i]);
        let k = pair(dx, dy, dz, eps2);
        ax[i] += w[j] * k * dx;
        ay[i] += w[j] * k * dy;
        az[i] += w[j] * k * dz;
        ax[j] -= w[i] * k * dx;
        ay[j] -= w[i] * k * dy;
        az[j] -= w[i] * k * dz;
    };
    let mut ib = 0;
    while ib < n {
        let ie = (ib + TILE).min(n);
        for i in ib..ie {
            for j in i + 1..ie {
                scalar(i, j, &mut ax, &mut ay, &mut az);
            }
        }
        let mut own = [[[0.0; JL]; 3]; TILE];
        let body_end = ie + (n - ie) / JL * JL;
        for c in (ie..body_end).step_by(JL) {
            let (xj, yj, zj, wj) = (&x[c..c + JL], &y[c..c + JL], &z[c..c + JL], &w[c..c + JL]);
            let mut aj = [[0.0; JL]; 3];
            for (b, own) in own.iter_mut().enumerate().take(ie - ib) {
                let i = ib + b;
                let (xi, yi, zi, wi) = (x[i], y[i], z[i], w[i]);
                for l in 0..JL {
                    let (dx, dy, dz) = (xj[l] - xi, yj[l] - yi, zj[l] - zi);
                    let k = pair(dx, dy, dz, eps2);
                    let (fj, fi) = (wj[l] * k, wi * k);
                    own[0][l] += fj * dx;
                    own[1][l] += fj * dy;
                    own[2][l] += fj * dz;
                    aj[0][l] -= fi * dx;
                    aj[1][l] -= fi * dy;
                    aj[2][l] -= fi * dz;
                }
            }
            for l in 0..JL {
                ax[c + l] += aj[0][l];
                ay[c + l] += aj[1][l];
                az[c + l] += aj[2][l];
            }
        }
        for j in body_end..n {
            for i in ib..ie {
                scalar(i, j, &mut ax, &mut ay, &mut az);
            }
        }
        for (b, own) in own.iter().enumerate().take(ie - ib) {
            ax[ib + b] += own[0].iter().sum::<f64>();
            ay[ib + b] += own[1].iter().sum::<f64>();
            az[ib + b] += own[2].iter().sum::<f64>();
        }
        ib = ie;
    }
    (0..n).map(|i| Vec3::new(ax[i], ay[i], az[i])).collect()
}

/// `a_i = -Σ_{j≠i} w_j (x_i - x_j) / (|x_i - x_j|² + ε²)^{3/2}`.
///
/// A single worker thread visits each pair once; with more threads every
/// row is summed independently.
pub fn direct_accelerations(pos: &[Vec3], weight: &[f64], softening: f64) -> Vec<Vec3> {
    let soa = Soa::new(pos);
    let eps2 = softening * softening;
    if rayon::current_num_threads() == 1 {
        return accelerations_symmetric(&soa, weight, eps2);
    }
    let n = pos.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let p = [soa.x[i], soa.y[i], soa.z[i]];
            let lo = field_row(p, &soa.x[..i], &soa.y[..i], &soa.z[..i], &weight[..i], eps2);
            let s = i + 1;
            let hi = field_row(p, &soa.x[s..], &soa.y[s..], &soa.z[s..], &weight[s..], eps2);
            Vec3::new(lo[0] + hi[0], lo[1] + hi[1], lo[2] + hi[2])
        })
        .collect()
}

/// Potential `Σ_j w_j / sqrt(|p - x_j|² + ε²)` at external points.
pub fn potential_at(points: &[Vec3], pos: &[Vec3], weight: &[f64], softening: f64) -> Vec<f64> {
    let soa = Soa::new(pos);
    let eps2 = softening * softening;
    points
        .par_iter()
        .map(|p| -potential_row([p.x, p.y, p.z], &soa.x, &soa.y, &soa.z, weight, eps2))
        .collect()
}
