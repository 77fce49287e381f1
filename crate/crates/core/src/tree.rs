//! Barnes–Hut octree with monopole cells and Plummer softening.

use rayon::prelude::*;

use crate::ensemble::Vec3;

const LEAF_SIZE: usize = 8;
const MAX_DEPTH: usize = 48;

#[derive(Debug, Clone)]
struct Cell {
    center: Vec3,
    half: f64,
    com: Vec3,
    mass: f64,
    /// Index of the first of eight children, or 0 for a leaf.
    children: usize,
    start: usize,
    end: usize,
}

pub struct Octree<'a> {
    cells: Vec<Cell>,
    order: Vec<usize>,
    pos: &'a [Vec3],
    weight: &'a [f64],
}

fn octant(p: &Vec3, c: &Vec3) -> usize {
    (p.x >= c.x) as usize | (((p.y >= c.y) as usize) << 1) | (((p.z >= c.z) as usize) << 2)
}

impl<'a> Octree<'a> {
    pub fn build(pos: &'a [Vec3], weight: &'a [f64]) -> Self {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in pos {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let (center, half) = if pos.is_empty() {
            (Vec3::zeros(), 1.0)
        } else {
            ((lo + hi) * 0.5, 0.5 * (hi - lo).max() * (1.0 + 1e-12) + 1e-300)
        };
        let mut tree = Octree {
            cells: vec![Cell { center, half, com: Vec3::zeros(), mass: 0.0, children: 0, start: 0, end: pos.len() }],
            order: (0..pos.len()).collect(),
            pos,
            weight,
        };
        tree.split(0, 0);
        tree
    }

    fn split(&mut self, idx: usize, depth: usize) {
        let (start, end, center, half) = {
            let c = &self.cells[idx];
            (c.start, c.end, c.center, c.half)
        };
        if end - start <= LEAF_SIZE || depth >= MAX_DEPTH {
            let mut m = 0.0;
            let mut mx = Vec3::zeros();
            for &i in &self.order[start..end] {
                m += self.weight[i];
                mx += self.pos[i] * self.weight[i];
            }
            let cell = &mut self.cells[idx];
            cell.mass = m;
            cell.com = if m > 0.0 { mx / m } else { center };
            return;
        }
        // Counting sort of the range into octants.
        let pos = self.pos;
        let slice = &mut self.order[start..end];
        let mut counts = [0usize; 8];
        for &i in slice.iter() {
            counts[octant(&pos[i], &center)] += 1;
        }
        let mut offsets = [0usize; 9];
        for o in 0..8 {
            offsets[o + 1] = offsets[o] + counts[o];
        }
        let mut sorted = vec![0usize; slice.len()];
        let mut fill = offsets;
        for &i in slice.iter() {
            let o = octant(&pos[i], &center);
            sorted[fill[o]] = i;
            fill[o] += 1;
        }
        slice.copy_from_slice(&sorted);

        let first = self.cells.len();
        let q = 0.5 * half;
        for o in 0..8 {
            let shift = Vec3::new(
                if o & 1 != 0 { q } else { -q },
                if o & 2 != 0 { q } else { -q },
                if o & 4 != 0 { q } else { -q },
            );
            self.cells.push(Cell {
                center: center + shift,
                half: q,
                com: center + shift,
                mass: 0.0,
                children: 0,
                start: start + offsets[o],
                end: start + offsets[o + 1],
            });
        }
        self.cells[idx].children = first;
        let mut m = 0.0;
        let mut mx = Vec3::zeros();
        for o in 0..8 {
            self.split(first + o, depth + 1);
            let c = &self.cells[first + o];
            m += c.mass;
            mx += c.com * c.mass;
        }
        let cell = &mut self.cells[idx];
        cell.mass = m;
        cell.com = if m > 0.0 { mx / m } else { center };
    }

    /// Walks the tree for a target point, calling `near(j)` for particles in
    /// opened leaves and `far(com, mass)` for accepted cells.
    fn walk<N: FnMut(usize), F: FnMut(&Vec3, f64)>(&self, p: &Vec3, theta: f64, mut near: N, mut far: F) {
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let c = &self.cells[idx];
            if c.mass == 0.0 {
                continue;
            }
            if c.children == 0 {
                for &j in &self.order[c.start..c.end] {
                    near(j);
                }
                continue;
            }
            let d = c.com - p;
            let r2 = d.norm_squared();
            let size = 2.0 * c.half;
            let inside = (p - c.center).abs().max() <= c.half;
            if !inside && size * size < theta * theta * r2 {
                far(&c.com, c.mass);
            } else {
                stack.extend(c.children..c.children + 8);
            }
        }
    }

    pub fn accelerations(&self, theta: f64, softening: f64) -> Vec<Vec3> {
        let eps2 = softening * softening;
        (0..self.pos.len())
            .into_par_iter()
            .map(|i| {
                let p = self.pos[i];
                let mut a = Vec3::zeros();
                let kernel = |q: &Vec3, m: f64, a: &mut Vec3| {
                    let d = q - p;
                    let inv = 1.0 / (d.norm_squared() + eps2).sqrt();
                    *a += d * (m * inv * inv * inv);
                };
                let mut far_acc = Vec3::zeros();
                self.walk(
                    &p,
                    theta,
                    |j| {
                        if j != i {
                            kernel(&self.pos[j], self.weight[j], &mut a)
                        }
                    },
                    |com, m| kernel(com, m, &mut far_acc),
                );
                a + far_acc
            })
            .collect()
    }

    /// `Σ_{i<j} w_i w_j / sqrt(r² + ε²)` with far cells replaced by monopoles.
    pub fn pair_potential_sum(&self, theta: f64, softening: f64) -> f64 {
        let eps2 = softening * softening;
        let partial: Vec<f64> = (0..self.pos.len())
            .into_par_iter()
            .map(|i| {
                let p = self.pos[i];
                let mut phi = 0.0;
                let mut far_phi = 0.0;
                self.walk(
                    &p,
                    theta,
                    |j| {
                        if j != i {
                            phi += self.weight[j] / ((self.pos[j] - p).norm_squared() + eps2).sqrt();
                        }
                    },
                    |com, m| far_phi += m / ((com - p).norm_squared() + eps2).sqrt(),
                );
                self.weight[i] * (phi + far_phi)
            })
            .collect();
        0.5 * partial.iter().sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gravity::{direct_accelerations, pair_potential_sum};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(n: usize) -> (Vec<Vec3>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pos = (0..n)
            .map(|_| Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()).map(|c| c * c - 0.3))
            .collect();
        (pos, vec![1.0 / n as f64; n])
    }

    #[test]
    fn theta_zero_is_exact() {
        let (pos, w) = cloud(300);
        let tree = Octree::build(&pos, &w);
        let a_tree = tree.accelerations(0.0, 0.01);
        let a_direct = direct_accelerations(&pos, &w, 0.01);
        for (a, b) in a_tree.iter().zip(&a_direct) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
        }
        let p = tree.pair_potential_sum(0.0, 0.01);
        assert!((p - pair_potential_sum(&pos, &w, 0.01)).abs() < 1e-12);
    }

    #[test]
    fn median_error_small_at_half_opening() {
        let (pos, w) = cloud(3000);
        let tree = Octree::build(&pos, &w);
        let a_tree = tree.accelerations(0.5, 1e-3);
        let a_direct = direct_accelerations(&pos, &w, 1e-3);
        let mut errs: Vec<f64> = a_tree.iter().zip(&a_direct).map(|(a, b)| (a - b).norm() / b.norm()).collect();
        errs.sort_by(f64::total_cmp);
        assert!(errs[errs.len() / 2] < 1e-2);
    }

    #[test]
    fn coincident_points_terminate() {
        let pos = vec![Vec3::new(0.5, 0.5, 0.5); 40];
        let w = vec![1.0; 40];
        let tree = Octree::build(&pos, &w);
        let a = tree.accelerations(0.5, 0.1);
        assert!(a.iter().all(|a| a.norm() < 1e-12));
    }
}
