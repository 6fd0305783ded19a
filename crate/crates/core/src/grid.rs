//! Equiangular cubed-sphere grid of cell centers.
//!
//! Each of the six cube faces is split into R×R cells. Two cells are
//! neighbors when they share a corner, which gives 8 neighbors away from the
//! cube corners and 7 for the three cells meeting at each corner.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SphereGrid {
    resolution: usize,
    nodes: Vec<[f64; 3]>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
}

/// Lattice coordinates of a cell corner on the surface of [0, R]³.
type Corner = (u32, u32, u32);

fn face_corner(face: usize, a: u32, b: u32, r: u32) -> Corner {
    match face {
        0 => (r, a, b),
        1 => (0, a, b),
        2 => (a, r, b),
        3 => (a, 0, b),
        4 => (a, b, r),
        _ => (a, b, 0),
    }
}

fn face_point(face: usize, u: f64, v: f64) -> [f64; 3] {
    let p = match face {
        0 => [1.0, u, v],
        1 => [-1.0, u, v],
        2 => [u, 1.0, v],
        3 => [u, -1.0, v],
        4 => [u, v, 1.0],
        _ => [u, v, -1.0],
    };
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    p.map(|x| x / n)
}

impl SphereGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidInput("grid resolution must be positive".into()));
        }
        if 6 * resolution * resolution > u32::MAX as usize {
            return Err(Error::Capability(format!("grid resolution {resolution} is too large")));
        }
        let r = resolution;
        let h = 2.0 * FRAC_PI_4 / r as f64;
        let coord = |i: usize| (-FRAC_PI_4 + (i as f64 + 0.5) * h).tan();
        let mut nodes = Vec::with_capacity(6 * r * r);
        let mut corners: HashMap<Corner, Vec<u32>> = HashMap::with_capacity(6 * (r + 1) * (r + 1));
        for face in 0..6 {
            for i in 0..r {
                for j in 0..r {
                    let id = nodes.len() as u32;
                    nodes.push(face_point(face, coord(i), coord(j)));
                    for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        let c = face_corner(face, (i + di) as u32, (j + dj) as u32, r as u32);
                        corners.entry(c).or_default().push(id);
                    }
                }
            }
        }
        let mut neighbors: Vec<Vec<u32>> = vec![Vec::with_capacity(8); nodes.len()];
        for cells in corners.values() {
            for &a in cells {
                for &b in cells {
                    if a != b {
                        neighbors[a as usize].push(b);
                    }
                }
            }
        }
        let mut adj_start = Vec::with_capacity(nodes.len() + 1);
        let mut adj = Vec::with_capacity(nodes.len() * 8);
        adj_start.push(0);
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
            adj.extend_from_slice(list);
            adj_start.push(adj.len() as u32);
        }
        Ok(Self { resolution, nodes, adj_start, adj })
    }

    /// Grid with R = factor·d.
    pub fn for_degree(d: usize, factor: usize) -> Result<Self> {
        Self::new((factor * d).max(1))
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[self.adj_start[i] as usize..self.adj_start[i + 1] as usize]
    }

    /// Index of the cell whose center is antipodal to cell `i`.
    pub fn antipode(&self, i: usize) -> usize {
        let r = self.resolution;
        let face = i / (r * r);
        let rem = i % (r * r);
        let (a, b) = (rem / r, rem % r);
        let opposite = face ^ 1;
        opposite * r * r + (r - 1 - a) * r + (r - 1 - b)
    }

    /// Node nearest to a unit vector (linear scan).
    pub fn nearest(&self, p: &[f64; 3]) -> usize {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, q) in self.nodes.iter().enumerate() {
            let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
            if dot > best_dot {
                best_dot = dot;
                best = i;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn connected(g: &SphereGrid) -> bool {
        let mut seen = vec![false; g.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in g.neighbors(i) {
                if !seen[j as usize] {
                    seen[j as usize] = true;
                    count += 1;
                    stack.push(j as usize);
                }
            }
        }
        count == g.len()
    }

    #[test]
    fn topology() {
        for r in [1usize, 2, 3, 8, 17] {
            let g = SphereGrid::new(r).unwrap();
            assert_eq!(g.len(), 6 * r * r);
            let mut degree_hist = [0usize; 9];
            for i in 0..g.len() {
                let k = g.neighbors(i).len();
                assert!((3..=8).contains(&k), "r={r} node {i} has {k} neighbors");
                degree_hist[k] += 1;
                for &j in g.neighbors(i) {
                    assert!(g.neighbors(j as usize).contains(&(i as u32)));
                }
            }
            assert!(connected(&g));
            if r >= 2 {
                assert_eq!(degree_hist[7], 24);
                assert_eq!(degree_hist[8], 6 * r * r - 24);
            }
        }
    }

    #[test]
    fn nodes_are_unit_and_antipodes_match() {
        let g = SphereGrid::new(6).unwrap();
        for (i, p) in g.nodes().iter().enumerate() {
            assert!((p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0).abs() < 1e-14);
            let q = g.nodes()[g.antipode(i)];
            for k in 0..3 {
                assert!((p[k] + q[k]).abs() < 1e-14);
            }
        }
        assert_eq!(g.nearest(&[0.0, 0.0, 1.0]) / 36, 4);
        assert!(SphereGrid::new(0).is_err());
    }

    #[test]
    fn cell_spacing_is_nearly_uniform() {
        let g = SphereGrid::new(24).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for i in 0..g.len() {
            let p = g.nodes()[i];
            for &j in g.neighbors(i) {
                let q = g.nodes()[j as usize];
                let ang = (p[0] * q[0] + p[1] * q[1] + p[2] * q[2]).clamp(-1.0, 1.0).acos();
                lo = lo.min(ang);
                hi = hi.max(ang);
            }
        }
        // diagonal neighbors sit √2 farther; corner cells add the remaining distortion
        assert!(hi / lo < 2.5, "{lo} {hi}");
    }
}
