//! Integration grids on S¹ and S².
//!
//! The S² grid is a recursively subdivided, slightly tilted icosahedron; each cell contributes
//! its exact spherical area (L'Huilier) at the normalized cell centroid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par;
use crate::sphere::{axis_angle, spherical_triangle_area, Vec3};

/// Surface measure of S^(n−1): ω_n = 2π^(n/2) / Γ(n/2).
///
/// Γ at half-integers is evaluated exactly by the recursion Γ(x + 1) = xΓ(x)
/// from Γ(1) = 1 and Γ(1/2) = √π.
pub fn omega(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Γ(k/2) for a positive integer `k`.
pub fn gamma_half(k: usize) -> f64 {
    let (mut x, mut g) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    while 2.0 * x < k as f64 - 0.5 {
        g *= x;
        x += 1.0;
    }
    g
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    dim: usize,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

/// Number of uniform S¹ cells at level 1; doubles with each level.
const CIRCLE_BASE_CELLS: usize = 1024;

/// Builds an integration grid on S^(n−1).
///
/// * `n = 2`: `1024 · 2^level` uniform midpoint cells.
/// * `n = 3`: the icosahedron subdivided `level` times (`20 · 4^level` cells).
pub fn build_quadrature(n: usize, level: u32) -> Result<QuadratureGrid> {
    if level == 0 {
        return Err(Error::ZeroLevel);
    }
    match n {
        2 => {
            let m = CIRCLE_BASE_CELLS << level;
            let h = 2.0 * PI / m as f64;
            let nodes = (0..m)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    Vec3::new(t.cos(), t.sin(), 0.0)
                })
                .collect();
            Ok(QuadratureGrid { dim: 2, nodes, weights: vec![h; m] })
        }
        3 => {
            let mut tris = icosahedron();
            for _ in 0..level {
                tris = tris.iter().flat_map(subdivide).collect();
            }
            let weights = par::map_slice(&tris, |t| spherical_triangle_area(&t[0], &t[1], &t[2]));
            let nodes = tris.iter().map(|t| (t[0] + t[1] + t[2]).normalize()).collect();
            Ok(QuadratureGrid { dim: 3, nodes, weights })
        }
        other => Err(Error::Dimension(other)),
    }
}

fn icosahedron() -> Vec<[Vec3; 3]> {
    // The standard icosahedron has nodes on the coordinate planes, exactly
    // where orthant-like sectors have their boundary; a generic tilt turns
    // that first-order bias into ordinary cut-cell error.
    let tilt = axis_angle(&Vec3::new(0.3, 0.5, 0.8).normalize(), 0.7);
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| tilt * Vec3::new(x, y, z).normalize())
    .collect();
    const F: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    F.iter().map(|f| [v[f[0]], v[f[1]], v[f[2]]]).collect()
}

fn subdivide(t: &[Vec3; 3]) -> [[Vec3; 3]; 4] {
    let ab = (t[0] + t[1]).normalize();
    let bc = (t[1] + t[2]).normalize();
    let ca = (t[2] + t[0]).normalize();
    [[t[0], ab, ca], [ab, t[1], bc], [ca, bc, t[2]], [ab, bc, ca]]
}

impl QuadratureGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Fixed-node rule: Σ wᵢ f(θᵢ).
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&Vec3) -> f64 + Sync + Send,
    {
        par::sum_range(self.nodes.len(), |i| self.weights[i] * f(&self.nodes[i]))
    }

    /// Vector-valued fixed-node rule, Σ wᵢ f(θᵢ).
    pub fn integrate_vec<F>(&self, f: F) -> Vec3
    where
        F: Fn(&Vec3) -> Vec3 + Sync + Send,
    {
        par::map_range(self.nodes.len(), |i| self.weights[i] * f(&self.nodes[i]))
            .into_iter()
            .fold(Vec3::zeros(), |a, b| a + b)
    }
}
