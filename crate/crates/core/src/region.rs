//! Intersections of closed hemispheres `{θ : ⟨n, θ⟩ ≥ 0}` on S².
//!
//! Every polyhedral sector is such a region. Its boundary is a union of
//! great-circle arcs, one per effective constraint, and its first moment has
//! the closed form
//!
//! ```text
//! ∫_R θ dσ = ½ Σ_e |e| n_e
//! ```
//!
//! with `n_e` the inward unit normal of the plane of arc `e`. Because
//! `⟨θ, u⟩` is the Jacobian of the orthogonal projection onto `u⊥`, the same
//! sum dotted with `u` is the planar area of the projected region.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::sphere::{orthonormal_basis, SphericalPolygon, UnitVector, Vec3};

/// Normals closer than this angle are treated as the same constraint.
const MERGE_ANGLE: f64 = 1e-12;

/// A boundary piece: the arc of the great circle `⟨normal, θ⟩ = 0` running
/// from `start` through `length` radians counterclockwise about `normal`.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryArc {
    pub normal: Vec3,
    pub length: f64,
    e1: Vec3,
    e2: Vec3,
    phi0: f64,
}

impl BoundaryArc {
    pub fn point_at(&self, t: f64) -> Vec3 {
        let phi = self.phi0 + t * self.length;
        self.e1 * phi.cos() + self.e2 * phi.sin()
    }

    pub fn start(&self) -> Vec3 {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Vec3 {
        self.point_at(1.0)
    }

    pub fn is_full_circle(&self) -> bool {
        self.length >= TAU - 1e-12
    }

    /// Geodesic distance from the unit vector `p` to the arc.
    pub fn distance_to(&self, p: &Vec3) -> f64 {
        let (x, y) = (p.dot(&self.e1), p.dot(&self.e2));
        let along = (y.atan2(x) - self.phi0).rem_euclid(TAU);
        if along <= self.length {
            // Angle between p and its projection onto the circle's plane.
            return p.dot(&self.normal).clamp(-1.0, 1.0).asin().abs();
        }
        let d = |q: Vec3| q.dot(p).clamp(-1.0, 1.0).acos();
        d(self.start()).min(d(self.end()))
    }
}

/// Merges (nearly) parallel normals and normalizes the rest.
pub fn dedup_normals(normals: &[Vec3]) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::with_capacity(normals.len());
    for n in normals {
        let len = n.norm();
        if len < 1e-300 {
            continue;
        }
        let n = n / len;
        if out.iter().all(|m| m.cross(&n).norm() > MERGE_ANGLE || m.dot(&n) < 0.0) {
            out.push(n);
        }
    }
    out
}

/// Arc of circle `i` that satisfies every other constraint, or `None` when
/// that intersection is empty or a single point.
fn arc_on_circle(normals: &[Vec3], i: usize) -> Option<BoundaryArc> {
    let n = normals[i];
    let (e1, e2) = orthonormal_basis(&n);
    // (start, length); None = full circle so far.
    let mut interval: Option<(f64, f64)> = None;
    for (j, m) in normals.iter().enumerate() {
        if j == i {
            continue;
        }
        let (a, b) = (m.dot(&e1), m.dot(&e2));
        if a.hypot(b) < 1e-14 {
            // Same or opposite plane: no restriction along this circle.
            continue;
        }
        let lo = b.atan2(a) - PI / 2.0;
        interval = Some(match interval {
            None => (lo, PI),
            Some((s, len)) => {
                let d = (lo - s).rem_euclid(TAU);
                let p1 = (d.max(0.0), (d + PI).min(len));
                let p2 = (0.0f64.max(d - TAU), (d - PI).min(len));
                let (a0, a1) = if p1.1 - p1.0 >= p2.1 - p2.0 { p1 } else { p2 };
                if a1 - a0 <= 1e-15 {
                    return None;
                }
                (s + a0, a1 - a0)
            }
        });
    }
    let (phi0, length) = interval.unwrap_or((0.0, TAU));
    Some(BoundaryArc { normal: n, length, e1, e2, phi0 })
}

/// Boundary arcs of `∩ {⟨n, θ⟩ ≥ 0}` (normals deduplicated first).
pub fn boundary_arcs(normals: &[Vec3]) -> Vec<BoundaryArc> {
    let normals = dedup_normals(normals);
    (0..normals.len()).filter_map(|i| arc_on_circle(&normals, i)).collect()
}

/// `∫ θ dσ` over the region.
pub fn first_moment(normals: &[Vec3]) -> Vec3 {
    boundary_arcs(normals).iter().fold(Vec3::zeros(), |acc, a| acc + a.normal * (0.5 * a.length))
}

/// `∫ ⟨θ, u⟩⁺ dσ` over the region: the first moment of the region clipped
/// to the hemisphere around `u`.
pub fn positive_moment(normals: &[Vec3], u: &Vec3) -> f64 {
    let mut all = normals.to_vec();
    all.push(*u);
    first_moment(&all).dot(u).max(0.0)
}

/// Vertices of the region (arc endpoints, merged), unordered.
pub fn vertices(normals: &[Vec3]) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::new();
    for a in boundary_arcs(normals) {
        if a.is_full_circle() {
            continue;
        }
        for p in [a.start(), a.end()] {
            if out.iter().all(|q| (q - p).norm() > 1e-9) {
                out.push(p);
            }
        }
    }
    out
}

/// Area of the orthogonal projection, onto the plane `u⊥`, of the part of
/// the polygon lying in the hemisphere `⟨θ, u⟩ ≥ 0`. Equals `∫_S ⟨θ,u⟩⁺ dσ`.
pub fn projected_polygon_area(polygon: &SphericalPolygon, u: &UnitVector) -> Result<f64> {
    let normals = polygon.edge_normals();
    if normals.len() < 3 {
        return Err(Error::InvalidPolygon("degenerate polygon".into()));
    }
    Ok(positive_moment(&normals, u))
}
