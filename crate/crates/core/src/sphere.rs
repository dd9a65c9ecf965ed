//! Points, great arcs and convex polygons on the unit sphere S².
//!
//! Planar (n = 2) data is embedded in the `z = 0` plane, so the geodesic
//! metric and the polygon machinery here serve both dimensions.

use nalgebra::{Quaternion, Rotation3, Unit, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector(Vec3);

impl UnitVector {
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if n.is_nan() || n <= 1e-300 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(UnitVector(v / n))
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        match c.len() {
            2 => Self::new(Vec3::new(c[0], c[1], 0.0)),
            3 => Self::new(Vec3::new(c[0], c[1], c[2])),
            n => Err(Error::Dimension(n)),
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        UnitVector(Vec3::new(theta.cos(), theta.sin(), 0.0))
    }

    /// Colatitude `theta` from +z and longitude `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let s = theta.sin();
        UnitVector(Vec3::new(s * phi.cos(), s * phi.sin(), theta.cos()))
    }

    pub fn x() -> Self {
        UnitVector(Vec3::x())
    }
    pub fn y() -> Self {
        UnitVector(Vec3::y())
    }
    pub fn z() -> Self {
        UnitVector(Vec3::z())
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    pub fn into_vec(self) -> Vec3 {
        self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn neg(&self) -> UnitVector {
        UnitVector(-self.0)
    }

    pub fn rotate(&self, r: &Rotation3<f64>) -> UnitVector {
        UnitVector(r * self.0)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

impl std::ops::Deref for UnitVector {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

/// Great-circle distance in radians, in `[0, π]`.
pub fn geodesic_distance(p: &UnitVector, q: &UnitVector) -> f64 {
    p.dot(q).clamp(-1.0, 1.0).acos()
}

/// Angle between two arbitrary nonzero vectors.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    // atan2 form stays accurate near 0 and π.
    a.cross(b).norm().atan2(a.dot(b))
}

/// Two unit vectors orthogonal to `n` and to each other, with `e1 × e2 = n̂`.
pub fn orthonormal_basis(n: &Vec3) -> (Vec3, Vec3) {
    let n = n.normalize();
    let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e1 = helper.cross(&n).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Uniformly distributed rotation (Haar measure on SO(3)).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3<f64> {
    let mut g = || -> f64 { rng.sample(StandardNormal) };
    let q = Quaternion::new(g(), g(), g(), g());
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

/// Uniform random point on S².
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> UnitVector {
    loop {
        let v = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        if let Ok(u) = UnitVector::new(v) {
            return u;
        }
    }
}

/// Rotation by `angle` about `axis` (axis need not be normalized).
pub fn axis_angle(axis: &Vec3, angle: f64) -> Rotation3<f64> {
    if axis.norm() < 1e-300 {
        return Rotation3::identity();
    }
    Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle)
}

/// The shorter great-circle arc between two non-antipodal points.
#[derive(Debug, Clone, Copy)]
pub struct GreatArc {
    start: UnitVector,
    end: UnitVector,
}

impl GreatArc {
    pub fn new(start: UnitVector, end: UnitVector) -> Result<Self> {
        if start.dot(&end) < -1.0 + 1e-12 {
            return Err(Error::AntipodalArc);
        }
        Ok(GreatArc { start, end })
    }

    pub fn start(&self) -> UnitVector {
        self.start
    }
    pub fn end(&self) -> UnitVector {
        self.end
    }

    pub fn length(&self) -> f64 {
        geodesic_distance(&self.start, &self.end)
    }

    /// Point at fraction `t ∈ [0, 1]` of the arc (slerp).
    pub fn point_at(&self, t: f64) -> UnitVector {
        let len = self.length();
        if len < 1e-15 {
            return self.start;
        }
        let a = ((1.0 - t) * len).sin() / len.sin();
        let b = (t * len).sin() / len.sin();
        UnitVector::new(*self.start * a + *self.end * b).unwrap_or(self.start)
    }

    /// Unit normal of the arc's plane, `start × end` normalized.
    pub fn plane_normal(&self) -> Option<Vec3> {
        let c = self.start.cross(&self.end);
        let n = c.norm();
        (n > 1e-15).then(|| c / n)
    }

    /// Geodesic distance from `p` to the closest point of the arc.
    pub fn distance_to(&self, p: &UnitVector) -> f64 {
        let d_end = geodesic_distance(p, &self.start).min(geodesic_distance(p, &self.end));
        let Some(n) = self.plane_normal() else {
            return d_end;
        };
        // Foot of p on the great circle; inside the arc iff it lies between the ends.
        let proj = **p - n * n.dot(p);
        if proj.norm() < 1e-15 {
            return std::f64::consts::FRAC_PI_2;
        }
        let f = proj.normalize();
        let inside = self.start.cross(&f).dot(&n) >= 0.0 && f.cross(&self.end).dot(&n) >= 0.0;
        if inside {
            n.dot(p).abs().clamp(0.0, 1.0).asin()
        } else {
            d_end
        }
    }
}

/// Area of the spherical triangle `abc` by L'Huilier's formula.
pub fn spherical_triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let la = angle_between(b, c);
    let lb = angle_between(c, a);
    let lc = angle_between(a, b);
    let s = 0.5 * (la + lb + lc);
    let t = (0.5 * s).tan()
        * (0.5 * (s - la)).max(0.0).tan()
        * (0.5 * (s - lb)).max(0.0).tan()
        * (0.5 * (s - lc)).max(0.0).tan();
    4.0 * t.max(0.0).sqrt().atan()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PolygonJson {
    pole: [f64; 3],
    vertices: Vec<[f64; 3]>,
}

/// Geodesically convex polygon with counterclockwise vertices (seen from
/// outside the sphere) lying in the closed hemisphere around `pole`.
#[derive(Debug, Clone)]
pub struct SphericalPolygon {
    pole: UnitVector,
    vertices: Vec<UnitVector>,
}

impl SphericalPolygon {
    pub fn new(pole: UnitVector, vertices: Vec<UnitVector>) -> Result<Self> {
        const TOL: f64 = 1e-9;
        let k = vertices.len();
        if k < 3 {
            return Err(Error::InvalidPolygon(format!("{k} vertices")));
        }
        for (i, v) in vertices.iter().enumerate() {
            if pole.dot(v) < -TOL {
                return Err(Error::InvalidPolygon(format!("vertex {i} outside the pole hemisphere")));
            }
        }
        for i in 0..k {
            let a = vertices[i];
            let b = vertices[(i + 1) % k];
            if a.dot(&b) < -1.0 + 1e-12 {
                return Err(Error::InvalidPolygon(format!("antipodal edge at {i}")));
            }
            if (*a - *b).norm() < 1e-14 {
                return Err(Error::InvalidPolygon(format!("repeated vertex at {i}")));
            }
            let n = a.cross(&b);
            for (j, v) in vertices.iter().enumerate() {
                if n.dot(v) < -TOL {
                    return Err(Error::InvalidPolygon(format!(
                        "vertex {j} violates edge {i}: not convex or not counterclockwise"
                    )));
                }
            }
        }
        Ok(SphericalPolygon { pole, vertices })
    }

    pub fn pole(&self) -> UnitVector {
        self.pole
    }

    pub fn vertices(&self) -> &[UnitVector] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = GreatArc> + '_ {
        let k = self.vertices.len();
        (0..k).map(move |i| GreatArc { start: self.vertices[i], end: self.vertices[(i + 1) % k] })
    }

    /// Inward unit normals of the edge planes.
    pub fn edge_normals(&self) -> Vec<Vec3> {
        self.edges().filter_map(|e| e.plane_normal()).collect()
    }

    pub fn contains(&self, p: &UnitVector, tol: f64) -> bool {
        self.edge_normals().iter().all(|n| n.dot(p) >= -tol)
    }

    /// Spherical area by fan triangulation and L'Huilier's formula.
    pub fn area(&self) -> f64 {
        let v0 = *self.vertices[0];
        (1..self.vertices.len() - 1)
            .map(|i| spherical_triangle_area(&v0, &self.vertices[i], &self.vertices[i + 1]))
            .sum()
    }

    pub fn rotate(&self, r: &Rotation3<f64>) -> SphericalPolygon {
        SphericalPolygon { pole: self.pole.rotate(r), vertices: self.vertices.iter().map(|v| v.rotate(r)).collect() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PolygonJson {
            pole: self.pole.to_array(),
            vertices: self.vertices.iter().map(|v| v.to_array()).collect(),
        })
        .expect("polygon serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let p: PolygonJson = serde_json::from_value(v.clone()).map_err(|e| Error::InvalidPolygon(e.to_string()))?;
        let pole = UnitVector::from_slice(&p.pole)?;
        let vertices = p.vertices.iter().map(|v| UnitVector::from_slice(v)).collect::<Result<Vec<_>>>()?;
        Self::new(pole, vertices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn distance_examples() {
        let (x, y) = (UnitVector::x(), UnitVector::y());
        assert!((geodesic_distance(&x, &y) - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(geodesic_distance(&x, &x), 0.0);
        assert!((geodesic_distance(&x, &x.neg()) - PI).abs() < 1e-15);
    }

    #[test]
    fn normalization_is_tight() {
        let u = UnitVector::new(Vec3::new(3.0, -4.0, 12.0)).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-12);
        assert_eq!(UnitVector::new(Vec3::zeros()), Err(Error::ZeroVector));
    }

    #[test]
    fn antipodal_arc_rejected() {
        let x = UnitVector::x();
        assert!(GreatArc::new(x, x.neg()).is_err());
    }

    #[test]
    fn orthant_triangle_area() {
        let p = SphericalPolygon::new(
            UnitVector::new(Vec3::new(1.0, 1.0, 1.0)).unwrap(),
            vec![UnitVector::x(), UnitVector::y(), UnitVector::z()],
        )
        .unwrap();
        assert!((p.area() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn clockwise_polygon_rejected() {
        let r = SphericalPolygon::new(
            UnitVector::new(Vec3::new(1.0, 1.0, 1.0)).unwrap(),
            vec![UnitVector::x(), UnitVector::z(), UnitVector::y()],
        );
        assert!(matches!(r, Err(Error::InvalidPolygon(_))));
    }

    #[test]
    fn polygon_json_round_trip() {
        let p = SphericalPolygon::new(
            UnitVector::new(Vec3::new(1.0, 1.0, 1.0)).unwrap(),
            vec![UnitVector::x(), UnitVector::y(), UnitVector::z()],
        )
        .unwrap();
        let q = SphericalPolygon::from_json(&p.to_json()).unwrap();
        assert_eq!(q.vertices().len(), 3);
        assert!((q.area() - p.area()).abs() < 1e-15);
    }

    #[test]
    fn arc_distance() {
        let arc = GreatArc::new(UnitVector::x(), UnitVector::y()).unwrap();
        assert!(arc.distance_to(&UnitVector::z()) - FRAC_PI_2 < 1e-12);
        let p = UnitVector::new(Vec3::new(1.0, 1.0, 0.2)).unwrap();
        assert!((arc.distance_to(&p) - p.z.asin()).abs() < 1e-12);
        let m = arc.point_at(0.5);
        assert!((geodesic_distance(&m, &UnitVector::x()) - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn metric_axioms_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let (a, b, c) = (random_unit(&mut rng), random_unit(&mut rng), random_unit(&mut rng));
            assert_eq!(geodesic_distance(&a, &b), geodesic_distance(&b, &a));
            assert!(geodesic_distance(&a, &c) <= geodesic_distance(&a, &b) + geodesic_distance(&b, &c) + 1e-12);
        }
    }
}
