//! Sectors: a closed convex cone intersected with the unit sphere.
//!
//! On S² a sector is a [`ConvexCone`]; on S¹ it is an angular interval of
//! length at most π.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Rotation3;
use serde_json::{json, Value};

use crate::cone::{cone_contains, default_tol, Containment, ConvexCone, CIRCULAR_TOL, POLY_TOL};
use crate::error::{Error, Result};
use crate::region;
use crate::sphere::{axis_angle, geodesic_distance, SphericalPolygon, UnitVector, Vec3};

/// Arc `{(cos t, sin t) : start ≤ t ≤ start + length}` with `length ∈ [0, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc2 {
    start: f64,
    length: f64,
}

impl Arc2 {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !(0.0..=PI + 1e-15).contains(&length) {
            return Err(Error::InvalidCone(format!("arc length {length} outside [0, π]")));
        }
        Ok(Arc2 { start: start.rem_euclid(TAU), length: length.min(PI) })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    pub fn dual(&self) -> Arc2 {
        Arc2 { start: (self.end() - FRAC_PI_2).rem_euclid(TAU), length: PI - self.length }
    }

    /// Angular offset of `t` past the start, in `(−π, π]`.
    fn offset(&self, t: f64) -> f64 {
        let d = (t - self.start).rem_euclid(TAU);
        if d > PI {
            d - TAU
        } else {
            d
        }
    }

    /// Signed margin of angle `t`: ≥ 0 iff inside.
    pub fn margin(&self, t: f64) -> f64 {
        let d = self.offset(t);
        d.min(self.length - d)
    }

    pub fn contains_arc(&self, inner: &Arc2, tol: f64) -> Containment {
        let (a, b) = (self.margin(inner.start), self.margin(inner.end()));
        let (violation, witness) = if a <= b { (-a, inner.start) } else { (-b, inner.end()) };
        let holds = violation <= tol;
        Containment { holds, witness: (!holds).then(|| Vec3::new(witness.cos(), witness.sin(), 0.0)), violation }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sector {
    Cone(ConvexCone),
    Arc(Arc2),
}

impl Sector {
    pub fn arc(start: f64, length: f64) -> Result<Self> {
        Ok(Sector::Arc(Arc2::new(start, length)?))
    }

    pub fn orthant() -> Self {
        Sector::Cone(ConvexCone::orthant())
    }

    pub fn dim(&self) -> usize {
        match self {
            Sector::Cone(_) => 3,
            Sector::Arc(_) => 2,
        }
    }

    pub fn cone(&self) -> Option<&ConvexCone> {
        match self {
            Sector::Cone(c) => Some(c),
            Sector::Arc(_) => None,
        }
    }

    pub fn dual(&self) -> Sector {
        match self {
            Sector::Cone(c) => Sector::Cone(c.dual()),
            Sector::Arc(a) => Sector::Arc(a.dual()),
        }
    }

    pub fn default_tol(&self) -> f64 {
        match self {
            Sector::Cone(c) => default_tol(c, &c.dual()),
            Sector::Arc(_) => POLY_TOL,
        }
    }

    /// Whether `inner ⊆ self` within `tol`, with a witness otherwise.
    pub fn contains(&self, inner: &Sector, tol: f64) -> Result<Containment> {
        match (self, inner) {
            (Sector::Cone(a), Sector::Cone(b)) => Ok(cone_contains(a, b, tol)),
            (Sector::Arc(a), Sector::Arc(b)) => Ok(a.contains_arc(b, tol)),
            _ => Err(Error::Dimension(inner.dim())),
        }
    }

    pub fn contains_point(&self, x: &Vec3, tol: f64) -> bool {
        match self {
            Sector::Cone(c) => c.contains_point(x, tol),
            Sector::Arc(a) => a.margin(x.y.atan2(x.x)) >= -tol,
        }
    }

    /// Signed distance-like margin of a point; ≥ 0 iff inside.
    pub fn margin(&self, x: &Vec3) -> f64 {
        match self {
            Sector::Cone(c) => c.margin(x),
            Sector::Arc(a) => a.margin(x.y.atan2(x.x)),
        }
    }

    /// `S ⊇ S*`.
    pub fn in_class_c(&self, tol: f64) -> bool {
        self.class_c_residual() <= tol
    }

    /// How far `S*` sticks out of `S` (≤ 0 inside class C).
    pub fn class_c_residual(&self) -> f64 {
        self.contains(&self.dual(), 0.0).expect("same dimension").violation
    }

    pub fn is_self_dual(&self, tol: f64) -> bool {
        let d = self.dual();
        self.contains(&d, tol).expect("same dimension").holds && d.contains(self, tol).expect("same dimension").holds
    }

    /// Surface measure: arc length on S¹, spherical area on S².
    pub fn area(&self) -> f64 {
        match self {
            Sector::Arc(a) => a.length,
            Sector::Cone(ConvexCone::Circular { opening, .. }) => TAU * (1.0 - opening.cos()),
            Sector::Cone(c) => match c.facets().expect("polyhedral")[..] {
                [_] => TAU,
                [n1, n2] => 2.0 * (PI - n1.angle(&n2)),
                _ => self.polygon().map_or(0.0, |p| p.area()),
            },
        }
    }

    /// The sector as a spherical polygon, when it is polyhedral with at least
    /// three extreme rays.
    pub fn polygon(&self) -> Option<SphericalPolygon> {
        let c = self.cone()?;
        let rays = c.rays()?;
        if rays.len() < 3 || rays.len() != c.facets()?.len() {
            return None;
        }
        let pole = UnitVector::new(c.center()).ok()?;
        let verts = rays.iter().map(|r| UnitVector::new(*r)).collect::<Result<Vec<_>>>().ok()?;
        SphericalPolygon::new(pole, verts).ok()
    }

    pub fn rotate(&self, r: &Rotation3<f64>) -> Sector {
        match self {
            Sector::Cone(c) => Sector::Cone(c.rotate(r)),
            Sector::Arc(a) => {
                let (axis, angle) = r.axis_angle().map_or((Vec3::z(), 0.0), |(ax, t)| (*ax, t));
                let t = if axis.z >= 0.0 { angle } else { -angle };
                Sector::Arc(Arc2 { start: (a.start + t).rem_euclid(TAU), length: a.length })
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Sector::Cone(c) => c.to_json(),
            Sector::Arc(a) => json!({"kind": "arc", "start": a.start, "length": a.length}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if v.get("kind").and_then(Value::as_str) == Some("arc") {
            let get = |k: &str| {
                v.get(k).and_then(Value::as_f64).ok_or_else(|| Error::InvalidCone(format!("missing \"{k}\"")))
            };
            return Sector::arc(get("start")?, get("length")?);
        }
        Ok(Sector::Cone(ConvexCone::from_json(v)?))
    }

    /// Points sampled along the boundary (vertices included), roughly
    /// `samples` in total. Fails for sectors with empty interior.
    pub fn boundary_samples(&self, samples: usize) -> Result<Vec<Vec3>> {
        let c = match self {
            Sector::Cone(c) => c,
            Sector::Arc(_) => return Err(Error::Dimension(2)),
        };
        let samples = samples.max(8);
        match c {
            ConvexCone::Circular { axis, opening } => {
                let m = samples + samples % 2;
                let (e1, e2) = crate::sphere::orthonormal_basis(axis);
                Ok((0..m)
                    .map(|i| {
                        let t = TAU * i as f64 / m as f64;
                        **axis * opening.cos() + (e1 * t.cos() + e2 * t.sin()) * opening.sin()
                    })
                    .collect())
            }
            _ => {
                let facets = c.facets().expect("polyhedral");
                if self.area() <= 1e-15 {
                    return Err(Error::EmptySector);
                }
                let arcs = region::boundary_arcs(&facets);
                let total: f64 = arcs.iter().map(|a| a.length).sum();
                let mut out = Vec::with_capacity(samples + arcs.len());
                for a in &arcs {
                    let m = ((samples as f64 * a.length / total).ceil() as usize).max(2);
                    let m = m + m % 2;
                    let last = if a.is_full_circle() { m } else { m + 1 };
                    out.extend((0..last).map(|j| a.point_at(j as f64 / m as f64)));
                }
                Ok(out)
            }
        }
    }
}

/// Geodesic distance from a unit vector to a sector on S² (0 inside).
pub fn distance_to_sector(s: &Sector, p: &Vec3) -> f64 {
    let p = p.normalize();
    match s {
        Sector::Arc(a) => (-a.margin(p.y.atan2(p.x))).max(0.0),
        Sector::Cone(ConvexCone::Circular { axis, opening }) => (axis.angle(&p) - opening).max(0.0),
        Sector::Cone(c) => {
            let facets = c.facets().expect("polyhedral");
            if facets.iter().all(|n| n.dot(&p) >= 0.0) {
                return 0.0;
            }
            let arcs = region::boundary_arcs(&facets);
            if arcs.is_empty() {
                // A single ray.
                return c.rays().expect("polyhedral")[0].angle(&p);
            }
            arcs.iter().map(|a| a.distance_to(&p)).fold(f64::INFINITY, f64::min)
        }
    }
}

/// Hausdorff distance between two sectors on S², from boundary samples.
pub fn hausdorff_distance(a: &Sector, b: &Sector, samples: usize) -> Result<f64> {
    let one_way = |x: &Sector, y: &Sector| -> Result<f64> {
        Ok(x.boundary_samples(samples)?.iter().map(|p| distance_to_sector(y, p)).fold(0.0, f64::max))
    };
    Ok(one_way(a, b)?.max(one_way(b, a)?))
}

/// For each sampled boundary point `θ₀`, the largest geodesic distance to
/// the other boundary samples (the farthest point of a convex sector lies
/// on its boundary).
pub fn spherical_width_profile(s: &Sector, samples: usize) -> Result<Vec<(UnitVector, f64)>> {
    let pts: Vec<UnitVector> = s.boundary_samples(samples)?.into_iter().map(UnitVector::new).collect::<Result<_>>()?;
    Ok(crate::par::map_slice(&pts, |p| {
        let far = pts.iter().map(|q| geodesic_distance(p, q)).fold(0.0, f64::max);
        (*p, far)
    }))
}

/// The width `w` if every profile value lies in `[w − tol, w]`.
pub fn constant_width(profile: &[(UnitVector, f64)], tol: f64) -> Option<f64> {
    let w = profile.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    profile.iter().all(|p| p.1 >= w - tol).then_some(w)
}

/// Whether the sector has constant width `w` within `tol`.
pub fn has_constant_width(s: &Sector, w: f64, samples: usize, tol: f64) -> Result<bool> {
    let profile = spherical_width_profile(s, samples)?;
    Ok(constant_width(&profile, tol).is_some_and(|v| (v - w).abs() <= tol))
}

/// Regular spherical `k`-gon with circumradius `rho` about the north pole.
pub fn regular_polygon(k: usize, rho: f64) -> Result<ConvexCone> {
    if k < 3 || !(0.0..FRAC_PI_2).contains(&rho) {
        return Err(Error::InvalidArgument(format!("regular polygon k={k}, rho={rho}")));
    }
    let v: Vec<Vec3> = (0..k).map(|i| *UnitVector::from_spherical(rho, TAU * i as f64 / k as f64)).collect();
    ConvexCone::generators(&v)
}

/// The self-dual regular polygon with an odd number `k` of vertices: a
/// spherical Reuleaux polygon of width π/2. `k = 3` is the orthant.
pub fn reuleaux_polygon(k: usize) -> Result<ConvexCone> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("Reuleaux polygons need odd k ≥ 3, got {k}")));
    }
    let rho = (1.0 / (PI / k as f64).cos().sqrt()).atan();
    regular_polygon(k, rho)
}

/// The self-dual circular cone about `axis`.
pub fn self_dual_cap(axis: UnitVector) -> ConvexCone {
    ConvexCone::circular(axis, std::f64::consts::FRAC_PI_4).expect("valid opening")
}

/// Rotation taking the north pole to `axis`.
pub fn rotation_to(axis: &Vec3) -> Rotation3<f64> {
    let z = Vec3::z();
    let c = z.cross(axis);
    if c.norm() < 1e-15 {
        return if axis.z >= 0.0 { Rotation3::identity() } else { axis_angle(&Vec3::x(), PI) };
    }
    axis_angle(&c, z.angle(axis))
}

/// Default tolerance for predicates on this sector and its dual.
pub fn predicate_tol(s: &Sector) -> f64 {
    match s {
        Sector::Cone(c) if c.is_circular() => CIRCULAR_TOL,
        _ => POLY_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};

    fn cap(opening: f64) -> Sector {
        Sector::Cone(ConvexCone::circular(UnitVector::new(Vec3::new(0.1, -0.2, 1.0)).unwrap(), opening).unwrap())
    }

    #[test]
    fn class_c_examples() {
        assert!(Sector::orthant().in_class_c(POLY_TOL));
        assert!(!cap(FRAC_PI_8).in_class_c(CIRCULAR_TOL));
        assert!(cap(FRAC_PI_3).in_class_c(CIRCULAR_TOL));
        assert!(Sector::arc(0.3, PI).unwrap().in_class_c(POLY_TOL));
        assert!(!Sector::arc(0.3, 1.0).unwrap().in_class_c(POLY_TOL));
    }

    #[test]
    fn self_duality_examples() {
        assert!(Sector::orthant().is_self_dual(POLY_TOL));
        assert!(cap(FRAC_PI_4).is_self_dual(CIRCULAR_TOL));
        assert!(!cap(FRAC_PI_3).is_self_dual(CIRCULAR_TOL));
        assert!(Sector::arc(1.0, FRAC_PI_2).unwrap().is_self_dual(POLY_TOL));
        for k in [3, 5, 7, 9] {
            assert!(Sector::Cone(reuleaux_polygon(k).unwrap()).is_self_dual(1e-12), "k={k}");
        }
        assert!(!Sector::Cone(regular_polygon(4, 0.9).unwrap()).is_self_dual(1e-6));
    }

    #[test]
    fn arc_duality() {
        let a = Arc2::new(0.5, 2.0).unwrap();
        let d = a.dual();
        assert!((d.length() - (PI - 2.0)).abs() < 1e-15);
        assert!((d.start() - (2.5 - FRAC_PI_2)).abs() < 1e-15);
        assert_eq!(a.dual().dual(), a);
    }

    #[test]
    fn width_profiles() {
        let p = spherical_width_profile(&Sector::orthant(), 300).unwrap();
        assert!(p.iter().all(|x| (x.1 - FRAC_PI_2).abs() < 1e-6));
        let p = spherical_width_profile(&cap(FRAC_PI_4), 720).unwrap();
        assert!(p.iter().all(|x| (x.1 - FRAC_PI_2).abs() < 1e-6));
        let thin = Sector::Cone(
            ConvexCone::generators(&[Vec3::new(1.0, 0.0, 1.0), Vec3::new(-1.0, 0.0, 1.0), Vec3::new(0.0, 0.1, 1.0)])
                .unwrap(),
        );
        let p = spherical_width_profile(&thin, 300).unwrap();
        assert!(constant_width(&p, 1e-3).is_none());
        assert!(has_constant_width(&Sector::Cone(reuleaux_polygon(5).unwrap()), FRAC_PI_2, 500, 1e-6).unwrap());
    }

    #[test]
    fn empty_interior_rejected() {
        let wedge = Sector::Cone(ConvexCone::generators(&[Vec3::x(), Vec3::y()]).unwrap());
        assert_eq!(spherical_width_profile(&wedge, 100).unwrap_err(), Error::EmptySector);
    }

    #[test]
    fn distances() {
        let o = Sector::orthant();
        assert_eq!(distance_to_sector(&o, &Vec3::new(1.0, 2.0, 3.0)), 0.0);
        assert!((distance_to_sector(&o, &Vec3::new(-1.0, 1.0, 0.0)) - FRAC_PI_4).abs() < 1e-12);
        assert!(
            (distance_to_sector(&o, &Vec3::new(-1.0, -1.0, -1.0)) - (PI - (1.0f64 / 3.0).sqrt().acos())).abs() < 1e-12
        );
        let r = axis_angle(&Vec3::new(1.0, 1.0, 1.0), 0.01);
        let h = hausdorff_distance(&o, &o.rotate(&r), 400).unwrap();
        assert!(h > 0.0 && h < 0.01, "{h}");
        assert!(hausdorff_distance(&o, &o, 100).unwrap() < 1e-12);
    }

    #[test]
    fn areas() {
        assert!((Sector::orthant().area() - FRAC_PI_2).abs() < 1e-12);
        assert!((cap(FRAC_PI_4).area() - TAU * (1.0 - FRAC_PI_4.cos())).abs() < 1e-12);
        let lune = Sector::Cone(ConvexCone::halfspaces(&[Vec3::x(), Vec3::y()]).unwrap());
        assert!((lune.area() - PI).abs() < 1e-12);
        assert!((Sector::orthant().dual().area() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        for s in [Sector::orthant(), cap(0.5), Sector::arc(1.0, 2.0).unwrap()] {
            let back = Sector::from_json(&s.to_json()).unwrap();
            assert!(s.contains(&back, 1e-12).unwrap().holds && back.contains(&s, 1e-12).unwrap().holds);
        }
    }
}
