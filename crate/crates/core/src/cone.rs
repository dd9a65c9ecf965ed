//! Closed convex cones in R³: generator (V) and halfspace (H) descriptions,
//! symbolic circular cones, duality, containment, and normal/tangent cones
//! of finite point sets.
//!
//! A halfspace cone stores *inward* normals, `{x : ⟨n, x⟩ ≥ 0 ∀n}`, so the
//! dual of `Generators(v)` is `Halfspaces(v)` with the very same vectors.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, Rotation3};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hull::convex_hull_2d;
use crate::sphere::{angle_between, orthonormal_basis, UnitVector, Vec3};

/// Default tolerance for predicates on polyhedral cones only.
pub const POLY_TOL: f64 = 1e-9;
/// Default tolerance once a circular cone is involved.
pub const CIRCULAR_TOL: f64 = 1e-6;
/// Generators closer than this angle are merged.
pub const MERGE_ANGLE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexCone {
    /// Extreme rays, counterclockwise about the cone's axis when there are
    /// three or more.
    Generators(Vec<Vec3>),
    /// Inward facet normals, canonicalized like generators.
    Halfspaces(Vec<Vec3>),
    /// `{x : ∠(x, axis) ≤ opening}` with `opening ∈ (0, π/2]`.
    Circular { axis: UnitVector, opening: f64 },
}

/// Outcome of a containment test. `witness` is a unit direction of the
/// inner cone that leaves the outer one.
#[derive(Debug, Clone, PartialEq)]
pub struct Containment {
    pub holds: bool,
    pub witness: Option<Vec3>,
    /// Largest constraint violation found (≤ 0 when contained).
    pub violation: f64,
}

impl ConvexCone {
    pub fn generators(vectors: &[Vec3]) -> Result<Self> {
        Ok(ConvexCone::Generators(extreme_rays(vectors)?))
    }

    /// The cone `{x : ⟨n, x⟩ ≥ 0}` for every `n` in `normals`. Fails when the
    /// normals do not span a pointed cone, i.e. the result has empty interior.
    pub fn halfspaces(normals: &[Vec3]) -> Result<Self> {
        match extreme_rays(normals) {
            Ok(n) => Ok(ConvexCone::Halfspaces(n)),
            Err(Error::NotPointed) => Err(Error::InvalidCone("halfspace cone has empty interior".into())),
            Err(e) => Err(e),
        }
    }

    pub fn circular(axis: UnitVector, opening: f64) -> Result<Self> {
        if !(opening > 0.0 && opening <= FRAC_PI_2 + 1e-15) {
            return Err(Error::InvalidCone(format!("opening {opening} outside (0, π/2]")));
        }
        Ok(ConvexCone::Circular { axis, opening: opening.min(FRAC_PI_2) })
    }

    /// The nonnegative orthant.
    pub fn orthant() -> Self {
        ConvexCone::generators(&[Vec3::x(), Vec3::y(), Vec3::z()]).expect("orthant is pointed")
    }

    pub fn is_circular(&self) -> bool {
        matches!(self, ConvexCone::Circular { .. })
    }

    /// The dual cone `{y : ⟨y, x⟩ ≥ 0 ∀x ∈ C}`.
    pub fn dual(&self) -> ConvexCone {
        match self {
            ConvexCone::Generators(g) => ConvexCone::Halfspaces(g.clone()),
            ConvexCone::Halfspaces(n) => ConvexCone::Generators(n.clone()),
            ConvexCone::Circular { axis, opening } => {
                let d = FRAC_PI_2 - opening;
                if d <= 0.0 {
                    ConvexCone::Generators(vec![**axis])
                } else {
                    ConvexCone::Circular { axis: *axis, opening: d }
                }
            }
        }
    }

    /// Generators of a polyhedral cone; a lineality direction `l` appears as
    /// the pair `l, −l`.
    pub fn rays(&self) -> Option<Vec<Vec3>> {
        match self {
            ConvexCone::Generators(g) => Some(g.clone()),
            ConvexCone::Halfspaces(n) => Some(facets_of(n)),
            ConvexCone::Circular { .. } => None,
        }
    }

    /// Inward normals describing a polyhedral cone exactly; a ray or planar
    /// wedge includes both `n` and `−n` for its plane(s).
    pub fn facets(&self) -> Option<Vec<Vec3>> {
        match self {
            ConvexCone::Generators(g) => Some(facets_of(g)),
            ConvexCone::Halfspaces(n) => Some(n.clone()),
            ConvexCone::Circular { opening, axis } if *opening >= FRAC_PI_2 => Some(vec![**axis]),
            ConvexCone::Circular { .. } => None,
        }
    }

    /// A unit direction in the relative interior.
    pub fn center(&self) -> Vec3 {
        match self {
            ConvexCone::Circular { axis, .. } => **axis,
            _ => {
                let r = self.rays().expect("polyhedral");
                let s: Vec3 = r.iter().sum();
                if s.norm() > 1e-12 {
                    s.normalize()
                } else {
                    // Lineality pairs cancel: fall back to the facet center.
                    self.facets().expect("polyhedral").iter().sum::<Vec3>().normalize()
                }
            }
        }
    }

    /// Signed margin of `x` (normalized): ≥ 0 iff inside. For polyhedral
    /// cones the smallest facet product, for circular cones `opening − angle`.
    pub fn margin(&self, x: &Vec3) -> f64 {
        let x = x.normalize();
        match self {
            ConvexCone::Circular { axis, opening } => opening - angle_between(axis, &x),
            _ => self.facets().expect("polyhedral").iter().map(|n| n.dot(&x)).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains_point(&self, x: &Vec3, tol: f64) -> bool {
        self.margin(x) >= -tol
    }

    pub fn rotate(&self, r: &Rotation3<f64>) -> ConvexCone {
        match self {
            ConvexCone::Generators(g) => ConvexCone::Generators(g.iter().map(|v| r * v).collect()),
            ConvexCone::Halfspaces(n) => ConvexCone::Halfspaces(n.iter().map(|v| r * v).collect()),
            ConvexCone::Circular { axis, opening } => ConvexCone::Circular { axis: axis.rotate(r), opening: *opening },
        }
    }

    pub fn to_json(&self) -> Value {
        let vecs = |v: &[Vec3]| v.iter().map(|x| vec![x.x, x.y, x.z]).collect::<Vec<_>>();
        match self {
            ConvexCone::Generators(g) => json!({"kind": "generators", "vectors": vecs(g)}),
            ConvexCone::Halfspaces(n) => json!({"kind": "halfspaces", "vectors": vecs(n)}),
            ConvexCone::Circular { axis, opening } => {
                json!({"kind": "circular", "axis": axis.to_array(), "opening": opening})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidCone(m.to_string());
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| bad("missing \"kind\""))?;
        let vector = |x: &Value| -> Result<Vec3> {
            let c: Vec<f64> = serde_json::from_value(x.clone()).map_err(|e| bad(&e.to_string()))?;
            match c[..] {
                [a, b, c] => Ok(Vec3::new(a, b, c)),
                _ => Err(bad("vectors must have 3 components")),
            }
        };
        match kind {
            "generators" | "halfspaces" => {
                let list = v.get("vectors").and_then(Value::as_array).ok_or_else(|| bad("missing \"vectors\""))?;
                let vs = list.iter().map(vector).collect::<Result<Vec<_>>>()?;
                if kind == "generators" {
                    ConvexCone::generators(&vs)
                } else {
                    ConvexCone::halfspaces(&vs)
                }
            }
            "circular" => {
                let axis = UnitVector::new(vector(v.get("axis").ok_or_else(|| bad("missing \"axis\""))?)?)?;
                let opening = v.get("opening").and_then(Value::as_f64).ok_or_else(|| bad("missing \"opening\""))?;
                ConvexCone::circular(axis, opening)
            }
            other => Err(bad(&format!("unknown kind \"{other}\""))),
        }
    }
}

/// Dual cone; every valid cone has a valid dual.
pub fn dual_cone(c: &ConvexCone) -> ConvexCone {
    c.dual()
}

/// Default predicate tolerance for a pair of cones.
pub fn default_tol(a: &ConvexCone, b: &ConvexCone) -> f64 {
    if a.is_circular() || b.is_circular() {
        CIRCULAR_TOL
    } else {
        POLY_TOL
    }
}

/// Whether `inner ⊆ outer` within `tol`, with a violating direction otherwise.
pub fn cone_contains(outer: &ConvexCone, inner: &ConvexCone, tol: f64) -> Containment {
    let (violation, witness) = match (outer, inner) {
        (ConvexCone::Circular { axis: a1, opening: o1 }, ConvexCone::Circular { axis: a2, opening: o2 }) => {
            let v = angle_between(a1, a2) + o2 - o1;
            // Rim point of the inner cone farthest from the outer axis.
            let away = **a2 - **a1 * a1.dot(a2);
            let t = if away.norm() > 1e-12 { away.normalize() } else { orthonormal_basis(a2).0 };
            let t = (t - **a2 * t.dot(a2)).normalize();
            (v, **a2 * o2.cos() + t * o2.sin())
        }
        (_, ConvexCone::Circular { axis, opening }) => {
            let mut worst = (f64::NEG_INFINITY, Vec3::zeros());
            for n in outer.facets().expect("polyhedral") {
                let c = n.dot(axis).clamp(-1.0, 1.0);
                let rim_min = opening.cos() * c - opening.sin() * (1.0 - c * c).sqrt();
                if -rim_min > worst.0 {
                    let perp = n - **axis * c;
                    let t = if perp.norm() > 1e-12 { perp.normalize() } else { orthonormal_basis(axis).0 };
                    worst = (-rim_min, **axis * opening.cos() - t * opening.sin());
                }
            }
            worst
        }
        (_, _) => {
            let mut worst = (f64::NEG_INFINITY, Vec3::zeros());
            for r in inner.rays().expect("polyhedral") {
                let v = -outer.margin(&r);
                if v > worst.0 {
                    worst = (v, r);
                }
            }
            worst
        }
    };
    let holds = violation <= tol;
    Containment { holds, witness: (!holds).then_some(witness), violation }
}

/// Mutual containment within `tol`.
pub fn cones_equal(a: &ConvexCone, b: &ConvexCone, tol: f64) -> bool {
    cone_contains(a, b, tol).holds && cone_contains(b, a, tol).holds
}

/// Extreme rays of the cone generated by `vectors`: one ray, two rays
/// spanning a planar wedge, or a counterclockwise cycle about the axis.
pub fn extreme_rays(vectors: &[Vec3]) -> Result<Vec<Vec3>> {
    let units: Vec<Vec3> = vectors.iter().filter(|v| v.norm() > 0.0).map(|v| v.normalize()).collect();
    if units.is_empty() {
        return Err(Error::InvalidCone("no nonzero generators".into()));
    }
    let c = min_norm_point(&units);
    if c.norm() < 1e-10 {
        return Err(Error::NotPointed);
    }
    let c = c.normalize();
    let (e1, e2) = orthonormal_basis(&c);
    let chart: Vec<[f64; 2]> = units
        .iter()
        .map(|g| {
            let h = g.dot(&c);
            [g.dot(&e1) / h, g.dot(&e2) / h]
        })
        .collect();
    let hull = convex_hull_2d(&chart, 1e-13);
    let mut rays: Vec<Vec3> = hull.iter().map(|&i| units[i]).collect();
    // Merge near-parallel neighbours.
    let mut merged: Vec<Vec3> = Vec::with_capacity(rays.len());
    for r in rays.drain(..) {
        if merged.last().is_none_or(|m| angle_between(m, &r) > MERGE_ANGLE) {
            merged.push(r);
        }
    }
    while merged.len() > 1 && angle_between(&merged[0], merged.last().unwrap()) <= MERGE_ANGLE {
        merged.pop();
    }
    Ok(merged)
}

/// Facet normals of the cone spanned by canonical extreme rays.
fn facets_of(rays: &[Vec3]) -> Vec<Vec3> {
    match rays {
        [a] => {
            let (b1, b2) = orthonormal_basis(a);
            vec![*a, b1, -b1, b2, -b2]
        }
        [g1, g2] => {
            let n = g1.cross(g2).normalize();
            vec![n, -n, n.cross(g1).normalize(), g2.cross(&n).normalize()]
        }
        _ => {
            let k = rays.len();
            (0..k).map(|i| rays[i].cross(&rays[(i + 1) % k]).normalize()).collect()
        }
    }
}

/// Point of minimum norm in the convex hull of `points` (Wolfe's algorithm).
///
/// For unit vectors this is the max-margin axis: `⟨x, p⟩ ≥ |x|²` for all `p`.
pub fn min_norm_point(points: &[Vec3]) -> Vec3 {
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max);
    let eps = 1e-13 * scale;
    let first = (0..points.len())
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .expect("nonempty");
    let mut set = vec![first];
    let mut w = vec![1.0];
    let mut x = points[first];
    for _ in 0..1000 {
        let (j, pj) =
            points.iter().enumerate().map(|(i, p)| (i, x.dot(p))).min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
        if pj >= x.norm_squared() - eps || set.contains(&j) {
            return x;
        }
        set.push(j);
        w.push(0.0);
        loop {
            let alpha = affine_minimizer(points, &set);
            if alpha.iter().all(|&a| a > 1e-15) {
                w = alpha;
                break;
            }
            let mut theta: f64 = 1.0;
            for (wi, ai) in w.iter().zip(&alpha) {
                if *ai <= 1e-15 && wi - ai > 0.0 {
                    theta = theta.min(wi / (wi - ai));
                }
            }
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = (1.0 - theta) * *wi + theta * ai;
            }
            let keep: Vec<bool> = w.iter().map(|&wi| wi > 1e-15).collect();
            let mut k = keep.iter();
            set.retain(|_| *k.next().unwrap());
            let mut k = keep.iter();
            w.retain(|_| *k.next().unwrap());
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= s);
            if set.len() == 1 {
                w = vec![1.0];
                break;
            }
        }
        x = set.iter().zip(&w).map(|(&i, &wi)| points[i] * wi).sum();
        if x.norm_squared() <= eps * 1e-6 {
            return x;
        }
    }
    x
}

/// Barycentric coefficients of the point of `aff{points[set]}` nearest the
/// origin.
fn affine_minimizer(points: &[Vec3], set: &[usize]) -> Vec<f64> {
    let k = set.len();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    for (a, &i) in set.iter().enumerate() {
        for (b, &j) in set.iter().enumerate() {
            m[(a, b)] = points[i].dot(&points[j]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = m
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| m.svd(true, true).solve(&rhs, 1e-14).expect("svd solve"));
    sol.iter().take(k).copied().collect()
}

/// Normal cone of a convex hull at one of its vertices.
#[derive(Debug, Clone)]
pub struct NormalConeResult {
    pub cone: ConvexCone,
    pub vertex: Vec3,
}

/// Tangent cone `T = cl cone{y − q}` of `co(points)` at `q`, as generators.
///
/// Directions are normalized before use, so the result does not depend on
/// the scale of the configuration.
pub fn tangent_cone(points: &[Vec3], q: &Vec3) -> Result<ConvexCone> {
    let dirs: Vec<Vec3> = points.iter().map(|y| y - q).filter(|d| d.norm() > 0.0).collect();
    if dirs.is_empty() {
        return Err(Error::InvalidCone("tangent cone of a single point is trivial".into()));
    }
    match extreme_rays(&dirs) {
        Ok(r) => Ok(ConvexCone::Generators(r)),
        Err(Error::NotPointed) => Err(Error::NotHullVertex),
        Err(e) => Err(e),
    }
}

/// `N(q) = {x : ⟨x, y − q⟩ ≤ 0 ∀y}`, computed as `−T*`.
pub fn normal_cone_at_vertex(points: &[Vec3], q: &Vec3) -> Result<NormalConeResult> {
    let t = tangent_cone(points, q)?;
    // Negation reverses the cyclic orientation.
    let neg: Vec<Vec3> = t.rays().expect("polyhedral").iter().rev().map(|g| -g).collect();
    Ok(NormalConeResult { cone: ConvexCone::Halfspaces(neg), vertex: *q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn u(x: f64, y: f64, z: f64) -> UnitVector {
        UnitVector::new(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn orthant_is_self_dual() {
        let o = ConvexCone::orthant();
        assert!(cones_equal(&o, &o.dual(), POLY_TOL));
        assert_eq!(o.rays().unwrap().len(), 3);
    }

    #[test]
    fn redundant_generators_are_dropped() {
        let c = ConvexCone::generators(&[
            Vec3::x(),
            Vec3::y(),
            Vec3::z(),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::x() * 3.0,
        ])
        .unwrap();
        assert_eq!(c.rays().unwrap().len(), 3);
    }

    #[test]
    fn non_pointed_rejected() {
        assert_eq!(ConvexCone::generators(&[Vec3::x(), -Vec3::x()]), Err(Error::NotPointed));
        assert_eq!(
            ConvexCone::generators(&[Vec3::x(), Vec3::y(), -Vec3::x() - Vec3::y() + Vec3::z() * 1e-3, -Vec3::z()]),
            Err(Error::NotPointed)
        );
        assert!(ConvexCone::halfspaces(&[Vec3::x(), -Vec3::x()]).is_err());
    }

    #[test]
    fn circular_duality() {
        let c = ConvexCone::circular(u(0.0, 0.0, 1.0), FRAC_PI_3).unwrap();
        match c.dual() {
            ConvexCone::Circular { opening, .. } => assert!((opening - FRAC_PI_6).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let half = ConvexCone::circular(u(0.0, 0.0, 1.0), FRAC_PI_2).unwrap();
        assert_eq!(half.dual(), ConvexCone::Generators(vec![Vec3::z()]));
    }

    #[test]
    fn ray_dual_is_halfspace() {
        let r = ConvexCone::generators(&[Vec3::x()]).unwrap();
        let d = r.dual();
        assert_eq!(d, ConvexCone::Halfspaces(vec![Vec3::x()]));
        assert!(d.contains_point(&Vec3::new(0.0, 5.0, -3.0), 0.0));
        assert!(!d.contains_point(&Vec3::new(-0.1, 5.0, -3.0), 0.0));
        assert!(cones_equal(&d.dual(), &r, POLY_TOL));
    }

    #[test]
    fn circular_containment_with_witness() {
        let a = u(0.3, 0.2, 1.0);
        let big = ConvexCone::circular(a, FRAC_PI_3).unwrap();
        let small = ConvexCone::circular(a, FRAC_PI_6).unwrap();
        assert!(cone_contains(&big, &small, CIRCULAR_TOL).holds);
        let c = cone_contains(&small, &big, CIRCULAR_TOL);
        assert!(!c.holds);
        let w = c.witness.unwrap();
        assert!(!small.contains_point(&w, 1e-9));
        assert!(big.contains_point(&w, 1e-9));
    }

    #[test]
    fn circular_in_polyhedral_is_exact_at_tangency() {
        // The self-dual cap of the orthant's inscribed cone touches all three facets.
        let axis = u(1.0, 1.0, 1.0);
        let inscribed = (1.0f64 / 3.0).sqrt().asin();
        let cap = ConvexCone::circular(axis, inscribed).unwrap();
        let o = ConvexCone::orthant();
        assert!(cone_contains(&o, &cap, 1e-12).holds);
        let cap2 = ConvexCone::circular(axis, inscribed + 1e-6).unwrap();
        assert!(!cone_contains(&o, &cap2, 1e-9).holds);
    }

    #[test]
    fn cap_vs_wedge_containment() {
        let a = u(0.0, 0.0, 1.0);
        let cap = ConvexCone::circular(a, FRAC_PI_4).unwrap();
        let inside = ConvexCone::generators(&[Vec3::new(0.1, 0.0, 1.0), Vec3::new(0.0, 0.1, 1.0)]).unwrap();
        assert!(cone_contains(&cap, &inside, CIRCULAR_TOL).holds);
        assert!(!cone_contains(&inside, &cap, CIRCULAR_TOL).holds);
    }

    #[test]
    fn cube_corner_normal_cone() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        let n = normal_cone_at_vertex(&pts, &Vec3::zeros()).unwrap();
        let expect = ConvexCone::generators(&[-Vec3::x(), -Vec3::y(), -Vec3::z()]).unwrap();
        assert!(cones_equal(&n.cone, &expect, POLY_TOL));
        assert_eq!(normal_cone_at_vertex(&pts, &Vec3::new(0.5, 0.5, 0.0)).unwrap_err(), Error::NotHullVertex);
    }

    #[test]
    fn segment_endpoint_normal_cone() {
        let d = Vec3::new(1.0, 2.0, -0.5);
        let n = normal_cone_at_vertex(&[Vec3::zeros(), d], &Vec3::zeros()).unwrap();
        let expect = ConvexCone::halfspaces(&[-d]).unwrap();
        assert!(cones_equal(&n.cone, &expect, POLY_TOL));
    }

    #[test]
    fn min_norm_point_of_triangle() {
        let p = min_norm_point(&[Vec3::x(), Vec3::y(), Vec3::z()]);
        assert!((p - Vec3::new(1.0, 1.0, 1.0) / 3.0).norm() < 1e-14);
        let q = min_norm_point(&[Vec3::new(1.0, -1.0, 1.0), Vec3::new(1.0, 1.0, 1.0)]);
        assert!((q - Vec3::new(1.0, 0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        for c in
            [ConvexCone::orthant(), ConvexCone::orthant().dual(), ConvexCone::circular(u(1.0, 2.0, 3.0), 0.7).unwrap()]
        {
            let back = ConvexCone::from_json(&c.to_json()).unwrap();
            assert!(cones_equal(&c, &back, 1e-12));
        }
        assert!(ConvexCone::from_json(&json!({"kind": "cube"})).is_err());
    }
}
