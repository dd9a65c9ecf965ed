//! Generators and per-seed checks shared by the property suites and the
//! acceptance run. Each check returns a description of the first violation.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sector_descent::cone::{cones_equal, normal_cone_at_vertex, tangent_cone, ConvexCone};
use sector_descent::curve::{angle_condition_check, is_sdc, random_sdc_curve, PolylineCurve};
use sector_descent::hull::{mean_width_polytope, IncrementalHull};
use sector_descent::phi::capbody_width_gradient;
use sector_descent::region::projected_polygon_area;
use sector_descent::sector::{has_constant_width, regular_polygon, reuleaux_polygon, Sector};
use sector_descent::sphere::{random_rotation, random_unit, UnitVector, Vec3};
use sector_descent::trace::{lipschitz_constant, orthant_exclusion_scan, HullTrace};

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sign(r: &mut ChaCha8Rng) -> f64 {
    if r.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Pointed polyhedral cone: 3–8 random generators within a cap of radius
/// below π/2 about a random axis.
pub fn random_polyhedral(r: &mut ChaCha8Rng) -> ConvexCone {
    let rot = random_rotation(r);
    let spread = r.random_range(0.2..1.3);
    let k = r.random_range(3..=8);
    let gens: Vec<Vec3> = (0..k)
        .map(|_| {
            let t = r.random_range(0.05..1.0) * spread;
            let a = r.random_range(0.0..TAU);
            rot * *UnitVector::from_spherical(t, a)
        })
        .collect();
    ConvexCone::generators(&gens).unwrap_or_else(|_| ConvexCone::orthant())
}

pub fn random_cone(r: &mut ChaCha8Rng) -> ConvexCone {
    if r.random_bool(0.25) {
        ConvexCone::circular(random_unit(r), r.random_range(0.05..1.5)).unwrap()
    } else {
        random_polyhedral(r)
    }
}

/// Polygonal sector containing its dual, by rejection.
pub fn random_class_c(r: &mut ChaCha8Rng) -> Sector {
    loop {
        let k = r.random_range(3..=7);
        let base = r.random_range(0.0..1.0);
        let gens: Vec<Vec3> = (0..k)
            .map(|i| {
                let a = (i as f64 + base + r.random_range(-0.2..0.2)) * TAU / k as f64;
                *UnitVector::from_spherical(r.random_range(0.95..1.3), a)
            })
            .collect();
        if let Ok(c) = ConvexCone::generators(&gens) {
            let s = Sector::Cone(c).rotate(&random_rotation(r));
            if s.in_class_c(s.default_tol()) {
                return s;
            }
        }
    }
}

/// A rotated sector and whether it is self-dual: Reuleaux polygons and the
/// π/4 cap, against regular polygons and caps kept clear of self-duality.
pub fn width_case(r: &mut ChaCha8Rng) -> (Sector, bool) {
    let rot = random_rotation(r);
    let (c, self_dual) = match r.random_range(0..5) {
        0 => (reuleaux_polygon([3, 5, 7][r.random_range(0..3)]).unwrap(), true),
        1 => (ConvexCone::circular(UnitVector::z(), FRAC_PI_4).unwrap(), true),
        2 => {
            let k = [3, 5, 7][r.random_range(0..3)];
            // Circumradius of the self-dual regular k-gon.
            let rho = (1.0 / (PI / k as f64).cos().sqrt()).atan();
            let off = r.random_range(0.05..0.2) * sign(r);
            (regular_polygon(k, rho + off).unwrap(), false)
        }
        3 => (regular_polygon([4, 6, 8][r.random_range(0..3)], r.random_range(0.5..1.3)).unwrap(), false),
        _ => {
            let a = FRAC_PI_4 + r.random_range(0.05..0.4) * sign(r);
            (ConvexCone::circular(UnitVector::z(), a).unwrap(), false)
        }
    };
    (Sector::Cone(c).rotate(&rot), self_dual)
}

pub fn cube() -> Vec<Vec3> {
    (0..8).map(|b| Vec3::new(f64::from(b & 1), f64::from((b >> 1) & 1), f64::from((b >> 2) & 1))).collect()
}

pub fn duality_involution(seed: u64) -> Check {
    let c = random_cone(&mut rng(seed));
    ensure(cones_equal(&c.dual().dual(), &c, 1e-8), || format!("C** ≠ C for {c:?}"))
}

pub fn self_dual_iff_constant_width(seed: u64) -> Check {
    let (s, expect) = width_case(&mut rng(seed));
    ensure(s.is_self_dual(1e-6) == expect, || format!("is_self_dual ≠ {expect}"))?;
    let cw = has_constant_width(&s, FRAC_PI_2, 90, 1e-6).map_err(|e| e.to_string())?;
    ensure(cw == expect, || format!("constant width π/2 ≠ {expect}"))
}

/// Checks every vertex of a random polytope; returns how many.
pub fn normal_cone_is_minus_dual_tangent(seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    let n = r.random_range(5..20);
    let pts: Vec<Vec3> = (0..n)
        .map(|_| Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    let hull = IncrementalHull::from_points(&pts);
    let probes: Vec<Vec3> = (0..200).map(|_| *random_unit(&mut r)).collect();
    let vertices = hull.vertex_indices();
    for &v in &vertices {
        let q = pts[v];
        let nc = normal_cone_at_vertex(&pts, &q).map_err(|e| e.to_string())?.cone;
        let t = tangent_cone(&pts, &q).map_err(|e| e.to_string())?;
        let neg: Vec<Vec3> = t.dual().rays().unwrap().iter().map(|g| -g).collect();
        let minus_dual = ConvexCone::generators(&neg).map_err(|e| e.to_string())?;
        ensure(cones_equal(&nc, &minus_dual, 1e-8), || format!("N ≠ −T* at vertex {v}"))?;
        // Oracle: θ ∈ N(q) iff q maximizes ⟨θ, ·⟩ over the points.
        for th in &probes {
            let gap = pts.iter().map(|y| th.dot(&(y - q))).fold(f64::NEG_INFINITY, f64::max);
            if gap.abs() > 1e-6 {
                ensure(nc.contains_point(th, 1e-9) == (gap <= 0.0), || {
                    format!("support oracle disagrees at vertex {v}")
                })?;
            }
        }
    }
    Ok(vertices.len())
}

/// Random SDC polylines, half of them with one vertex knocked out of place.
pub fn sdc_tests_agree(seed: u64) -> Check {
    let mut r = rng(seed);
    let m = r.random_range(4..40);
    let dim = r.random_range(2..=3);
    let bend = r.random_range(0.1..1.2);
    let mut c = random_sdc_curve(&mut r, m, dim, bend).map_err(|e| e.to_string())?;
    if r.random_bool(0.5) {
        let mut pts = c.points().to_vec();
        let k = r.random_range(1..m);
        let z = if dim == 3 { r.random_range(-1.0..1.0) } else { 0.0 };
        pts[k] += Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), z) * r.random_range(0.1..3.0);
        match PolylineCurve::new(pts, dim) {
            Ok(p) => c = p,
            // Coincident vertices: nothing to compare.
            Err(_) => return Ok(()),
        }
    }
    let (a, b) = (is_sdc(&c, 1e-9).holds, angle_condition_check(&c, 1e-9).holds);
    ensure(a == b, || format!("vertex test {a}, angle condition {b}"))
}

/// Smallest formula dw/ds over a random 3D SDC curve; must not dip below
/// 1/8. The trace invariants are checked on the way.
pub fn width_growth_bound(seed: u64) -> Result<f64, String> {
    let c = random_sdc_curve(&mut rng(seed), 200, 3, 0.25).map_err(|e| e.to_string())?;
    ensure(is_sdc(&c, 1e-9).holds, || "generated curve is not SDC".into())?;
    let t = HullTrace::build(&c).map_err(|e| e.to_string())?;
    trace_invariants(&c, &t)?;
    let scan = orthant_exclusion_scan(&t).map_err(|e| e.to_string())?;
    ensure(scan.min >= 0.125 - 1e-3, || format!("dw/ds = {} at vertex {}", scan.min, scan.argmin))?;
    Ok(scan.min)
}

/// Width never decreases along the trace and the length obeys ‖γ‖ ≤ c_n w.
pub fn trace_invariants(c: &PolylineCurve, t: &HullTrace) -> Check {
    let w = t.rows.last().map_or(0.0, |r| r.w);
    let dec = t.width_decrease();
    ensure(dec <= 1e-12 * w, || format!("width decreases by {dec}"))?;
    let bound = lipschitz_constant(c.dim()) * w + 1e-6;
    ensure(c.length() <= bound, || format!("length {} > {bound}", c.length()))
}

pub fn random_trace_invariants(seed: u64) -> Check {
    let mut r = rng(seed);
    let dim = r.random_range(2..=3);
    let bend = r.random_range(0.05..1.0);
    let c = random_sdc_curve(&mut r, 150, dim, bend).map_err(|e| e.to_string())?;
    let t = HullTrace::build(&c).map_err(|e| e.to_string())?;
    trace_invariants(&c, &t)
}

/// Analytic ∇_p w(co(K ∪ {p})) against central differences, h = 1e-5.
pub fn capbody_gradient(seed: u64) -> Check {
    let mut r = rng(seed);
    let body: Vec<Vec3> = if r.random_bool(0.5) {
        cube()
    } else {
        (0..12)
            .map(|_| Vec3::new(r.random_range(0.0..1.0), r.random_range(0.0..1.0), r.random_range(0.0..1.0)))
            .collect()
    };
    let p = Vec3::new(0.5, 0.5, 0.5) + *random_unit(&mut r) * r.random_range(1.2..2.5);
    let g = capbody_width_gradient(&body, &p).map_err(|e| e.to_string())?;
    let w = |q: Vec3| {
        let mut pts = body.clone();
        pts.push(q);
        mean_width_polytope(&pts)
    };
    let h = 1e-5;
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = h;
        let fd = (w(p + e) - w(p - e)) / (2.0 * h);
        ensure((fd - g[k]).abs() < 1e-4, || format!("component {k}: fd {fd}, analytic {}", g[k]))?;
    }
    Ok(())
}

/// `∫_S ⟨θ, u⟩⁺` exactly and by 20 000 uniform samples, within 3σ.
pub fn projected_area_monte_carlo(seed: u64) -> Check {
    const N: usize = 20_000;
    let mut r = rng(seed);
    let s = Sector::Cone(random_polyhedral(&mut r));
    let poly = s.polygon().ok_or("no polygon")?;
    // Keep u roughly facing the polygon: with a sliver of support the
    // sample standard deviation is itself unreliable.
    let u = UnitVector::new(s.cone().unwrap().center() + *random_unit(&mut r) * 0.8).map_err(|e| e.to_string())?;
    let exact = projected_polygon_area(&poly, &u).map_err(|e| e.to_string())?;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..N {
        let t = random_unit(&mut r);
        let f = if s.contains_point(&t, 0.0) { t.dot(&u).max(0.0) } else { 0.0 };
        sum += f;
        sq += f * f;
    }
    let mean = sum / N as f64;
    let sd = 4.0 * PI * ((sq / N as f64 - mean * mean).max(0.0) / N as f64).sqrt();
    let mc = 4.0 * PI * mean;
    ensure((exact - mc).abs() <= 3.0 * sd + 1e-12, || format!("exact {exact}, Monte Carlo {mc} ± {sd}"))
}
