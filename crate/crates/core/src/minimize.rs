//! Minimization of Φ over sectors containing their dual.
//!
//! For a fixed sector `S`, `u ↦ Φ(S, u)` is linear on `S*` (the integrand is
//! nonnegative there) and positive, so its minimum over `S*` sits at an
//! extreme ray of `S*`; the search therefore runs over sector parameters only
//! and picks `u` exactly. Infeasible sectors are penalized by their class-C
//! residual × 10³.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::nelder_mead::{nelder_mead, NmOptions};
use crate::par;
use crate::phi::{phi, santalo_lower_bound};
use crate::sector::{has_constant_width, hausdorff_distance, Sector};
use crate::sphere::{axis_angle, UnitVector, Vec3};

pub const PENALTY: f64 = 1e3;
const MAX_REJECTION_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Family {
    /// Spherical polygons with `k ≤ 8` vertices (n = 3).
    Polygons { k: usize },
    /// Circular caps (n = 3).
    Caps,
    /// Arcs of S¹ (n = 2).
    Arcs,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizationProblem {
    pub family: Family,
    /// Feasibility tolerance on the class-C residual.
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
    pub max_evals: usize,
    pub diameter_tol: f64,
}

impl MinimizationProblem {
    pub fn new(family: Family, seed: u64) -> Self {
        MinimizationProblem { family, tol: 1e-6, seed, restarts: 20, max_evals: 50_000, diameter_tol: 1e-8 }
    }

    pub fn dim(&self) -> usize {
        match self.family {
            Family::Arcs => 2,
            _ => 3,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Family::Polygons { k } = self.family {
            if !(3..=8).contains(&k) {
                return Err(Error::InvalidArgument(format!("polygon family needs 3 ≤ k ≤ 8, got {k}")));
            }
        }
        if self.restarts == 0 || self.max_evals == 0 {
            return Err(Error::InvalidArgument("restarts and evaluation budget must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the iterate trace: best penalized value after an improvement.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub restart: usize,
    pub iter: usize,
    pub value: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartSummary {
    pub index: usize,
    pub value: f64,
    pub residual: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct MinimizationReport {
    pub sector: Sector,
    pub u: Vec3,
    pub value: f64,
    /// Class-C residual of the best sector (≤ 0 when feasible).
    pub residual: f64,
    /// Residual of `u ∈ S*` (≤ 0 when feasible).
    pub u_residual: f64,
    pub restarts: Vec<RestartSummary>,
    pub trace: Vec<TraceRow>,
    /// Hausdorff distance to the nearest rotated orthant (polygons only).
    pub dist_to_orthant: Option<f64>,
    /// Distance from `u` to the nearest extreme ray of the best sector.
    pub u_to_vertex: Option<f64>,
}

impl MinimizationReport {
    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value,
            "sector": self.sector.to_json(),
            "u": [self.u.x, self.u.y, self.u.z],
            "dist_to_orthant": self.dist_to_orthant,
            "u_to_vertex": self.u_to_vertex,
            "residual": self.residual,
            "u_residual": self.u_residual,
            "restarts": self.restarts,
        })
    }

    /// Trace CSV with header `restart,iter,value,residual`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("restart,iter,value,residual\n");
        for r in &self.trace {
            s.push_str(&format!("{},{},{},{}\n", r.restart, r.iter, r.value, r.residual));
        }
        s
    }
}

/// A candidate from parameters, with its exact minimizing `u`.
struct Candidate {
    sector: Sector,
    u: Vec3,
    phi: f64,
    residual: f64,
}

impl Candidate {
    fn objective(&self) -> f64 {
        self.phi + PENALTY * self.residual.max(0.0)
    }
}

fn sector_from_params(family: Family, p: &[f64]) -> Result<Sector> {
    match family {
        Family::Arcs => Sector::arc(0.0, p[0].clamp(0.0, PI)),
        Family::Caps => Ok(Sector::Cone(ConvexCone::circular(UnitVector::z(), p[0].clamp(1e-9, FRAC_PI_2))?)),
        Family::Polygons { .. } => {
            let verts: Vec<Vec3> = p.chunks(2).map(|c| *UnitVector::from_spherical(c[0], c[1])).collect();
            Ok(Sector::Cone(ConvexCone::generators(&verts)?))
        }
    }
}

/// Overshoot of the parameters beyond their box (arc length ≤ π, cap
/// opening ≤ π/2), penalized like infeasibility.
fn box_excess(family: Family, p: &[f64]) -> f64 {
    match family {
        Family::Arcs => (p[0] - PI).max(0.0) + (-p[0]).max(0.0),
        Family::Caps => (p[0] - FRAC_PI_2).max(0.0) + (-p[0]).max(0.0),
        Family::Polygons { .. } => 0.0,
    }
}

/// Extreme rays of `S*`, the candidates for the minimizing `u`.
fn dual_extreme_points(s: &Sector) -> Vec<Vec3> {
    match s {
        Sector::Arc(a) => {
            let d = a.dual();
            [d.start(), d.end()].iter().map(|t| Vec3::new(t.cos(), t.sin(), 0.0)).collect()
        }
        Sector::Cone(ConvexCone::Circular { axis, opening }) => {
            // Φ is rotationally symmetric: any rim point of the dual cap.
            let beta = FRAC_PI_2 - opening;
            let tilt = axis.cross(&Vec3::x());
            let tilt = if tilt.norm() > 1e-9 { tilt } else { axis.cross(&Vec3::y()) };
            vec![axis_angle(&tilt, beta) * **axis]
        }
        Sector::Cone(c) => c.dual().rays().expect("polyhedral"),
    }
}

fn evaluate(family: Family, p: &[f64]) -> Option<Candidate> {
    let sector = sector_from_params(family, p).ok()?;
    let residual = sector.class_c_residual().max(0.0) + box_excess(family, p);
    let (u, v) = dual_extreme_points(&sector)
        .into_iter()
        .map(|u| {
            let v = phi(&sector, &u).map_or(f64::INFINITY, |r| r.value);
            (u, v)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    Some(Candidate { sector, u, phi: v, residual })
}

fn penalized(family: Family, p: &[f64]) -> f64 {
    evaluate(family, p).map_or(f64::INFINITY, |c| c.objective())
}

/// Random feasible parameters by rejection sampling.
fn random_start(family: Family, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    for _ in 0..MAX_REJECTION_SAMPLES {
        let p: Vec<f64> = match family {
            Family::Arcs => vec![rng.random_range(FRAC_PI_2..PI)],
            Family::Caps => vec![rng.random_range(FRAC_PI_4..FRAC_PI_2)],
            Family::Polygons { k } => {
                let offset = rng.random_range(0.0..TAU);
                let mut az: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
                az.sort_by(f64::total_cmp);
                az.iter().flat_map(|&a| [rng.random_range(0.5..1.35), a + offset]).collect()
            }
        };
        if evaluate(family, &p).is_some_and(|c| c.residual <= 0.0) {
            return Ok(p);
        }
    }
    Err(Error::NoFeasibleStart(MAX_REJECTION_SAMPLES))
}

struct RestartOutcome {
    summary: RestartSummary,
    params: Vec<f64>,
    trace: Vec<TraceRow>,
}

fn run_restart(problem: &MinimizationProblem, index: usize) -> Result<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed.wrapping_add(index as u64));
    let x0 = random_start(problem.family, &mut rng)?;
    let family = problem.family;
    let opts =
        NmOptions { max_evals: problem.max_evals, diameter_tol: problem.diameter_tol, initial_step: 0.1, rebuilds: 3 };
    let mut trace = Vec::new();
    let mut best = f64::INFINITY;
    let mut evals = 0usize;
    let r = nelder_mead(
        |p| {
            evals += 1;
            let c = evaluate(family, p);
            let v = c.as_ref().map_or(f64::INFINITY, Candidate::objective);
            if v < best {
                best = v;
                let residual = c.map_or(f64::INFINITY, |c| c.residual);
                trace.push(TraceRow { restart: index, iter: evals, value: v, residual });
            }
            v
        },
        &x0,
        &opts,
    );
    let c = evaluate(family, &r.x).ok_or_else(|| Error::InvalidArgument("optimizer left the domain".into()))?;
    Ok(RestartOutcome {
        summary: RestartSummary { index, value: c.phi, residual: c.residual, evals: r.evals, converged: r.converged },
        params: r.x,
        trace,
    })
}

/// Best of `problem.restarts` Nelder–Mead runs from random feasible starts.
/// Restarts run in parallel; the argmin (ties → lowest index) is deterministic.
pub fn minimize_phi(problem: &MinimizationProblem) -> Result<MinimizationReport> {
    problem.validate()?;
    let outcomes = par::map_range(problem.restarts, |i| run_restart(problem, i));
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let best = outcomes
        .iter()
        .min_by(|a, b| {
            penalized(problem.family, &a.params)
                .total_cmp(&penalized(problem.family, &b.params))
                .then(a.summary.index.cmp(&b.summary.index))
        })
        .expect("at least one restart");
    let c = evaluate(problem.family, &best.params).expect("finite best");
    let u_residual = -c.sector.dual().margin(&c.u);
    let (dist_to_orthant, u_to_vertex) = match (&problem.family, &c.sector) {
        (Family::Polygons { .. }, Sector::Cone(cone)) => {
            let rays = cone.rays().expect("polyhedral");
            let d = rays.iter().map(|r| r.angle(&c.u)).fold(f64::INFINITY, f64::min);
            (Some(distance_to_orthant(&c.sector)?), Some(d))
        }
        (Family::Arcs, Sector::Arc(a)) => {
            let t = c.u.y.atan2(c.u.x);
            let d = [a.start(), a.end()]
                .iter()
                .map(|e| ((t - e).rem_euclid(TAU)).min((e - t).rem_euclid(TAU)))
                .fold(f64::INFINITY, f64::min);
            (None, Some(d))
        }
        _ => (None, None),
    };
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut restarts = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        trace.extend(o.trace);
        restarts.push(o.summary);
    }
    debug_assert!(c.phi >= santalo_lower_bound(problem.dim()) - 1e-6 || c.residual > problem.tol);
    Ok(MinimizationReport {
        sector: c.sector,
        u: c.u,
        value: c.phi,
        residual: c.residual,
        u_residual,
        restarts,
        trace,
        dist_to_orthant,
        u_to_vertex,
    })
}

/// Smallest Hausdorff distance from `s` to a rotated orthant, optimized over
/// rotations (axis-angle) from starts that align triples of consecutive rays.
pub fn distance_to_orthant(s: &Sector) -> Result<f64> {
    let rays = s.cone().and_then(ConvexCone::rays).ok_or(Error::Dimension(s.dim()))?;
    let orthant = Sector::orthant();
    let dist = |w: &[f64]| {
        let v = Vec3::new(w[0], w[1], w[2]);
        let r = if v.norm() < 1e-15 { nalgebra::Rotation3::identity() } else { axis_angle(&v, v.norm()) };
        hausdorff_distance(s, &orthant.rotate(&r), 120).unwrap_or(f64::INFINITY)
    };
    let k = rays.len();
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; 3]];
    for i in 0..k {
        let a = rays[i];
        let b = rays[(i + 1) % k];
        let e1 = a;
        let e2 = (b - e1 * e1.dot(&b)).try_normalize(1e-12).unwrap_or_else(|| crate::sphere::orthonormal_basis(&e1).0);
        let e3 = e1.cross(&e2);
        let m = nalgebra::Matrix3::from_columns(&[e1, e2, e3]);
        let r = nalgebra::Rotation3::from_matrix(&m);
        let sv = r.scaled_axis();
        starts.push(vec![sv.x, sv.y, sv.z]);
    }
    let opts = NmOptions { max_evals: 1500, diameter_tol: 1e-7, initial_step: 0.05, rebuilds: 1 };
    let best =
        par::map_slice(&starts, |x0| nelder_mead(dist, x0, &opts).value).into_iter().fold(f64::INFINITY, f64::min);
    Ok(best)
}

/// Alternating midpoint-blend toward a self-dual sector inside `s`.
///
/// Polygons are blended in the gnomonic chart centered in `S*`, where the
/// dual becomes the negated polar body and the blend is a Minkowski average.
pub fn self_dual_snap(s: &Sector) -> Result<Sector> {
    const MAX_ITER: usize = 200;
    const TOL: f64 = 1e-6;
    if !s.in_class_c(s.default_tol()) {
        return Err(Error::InvalidArgument("self-dual snap needs a sector containing its dual".into()));
    }
    let mut cur = s.clone();
    for _ in 0..MAX_ITER {
        if cur.is_self_dual(TOL) {
            return Ok(cur);
        }
        cur = match &cur {
            // S and S* share their midpoint; the blend has length π/2.
            Sector::Arc(a) => Sector::arc(a.start() + 0.5 * a.length() - FRAC_PI_4, FRAC_PI_2)?,
            Sector::Cone(ConvexCone::Circular { axis, opening }) => {
                let blend = 0.5 * (opening + (FRAC_PI_2 - opening));
                Sector::Cone(ConvexCone::circular(*axis, blend.min(*opening))?)
            }
            Sector::Cone(c) => {
                let dual = c.dual();
                let center = dual.center();
                let (e1, e2) = crate::sphere::orthonormal_basis(&center);
                let chart = |v: &Vec3| {
                    let h = v.dot(&center);
                    [v.dot(&e1) / h, v.dot(&e2) / h]
                };
                let a: Vec<[f64; 2]> = c.rays().expect("polyhedral").iter().map(chart).collect();
                let b: Vec<[f64; 2]> = dual.rays().expect("polyhedral").iter().map(chart).collect();
                let sums: Vec<Vec3> = a
                    .iter()
                    .flat_map(|p| b.iter().map(move |q| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]))
                    .map(|m| center + e1 * m[0] + e2 * m[1])
                    .collect();
                let blend = ConvexCone::generators(&sums)?;
                let mut normals = c.facets().expect("polyhedral");
                normals.extend(blend.facets().expect("polyhedral"));
                let cut = ConvexCone::halfspaces(&normals)?;
                let rays = prune_flat(&cut.rays().expect("polyhedral"), 0.1 * TOL);
                Sector::Cone(ConvexCone::generators(&rays)?)
            }
        };
    }
    if cur.is_self_dual(TOL) {
        Ok(cur)
    } else {
        Err(Error::SnapDiverged(MAX_ITER))
    }
}

/// Drops vertices of a convex spherical polygon (rays in cyclic order) that
/// lie within `eps` radians of the great circle through their kept
/// neighbours. Only shrinks the polygon; without this the blend doubles
/// the vertex count every round.
fn prune_flat(rays: &[Vec3], eps: f64) -> Vec<Vec3> {
    if rays.len() <= 3 {
        return rays.to_vec();
    }
    let mut kept = vec![rays[0]];
    for i in 1..rays.len() {
        let prev = kept.last().expect("nonempty");
        let next = rays[(i + 1) % rays.len()];
        let n = prev.cross(&next);
        let flat = n.norm() > 0.0 && rays[i].dot(&n.normalize()).abs() < eps;
        if !flat || kept.len() + (rays.len() - i) <= 3 {
            kept.push(rays[i]);
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AreaComparison {
    pub area: f64,
    /// `area − π/2`, the margin over the orthant.
    pub excess: f64,
}

/// Area of a constant-width-π/2 sector compared with the orthant's π/2.
pub fn blaschke_lebesgue_area(s: &Sector) -> Result<AreaComparison> {
    if !has_constant_width(s, FRAC_PI_2, 720, 1e-3)? {
        let profile = crate::sector::spherical_width_profile(s, 720)?;
        let (lo, hi) =
            profile.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, p| (acc.0.min(p.1), acc.1.max(p.1)));
        return Err(Error::NotConstantWidth(hi - lo));
    }
    let area = s.area();
    Ok(AreaComparison { area, excess: area - FRAC_PI_2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sector::reuleaux_polygon;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn arcs_reach_one_over_pi() {
        let p = MinimizationProblem { restarts: 4, ..MinimizationProblem::new(Family::Arcs, 3) };
        let r = minimize_phi(&p).unwrap();
        assert!((r.value - 1.0 / PI).abs() < 1e-6, "{}", r.value);
        match r.sector {
            Sector::Arc(a) => assert!((a.length() - FRAC_PI_2).abs() < 1e-4),
            _ => panic!(),
        }
        assert!(r.u_to_vertex.unwrap() < 1e-6);
    }

    #[test]
    fn caps_stay_above_orthant_value() {
        let p = MinimizationProblem { restarts: 4, ..MinimizationProblem::new(Family::Caps, 5) };
        let r = minimize_phi(&p).unwrap();
        assert!((r.value - 0.5 * FRAC_PI_4.sin().powi(3)).abs() < 1e-6, "{}", r.value);
        assert!(r.value > 0.126);
    }

    #[test]
    fn snap_cap_and_orthant() {
        let cap = Sector::Cone(ConvexCone::circular(UnitVector::y(), FRAC_PI_3).unwrap());
        match self_dual_snap(&cap).unwrap() {
            Sector::Cone(ConvexCone::Circular { opening, .. }) => assert!((opening - FRAC_PI_4).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let o = self_dual_snap(&Sector::orthant()).unwrap();
        assert!(crate::cone::cones_equal(o.cone().unwrap(), &ConvexCone::orthant(), 1e-9));
        let arc = self_dual_snap(&Sector::arc(0.2, 2.5).unwrap()).unwrap();
        assert!(arc.is_self_dual(1e-9) && Sector::arc(0.2, 2.5).unwrap().contains(&arc, 1e-9).unwrap().holds);
    }

    #[test]
    fn snap_polygon() {
        // Pushing the orthant's vertices outward keeps S ⊇ orthant ⊇ S*.
        let c = Vec3::new(1.0, 1.0, 1.0) / 3.0;
        let mut v: Vec<Vec3> = [Vec3::x(), Vec3::y(), Vec3::z()].iter().map(|e| e + (e - c) * 0.2).collect();
        v.push(Vec3::new(1.0, 1.0, -0.3));
        let s = Sector::Cone(ConvexCone::generators(&v).unwrap());
        assert!(s.in_class_c(1e-9));
        let t = self_dual_snap(&s).unwrap();
        assert!(t.is_self_dual(1e-6));
        assert!(s.contains(&t, 1e-9).unwrap().holds);
    }

    #[test]
    fn blaschke_lebesgue_examples() {
        let o = blaschke_lebesgue_area(&Sector::orthant()).unwrap();
        assert!(o.excess.abs() < 1e-12);
        let cap =
            blaschke_lebesgue_area(&Sector::Cone(ConvexCone::circular(UnitVector::z(), FRAC_PI_4).unwrap())).unwrap();
        assert!((cap.area - 1.8403).abs() < 1e-4 && (cap.excess - 0.2695).abs() < 1e-4);
        let r5 = blaschke_lebesgue_area(&Sector::Cone(reuleaux_polygon(5).unwrap())).unwrap();
        assert!(r5.excess > 0.0);
        let wide = Sector::Cone(ConvexCone::circular(UnitVector::z(), FRAC_PI_3).unwrap());
        assert!(matches!(blaschke_lebesgue_area(&wide), Err(Error::NotConstantWidth(_))));
    }

    #[test]
    fn orthant_distance_is_zero_for_rotated_orthant() {
        let r = axis_angle(&Vec3::new(0.3, -1.0, 0.4), 0.9);
        let d = distance_to_orthant(&Sector::orthant().rotate(&r)).unwrap();
        assert!(d < 1e-5, "{d}");
        let d5 = distance_to_orthant(&Sector::Cone(reuleaux_polygon(5).unwrap())).unwrap();
        assert!(d5 > 0.05, "{d5}");
    }
}
