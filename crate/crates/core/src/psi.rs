//! Length efficiency `Ψ(γ, α, K) = ||γ|| / w(K)^α` of steepest descent
//! curves inside a convex body, and a stochastic search for long curves.
//!
//! Admissibility in the search is the exact polyline test
//! [`is_sdc_polyline`]: segments, not just vertices, must move away from
//! every earlier point, so length cannot be gained through coarse sampling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::curve::{is_sdc, is_sdc_polyline, PolylineCurve};
use crate::error::{Error, Result};
use crate::hull::{convex_hull_2d, mean_width_2d, mean_width_polytope, IncrementalHull};
use crate::par;
use crate::sphere::Vec3;
use crate::spiral::{solve_spiral_omega, spiral_point};

/// Containment tolerance for curves in bodies.
pub const CONTAIN_TOL: f64 = 1e-9;
/// Relative slack allowed by the search's SDC test (rounding only).
const SEARCH_SDC_TOL: f64 = 1e-12;
/// Deletions allowed per repair.
const MAX_REPAIR: usize = 16;
/// Points are kept this far (relative) inside a ball constraint.
const BALL_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// Disk (dim 2) or ball (dim 3).
    Ball { center: Vec3, radius: f64, dim: usize },
    /// Convex hull of a point set.
    Hull { points: Vec<Vec3>, dim: usize },
}

impl Body {
    pub fn disk(center: [f64; 2], radius: f64) -> Body {
        Body::Ball { center: Vec3::new(center[0], center[1], 0.0), radius, dim: 2 }
    }

    pub fn ball(center: Vec3, radius: f64) -> Body {
        Body::Ball { center, radius, dim: 3 }
    }

    /// `co(γ)`.
    pub fn hull_of(curve: &PolylineCurve) -> Body {
        Body::Hull { points: curve.points().to_vec(), dim: curve.dim() }
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Ball { dim, .. } | Body::Hull { dim, .. } => *dim,
        }
    }

    pub fn mean_width(&self) -> f64 {
        match self {
            Body::Ball { radius, .. } => 2.0 * radius,
            Body::Hull { points, dim: 2 } => planar_mean_width(points),
            Body::Hull { points, .. } => mean_width_polytope(points),
        }
    }

    /// Largest distance by which a curve point leaves the body (≤ 0 inside).
    /// For 3D hulls only membership is known: 0 inside, +∞ outside.
    pub fn excess(&self, curve: &PolylineCurve) -> f64 {
        match self {
            Body::Ball { center, radius, .. } => {
                curve.points().iter().map(|p| (p - center).norm() - radius).fold(f64::NEG_INFINITY, f64::max)
            }
            Body::Hull { points, dim: 2 } => {
                let xy: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
                let h = convex_hull_2d(&xy, 1e-13);
                if h.len() < 3 {
                    // Degenerate hull: distance to the segment.
                    let (a, b) = (points[h[0]], points[*h.last().unwrap()]);
                    return curve.points().iter().map(|p| segment_distance(p, &a, &b)).fold(0.0, f64::max);
                }
                let k = h.len();
                curve
                    .points()
                    .iter()
                    .map(|p| {
                        (0..k)
                            .map(|j| {
                                let (a, b) = (xy[h[j]], xy[h[(j + 1) % k]]);
                                let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                                // Outward distance from the edge line of a CCW polygon.
                                (ey * (p.x - a[0]) - ex * (p.y - a[1])) / ex.hypot(ey)
                            })
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Body::Hull { points, .. } => {
                let hull = IncrementalHull::from_points(points);
                if curve.points().iter().any(|p| hull.is_outside(p)) {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }
}

fn segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let d = b - a;
    let t = if d.norm_squared() > 0.0 { ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + d * t)).norm()
}

fn planar_mean_width(points: &[Vec3]) -> f64 {
    let xy: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    mean_width_2d(&xy)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

/// `||γ|| / w(K)^α`, for `γ ⊂ K` within [`CONTAIN_TOL`].
pub fn psi(curve: &PolylineCurve, alpha: f64, body: &Body) -> Result<f64> {
    check_alpha(alpha)?;
    if body.dim() != curve.dim() {
        return Err(Error::Dimension(curve.dim()));
    }
    let excess = body.excess(curve);
    if excess > CONTAIN_TOL {
        return Err(Error::Containment(excess));
    }
    Ok(curve.length() / body.mean_width().powf(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurveClass {
    /// Bodies with mean width at most `w`; the best body for a curve is its
    /// own hull, scaled up to mean width `w`.
    MeanWidthCap { w: f64, dim: usize },
    /// The planar disk of radius `w/2` centred at the curve's start.
    Disk { w: f64 },
}

impl CurveClass {
    pub fn dim(&self) -> usize {
        match self {
            CurveClass::MeanWidthCap { dim, .. } => *dim,
            CurveClass::Disk { .. } => 2,
        }
    }

    fn w(&self) -> f64 {
        match self {
            CurveClass::MeanWidthCap { w, .. } | CurveClass::Disk { w } => *w,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.w() > 0.0 && self.w().is_finite()) {
            return Err(Error::InvalidArgument(format!("W must be positive, got {}", self.w())));
        }
        if !(2..=3).contains(&self.dim()) {
            return Err(Error::Dimension(self.dim()));
        }
        Ok(())
    }

    /// The body the curve is measured against.
    pub fn body_for(&self, curve: &PolylineCurve) -> Body {
        match self {
            CurveClass::MeanWidthCap { .. } => Body::hull_of(curve),
            CurveClass::Disk { w } => {
                let c = curve.points()[0];
                Body::disk([c.x, c.y], 0.5 * w)
            }
        }
    }

    /// The admitted representative of the curve's shape: for the width cap,
    /// the scaled copy whose hull has mean width exactly `W`.
    pub fn normalize(&self, curve: &PolylineCurve) -> Result<PolylineCurve> {
        match self {
            CurveClass::MeanWidthCap { w, .. } => {
                let mw = Body::hull_of(curve).mean_width();
                let x0 = curve.points()[0];
                let pts = curve.points().iter().map(|p| x0 + (p - x0) * (w / mw)).collect();
                PolylineCurve::new(pts, curve.dim())
            }
            CurveClass::Disk { .. } => Ok(curve.clone()),
        }
    }

    /// Whether the curve is an admissible member: steepest descent and inside
    /// its body within [`CONTAIN_TOL`].
    pub fn admits(&self, curve: &PolylineCurve) -> bool {
        let body = self.body_for(curve);
        let size_ok = match self {
            CurveClass::MeanWidthCap { w, .. } => body.mean_width() <= w + CONTAIN_TOL,
            CurveClass::Disk { .. } => true,
        };
        curve.dim() == self.dim() && size_ok && body.excess(curve) <= CONTAIN_TOL && is_sdc(curve, 1e-9).holds
    }

    /// `Ψ` of the normalized curve, straight from raw points.
    fn value(&self, pts: &[Vec3], alpha: f64) -> f64 {
        let len: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        match self {
            CurveClass::MeanWidthCap { w, dim } => {
                let mw = if *dim == 2 { planar_mean_width(pts) } else { mean_width_polytope(pts) };
                if mw <= 0.0 {
                    return 0.0;
                }
                len / mw * w.powf(1.0 - alpha)
            }
            CurveClass::Disk { w } => len / w.powf(alpha),
        }
    }

    /// Pull points back inside the disk.
    fn project(&self, pts: &mut [Vec3], from: usize) {
        if let CurveClass::Disk { w } = self {
            let c = pts[0];
            let r = 0.5 * w * (1.0 - BALL_MARGIN);
            for p in pts.iter_mut().skip(from.max(1)) {
                let d = *p - c;
                if d.norm() > r {
                    *p = c + d * (r / d.norm());
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub curve: PolylineCurve,
    pub value: f64,
    pub evals: usize,
    pub accepted: usize,
    pub seeds: Vec<SeedValue>,
    /// `(evaluation, best value)` whenever a chain improved.
    pub history: Vec<(usize, f64)>,
}

/// Independent search chains; the budget is split evenly between them.
pub const CHAINS: usize = 4;

/// Stochastic local search for a curve of large `Ψ` in `class`: random
/// vertex moves, insertions and tail extensions, each followed by
/// projection into the body and SDC repair (delete the middle vertex of the
/// first violation, re-test). Moves that do not decrease `Ψ` are kept.
pub fn search_max_psi(class: &CurveClass, alpha: f64, seed: u64, budget: usize) -> Result<SearchResult> {
    check_alpha(alpha)?;
    class.validate()?;
    let seeds = seed_curves(class);
    let mut seed_values = Vec::new();
    let mut best_seed: Option<(Vec<Vec3>, f64)> = None;
    for (name, pts) in seeds {
        let v = class.value(&pts, alpha);
        seed_values.push(SeedValue { name, value: v });
        if best_seed.as_ref().is_none_or(|b| v > b.1) {
            best_seed = Some((pts, v));
        }
    }
    let (start, start_value) = best_seed.ok_or(Error::NoFeasibleStart(0))?;
    let per_chain = budget / CHAINS;
    let chains = par::map_range(CHAINS, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
        run_chain(class, alpha, start.clone(), start_value, per_chain, &mut rng)
    });
    let mut evals = 0;
    let mut accepted = 0;
    let mut history = vec![(0, start_value)];
    let mut best = (start, start_value);
    for ch in chains {
        evals += ch.evals;
        accepted += ch.accepted;
        history.extend(ch.history);
        if ch.value > best.1 {
            best = (ch.points, ch.value);
        }
    }
    history.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let curve = class.normalize(&PolylineCurve::new(best.0, class.dim())?)?;
    Ok(SearchResult { curve, value: best.1, evals, accepted, seeds: seed_values, history })
}

struct Chain {
    points: Vec<Vec3>,
    value: f64,
    evals: usize,
    accepted: usize,
    history: Vec<(usize, f64)>,
}

fn gauss(rng: &mut ChaCha8Rng, dim: usize) -> Vec3 {
    let z = if dim == 3 { rng.sample(StandardNormal) } else { 0.0 };
    Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), z)
}

fn run_chain(
    class: &CurveClass,
    alpha: f64,
    mut points: Vec<Vec3>,
    mut value: f64,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Chain {
    let dim = class.dim();
    // Step sizes are relative to the local segment length: seeds span
    // many scales, and absolute steps would wreck their fine parts.
    let mut sigma = 0.3;
    let local = |x: &[Vec3], k: usize| {
        let before = if k > 0 { (x[k] - x[k - 1]).norm() } else { 0.0 };
        let after = if k + 1 < x.len() { (x[k + 1] - x[k]).norm() } else { 0.0 };
        before.max(after)
    };
    let (mut evals, mut accepted) = (0, 0);
    let mut history = Vec::new();
    while evals < budget {
        let mut cand = points.clone();
        let m = cand.len();
        // The move changes vertices `lo..=hi` only.
        let (lo, hi) = match rng.random_range(0..4) {
            // Single-vertex jitter.
            0 => {
                let k = rng.random_range(1..m);
                let h = sigma * local(&cand, k);
                cand[k] += gauss(rng, dim) * h;
                (k, k)
            }
            // Insert a jittered midpoint.
            1 => {
                let k = rng.random_range(0..m - 1);
                let mid = (cand[k] + cand[k + 1]) * 0.5 + gauss(rng, dim) * (0.25 * sigma * local(&cand, k));
                cand.insert(k + 1, mid);
                (k + 1, k + 1)
            }
            // Extend the tail along a perturbed last direction.
            2 => {
                let d = (cand[m - 1] - cand[m - 2]).normalize();
                let step = local(&cand, m - 1) * (0.5 + rng.random::<f64>());
                let dir = (d + gauss(rng, dim) * 0.3).normalize();
                cand.push(cand[m - 1] + dir * step);
                (m, m)
            }
            // Shift a window with a tent profile.
            _ => {
                let k = rng.random_range(1..m);
                let half = rng.random_range(1..=8usize);
                let shift = gauss(rng, dim) * (sigma * local(&cand, k));
                let lo = k.saturating_sub(half).max(1);
                for (j, p) in cand.iter_mut().enumerate().take((k + half).min(m)).skip(lo) {
                    let t = 1.0 - (j as f64 - k as f64).abs() / (half as f64 + 1.0);
                    *p += shift * t;
                }
                (lo, (k + half).min(m) - 1)
            }
        };
        evals += 1;
        class.project(&mut cand, lo);
        if !repair(&mut cand, lo, hi) {
            sigma = (sigma * 0.97).max(1e-4);
            continue;
        }
        let v = class.value(&cand, alpha);
        if v >= value {
            if v > value {
                history.push((evals, v));
            }
            points = cand;
            value = v;
            accepted += 1;
            sigma = (sigma * 1.1).min(2.0);
        } else {
            sigma = (sigma * 0.97).max(1e-4);
        }
    }
    Chain { points, value, evals, accepted, history }
}

/// Violations involving the changed vertices `lo..=hi`: segments touching
/// them against every earlier point, later segments against them only.
fn window_violation(x: &[Vec3], lo: usize, hi: usize) -> Option<(usize, usize, usize)> {
    let n = x.len();
    let bad = |i: usize, j: usize| {
        let e = x[j + 1] - x[j];
        let d = x[j] - x[i];
        e.norm() == 0.0 || d.dot(&e) < -SEARCH_SDC_TOL * d.norm() * e.norm()
    };
    for j in lo.saturating_sub(1).max(1)..(hi + 1).min(n.saturating_sub(1)) {
        if let Some(i) = (0..j).find(|&i| bad(i, j)) {
            return Some((i, j, j + 1));
        }
    }
    for j in hi + 1..n.saturating_sub(1) {
        if let Some(i) = (lo..=hi).find(|&i| bad(i, j)) {
            return Some((i, j, j + 1));
        }
    }
    None
}

/// Delete middle vertices of violations until the polyline is SDC again,
/// given that it was before vertices `lo..=hi` changed. A deletion only
/// changes the segment bridging the gap, so the window just widens to it.
/// Returns false if the curve degenerates or needs more than
/// [`MAX_REPAIR`] deletions (such moves lose length anyway).
fn repair(pts: &mut Vec<Vec3>, mut lo: usize, mut hi: usize) -> bool {
    let mut deleted = 0;
    while let Some((_, j, _)) = window_violation(pts, lo, hi) {
        deleted += 1;
        if deleted > MAX_REPAIR {
            return false;
        }
        // `j ≥ 1`: the start is never removed.
        let gone = if pts[j] == pts[j + 1] || j + 2 == pts.len() { j + 1 } else { j };
        pts.remove(gone);
        if pts.len() < 2 {
            return false;
        }
        if gone <= hi {
            hi = hi.saturating_sub(1);
        }
        lo = lo.min(gone - 1);
        hi = hi.max(gone).min(pts.len() - 1);
    }
    true
}

/// `γ̃`: radius then (slightly growing) half circle, from the disk centre.
pub fn radius_then_arc(radius: f64, arc: f64, n_arc: usize) -> Vec<Vec3> {
    // Chords of a circle about the start dip towards it; growing the radius
    // by 1/cos(h) per step keeps every chord moving away.
    let h = arc / (n_arc - 1) as f64;
    let g = (1.0 + 1e-9) / h.cos();
    let r0 = radius * g.powi(-(n_arc as i32 - 1));
    let mut pts = vec![Vec3::zeros()];
    pts.extend((1..=10).map(|k| Vec3::new(r0 * k as f64 / 10.0, 0.0, 0.0)));
    pts.extend((1..n_arc).map(|k| {
        let (t, r) = (k as f64 * h, r0 * g.powi(k as i32));
        Vec3::new(r * t.cos(), r * t.sin(), 0.0)
    }));
    pts
}

/// Zigzag between the rays at angles 0 and −β with growth `q` per step,
/// ending on the ray at angle 0, followed by a growing arc over `π − β`.
/// For a start at the disk centre the arc may turn until the whole earlier
/// curve lies behind the current radius.
pub fn wedge_zigzag(radius: f64, beta: f64, q: f64, n_zig: usize, n_arc: usize) -> Vec<Vec3> {
    let arc = PI - beta;
    let h = arc / (n_arc - 1) as f64;
    let g = (1.0 + 1e-9) / h.cos();
    let r0 = radius * g.powi(-(n_arc as i32 - 1));
    let mut pts = vec![Vec3::zeros()];
    for k in 1..=n_zig {
        let r = r0 * q.powi(k as i32 - n_zig as i32);
        let a = if (n_zig - k).is_multiple_of(2) { 0.0 } else { -beta };
        pts.push(Vec3::new(r * a.cos(), r * a.sin(), 0.0));
    }
    pts.extend((1..n_arc).map(|k| {
        let (t, r) = (k as f64 * h, r0 * g.powi(k as i32));
        Vec3::new(r * t.cos(), r * t.sin(), 0.0)
    }));
    pts
}

/// Spiral with growth rate `rate`, from the origin to arclength `s_max`,
/// over `decades` decades of arclength.
pub fn spiral_seed(rate: f64, s_max: f64, n: usize, decades: f64) -> Vec<Vec3> {
    let mut pts = vec![Vec3::zeros()];
    pts.extend((0..n).map(|k| {
        let s = s_max * 10f64.powf(-decades * (1.0 - k as f64 / (n - 1) as f64));
        let [x, y] = spiral_point(rate, s);
        Vec3::new(x, y, 0.0)
    }));
    pts
}

/// Slack spiral of the given rate factor, if its chords pass the exact test.
fn slack_spiral(factor: f64, s_max: f64, n: usize, decades: f64) -> Option<Vec<Vec3>> {
    let pts = spiral_seed(solve_spiral_omega() * factor, s_max, n, decades);
    let c = PolylineCurve::new(pts.clone(), 2).ok()?;
    is_sdc_polyline(&c, SEARCH_SDC_TOL).holds.then_some(pts)
}

fn seed_curves(class: &CurveClass) -> Vec<(String, Vec<Vec3>)> {
    let r = 0.5 * class.w();
    let mut out: Vec<(String, Vec<Vec3>)> = Vec::new();
    out.push(("segment".into(), (0..20).map(|k| Vec3::new(r * k as f64 / 19.0, 0.0, 0.0)).collect()));
    out.push(("radius-then-arc".into(), radius_then_arc(r, PI, 400)));
    if let CurveClass::Disk { .. } = class {
        for beta in [0.1, 0.125, 0.15] {
            for q in [1.12, 1.15, 1.2] {
                out.push((format!("wedge-zigzag(beta={beta},q={q})"), wedge_zigzag(r, beta, q, 80, 400)));
            }
        }
    }
    let omega = solve_spiral_omega();
    for factor in [1.005, 1.01, 1.02, 1.05] {
        // Scaled so the spiral ends on the disk boundary.
        let s_max = r * (1.0 + (omega * factor).powi(2)).sqrt() / (omega * factor);
        if let Some(p) = slack_spiral(factor, s_max * (1.0 - 1e-9), 6000, 3.0) {
            out.push((format!("spiral(rate x{factor})"), p));
            break;
        }
    }
    out.retain(|(_, p)| PolylineCurve::new(p.clone(), 2).is_ok_and(|c| is_sdc_polyline(&c, SEARCH_SDC_TOL).holds));
    if class.dim() == 3 {
        // Planar seeds are valid spatial curves; the search adds the third axis.
        for (_, p) in out.iter_mut() {
            for v in p.iter_mut() {
                v.z = 0.0;
            }
        }
    }
    out
}
