//! Hull growth along a curve: mean width of `co(γ(s_i))`, the normal
//! sector at each new vertex, and `dw/ds` both from the sector functional
//! and by finite differences.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::cone::{cone_contains, normal_cone_at_vertex};
use crate::curve::{is_sdc, PolylineCurve};
use crate::error::{Error, Result};
use crate::hull::{convex_hull_2d, IncrementalHull};
use crate::phi::phi_value;
use crate::quadrature::omega;
use crate::sector::Sector;

/// Turns below this sine are treated as straight in the planar hull.
const PLANAR_TOL: f64 = 1e-13;
/// A formula value within this of the lower bound is flagged.
pub const PHI_MIN_FLAG_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub s: f64,
    /// Mean width of the hull of the first `i + 1` points.
    pub w: f64,
    pub hull_size: usize,
    /// Normalized normal cone at `x_i`; `None` when `x_i` is not a hull vertex
    /// or the cone is the whole sphere (first point).
    pub normal: Option<Sector>,
    /// Unit forward chord; `None` at the last vertex.
    pub direction: Option<[f64; 3]>,
    /// `Φ(N̂(x_i), x′(s_i))`, NaN where undefined.
    pub dwds_formula: f64,
    /// `(w_{i+1} − w_i) / (s_{i+1} − s_i)`, NaN at the last vertex.
    pub dwds_fd: f64,
}

#[derive(Debug, Clone)]
pub struct HullTrace {
    pub dim: usize,
    pub rows: Vec<TraceRow>,
    /// Hull vertices of the whole curve.
    pub final_hull: Vec<usize>,
}

/// `min Φ` over the feasible sectors: 1/π on the circle, 1/8 on the sphere.
pub fn phi_lower_bound(dim: usize) -> f64 {
    if dim == 2 {
        1.0 / PI
    } else {
        0.125
    }
}

impl HullTrace {
    pub fn build(curve: &PolylineCurve) -> Result<HullTrace> {
        let mut trace = match curve.dim() {
            2 => build_planar(curve),
            _ => build_spatial(curve),
        };
        let s = curve.arclength();
        let m = trace.rows.len();
        for i in 0..m {
            let direction = curve.forward_direction(i).ok();
            trace.rows[i].direction = direction.map(|d| [d.x, d.y, d.z]);
            if i + 1 < m {
                let ds = s[i + 1] - s[i];
                if ds <= 0.0 {
                    return Err(Error::ZeroStep(i));
                }
                trace.rows[i].dwds_fd = (trace.rows[i + 1].w - trace.rows[i].w) / ds;
            }
            if let (Some(n), Some(d)) = (&trace.rows[i].normal, direction) {
                trace.rows[i].dwds_formula = phi_value(n, &d);
            }
        }
        Ok(trace)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Both `dw/ds` estimates at vertex `i`.
    pub fn dwds(&self, i: usize) -> Result<(f64, f64)> {
        let r = self.rows.get(i).ok_or_else(|| Error::InvalidArgument(format!("vertex {i} out of range")))?;
        if i + 1 >= self.rows.len() {
            return Err(Error::ZeroStep(i));
        }
        Ok((r.dwds_formula, r.dwds_fd))
    }

    /// Largest `w_i − w_{i+1}`; ≤ 0 up to rounding for any curve.
    pub fn width_decrease(&self) -> f64 {
        self.rows.windows(2).map(|w| w[0].w - w[1].w).fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with columns `s,w,dwds_formula,dwds_fd,phi_min_flag`; undefined
    /// values are left empty.
    pub fn to_csv(&self) -> String {
        let bound = phi_lower_bound(self.dim);
        let num = |v: f64| if v.is_finite() { v.to_string() } else { String::new() };
        let mut out = String::from("s,w,dwds_formula,dwds_fd,phi_min_flag\n");
        for r in &self.rows {
            let flag = if r.dwds_formula.is_finite() {
                u8::from(r.dwds_formula <= bound + PHI_MIN_FLAG_TOL).to_string()
            } else {
                String::new()
            };
            let _ = writeln!(out, "{},{},{},{},{}", r.s, r.w, num(r.dwds_formula), num(r.dwds_fd), flag);
        }
        out
    }
}

fn empty_row(s: f64, w: f64, hull_size: usize, normal: Option<Sector>) -> TraceRow {
    TraceRow { s, w, hull_size, normal, direction: None, dwds_formula: f64::NAN, dwds_fd: f64::NAN }
}

fn build_spatial(curve: &PolylineCurve) -> HullTrace {
    let (x, s) = (curve.points(), curve.arclength());
    let mut hull = IncrementalHull::new();
    let mut rows = Vec::with_capacity(x.len());
    for (i, p) in x.iter().enumerate() {
        hull.insert(*p);
        let normal = hull.last_neighbors().filter(|nb| !nb.is_empty()).and_then(|nb| {
            let pts: Vec<_> = nb.iter().map(|&k| x[k]).collect();
            normal_cone_at_vertex(&pts, p).ok().map(|n| Sector::Cone(n.cone))
        });
        rows.push(empty_row(s[i], hull.mean_width(), 0, normal));
    }
    // Vertex counts are only needed at the end; collecting them per step
    // would cost a full face scan each time.
    let final_hull = hull.vertex_indices();
    if let Some(r) = rows.last_mut() {
        r.hull_size = final_hull.len();
    }
    HullTrace { dim: 3, rows, final_hull }
}

fn build_planar(curve: &PolylineCurve) -> HullTrace {
    let (x, s) = (curve.points(), curve.arclength());
    let xy: Vec<[f64; 2]> = x.iter().map(|p| [p.x, p.y]).collect();
    let mut verts: Vec<usize> = Vec::new();
    let mut rows = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let mut cand = verts.clone();
        cand.push(i);
        let local: Vec<[f64; 2]> = cand.iter().map(|&k| xy[k]).collect();
        verts = convex_hull_2d(&local, PLANAR_TOL).into_iter().map(|j| cand[j]).collect();
        let k = verts.len();
        let perimeter = match k {
            0 | 1 => 0.0,
            2 => 2.0 * dist(&xy[verts[0]], &xy[verts[1]]),
            _ => (0..k).map(|j| dist(&xy[verts[j]], &xy[verts[(j + 1) % k]])).sum(),
        };
        let normal = verts.iter().position(|&v| v == i).filter(|_| k >= 2).and_then(|j| {
            let next = xy[verts[(j + 1) % k]];
            let prev = xy[verts[(j + k - 1) % k]];
            let a = (next[1] - xy[i][1]).atan2(next[0] - xy[i][0]);
            let b = (prev[1] - xy[i][1]).atan2(prev[0] - xy[i][0]);
            // Interior angle, counterclockwise from the next vertex to the previous.
            let beta = if k == 2 { 0.0 } else { (b - a).rem_euclid(2.0 * PI) };
            Sector::arc(a + beta + FRAC_PI_2, PI - beta).ok()
        });
        rows.push(empty_row(s[i], perimeter / PI, k, normal));
    }
    HullTrace { dim: 2, rows, final_hull: verts }
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult {
    /// Smallest formula value of `dw/ds` along the trace.
    pub min: f64,
    pub argmin: usize,
    /// Vertices where the formula was defined.
    pub evaluated: usize,
}

/// Minimum of `Φ(N̂(x_i), x′(s_i))` along the trace.
pub fn orthant_exclusion_scan(trace: &HullTrace) -> Result<ScanResult> {
    let mut best = ScanResult { min: f64::INFINITY, argmin: 0, evaluated: 0 };
    for (i, r) in trace.rows.iter().enumerate() {
        if r.dwds_formula.is_finite() {
            best.evaluated += 1;
            if r.dwds_formula < best.min {
                best.min = r.dwds_formula;
                best.argmin = i;
            }
        }
    }
    if best.evaluated == 0 {
        return Err(Error::InvalidArgument("no vertex with a defined normal sector".into()));
    }
    Ok(best)
}

/// `c⁽¹⁾_n = (n − 1) n^{n/2} ω_n / ω_{n−1}`: `|dx/dw| ≤ c_n` along any
/// steepest descent curve. The planar value π is sharp.
pub fn lipschitz_constant(dim: usize) -> f64 {
    if dim == 2 {
        PI
    } else {
        let n = dim as f64;
        (n - 1.0) * n.powf(n / 2.0) * omega(dim) / omega(dim - 1)
    }
}

#[derive(Debug, Clone)]
pub struct WidthParametrization {
    /// `(w_i, x_i)` pairs.
    pub w: Vec<f64>,
    pub points: Vec<[f64; 3]>,
    /// Largest `|x_{i+1} − x_i| / (w_{i+1} − w_i)` over steps that widen the hull.
    pub max_ratio: f64,
    pub argmax: usize,
    /// Steps with no measurable width growth (excluded from the ratio).
    pub flat_steps: usize,
    pub bound: f64,
    pub within_bound: bool,
}

/// Reindex an SDC curve by the mean width of its growing hull.
pub fn reparameterize_by_width(curve: &PolylineCurve) -> Result<WidthParametrization> {
    if let Some((i, j, k)) = is_sdc(curve, 1e-9).violation {
        return Err(Error::NotSdc(i, j, k));
    }
    let trace = HullTrace::build(curve)?;
    Ok(width_parametrization(curve, &trace))
}

/// As [`reparameterize_by_width`], reusing an existing trace.
pub fn width_parametrization(curve: &PolylineCurve, trace: &HullTrace) -> WidthParametrization {
    let x = curve.points();
    let w: Vec<f64> = trace.rows.iter().map(|r| r.w).collect();
    let (mut max_ratio, mut argmax, mut flat_steps) = (0.0f64, 0, 0);
    for i in 0..w.len().saturating_sub(1) {
        let dw = w[i + 1] - w[i];
        let dx = (x[i + 1] - x[i]).norm();
        if dw <= 1e-14 * w[i + 1].abs() {
            flat_steps += 1;
            continue;
        }
        if dx / dw > max_ratio {
            max_ratio = dx / dw;
            argmax = i;
        }
    }
    let bound = lipschitz_constant(curve.dim());
    WidthParametrization {
        w,
        points: x.iter().map(|p| [p.x, p.y, p.z]).collect(),
        max_ratio,
        argmax,
        flat_steps,
        bound,
        within_bound: max_ratio <= bound,
    }
}

/// Whether the normal sector contains its dual at every vertex, within `tol`.
pub fn normal_sectors_contain_duals(trace: &HullTrace, tol: f64) -> Result<bool> {
    for r in &trace.rows {
        if let Some(Sector::Cone(n)) = &r.normal {
            if !cone_contains(n, &n.dual(), tol).holds {
                return Ok(false);
            }
        } else if let Some(n @ Sector::Arc(_)) = &r.normal {
            if !n.contains(&n.dual(), tol)?.holds {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spiral::generate_log_spiral;

    #[test]
    fn straight_segment_grows_at_one_half() {
        let pts: Vec<[f64; 3]> = (0..50).map(|k| [0.1 * k as f64, -0.05 * k as f64, 0.2 * k as f64]).collect();
        let c = PolylineCurve::spatial(&pts).unwrap();
        let t = HullTrace::build(&c).unwrap();
        for i in 1..48 {
            let (f, d) = t.dwds(i).unwrap();
            assert!((f - 0.5).abs() < 1e-12 && (d - 0.5).abs() < 1e-12, "i={i} {f} {d}");
        }
        let r = reparameterize_by_width(&c).unwrap();
        assert!((r.max_ratio - 2.0).abs() < 1e-9);
    }

    #[test]
    fn planar_segment_grows_at_two_over_pi() {
        let pts: Vec<[f64; 2]> = (0..20).map(|k| [k as f64, 0.5 * k as f64]).collect();
        let t = HullTrace::build(&PolylineCurve::planar(&pts).unwrap()).unwrap();
        for i in 1..18 {
            let (f, d) = t.dwds(i).unwrap();
            assert!((f - 2.0 / PI).abs() < 1e-12 && (d - 2.0 / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn spiral_grows_near_one_over_pi() {
        let c = generate_log_spiral(1.0, 2000).unwrap();
        let t = HullTrace::build(&c).unwrap();
        assert!(t.width_decrease() <= 1e-15);
        let start = t.len() / 2;
        for i in start..t.len() - 1 {
            let (f, d) = t.dwds(i).unwrap();
            assert!((f - 1.0 / PI).abs() < 1e-2 && (d - 1.0 / PI).abs() < 1e-2, "i={i} {f} {d}");
        }
        assert!(normal_sectors_contain_duals(&t, 1e-6).unwrap());
    }

    #[test]
    fn constants() {
        assert!((lipschitz_constant(3) - 2.0 * 27f64.sqrt() * 2.0).abs() < 1e-12);
        assert!(lipschitz_constant(3) < 20.785);
    }

    #[test]
    fn csv_columns() {
        let c = PolylineCurve::planar(&[[0.0, 0.0], [1.0, 0.0], [1.5, 0.5]]).unwrap();
        let csv = HullTrace::build(&c).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,w,dwds_formula,dwds_fd,phi_min_flag");
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.split(',').count() == 5));
    }
}
