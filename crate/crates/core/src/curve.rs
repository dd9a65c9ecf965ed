//! Polyline curves and the discrete steepest-descent (self-distancing) test.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::par;
use crate::sphere::Vec3;

/// Ordered points in R² or R³ with cumulative chord length. Planar curves
/// are stored with `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineCurve {
    points: Vec<Vec3>,
    arclength: Vec<f64>,
    dim: usize,
}

impl PolylineCurve {
    pub fn new(points: Vec<Vec3>, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Dimension(dim));
        }
        if points.len() < 2 {
            return Err(Error::InvalidCurve("need at least two points".into()));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidCurve("non-finite coordinate".into()));
        }
        if dim == 2 && points.iter().any(|p| p.z != 0.0) {
            return Err(Error::InvalidCurve("planar curve with nonzero z".into()));
        }
        let mut arclength = Vec::with_capacity(points.len());
        arclength.push(0.0);
        for (k, w) in points.windows(2).enumerate() {
            let d = (w[1] - w[0]).norm();
            let s = arclength[k] + d;
            if d == 0.0 || s <= arclength[k] {
                return Err(Error::InvalidCurve(format!("points {k} and {} coincide", k + 1)));
            }
            arclength.push(s);
        }
        Ok(PolylineCurve { points, arclength, dim })
    }

    pub fn planar(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Vec3::new(p[0], p[1], 0.0)).collect(), 2)
    }

    pub fn spatial(points: &[[f64; 3]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect(), 3)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Cumulative chord length `s_i`, with `s_0 = 0`.
    pub fn arclength(&self) -> &[f64] {
        &self.arclength
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total length `||γ||`.
    pub fn length(&self) -> f64 {
        *self.arclength.last().expect("nonempty")
    }

    /// Unit forward chord at vertex `i`.
    pub fn forward_direction(&self, i: usize) -> Result<Vec3> {
        if i + 1 >= self.len() {
            return Err(Error::ZeroStep(i));
        }
        Ok((self.points[i + 1] - self.points[i]).normalize())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.dim == 2 { "x,y\n" } else { "x,y,z\n" });
        for p in &self.points {
            if self.dim == 2 {
                let _ = writeln!(out, "{},{}", p.x, p.y);
            } else {
                let _ = writeln!(out, "{},{},{}", p.x, p.y, p.z);
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::InvalidCurve("empty file".into()))?;
        let dim = match header.replace(' ', "").as_str() {
            "x,y" => 2,
            "x,y,z" => 3,
            h => return Err(Error::InvalidCurve(format!("unexpected header `{h}`"))),
        };
        let mut points = Vec::new();
        for (row, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidCurve(format!("row {}: {e}", row + 1)))?;
            if vals.len() != dim {
                return Err(Error::InvalidCurve(format!("row {}: expected {dim} columns", row + 1)));
            }
            points.push(Vec3::new(vals[0], vals[1], if dim == 3 { vals[2] } else { 0.0 }));
        }
        Self::new(points, dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdcCheck {
    pub holds: bool,
    /// First `(i, j, k)`, `i < j < k`, with `|x_i − x_k| < |x_i − x_j| − tol`.
    pub violation: Option<(usize, usize, usize)>,
}

/// Whether every distance `j ↦ |x_i − x_j|`, `j ≥ i`, is nondecreasing
/// within `tol`. O(m²): the running maximum over `j` stands in for all
/// earlier `j`. Rows `i` are checked in parallel; the reported violation is
/// the one with the smallest `i`.
pub fn is_sdc(curve: &PolylineCurve, tol: f64) -> SdcCheck {
    let x = curve.points();
    let violation = par::map_range(x.len(), |i| row_violation(x, i, tol)).into_iter().flatten().next();
    SdcCheck { holds: violation.is_none(), violation }
}

fn row_violation(x: &[Vec3], i: usize, tol: f64) -> Option<(usize, usize, usize)> {
    let (mut best, mut arg) = (0.0, i);
    for k in i + 1..x.len() {
        let d = (x[k] - x[i]).norm();
        if d < best - tol {
            return Some((i, arg, k));
        }
        if d > best {
            best = d;
            arg = k;
        }
    }
    None
}

/// Angle form of the same test, seen from the later point: for `x = x_k`
/// and earlier `p = x_i`, `q = x_j` (`i < j < k`),
///
/// ```text
/// 2⟨p − x, q − x⟩ − |q − x|²  =  |p − x|² − |p − q|²  ≥  0,
/// ```
///
/// i.e. the angle at `x` between `p` and `q` is acute with room to spare.
/// The tolerance is applied to the distance difference so the verdict
/// agrees with [`is_sdc`].
pub fn angle_condition_check(curve: &PolylineCurve, tol: f64) -> SdcCheck {
    let x = curve.points();
    for k in 2..x.len() {
        for i in 0..k - 1 {
            let p = x[i] - x[k];
            for j in i + 1..k {
                let q = x[j] - x[k];
                let g = 2.0 * p.dot(&q) - q.norm_squared();
                let sum = p.norm() + (x[i] - x[j]).norm();
                if g < -tol * sum {
                    return SdcCheck { holds: false, violation: Some((i, j, k)) };
                }
            }
        }
    }
    SdcCheck { holds: true, violation: None }
}

/// Exact test for the polyline read as a continuous curve: along segment
/// `j` the squared distance to a point `p` grows iff `⟨x_j − p, e_j⟩ ≥ 0`, and
/// this is linear in `p`, so checking earlier vertices suffices. Stricter
/// than [`is_sdc`], which only sees the vertices. `tol` is relative to
/// `|x_j − x_i|`; a violation `(i, j, j + 1)` names the offending segment.
pub fn is_sdc_polyline(curve: &PolylineCurve, tol: f64) -> SdcCheck {
    is_sdc_polyline_from(curve.points(), 0, tol)
}

/// As [`is_sdc_polyline`] on raw points, checking only segments `j ≥ from`.
pub fn is_sdc_polyline_from(x: &[Vec3], from: usize, tol: f64) -> SdcCheck {
    for j in from.max(1)..x.len().saturating_sub(1) {
        let e = x[j + 1] - x[j];
        let len = e.norm();
        if len == 0.0 {
            return SdcCheck { holds: false, violation: Some((j, j, j + 1)) };
        }
        let e = e / len;
        for i in 0..j {
            let d = x[j] - x[i];
            if d.dot(&e) < -tol * d.norm() {
                return SdcCheck { holds: false, violation: Some((i, j, j + 1)) };
            }
        }
    }
    SdcCheck { holds: true, violation: None }
}

/// Random steepest descent curve of `m` points grown step by step: each
/// step bends the previous direction by a Gaussian of scale `bend` and is
/// redrawn until every earlier point is left behind (in the vertex sense).
/// Continuing straight is always admissible, so this never gets stuck.
pub fn random_sdc_curve<R: Rng + ?Sized>(rng: &mut R, m: usize, dim: usize, bend: f64) -> Result<PolylineCurve> {
    const TRIES: usize = 64;
    if dim != 2 && dim != 3 {
        return Err(Error::Dimension(dim));
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least two points, got {m}")));
    }
    let gauss = |rng: &mut R| {
        let z = if dim == 3 { rng.sample(StandardNormal) } else { 0.0 };
        Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), z)
    };
    let mut x = vec![Vec3::zeros()];
    let mut reach = vec![0.0f64];
    let mut dir = gauss(rng).normalize();
    while x.len() < m {
        let last = *x.last().expect("nonempty");
        let mut next = None;
        for _ in 0..TRIES {
            let d = (dir + gauss(rng) * bend).normalize();
            let p = last + d * rng.random_range(0.5..1.5);
            if x.iter().zip(&reach).all(|(q, &r)| (p - q).norm() >= r) {
                next = Some((p, d));
                break;
            }
        }
        let (p, d) = next.unwrap_or((last + dir, dir));
        for (q, r) in x.iter().zip(reach.iter_mut()) {
            *r = r.max((p - q).norm());
        }
        x.push(p);
        reach.push(0.0);
        dir = d;
    }
    PolylineCurve::new(x, dim)
}
