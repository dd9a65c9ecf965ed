//! The self-similar logarithmic spiral and the 3D "hat" curve built from it.
//!
//! With `ω = e^{−3πω/2}` and arclength `s`, the spiral is
//!
//! ```text
//! r(s) = ω s / √(1 + ω²),   η(s) = −ln(r(s)) / ω,   x(s) = r(s) (cos η, sin η).
//! ```
//!
//! It winds infinitely often around the origin, so samples are spaced
//! geometrically in `s`, on a grid aligned with powers of ten.

use std::f64::consts::PI;

use crate::curve::PolylineCurve;
use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::sphere::Vec3;

/// Minimum grid density, samples per decade of `s` (ratio ≈ 1.01).
pub const MIN_PER_DECADE: usize = 230;
/// The spiral is not followed below this fraction of its length.
const MAX_DECADES: f64 = 100.0;
/// Inner cutoff of the hat curve's spiral, relative to `W`.
pub const HAT_INNER: f64 = 1e-9;

/// Root of `ω = e^{−3πω/2}` on (0, 1), to machine precision.
pub fn solve_spiral_omega() -> f64 {
    bisect(|w| w - (-1.5 * PI * w).exp(), 0.0, 1.0, 0.0).expect("sign change on (0, 1)")
}

/// Point of the spiral with growth rate `omega` at arclength `s` from the
/// origin. Rates above the root of `ω = e^{−3πω/2}` give spirals that are
/// steepest descent with slack.
pub fn spiral_point(omega: f64, s: f64) -> [f64; 2] {
    if s == 0.0 {
        return [0.0, 0.0];
    }
    let r = omega * s / (1.0 + omega * omega).sqrt();
    let eta = -r.ln() / omega;
    [r * eta.cos(), r * eta.sin()]
}

/// `count` ascending values: `top` and the largest `count − 1` grid points
/// `10^{−j/q}` strictly below it.
fn geometric_grid(top: f64, count: usize, q: usize) -> Vec<f64> {
    let qf = q as f64;
    let mut j = (qf * top.log10()).floor() as i64;
    let mut out = Vec::with_capacity(count);
    out.push(top);
    while out.len() < count {
        let v = 10f64.powf(j as f64 / qf);
        if v < top * (1.0 - 1e-12) {
            out.push(v);
        }
        j -= 1;
    }
    out.reverse();
    out
}

/// Nominal arclength of each vertex of [`generate_log_spiral`].
pub fn spiral_parameters(mu: f64, m: usize) -> Result<Vec<f64>> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("spiral length must be positive, got {mu}")));
    }
    if m < 10 {
        return Err(Error::InvalidArgument(format!("need at least 10 samples, got {m}")));
    }
    let q = MIN_PER_DECADE.max(((m - 2) as f64 / MAX_DECADES).ceil() as usize);
    let mut s = vec![0.0];
    s.extend(geometric_grid(mu, m - 1, q));
    Ok(s)
}

/// The spiral of length `mu`, sampled at `m` points starting at the origin.
pub fn generate_log_spiral(mu: f64, m: usize) -> Result<PolylineCurve> {
    let omega = solve_spiral_omega();
    let pts: Vec<[f64; 2]> = spiral_parameters(mu, m)?.iter().map(|&s| spiral_point(omega, s)).collect();
    PolylineCurve::planar(&pts)
}

/// Spiral length used by the hat curve: its endpoint lies at radius `W/2`.
pub fn hat_spiral_length(w: f64) -> f64 {
    let omega = solve_spiral_omega();
    0.5 * w * (1.0 + omega * omega).sqrt() / omega
}

/// Nominal arclength of each vertex of [`generate_hat_curve`]. The segment
/// gets a twentieth of the samples; the spiral runs from `HAT_INNER · W` out.
pub fn hat_parameters(w: f64, m: usize) -> Result<Vec<f64>> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidArgument(format!("W must be positive, got {w}")));
    }
    if m < 20 {
        return Err(Error::InvalidArgument(format!("need at least 20 samples, got {m}")));
    }
    let m_seg = (m / 20).max(2);
    let m_sp = m - m_seg;
    let mu = hat_spiral_length(w);
    let decades = (mu / (HAT_INNER * w)).log10();
    let q = MIN_PER_DECADE.max((m_sp as f64 / decades).ceil() as usize);
    let half = 0.5 * w;
    let mut s: Vec<f64> = (0..m_seg).map(|k| half * k as f64 / (m_seg - 1) as f64).collect();
    s.extend(geometric_grid(mu, m_sp, q).into_iter().map(|sigma| half + sigma));
    Ok(s)
}

/// Segment from `(0, 0, −W/2)` to the origin, then the spiral of length
/// [`hat_spiral_length`] in the plane `z = 0`.
pub fn generate_hat_curve(w: f64, m: usize) -> Result<PolylineCurve> {
    let omega = solve_spiral_omega();
    let half = 0.5 * w;
    let pts: Vec<Vec3> = hat_parameters(w, m)?
        .into_iter()
        .map(|s| {
            if s <= half {
                Vec3::new(0.0, 0.0, s - half)
            } else {
                let [x, y] = spiral_point(omega, s - half);
                Vec3::new(x, y, 0.0)
            }
        })
        .collect();
    PolylineCurve::new(pts, 3)
}

/// Index of the vertex whose nominal parameter is closest to `s`.
pub fn nearest_parameter(params: &[f64], s: f64) -> usize {
    let k = params.partition_point(|&p| p < s);
    match k {
        0 => 0,
        k if k == params.len() => k - 1,
        k => {
            if (params[k] - s).abs() < (s - params[k - 1]).abs() {
                k
            } else {
                k - 1
            }
        }
    }
}
