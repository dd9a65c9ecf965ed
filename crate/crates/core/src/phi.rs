//! The sector functional
//!
//! ```text
//! Φ(S, u) = (2/ω_n) ∫_S ⟨θ, u⟩⁺ dσ(θ)
//! ```
//!
//! evaluated exactly for polyhedral sectors on S², in closed form for arcs
//! and circular cones, and by quadrature as an independent path.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::cone::{normal_cone_at_vertex, ConvexCone};
use crate::error::{Error, Result};
use crate::hull::IncrementalHull;
use crate::numeric::adaptive_simpson;
use crate::quadrature::{build_quadrature, omega};
use crate::region;
use crate::sector::{Arc2, Sector};
use crate::sphere::{angle_between, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiMethod {
    ExactProjection,
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiResult {
    pub value: f64,
    pub method: PhiMethod,
    pub error_estimate: f64,
}

/// `Φ(S, u)` with the positive part of `⟨θ, u⟩`, so it is defined for every
/// direction `u`. On S¹ only the first two coordinates of `u` are used.
pub fn phi(s: &Sector, u: &Vec3) -> Result<PhiResult> {
    if u.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let u = u.normalize();
    match s {
        Sector::Arc(a) => {
            Ok(PhiResult { value: phi_arc(a, u.y.atan2(u.x)), method: PhiMethod::ClosedForm, error_estimate: 0.0 })
        }
        Sector::Cone(ConvexCone::Circular { axis, opening }) => {
            let (value, err) = phi_cap(*opening, angle_between(axis, &u));
            Ok(PhiResult { value, method: PhiMethod::ClosedForm, error_estimate: err })
        }
        Sector::Cone(c) => {
            let facets = c.facets().expect("polyhedral");
            let value = region::positive_moment(&facets, &u) * 2.0 / omega(3);
            Ok(PhiResult { value, method: PhiMethod::ExactProjection, error_estimate: 1e-14 })
        }
    }
}

/// Shorthand for `phi(s, u)?.value`.
pub fn phi_value(s: &Sector, u: &Vec3) -> f64 {
    phi(s, u).map_or(f64::NAN, |r| r.value)
}

/// `(1/π) ∫ cos⁺(t − ϑ) dt` over the arc.
fn phi_arc(a: &Arc2, vartheta: f64) -> f64 {
    let d = (a.start() - vartheta + PI).rem_euclid(TAU) - PI;
    let (lo, hi) = (d, d + a.length());
    let window = |c: f64| {
        let (l, h) = (lo.max(c - FRAC_PI_2), hi.min(c + FRAC_PI_2));
        if h > l {
            h.sin() - l.sin()
        } else {
            0.0
        }
    };
    (window(0.0) + window(TAU)) / PI
}

/// Φ for the circular cone of opening `alpha` when `u` makes angle `beta`
/// with the axis.
fn phi_cap(alpha: f64, beta: f64) -> (f64, f64) {
    if beta + alpha <= FRAC_PI_2 {
        return (0.5 * beta.cos() * alpha.sin().powi(2), 0.0);
    }
    // Integrate over the polar angle t; the azimuthal integral of
    // (A + B cos φ)⁺ has a closed form.
    let (cb, sb) = (beta.cos(), beta.sin());
    let inner = |t: f64| {
        let (a, b) = (t.cos() * cb, t.sin() * sb);
        let ring = if b <= a.abs() {
            if a > 0.0 {
                TAU * a
            } else {
                0.0
            }
        } else {
            let phi0 = (-a / b).clamp(-1.0, 1.0).acos();
            2.0 * (a * phi0 + b * phi0.sin())
        };
        ring * t.sin()
    };
    // The ring integrand has a kink where B = |A|.
    let kink = (cb.abs() / sb.max(1e-300)).atan();
    let (v, e) = if kink > 0.0 && kink < alpha {
        let (v1, e1) = adaptive_simpson(inner, 0.0, kink, 1e-14);
        let (v2, e2) = adaptive_simpson(inner, kink, alpha, 1e-14);
        (v1 + v2, e1 + e2)
    } else {
        adaptive_simpson(inner, 0.0, alpha, 1e-14)
    };
    let k = 2.0 / omega(3);
    (k * v, k * e)
}

/// Φ by the fixed-node rule at `level`, with the difference to the next
/// coarser level as the error estimate.
pub fn phi_quadrature(s: &Sector, u: &Vec3, level: u32) -> Result<PhiResult> {
    let u = u.normalize();
    let n = s.dim();
    let eval = |level: u32| -> Result<f64> {
        let g = build_quadrature(n, level)?;
        let v = g.integrate(|t| if s.contains_point(t, 0.0) { t.dot(&u).max(0.0) } else { 0.0 });
        Ok(v * 2.0 / omega(n))
    };
    let value = eval(level)?;
    let error_estimate = if level > 1 { (value - eval(level - 1)?).abs() } else { f64::NAN };
    Ok(PhiResult { value, method: PhiMethod::Quadrature, error_estimate })
}

/// `∫_S θ dσ`; the gradient of `u ↦ Φ(S, u)` on `S*` is `(2/ω_n)` times this.
pub fn first_moment(s: &Sector) -> Vec3 {
    match s {
        Sector::Arc(a) => {
            let (t0, t1) = (a.start(), a.end());
            Vec3::new(t1.sin() - t0.sin(), t0.cos() - t1.cos(), 0.0)
        }
        Sector::Cone(ConvexCone::Circular { axis, opening }) => **axis * (PI * opening.sin().powi(2)),
        Sector::Cone(c) => region::first_moment(&c.facets().expect("polyhedral")),
    }
}

/// `(ω_{n−1} / (ω_n (n−1))) · n^(−n/2)`, a lower bound for Φ over class C.
pub fn santalo_lower_bound(n: usize) -> f64 {
    assert!(n >= 2, "dimension must be at least 2");
    let nf = n as f64;
    omega(n - 1) / (omega(n) * (nf - 1.0)) * nf.powf(-nf / 2.0)
}

/// Gradient of `p ↦ w(co(K ∪ {p}))` for `p` outside `co(K)`:
/// `(2/ω₃) ∫_{N̂(p)} θ dσ` with `N(p)` the normal cone of the cap body at `p`.
pub fn capbody_width_gradient(body: &[Vec3], p: &Vec3) -> Result<Vec3> {
    if body.is_empty() {
        return Err(Error::InvalidArgument("empty body".into()));
    }
    if !IncrementalHull::from_points(body).is_outside(p) {
        return Err(Error::InsideBody);
    }
    let mut pts = body.to_vec();
    pts.push(*p);
    let n = normal_cone_at_vertex(&pts, p)?;
    Ok(region::first_moment(&n.cone.facets().expect("polyhedral")) * (2.0 / omega(3)))
}
