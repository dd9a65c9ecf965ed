//! Experiment runner behind the command-line tool: each experiment
//! recomputes a set of reference values, compares them against their
//! expected values, and writes `report.json` plus plot-ready CSVs.
//!
//! `report.json` depends only on the configuration, so reruns are
//! byte-identical; wall-clock data goes to `metadata.json`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::cone::{cones_equal, ConvexCone};
use crate::curve::{is_sdc, random_sdc_curve, PolylineCurve};
use crate::error::{Error, Result};
use crate::hull::{mean_width_2d, mean_width_polytope, support};
use crate::minimize::{minimize_phi, Family, MinimizationProblem};
use crate::phi::{phi, phi_quadrature, santalo_lower_bound};
use crate::psi::{psi, search_max_psi, Body, CurveClass};
use crate::quadrature::build_quadrature;
use crate::region;
use crate::sector::{has_constant_width, Sector};
use crate::sphere::{geodesic_distance, UnitVector, Vec3};
use crate::spiral::{
    generate_hat_curve, generate_log_spiral, hat_parameters, nearest_parameter, solve_spiral_omega, spiral_parameters,
};
use crate::trace::{
    lipschitz_constant, normal_sectors_contain_duals, orthant_exclusion_scan, width_parametrization, HullTrace,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Verify,
    PhiMin,
    Spiral,
    HatCurve,
    PsiSearch,
    Scan,
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Experiment::Verify => "verify",
            Experiment::PhiMin => "phi-min",
            Experiment::Spiral => "spiral",
            Experiment::HatCurve => "hat-curve",
            Experiment::PsiSearch => "psi-search",
            Experiment::Scan => "scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorFamily {
    Polygons,
    Caps,
    Arcs,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiClass {
    /// Planar disk of diameter `W` centred at the start.
    Disk,
    /// Bodies of mean width at most `W`.
    WidthCap,
}

/// Parameters of one run. Fields left out of a JSON config take the
/// defaults below; sample counts default per experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Quadrature level (1..=8).
    pub level: u32,
    pub seed: u64,
    #[serde(rename = "W")]
    pub w: f64,
    pub alpha: f64,
    /// Sample count per curve.
    pub m: Option<usize>,
    /// Largest polygon size for `phi-min`; last approach exponent for `hat-curve`.
    pub k: Option<usize>,
    /// Evaluation budget for `psi-search`.
    pub budget: usize,
    pub class: PsiClass,
    /// Ambient dimension for `scan` and the width-cap class.
    pub dim: usize,
    pub family: SectorFamily,
    pub restarts: usize,
    /// Number of random curves for `scan`.
    pub curves: usize,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Verify,
            level: 5,
            seed: 0,
            w: 2.0,
            alpha: 0.0,
            m: None,
            k: None,
            budget: 200_000,
            class: PsiClass::Disk,
            dim: 3,
            family: SectorFamily::All,
            restarts: 20,
            curves: 20,
            tolerances: BTreeMap::new(),
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    /// Parses a JSON object, naming the offending key on failure.
    pub fn from_json(v: Value) -> Result<Self> {
        serde_json::from_value(v).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::InvalidArgument(format!("`{key}`: {msg}")));
        if !(1..=8).contains(&self.level) {
            return bad("level", format!("must be in 1..=8, got {}", self.level));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return bad("W", format!("must be positive, got {}", self.w));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha", format!("must be in [0, 1], got {}", self.alpha));
        }
        if let Some(m) = self.m {
            if !(20..=10_000_000).contains(&m) {
                return bad("m", format!("must be in 20..=10000000, got {m}"));
            }
        }
        if let Some(k) = self.k {
            let ok = match self.experiment {
                Experiment::PhiMin => (3..=8).contains(&k),
                _ => (1..=8).contains(&k),
            };
            if !ok {
                return bad("k", format!("out of range for {}: {k}", self.experiment.id()));
            }
        }
        if self.budget == 0 {
            return bad("budget", "must be positive".into());
        }
        if !(2..=3).contains(&self.dim) {
            return bad("dim", format!("must be 2 or 3, got {}", self.dim));
        }
        if self.restarts == 0 || self.restarts > 10_000 {
            return bad("restarts", format!("must be in 1..=10000, got {}", self.restarts));
        }
        if self.curves == 0 || self.curves > 10_000 {
            return bad("curves", format!("must be in 1..=10000, got {}", self.curves));
        }
        for (name, tol) in &self.tolerances {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return bad("tolerances", format!("unknown check `{name}`"));
            }
            if !(*tol >= 0.0 && tol.is_finite()) {
                return bad("tolerances", format!("`{name}` must be a nonnegative number"));
            }
        }
        Ok(())
    }

    fn tol(&self, name: &str, default: f64) -> f64 {
        debug_assert!(CHECK_NAMES.contains(&name), "unregistered check {name}");
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}

/// Every check name an experiment can emit; tolerance overrides must use one.
pub const CHECK_NAMES: &[&str] = &[
    "antipodal_distance",
    "orthant_moment",
    "orthant_self_dual",
    "circular_dual_opening",
    "cap_self_dual",
    "orthant_width",
    "cap_width",
    "phi_orthant",
    "phi_orthant_quadrature",
    "phi_arc_2d",
    "santalo_2d",
    "santalo_3d",
    "omega_spiral",
    "omega_residual",
    "spiral_endpoint_radius",
    "spiral_sdc",
    "spiral_length_ratio",
    "hat_containment",
    "hat_sdc",
    "psi_radius_then_arc",
    "cube_mean_width",
    "cube_mean_width_quadrature",
    "arc_min_value",
    "arc_min_length",
    "polygon_min_value",
    "polygon_min_orthant_distance",
    "polygon_min_u_vertex",
    "cap_min_excess",
    "spiral_dwds_formula",
    "spiral_dwds_fd",
    "spiral_max_dxdw",
    "width_monotone",
    "normal_self_containment",
    "hat_dwds_limit",
    "hat_dwds_monotone",
    "hat_scan_lower_bound",
    "psi_beats_radius_then_arc",
    "psi_width_cap_ratio",
    "psi_admissible",
    "scan_lower_bound",
    "scan_length_bound",
    "scan_lipschitz",
];

/// How a check compares its value to the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|value − expected| ≤ tol`.
    Within,
    /// `value ≥ expected − tol`.
    AtLeast,
    /// `value ≤ expected + tol`.
    AtMost,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tol: f64,
    pub comparison: Comparison,
    pub passed: bool,
    /// The reference the expected value comes from.
    pub anchor: String,
}

impl Check {
    pub fn failure_message(&self) -> String {
        let rel = match self.comparison {
            Comparison::Within => "within",
            Comparison::AtLeast => "at least (minus)",
            Comparison::AtMost => "at most (plus)",
        };
        format!(
            "{} failed against {}: got {}, expected {} {} {}",
            self.name, self.anchor, self.value, rel, self.expected, self.tol
        )
    }
}

struct Checks<'a> {
    config: &'a ExperimentConfig,
    list: Vec<Check>,
}

impl<'a> Checks<'a> {
    fn new(config: &'a ExperimentConfig) -> Self {
        Checks { config, list: Vec::new() }
    }

    fn push(&mut self, name: &str, cmp: Comparison, value: f64, expected: f64, tol: f64, anchor: &str) {
        let tol = self.config.tol(name, tol);
        let passed = match cmp {
            Comparison::Within => (value - expected).abs() <= tol,
            Comparison::AtLeast => value >= expected - tol,
            Comparison::AtMost => value <= expected + tol,
        };
        self.list.push(Check {
            name: name.into(),
            value,
            expected,
            tol,
            comparison: cmp,
            passed,
            anchor: anchor.into(),
        });
    }

    fn within(&mut self, name: &str, value: f64, expected: f64, tol: f64, anchor: &str) {
        self.push(name, Comparison::Within, value, expected, tol, anchor);
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64, tol: f64, anchor: &str) {
        self.push(name, Comparison::AtLeast, value, bound, tol, anchor);
    }

    fn at_most(&mut self, name: &str, value: f64, bound: f64, tol: f64, anchor: &str) {
        self.push(name, Comparison::AtMost, value, bound, tol, anchor);
    }

    fn holds(&mut self, name: &str, ok: bool, anchor: &str) {
        self.push(name, Comparison::Within, f64::from(u8::from(ok)), 1.0, 0.0, anchor);
    }
}

/// Outcome of one run: the report that was written and the failed checks.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Value,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Output of an experiment body before it is written.
struct Output {
    results: Value,
    csv: Vec<(String, String)>,
}

/// Runs the configured experiment and writes its files into `config.out`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut checks = Checks::new(config);
    let out = match config.experiment {
        Experiment::Verify => verify(config, &mut checks)?,
        Experiment::PhiMin => phi_min(config, &mut checks)?,
        Experiment::Spiral => spiral(config, &mut checks)?,
        Experiment::HatCurve => hat_curve(config, &mut checks)?,
        Experiment::PsiSearch => psi_search(config, &mut checks)?,
        Experiment::Scan => scan(config, &mut checks)?,
    };
    let checks = checks.list;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": config.experiment.id(),
        "config": config,
        "passed": checks.iter().all(|c| c.passed),
        "checks": checks,
        "results": out.results,
    });
    let dir = &config.out;
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let mut files = Vec::new();
    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    files.push(write_atomic(&dir.join("report.json"), &text)?);
    for (name, body) in &out.csv {
        files.push(write_atomic(&dir.join(name), body)?);
    }
    let meta = json!({
        "schema_version": SCHEMA_VERSION,
        "started_unix_s": started.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64()),
        "elapsed_s": clock.elapsed().as_secs_f64(),
        "threads": worker_count(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    files.push(write_atomic(&dir.join("metadata.json"), &(serde_json::to_string_pretty(&meta).expect("json") + "\n"))?);
    Ok(RunOutcome { report, checks, files })
}

fn worker_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::InvalidArgument(format!("{}: {e}", path.display()))
}

/// Write to a sibling temporary file, then rename over the target.
pub fn write_atomic(path: &Path, contents: &str) -> Result<PathBuf> {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file}.tmp{}", std::process::id()));
    fs::write(&tmp, contents).map_err(io_error(&tmp))?;
    fs::rename(&tmp, path).map_err(io_error(path))?;
    Ok(path.to_path_buf())
}

fn verify(config: &ExperimentConfig, c: &mut Checks) -> Result<Output> {
    let z = UnitVector::z();
    c.within("antipodal_distance", geodesic_distance(&z, &z.neg()), PI, 1e-12, "antipodal distance π");

    let orthant = Sector::orthant();
    let e1 = Vec3::x();
    let facets = orthant.cone().and_then(ConvexCone::facets).expect("polyhedral");
    c.within("orthant_moment", region::positive_moment(&facets, &e1), FRAC_PI_4, 1e-9, "orthant moment bound π/4");
    let ortho = ConvexCone::orthant();
    c.holds("orthant_self_dual", cones_equal(&ortho.dual(), &ortho, 1e-9), "self-dual orthant");
    let opening = match ConvexCone::circular(z, FRAC_PI_3)?.dual() {
        ConvexCone::Circular { opening, .. } => opening,
        _ => f64::NAN,
    };
    c.within("circular_dual_opening", opening, FRAC_PI_6, 1e-12, "dual circular cone of opening π/2 − α");
    let cap = Sector::Cone(ConvexCone::circular(z, FRAC_PI_4)?);
    c.holds("cap_self_dual", cap.is_self_dual(1e-9), "self-dual circular cone");
    c.holds("orthant_width", has_constant_width(&orthant, FRAC_PI_2, 64, 1e-6)?, "orthant constant width π/2");
    c.holds("cap_width", has_constant_width(&cap, FRAC_PI_2, 64, 1e-6)?, "cap width twice its opening");

    let phi_orthant = phi(&orthant, &e1)?.value;
    c.within("phi_orthant", phi_orthant, 0.125, 1e-6, "orthant value 1/8");
    let phi_quad = phi_quadrature(&orthant, &e1, config.level)?.value;
    c.within("phi_orthant_quadrature", phi_quad, 0.125, 1e-3, "orthant value 1/8");
    let quarter = Sector::arc(0.0, FRAC_PI_2)?;
    let phi_arc = phi(&quarter, &e1)?.value;
    c.within("phi_arc_2d", phi_arc, 1.0 / PI, 1e-12, "quarter-arc value 1/π");
    c.within("santalo_2d", santalo_lower_bound(2), 1.0 / (2.0 * PI), 1e-15, "Santaló bound 1/(2π)");
    c.within("santalo_3d", santalo_lower_bound(3), 1.0 / (12.0 * 3f64.sqrt()), 1e-15, "Santaló bound 1/(12√3)");

    let omega = solve_spiral_omega();
    c.within("omega_spiral", omega, 0.2744, 5e-5, "spiral rate ω ≈ 0.2744");
    c.at_most("omega_residual", (omega - (-1.5 * PI * omega).exp()).abs(), 0.0, 1e-12, "ω = e^(−3πω/2)");
    let spiral = generate_log_spiral(1.0, 1000)?;
    let end = spiral.points().last().expect("nonempty").norm();
    c.within(
        "spiral_endpoint_radius",
        end,
        omega / (1.0 + omega * omega).sqrt(),
        1e-12,
        "spiral endpoint radius ωμ/√(1+ω²)",
    );
    c.holds("spiral_sdc", is_sdc(&spiral, 1e-9).holds, "log spiral is a steepest descent curve");
    let long = generate_log_spiral(1.0, 10_000)?;
    let xy: Vec<[f64; 2]> = long.points().iter().map(|p| [p.x, p.y]).collect();
    let ratio = long.length() / mean_width_2d(&xy);
    c.within("spiral_length_ratio", ratio, PI, 1e-2, "spiral perimeter μ = π·w");

    let hat = generate_hat_curve(config.w, 4000)?;
    let rmax = hat.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
    c.at_most("hat_containment", rmax, 0.5 * config.w, 1e-9, "hat curve inside the ball of radius W/2");
    c.holds("hat_sdc", is_sdc(&hat, 1e-9).holds, "hat curve is a steepest descent curve");

    let pts: Vec<[f64; 2]> = (0..=100)
        .map(|k| [k as f64 / 100.0, 0.0])
        .chain((1..=20_000).map(|k| {
            let t = PI * k as f64 / 20_000.0;
            [t.cos(), t.sin()]
        }))
        .collect();
    let tilde = PolylineCurve::planar(&pts)?;
    let psi_tilde = psi(&tilde, 0.0, &Body::disk([0.0, 0.0], 1.0))?;
    c.within("psi_radius_then_arc", psi_tilde, 1.0 + PI, 1e-3, "radius then half circle, length 1 + π");

    let cube: Vec<Vec3> =
        (0..8).map(|b| Vec3::new(f64::from(b & 1), f64::from((b >> 1) & 1), f64::from((b >> 2) & 1))).collect();
    c.within("cube_mean_width", mean_width_polytope(&cube), 1.5, 1e-12, "unit cube mean width 3/2");
    let grid = build_quadrature(3, 6)?;
    let quad = grid.integrate(|t| support(&cube, t) + support(&cube, &-t)) / grid.total_weight();
    c.within("cube_mean_width_quadrature", quad, 1.5, 1e-4, "unit cube mean width 3/2");

    let arcs = minimize_phi(&MinimizationProblem {
        restarts: config.restarts,
        ..MinimizationProblem::new(Family::Arcs, config.seed)
    })?;
    let arc_len = match arcs.sector {
        Sector::Arc(a) => a.length(),
        _ => f64::NAN,
    };
    c.within("arc_min_value", arcs.value, 1.0 / PI, 1e-6, "minimum over arcs 1/π");
    c.within("arc_min_length", arc_len, FRAC_PI_2, 1e-4, "minimizing arc of length π/2");

    Ok(Output {
        results: json!({
            "phi_orthant": phi_orthant,
            "phi_orthant_quadrature": phi_quad,
            "phi_arc_2d": phi_arc,
            "omega_spiral": omega,
            "santalo": [santalo_lower_bound(2), santalo_lower_bound(3)],
            "spiral_length_ratio": ratio,
            "psi_radius_then_arc": psi_tilde,
            "cube_mean_width": mean_width_polytope(&cube),
            "cube_mean_width_quadrature": quad,
            "arc_min": {"value": arcs.value, "length": arc_len},
        }),
        csv: Vec::new(),
    })
}

fn phi_min(config: &ExperimentConfig, c: &mut Checks) -> Result<Output> {
    let fam = config.family;
    let mut results = Map::new();
    let mut csv = Vec::new();
    let problem =
        |family| MinimizationProblem { restarts: config.restarts, ..MinimizationProblem::new(family, config.seed) };
    if matches!(fam, SectorFamily::Arcs | SectorFamily::All) {
        let r = minimize_phi(&problem(Family::Arcs))?;
        let len = match r.sector {
            Sector::Arc(a) => a.length(),
            _ => f64::NAN,
        };
        c.within("arc_min_value", r.value, 1.0 / PI, 1e-6, "minimum over arcs 1/π");
        c.within("arc_min_length", len, FRAC_PI_2, 1e-4, "minimizing arc of length π/2");
        results.insert("arcs".into(), r.to_json());
        csv.push(("phi_min_arcs_trace.csv".into(), r.trace_csv()));
    }
    if matches!(fam, SectorFamily::Polygons | SectorFamily::All) {
        let k_max = config.k.unwrap_or(6);
        let mut best: Option<(usize, f64)> = None;
        for k in 3..=k_max {
            let r = minimize_phi(&problem(Family::Polygons { k }))?;
            c.within("polygon_min_value", r.value, 0.125, 2e-3, "orthant value 1/8");
            c.at_most(
                "polygon_min_orthant_distance",
                r.dist_to_orthant.unwrap_or(f64::NAN),
                0.0,
                0.05,
                "orthant as the unique minimizer",
            );
            c.at_most(
                "polygon_min_u_vertex",
                r.u_to_vertex.unwrap_or(f64::NAN),
                0.0,
                0.05,
                "u at an extreme point of the orthant",
            );
            if best.is_none_or(|b| r.value < b.1) {
                best = Some((k, r.value));
            }
            results.insert(format!("polygons_k{k}"), r.to_json());
            csv.push((format!("phi_min_polygons_k{k}_trace.csv"), r.trace_csv()));
        }
        if let Some((k, v)) = best {
            results.insert("polygons_best".into(), json!({"k": k, "value": v}));
        }
    }
    if matches!(fam, SectorFamily::Caps | SectorFamily::All) {
        let r = minimize_phi(&problem(Family::Caps))?;
        c.at_least("cap_min_excess", r.value, 0.125 + 1e-3, 0.0, "equality only at the orthant");
        results.insert("caps".into(), r.to_json());
        csv.push(("phi_min_caps_trace.csv".into(), r.trace_csv()));
    }
    Ok(Output { results: Value::Object(results), csv })
}

/// Rows with defined formula values after the spiral has turned twice
/// around its first sample, where the coarse start no longer shows.
fn spiral_interior(params: &[f64], omega: f64) -> usize {
    let s1 = params[1];
    params.partition_point(|&s| s < s1 * (4.0 * PI * omega).exp())
}

fn trace_checks(c: &mut Checks, trace: &HullTrace, anchor: &str) -> Result<()> {
    let dec = trace.width_decrease();
    c.at_most("width_monotone", dec, 0.0, 1e-12 * trace.rows.last().map_or(1.0, |r| r.w), anchor);
    c.holds("normal_self_containment", normal_sectors_contain_duals(trace, 1e-6)?, "normal cone contains its dual");
    Ok(())
}

fn spiral(config: &ExperimentConfig, c: &mut Checks) -> Result<Output> {
    let m = config.m.unwrap_or(10_000);
    // Scaled so the hull has mean width W.
    let mu = PI * config.w;
    let curve = generate_log_spiral(mu, m)?;
    let params = spiral_parameters(mu, m)?;
    let omega = solve_spiral_omega();
    let trace = HullTrace::build(&curve)?;
    let first = spiral_interior(&params, omega).max(1);
    let (mut f_err, mut d_err) = (0.0f64, 0.0f64);
    for i in first..trace.len() - 1 {
        let (f, d) = trace.dwds(i)?;
        f_err = f_err.max((f - 1.0 / PI).abs());
        d_err = d_err.max((d - 1.0 / PI).abs());
    }
    let w_final = trace.rows.last().expect("nonempty").w;
    let ratio = curve.length() / w_final;
    let wp = width_parametrization(&curve, &trace);
    c.within("spiral_dwds_formula", 1.0 / PI + f_err, 1.0 / PI, 1e-2, "dw/ds = 1/π along the spiral");
    c.within("spiral_dwds_fd", 1.0 / PI + d_err, 1.0 / PI, 1e-2, "dw/ds = 1/π along the spiral");
    c.within("spiral_length_ratio", ratio, PI, 1e-2, "spiral perimeter μ = π·w");
    c.within("spiral_max_dxdw", wp.max_ratio, PI, 1e-2, "best constant |dx/dw| ≤ π");
    c.holds("spiral_sdc", is_sdc(&curve, 1e-9).holds, "log spiral is a steepest descent curve");
    trace_checks(c, &trace, "mean width grows along the curve")?;

    let mut wcsv = String::from("w,x,y\n");
    for (w, p) in wp.w.iter().zip(&wp.points) {
        let _ = writeln!(wcsv, "{w},{},{}", p[0], p[1]);
    }
    Ok(Output {
        results: json!({
            "m": m,
            "mu": mu,
            "omega": omega,
            "interior_from": first,
            "max_formula_error": f_err,
            "max_fd_error": d_err,
            "length_over_width": ratio,
            "max_dxdw": wp.max_ratio,
            "final_width": w_final,
        }),
        csv: vec![
            ("curve.csv".into(), curve.to_csv()),
            ("trace.csv".into(), trace.to_csv()),
            ("width_parametrization.csv".into(), wcsv),
        ],
    })
}

fn hat_curve(config: &ExperimentConfig, c: &mut Checks) -> Result<Output> {
    let (w, m, k_max) = (config.w, config.m.unwrap_or(100_000), config.k.unwrap_or(5));
    let curve = generate_hat_curve(w, m)?;
    let params = hat_parameters(w, m)?;
    let trace = HullTrace::build(&curve)?;
    let mut approach = String::from("k,s,dwds_formula,dwds_fd\n");
    let mut values = Vec::new();
    for k in 1..=k_max {
        let i = nearest_parameter(&params, 0.5 * w + 10f64.powi(-(k as i32)));
        let (f, d) = trace.dwds(i)?;
        let _ = writeln!(approach, "{k},{},{f},{d}", trace.rows[i].s);
        values.push(json!({"k": k, "index": i, "s": trace.rows[i].s, "dwds_formula": f, "dwds_fd": d}));
    }
    let f = |k: usize| values[k - 1]["dwds_formula"].as_f64().unwrap_or(f64::NAN);
    c.within("hat_dwds_limit", f(k_max), 0.125, 1e-2, "hat-curve limit 1/8");
    if k_max >= 3 {
        let monotone = (2..k_max).all(|k| f(k + 1) < f(k));
        c.holds("hat_dwds_monotone", monotone, "hat-curve approach decreasing to 1/8");
    }
    // The joint at `s = W/2` is where the lower bound is approached.
    let joint = nearest_parameter(&params, 0.5 * w);
    let scan = orthant_exclusion_scan(&trace)?;
    c.at_least("hat_scan_lower_bound", scan.min, 0.125, 1e-3, "dw/ds ≥ 1/8 in three dimensions");
    let rmax = curve.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
    c.at_most("hat_containment", rmax, 0.5 * w, 1e-9, "hat curve inside the ball of radius W/2");
    c.holds("hat_sdc", is_sdc(&curve, 1e-9).holds, "hat curve is a steepest descent curve");
    trace_checks(c, &trace, "mean width grows along the curve")?;
    Ok(Output {
        results: json!({
            "W": w,
            "m": m,
            "joint_index": joint,
            "approach": values,
            "scan_min": scan.min,
            "scan_argmin": scan.argmin,
            "final_width": trace.rows.last().map(|r| r.w),
        }),
        csv: vec![
            ("curve.csv".into(), curve.to_csv()),
            ("trace.csv".into(), trace.to_csv()),
            ("approach.csv".into(), approach),
        ],
    })
}

fn psi_search(config: &ExperimentConfig, c: &mut Checks) -> Result<Output> {
    let (w, alpha) = (config.w, config.alpha);
    let class = match config.class {
        PsiClass::Disk => CurveClass::Disk { w },
        PsiClass::WidthCap => CurveClass::MeanWidthCap { w, dim: config.dim },
    };
    let r = search_max_psi(&class, alpha, config.seed, config.budget)?;
    c.holds("psi_admissible", class.admits(&r.curve), "search returns admissible curves");
    match class {
        CurveClass::Disk { .. } => {
            let tilde = 0.5 * w * (1.0 + PI) / w.powf(alpha);
            c.at_least(
                "psi_beats_radius_then_arc",
                r.value,
                tilde + 0.01,
                0.0,
                "longer curves than radius then half circle",
            );
        }
        CurveClass::MeanWidthCap { dim: 2, .. } => {
            let scale = w.powf(1.0 - alpha);
            c.within("psi_width_cap_ratio", r.value / scale, PI, 2e-2, "spiral optimal with ratio π");
        }
        CurveClass::MeanWidthCap { .. } => {}
    }
    let mut history = String::from("eval,value\n");
    for (e, v) in &r.history {
        let _ = writeln!(history, "{e},{v}");
    }
    Ok(Output {
        results: json!({
            "class": class,
            "alpha": alpha,
            "value": r.value,
            "length": r.curve.length(),
            "points": r.curve.len(),
            "evals": r.evals,
            "accepted": r.accepted,
            "seeds": r.seeds,
        }),
        csv: vec![("curve.csv".into(), r.curve.to_csv()), ("history.csv".into(), history)],
    })
}

/// Per-step turning scale of the scanned curves. The formula uses the
/// forward chord, which is a faithful tangent only while corners stay mild;
/// at sharp corners the chord can leave the dual normal cone. Planar curves
/// sit much closer to their bound, so they get milder corners.
fn scan_bend(dim: usize) -> f64 {
    if dim == 2 {
        0.05
    } else {
        0.25
    }
}

fn scan(config: &ExperimentConfig, c: &mut Checks) -> Result<Output> {
    let (m, dim) = (config.m.unwrap_or(200), config.dim);
    let rows = crate::par::map_range(config.curves, |i| -> Result<_> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(i as u64));
        let curve = random_sdc_curve(&mut rng, m, dim, scan_bend(dim))?;
        let trace = HullTrace::build(&curve)?;
        let scan = orthant_exclusion_scan(&trace)?;
        let wp = width_parametrization(&curve, &trace);
        let w = trace.rows.last().expect("nonempty").w;
        let ok = normal_sectors_contain_duals(&trace, 1e-6)?;
        Ok((scan, curve.length(), w, wp.max_ratio, trace.width_decrease(), ok))
    });
    let rows: Vec<_> = rows.into_iter().collect::<Result<_>>()?;
    let bound = crate::trace::phi_lower_bound(dim);
    let cn = lipschitz_constant(dim);
    let mut csv = String::from("curve,min_dwds,argmin,evaluated,length,width,max_dxdw\n");
    for (i, (s, len, w, ratio, _, _)) in rows.iter().enumerate() {
        let _ = writeln!(csv, "{i},{},{},{},{len},{w},{ratio}", s.min, s.argmin, s.evaluated);
    }
    let min = rows.iter().map(|r| r.0.min).fold(f64::INFINITY, f64::min);
    let slack = rows.iter().map(|r| r.1 - cn * r.2).fold(f64::NEG_INFINITY, f64::max);
    let ratio = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let dec = rows.iter().map(|r| r.4).fold(f64::NEG_INFINITY, f64::max);
    let anchor = if dim == 2 { "dw/ds ≥ 1/π in the plane" } else { "dw/ds ≥ 1/8 in three dimensions" };
    c.at_least("scan_lower_bound", min, bound, 1e-3, anchor);
    c.at_most("scan_length_bound", slack, 0.0, 1e-6, "length at most c_n times the mean width");
    c.at_most("scan_lipschitz", ratio, cn, 0.0, "|dx/dw| ≤ c_n");
    c.at_most("width_monotone", dec, 0.0, 1e-12, "mean width grows along the curve");
    c.holds("normal_self_containment", rows.iter().all(|r| r.5), "normal cone contains its dual");
    Ok(Output {
        results: json!({
            "curves": config.curves,
            "m": m,
            "dim": dim,
            "min_dwds": min,
            "lower_bound": bound,
            "max_dxdw": ratio,
            "lipschitz_constant": cn,
        }),
        csv: vec![("scan.csv".into(), csv)],
    })
}
