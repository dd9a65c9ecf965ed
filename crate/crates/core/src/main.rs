use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{Map, Value};

use sector_descent::experiments::{run, ExperimentConfig};
use sector_descent::par;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Verify,
    PhiMin,
    Spiral,
    HatCurve,
    PsiSearch,
    Scan,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Class {
    Disk,
    WidthCap,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Polygons,
    Caps,
    Arcs,
    All,
}

/// Sector functional minimization and steepest descent curve experiments.
///
/// Each run writes report.json, metadata.json and CSV data into --out and
/// exits nonzero if any reference check fails.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Experiment to run (alternatively --experiment or the config file).
    command: Option<Command>,
    #[arg(long, value_enum)]
    experiment: Option<Command>,
    /// Quadrature level.
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Mean width / diameter scale.
    #[arg(long = "W")]
    w: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Samples per curve.
    #[arg(long)]
    m: Option<usize>,
    /// Largest polygon size (phi-min) or last approach exponent (hat-curve).
    #[arg(long)]
    k: Option<usize>,
    /// Evaluation budget (psi-search).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum)]
    class: Option<Class>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Random curves per scan.
    #[arg(long)]
    curves: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config; its keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn id<T: ValueEnum>(v: T) -> Value {
    Value::String(v.to_possible_value().expect("named").get_name().to_owned())
}

fn build_config(cli: Cli) -> Result<ExperimentConfig, String> {
    let mut map = Map::new();
    let mut set = |key: &str, v: Option<Value>| {
        if let Some(v) = v {
            map.insert(key.to_owned(), v);
        }
    };
    if let (Some(a), Some(b)) = (cli.command, cli.experiment) {
        if id(a) != id(b) {
            return Err(format!("conflicting experiments `{}` and `{}`", id(a), id(b)));
        }
    }
    set("experiment", cli.command.or(cli.experiment).map(id));
    set("level", cli.level.map(Value::from));
    set("seed", cli.seed.map(Value::from));
    set("W", cli.w.map(Value::from));
    set("alpha", cli.alpha.map(Value::from));
    set("m", cli.m.map(Value::from));
    set("k", cli.k.map(Value::from));
    set("budget", cli.budget.map(Value::from));
    set("class", cli.class.map(id));
    set("dim", cli.dim.map(Value::from));
    set("family", cli.family.map(id));
    set("restarts", cli.restarts.map(Value::from));
    set("curves", cli.curves.map(Value::from));
    set("out", cli.out.map(|p| Value::String(p.to_string_lossy().into_owned())));
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let Value::Object(file) = file else {
            return Err(format!("{}: expected a JSON object", path.display()));
        };
        map.extend(file);
    }
    if !map.contains_key("experiment") {
        return Err("no experiment given (positional, --experiment, or `experiment` in --config)".into());
    }
    let config = ExperimentConfig::from_json(Value::Object(map)).map_err(|e| e.to_string())?;
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("SECTOR_DESCENT_THREADS").ok().and_then(|v| v.trim().parse().ok());
    par::init_threads(threads);
    let config = match build_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    for c in &outcome.checks {
        if c.passed {
            println!("PASS {} = {}", c.name, c.value);
        } else {
            println!("FAIL {}", c.failure_message());
        }
    }
    println!("wrote {}", config.out.join("report.json").display());
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
