//! `qms`: analyze, evolve and validate quantum Markov semigroup models from JSON configs.
//!
//! The binary is a thin wrapper around [`run`].

mod analyses;
mod config;
mod evolve;
mod model;
mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use qms_core::ErrorCategory;

use crate::config::{Analysis, AnalysisConfig, ConfigError, Spacing, StateSpec};
use crate::report::{to_json_string, to_value, SCHEMA_VERSION};

const EXIT_VALIDATION: u8 = 2;
const EXIT_CERTIFICATION: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_IO: u8 = 1;

const DEFAULT_ANALYSES: [Analysis; 3] = [Analysis::Spectrum, Analysis::RPlus, Analysis::ErgodicCheck];

#[derive(Parser)]
#[command(name = "qms", version, about = "Large-time analysis of quantum Markov semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run analyses and write a JSON report.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Analysis to run; repeatable. Overrides the config list.
        #[arg(long = "analysis")]
        analyses: Vec<String>,
    },
    /// Evolve a state and write diagnostics as CSV.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        points: usize,
        /// maximally-mixed, fock:n, unit:i,j or random.
        #[arg(long)]
        state: Option<String>,
        #[arg(long, value_enum)]
        spacing: Option<SpacingArg>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config without computing anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SpacingArg {
    Linear,
    Geometric,
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Validation => EXIT_VALIDATION,
        ErrorCategory::Certification => EXIT_CERTIFICATION,
        ErrorCategory::Numerical => EXIT_NUMERICAL,
    }
}

fn category_name(category: ErrorCategory) -> &'static str {
    match category {
        ErrorCategory::Validation => "validation",
        ErrorCategory::Certification => "certification",
        ErrorCategory::Numerical => "numerical",
    }
}

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("error: invalid config: {e}");
    ExitCode::from(EXIT_VALIDATION)
}

fn load_config(path: &Path) -> Result<AnalysisConfig, ExitCode> {
    AnalysisConfig::load(path).map_err(|e| config_failure(&e))
}

fn build_model(cfg: &AnalysisConfig) -> Result<model::BuiltModel, ExitCode> {
    model::build(&cfg.model).map_err(|e| {
        eprintln!("error: cannot build model: {e}");
        ExitCode::from(exit_code(e.category()))
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), ExitCode> {
    std::fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        ExitCode::from(EXIT_IO)
    })
}

fn analyze(config: &Path, out: &Path, seed: Option<u64>, names: &[String]) -> Result<ExitCode, ExitCode> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if !names.is_empty() {
        cfg.analyses = names
            .iter()
            .map(|n| {
                Analysis::parse(n).ok_or_else(|| {
                    config_failure(&ConfigError::new("--analysis", format!("unknown analysis `{n}`")))
                })
            })
            .collect::<Result<_, _>>()?;
        cfg.validate().map_err(|e| config_failure(&e))?;
    }
    if cfg.analyses.is_empty() {
        cfg.analyses = DEFAULT_ANALYSES.to_vec();
    }
    let mut requested = Vec::new();
    for a in &cfg.analyses {
        if !requested.contains(a) {
            requested.push(*a);
        }
    }

    let built = build_model(&cfg)?;
    let mut ctx = analyses::Context { cfg: &cfg, model: &built, warnings: built.warnings.clone() };
    let mut results = serde_json::Map::new();
    let mut errors = Vec::new();
    let mut code = 0u8;
    for a in requested {
        match ctx.run(a) {
            Ok(v) => {
                results.insert(a.name().into(), v);
            }
            Err(e) => {
                let category = e.category();
                if code == 0 {
                    code = exit_code(category);
                }
                errors.push(json!({
                    "analysis": a.name(),
                    "category": category_name(category),
                    "message": e.to_string(),
                }));
            }
        }
    }

    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "timestamp": timestamp,
        "versions": { "qms": env!("CARGO_PKG_VERSION"), "qms_core": qms_core::VERSION },
        "seed": cfg.seed,
        "config": to_value(&cfg),
        "warnings": to_value(&ctx.warnings),
        "results": Value::Object(results),
        "errors": errors,
    });
    write_file(out, to_json_string(&report).as_bytes())?;
    for e in &errors {
        eprintln!("error: {}: {}", e["analysis"].as_str().unwrap_or(""), e["message"].as_str().unwrap_or(""));
    }
    Ok(ExitCode::from(code))
}

struct EvolveArgs<'a> {
    config: &'a Path,
    out: &'a Path,
    t_max: f64,
    points: usize,
    state: Option<&'a str>,
    spacing: Option<SpacingArg>,
    seed: Option<u64>,
}

fn evolve_cmd(args: EvolveArgs<'_>) -> Result<ExitCode, ExitCode> {
    let mut cfg = load_config(args.config)?;
    cfg.time_grid.t_max = args.t_max;
    cfg.time_grid.points = args.points;
    if let Some(s) = args.spacing {
        cfg.time_grid.spacing = match s {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Geometric => Spacing::Geometric,
        };
    }
    if let Some(s) = args.state {
        cfg.state = s.to_string();
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| config_failure(&e))?;
    let state = StateSpec::parse(&cfg.state, cfg.model.dim()).map_err(|e| config_failure(&e))?;
    let built = build_model(&cfg)?;
    let numerical = |e: qms_core::Error| {
        eprintln!("error: {e}");
        ExitCode::from(exit_code(e.category()))
    };
    let x0 = evolve::initial_operator(&built, state, cfg.seed).map_err(numerical)?;
    let series = evolve::time_series(&built, &x0, &cfg.time_grid.times(), &cfg.tolerances).map_err(numerical)?;
    let mut buf = Vec::new();
    evolve::write_csv(&series, &mut buf).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_IO)
    })?;
    write_file(args.out, &buf)?;
    Ok(ExitCode::SUCCESS)
}

/// Parses `args` (program name first) and executes the command; returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    // Single-threaded kernels keep reports bit-for-bit reproducible.
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse_from(args);
    let result = match &cli.command {
        Command::Analyze { config, out, seed, analyses } => analyze(config, out, *seed, analyses),
        Command::Evolve { config, out, t_max, points, state, spacing, seed } => evolve_cmd(EvolveArgs {
            config,
            out,
            t_max: *t_max,
            points: *points,
            state: state.as_deref(),
            spacing: *spacing,
            seed: *seed,
        }),
        Command::Validate { config } => load_config(config).map(|_| {
            println!("ok");
            ExitCode::SUCCESS
        }),
    };
    result.unwrap_or_else(|code| code)
}
