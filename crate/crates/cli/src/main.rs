//! `subkoba`: flag-domain algebra, curvature certificates, and distance
//! estimates from the command line.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use subkoba::distances::RhoKind;

use commands::{display, KobayashiArgs};
use config::{load_tunables, Format, RunConfig};
use report::{envelope, render, Failure, Outcome};

#[derive(Parser, Debug)]
#[command(name = "subkoba", version, about)]
struct Cli {
    /// TOML file with optimizer, flow, connect, kobayashi, cc, forstneric and classify tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Optimizer seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Optimizer restarts (overrides the config).
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Leave the wall-clock timestamp out of the report.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roots, Cartan matrix and exact normalization checks.
    RootSystem {
        #[arg(long = "type")]
        ty: String,
    },
    /// Level decomposition of a grading element.
    Grade {
        #[arg(long = "type")]
        ty: Option<String>,
        /// `torus` or comma-separated 1-based simple roots lying in v.
        #[arg(long)]
        v: Option<String>,
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Certified negative bound on holomorphic sectional curvature.
    CurvatureBound {
        #[arg(long)]
        fixture: PathBuf,
    },
    /// Flow word joining two chart points.
    ChowConnect {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: String,
    },
    /// Upper estimate of the Carnot-Caratheodory distance.
    CcDistance {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: String,
        /// Use the Poincare disc metric of this (negative) curvature.
        #[arg(long, allow_hyphen_values = true)]
        curvature: Option<f64>,
    },
    /// Upper estimate of the Kobayashi distance or infinitesimal metric.
    KobayashiEstimate {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        vector: Option<String>,
        /// Flag fixture whose curvature certificate feeds a Schwarz lower bound.
        #[arg(long)]
        schwarz: Option<PathBuf>,
        #[arg(long)]
        rho: Option<f64>,
        /// `exact` or `upper-estimate`.
        #[arg(long, default_value = "exact")]
        rho_kind: String,
    },
    /// Verdict on a homogeneous datum.
    Classify {
        #[arg(long)]
        fixture: PathBuf,
    },
    /// Invertibility assumption and the constant C_N for a chart.
    ForstnericCheck {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        per_axis: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::RootSystem { .. } => "root-system",
            Command::Grade { .. } => "grade",
            Command::CurvatureBound { .. } => "curvature-bound",
            Command::ChowConnect { .. } => "chow-connect",
            Command::CcDistance { .. } => "cc-distance",
            Command::KobayashiEstimate { .. } => "kobayashi-estimate",
            Command::Classify { .. } => "classify",
            Command::ForstnericCheck { .. } => "forstneric-check",
        }
    }

    fn fixtures(&self) -> Vec<String> {
        match self {
            Command::Grade { fixture: Some(p), .. } | Command::CurvatureBound { fixture: p } | Command::Classify { fixture: p } => {
                vec![display(p)]
            }
            Command::ChowConnect { chart, .. } | Command::CcDistance { chart, .. } | Command::ForstnericCheck { chart, .. } => {
                vec![display(chart)]
            }
            Command::KobayashiEstimate { chart, schwarz, .. } => {
                std::iter::once(chart).chain(schwarz.as_ref()).map(|p| display(p)).collect()
            }
            _ => Vec::new(),
        }
    }

    fn arguments(&self) -> serde_json::Value {
        match self {
            Command::RootSystem { ty } => json!({ "type": ty }),
            Command::Grade { ty, v, .. } => json!({ "type": ty, "v": v }),
            Command::ChowConnect { from, to, .. } => json!({ "from": from, "to": to }),
            Command::CcDistance { from, to, curvature, .. } => json!({ "from": from, "to": to, "curvature": curvature }),
            Command::KobayashiEstimate { from, to, vector, rho, rho_kind, .. } => {
                json!({ "from": from, "to": to, "vector": vector, "rho": rho, "rho_kind": rho_kind })
            }
            _ => json!({}),
        }
    }
}

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var("SUBKOBA_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::input(format!("SUBKOBA_THREADS must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut tunables = load_tunables(cli.config.as_deref()).map_err(Failure::input)?;
    if let Some(seed) = cli.seed {
        tunables.optimizer.seed = seed;
    }
    if let Some(r) = cli.restarts {
        tunables.optimizer.restarts = r;
    }
    if let Command::ForstnericCheck { level, per_axis, .. } = &cli.command {
        if let Some(l) = level {
            tunables.forstneric.level = *l;
        }
        if let Some(p) = per_axis {
            tunables.forstneric.per_axis = *p;
        }
    }
    tunables.validate().map_err(Failure::input)?;
    Ok(RunConfig {
        command: cli.command.name().into(),
        fixtures: cli.command.fixtures(),
        arguments: cli.command.arguments(),
        output: cli.output.as_ref().map(|p| display(p)),
        format: cli.format,
        threads: threads()?,
        tunables,
    })
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let t = &cfg.tunables;
    match &cli.command {
        Command::RootSystem { ty } => commands::root_system(ty),
        Command::Grade { ty, v, fixture } => commands::grade_cmd(ty.as_deref(), v.as_deref(), fixture.as_deref()),
        Command::CurvatureBound { fixture } => commands::curvature_bound(fixture, t),
        Command::ChowConnect { chart, from, to } => commands::chow_connect_cmd(chart, from.as_deref(), to, t),
        Command::CcDistance { chart, from, to, curvature } => {
            commands::cc_distance(chart, from.as_deref(), to, *curvature, t)
        }
        Command::KobayashiEstimate { chart, from, to, vector, schwarz, rho, rho_kind } => {
            let rho_kind = match rho_kind.as_str() {
                "exact" => RhoKind::Exact,
                "upper-estimate" => RhoKind::UpperEstimate,
                other => return Err(Failure::input(format!("--rho-kind must be exact or upper-estimate, got {other}"))),
            };
            let args = KobayashiArgs {
                chart,
                from: from.as_deref(),
                to: to.as_deref(),
                vector: vector.as_deref(),
                schwarz: schwarz.as_deref(),
                rho: *rho,
                rho_kind,
            };
            commands::kobayashi_estimate(&args, t)
        }
        Command::Classify { fixture } => commands::classify(fixture, t),
        Command::ForstnericCheck { chart, .. } => commands::forstneric(chart, t),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (cfg, outcome) = match resolve(&cli) {
        Ok(cfg) => {
            let outcome = match cfg.threads {
                Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(|| execute(&cli, &cfg)),
                    Err(e) => Err(Failure::input(e.to_string())),
                },
                None => execute(&cli, &cfg),
            };
            (Some(cfg), outcome)
        }
        Err(f) => (None, Err(f)),
    };
    let outcome = outcome.unwrap_or_else(|f| Outcome { status: f.status, result: json!(null), errors: vec![f.entry] });
    for e in &outcome.errors {
        eprintln!("subkoba: {}: {}", e.kind, e.message);
    }
    let report = envelope(cfg.as_ref(), &outcome, !cli.no_timestamp);
    let written = render(&report, cli.format).and_then(|bytes| report::emit(&bytes, cli.output.as_deref()));
    if let Err(e) = written {
        eprintln!("subkoba: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(outcome.status.exit_code() as u8)
}
