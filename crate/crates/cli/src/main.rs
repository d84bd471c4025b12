//! `dbm`: ingest, validate and generate cohorts, and serve the query API.
//!
//! Exit codes: 0 ok, 1 validation failure, 2 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use dbmx_core::io::{inspect, write_cohort, AdapterConfig, ValidationReport};
use dbmx_core::model::ModelError;
use dbmx_core::synth::{generate_to_dir, PlantedCorrelation, SynthError, SyntheticSpec, DEFAULT_TASKS};
use dbmx_server::{AppState, ConfigError, ServiceConfig, DEFAULT_BIND, DEFAULT_MAX_SELECTION};

#[derive(Debug, Parser)]
#[command(name = "dbm", version, about = "Digital biomarker cohort tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate an input cohort and re-emit it in canonical form.
    Ingest {
        input: PathBuf,
        output: PathBuf,
        /// JSON adapter config mapping upstream column names to variable ids.
        #[arg(long)]
        adapter: Option<PathBuf>,
        /// Also write the validation report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Validate a cohort without writing anything.
    Validate {
        dir: PathBuf,
        #[arg(long)]
        adapter: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a seeded synthetic cohort.
    Generate {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 95)]
        videos: usize,
        #[arg(long, default_value_t = 10)]
        silent: usize,
        #[arg(long)]
        out: PathBuf,
        /// `var_a,var_b,r`; repeatable.
        #[arg(long = "plant", value_parser = parse_plant)]
        plant: Vec<PlantedCorrelation>,
        /// Comma-separated task labels.
        #[arg(long, value_delimiter = ',')]
        tasks: Option<Vec<String>>,
        /// Skip the individual video with roll/emotion coupling.
        #[arg(long)]
        no_individual: bool,
    },
    /// Load a cohort and serve the HTTP API.
    Serve {
        #[arg(long, env = "DBMX_DATA")]
        data: PathBuf,
        #[arg(long, env = "DBMX_BIND", default_value = DEFAULT_BIND)]
        bind: String,
        /// Allowed origin; repeatable, `*` allows any.
        #[arg(long, env = "DBMX_CORS", value_delimiter = ',')]
        cors: Vec<String>,
        #[arg(long, env = "DBMX_MAX_SELECTION", default_value_t = DEFAULT_MAX_SELECTION)]
        max_selection: usize,
        /// Static UI bundle to serve at `/`.
        #[arg(long, env = "DBMX_UI_DIR")]
        ui: Option<PathBuf>,
    },
}

fn parse_plant(s: &str) -> Result<PlantedCorrelation, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, r] = parts.as_slice() else {
        return Err(format!("expected `var_a,var_b,r`, got `{s}`"));
    };
    let target_r: f64 = r.parse().map_err(|_| format!("`{r}` is not a number"))?;
    Ok(PlantedCorrelation {
        var_a: a.to_string(),
        var_b: b.to_string(),
        target_r,
    })
}

/// A failure mapped to its exit code.
#[derive(Debug)]
enum Failure {
    Validation(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

fn is_io(err: &ModelError) -> bool {
    matches!(err, ModelError::Io { .. } | ModelError::MissingFile { .. })
}

impl From<ModelError> for Failure {
    fn from(err: ModelError) -> Self {
        if is_io(&err) {
            Failure::Io(err.into())
        } else {
            Failure::Validation(err.into())
        }
    }
}

fn read_adapter(path: Option<&Path>) -> Result<AdapterConfig, Failure> {
    let Some(path) = path else {
        return Ok(AdapterConfig::default());
    };
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading adapter config {}", path.display()))
        .map_err(Failure::Io)?;
    serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing adapter config {}", path.display()))
        .map_err(Failure::Validation)
}

fn write_report(report: &ValidationReport, path: Option<&Path>) -> Result<(), Failure> {
    eprint!("{}", report.render_human());
    if let Some(path) = path {
        let mut json = serde_json::to_string_pretty(report).expect("report serializes");
        json.push('\n');
        std::fs::write(path, json)
            .with_context(|| format!("writing report {}", path.display()))
            .map_err(Failure::Io)?;
    }
    Ok(())
}

fn check(
    input: &Path,
    adapter: Option<&Path>,
    report_path: Option<&Path>,
) -> Result<dbmx_core::model::Cohort, Failure> {
    let adapter = read_adapter(adapter)?;
    let inspection = inspect(input, &adapter)?;
    write_report(&inspection.report, report_path)?;
    match inspection.cohort {
        Some(cohort) => Ok(cohort),
        None => Err(Failure::Validation(anyhow::anyhow!(
            "{} error(s) in {}",
            inspection.report.errors.len(),
            input.display()
        ))),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Ingest {
            input,
            output,
            adapter,
            report,
        } => {
            let cohort = check(&input, adapter.as_deref(), report.as_deref())?;
            write_cohort(&cohort, &output)?;
            tracing::info!(videos = cohort.videos().len(), out = %output.display(), "cohort written");
            Ok(())
        }
        Command::Validate { dir, adapter, report } => {
            check(&dir, adapter.as_deref(), report.as_deref())?;
            Ok(())
        }
        Command::Generate {
            seed,
            videos,
            silent,
            out,
            plant,
            tasks,
            no_individual,
        } => {
            let defaults = SyntheticSpec::default();
            let spec = SyntheticSpec {
                seed,
                n_videos: videos,
                n_silent: silent,
                task_labels: tasks.unwrap_or_else(|| DEFAULT_TASKS.iter().map(|s| s.to_string()).collect()),
                planted_correlations: plant,
                planted_individual: if no_individual { None } else { defaults.planted_individual },
            };
            let synthetic = generate_to_dir(&spec, &out).map_err(|e| match e {
                SynthError::Model(m) => Failure::from(m),
                other => Failure::Validation(other.into()),
            })?;
            for p in &synthetic.log.planted_correlations {
                let realized = p.realized_r.map_or("undefined".to_string(), |r| format!("{r:.4}"));
                eprintln!(
                    "planted {} ~ {}: target r={}, realized r={realized} (n={})",
                    p.var_a, p.var_b, p.target_r, p.n
                );
            }
            eprintln!("wrote {} videos to {}", synthetic.cohort.videos().len(), out.display());
            Ok(())
        }
        Command::Serve {
            data,
            bind,
            cors,
            max_selection,
            ui,
        } => {
            let config = ServiceConfig {
                data_dir: data,
                bind_address: bind,
                cors_origins: cors,
                max_selection,
                ui_dir: ui,
            };
            serve(config)
        }
    }
}

fn serve(config: ServiceConfig) -> Result<(), Failure> {
    let state = AppState::load(&config).map_err(|e| match e {
        ConfigError::Load(m) => Failure::from(m),
        other => Failure::Validation(other.into()),
    })?;
    let app = dbmx_server::app(state, &config);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting runtime")
        .map_err(Failure::Io)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&config.bind_address)
            .await
            .with_context(|| format!("binding {}", config.bind_address))
            .map_err(Failure::Io)?;
        let addr = listener.local_addr().context("local address").map_err(Failure::Io)?;
        eprintln!("listening on {addr}");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .context("serving")
            .map_err(Failure::Io)
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("DBMX_LOG").unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (Failure::Validation(e) | Failure::Io(e)) = &failure;
            eprintln!("error: {e:#}");
            ExitCode::from(failure.code())
        }
    }
}
