use std::path::PathBuf;
use std::time::Duration;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use oli_cli::{commands, ServerConfig};
use oli_core::ingest::{MatrixEncoding, Regime, SyntheticRegimeSpec, TaskVariant};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "oli", version, about = "Observation-level interaction engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP and push-channel server.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "OLI_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        /// Mutations slower than this answer 202 and finish in the background.
        #[arg(long, default_value_t = 10_000)]
        deadline_ms: u64,
    },
    /// Project one dataset under fixed weights.
    Solve {
        #[arg(long)]
        manifest: PathBuf,
        /// A weights file (JSON array or separated numbers) or `uniform`.
        #[arg(long, default_value = "uniform")]
        weights: String,
        #[arg(long, default_value = "layout.csv")]
        out: PathBuf,
    },
    /// Run the simulated-analyst grid described by a JSON plan.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inspect or create datasets.
    Datasets {
        #[command(subcommand)]
        command: DatasetsCommand,
    },
}

#[derive(Subcommand)]
enum DatasetsCommand {
    /// List datasets under the data directory.
    List {
        #[arg(long, env = "OLI_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic dataset with planted labels.
    Generate {
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[arg(long, value_enum, default_value_t = TaskArg::LinearCombination)]
        task: TaskArg,
        #[arg(long, default_value_t = 100)]
        items: usize,
        #[arg(long, default_value_t = 16)]
        features: usize,
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Aligned,
    Distributed,
    Entangled,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum TaskArg {
    SingleFeature,
    LinearCombination,
    Xor,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Aligned => Regime::Aligned,
            RegimeArg::Distributed => Regime::Distributed,
            RegimeArg::Entangled => Regime::Entangled,
        }
    }
}

impl From<TaskArg> for TaskVariant {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::SingleFeature => TaskVariant::SingleFeature,
            TaskArg::LinearCombination => TaskVariant::LinearCombination,
            TaskArg::Xor => TaskVariant::Xor,
        }
    }
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
    tracing::info!("shutting down");
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Serve {
            port,
            host,
            data_dir,
            deadline_ms,
        } => {
            let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
            tracing::info!(addr = %listener.local_addr()?, data_dir = %data_dir.display(), "listening");
            let mut config = ServerConfig::new(data_dir);
            config.deadline = Duration::from_millis(deadline_ms);
            oli_cli::serve(listener, config, shutdown_signal()).await?;
        }
        Command::Solve {
            manifest,
            weights,
            out,
        } => {
            let report = tokio::task::spawn_blocking(move || {
                commands::solve(&manifest, &weights, &out).map(|r| (r, out))
            })
            .await??;
            let (report, out) = report;
            eprintln!(
                "stress {:.6} after {} iterations (converged: {}); wrote {}",
                report.final_objective,
                report.iterations,
                report.converged,
                out.display()
            );
        }
        Command::Simulate { spec, out } => {
            let report =
                tokio::task::spawn_blocking(move || commands::simulate(&spec, &out)).await??;
            print!("{}", report.to_table());
        }
        Command::Datasets { command } => match command {
            DatasetsCommand::List { data_dir, json } => {
                let list = commands::list_datasets(&data_dir)?;
                if json {
                    println!("{}", serde_json::to_string_pretty(&list)?);
                } else {
                    print!("{}", commands::render_dataset_table(&list));
                }
            }
            DatasetsCommand::Generate {
                regime,
                task,
                items,
                features,
                sigma,
                seed,
                csv,
                out,
            } => {
                let spec = SyntheticRegimeSpec::new(regime.into(), task.into(), items, features)
                    .with_noise(sigma)
                    .with_seed(seed);
                let encoding = if csv {
                    MatrixEncoding::Csv
                } else {
                    MatrixEncoding::BinaryF32RowMajor
                };
                let manifest = commands::generate(&spec, encoding, &out)?;
                println!("{}", manifest.display());
            }
        },
    }
    Ok(())
}
