//! `famvar` — config-driven experiments over labeled distribution families:
//! variance reports, closed-form hardness bounds, and the training, query
//! and descent simulators that verify them.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible scale or
//! domain too large, 4 a report check failed.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use commands::{CommandCtx, Format};
use output::Provenance;

#[derive(Parser)]
#[command(
    name = "famvar",
    version,
    about = "Variance of labeled distribution families, hardness bounds, and their empirical \
             verification",
    after_help = "Worker count: set FAMVAR_WORKERS to pin the thread pool size. Results are \
                  byte-identical for a fixed (config, seed) regardless of worker count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the JSON config document for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config's top-level seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for result files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Stdout rendering: json (quiet), csv, or text tables.
    #[arg(long, global = true, default_value = "json", value_parser = parse_format)]
    format: Format,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        "text" => Ok(Format::Text),
        other => Err(format!("unknown format {other:?} (expected json, csv or text)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Variance report for a family: exact value, spectral upper bound,
    /// member lower bound.
    Variance,
    /// Closed-form hardness bounds for a given variance value.
    Bounds,
    /// Projected subgradient training of linear predictors per member.
    TrainLinear,
    /// Adversarial correlation-query oracle driving a scripted learner.
    Csq,
    /// Grid-rounded / noisy gradient descent across the family.
    Gd,
    /// Build a selector/shift family and export its manifest.
    Pattern,
    /// Aggregate result files into a pass/fail table.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Variance => "variance",
            Command::Bounds => "bounds",
            Command::TrainLinear => "train-linear",
            Command::Csq => "csq",
            Command::Gd => "gd",
            Command::Pattern => "pattern",
            Command::Report => "report",
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SCALE: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_worker_pool();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .chain()
                .filter_map(|cause| cause.downcast_ref::<famvar::Error>())
                .map(|e| match e {
                    famvar::Error::DomainTooLarge(_) | famvar::Error::InfeasibleScale(_) => {
                        EXIT_SCALE
                    }
                    _ => EXIT_CONFIG,
                })
                .next()
                .unwrap_or(EXIT_CONFIG);
            ExitCode::from(code)
        }
    }
}

fn init_worker_pool() {
    if let Ok(value) = std::env::var("FAMVAR_WORKERS") {
        if let Ok(workers) = value.parse::<usize>() {
            if workers >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
            }
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--config PATH is required"))?;
    let config_bytes = std::fs::read(config_path)
        .map_err(|e| anyhow::anyhow!("reading config {}: {e}", config_path.display()))?;
    let config_sha256 = {
        let mut hasher = Sha256::new();
        hasher.update(&config_bytes);
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect::<String>()
    };

    std::fs::create_dir_all(&cli.out)
        .map_err(|e| anyhow::anyhow!("creating output directory {}: {e}", cli.out.display()))?;

    // Seed priority: --seed flag, then the config document's own seed field.
    let parse_seed = |doc_seed: u64| cli.seed.unwrap_or(doc_seed);
    let make_ctx = |seed: u64| CommandCtx {
        provenance: Provenance {
            command: cli.command.name().to_string(),
            config_sha256: config_sha256.clone(),
            seed,
        },
        out_dir: cli.out.clone(),
        format: cli.format,
    };

    match &cli.command {
        Command::Variance => {
            let cfg: config::VarianceConfig = serde_json::from_slice(&config_bytes)?;
            let ctx = make_ctx(parse_seed(cfg.seed));
            commands::cmd_variance(&ctx, &cfg)?;
        }
        Command::Bounds => {
            let cfg: config::BoundsConfig = serde_json::from_slice(&config_bytes)?;
            let ctx = make_ctx(parse_seed(cfg.seed));
            commands::cmd_bounds(&ctx, &cfg)?;
        }
        Command::TrainLinear => {
            let cfg: config::TrainLinearConfig = serde_json::from_slice(&config_bytes)?;
            let ctx = make_ctx(parse_seed(cfg.seed));
            commands::cmd_train_linear(&ctx, &cfg)?;
        }
        Command::Csq => {
            let cfg: config::CsqConfig = serde_json::from_slice(&config_bytes)?;
            let ctx = make_ctx(parse_seed(cfg.seed));
            commands::cmd_csq(&ctx, &cfg)?;
        }
        Command::Gd => {
            let cfg: config::GdConfig = serde_json::from_slice(&config_bytes)?;
            let ctx = make_ctx(parse_seed(cfg.seed));
            commands::cmd_gd(&ctx, &cfg)?;
        }
        Command::Pattern => {
            let cfg: config::PatternConfig = serde_json::from_slice(&config_bytes)?;
            let ctx = make_ctx(parse_seed(cfg.seed));
            commands::cmd_pattern(&ctx, &cfg)?;
        }
        Command::Report => {
            let cfg: config::ReportConfig = serde_json::from_slice(&config_bytes)?;
            let ctx = make_ctx(parse_seed(cfg.seed));
            let all_satisfied = commands::cmd_report(&ctx, &cfg)?;
            if !all_satisfied {
                return Ok(ExitCode::from(EXIT_VIOLATION));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
