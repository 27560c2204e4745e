use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infogeo::siegel::SiegelNorm;
use infogeo_cli::commands::{
    cmd_cluster, cmd_estimate, cmd_evaluate, cmd_pipeline, cmd_siegel_distance, cmd_simulate, cmd_spectrum, Center,
    StageReport,
};
use infogeo_cli::config::PipelineConfig;
use infogeo_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "infogeo", version, about = "Range-cell clustering on the reflection-coefficient manifold")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides the master seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the stage report on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CenterArg {
    Median,
    Mean,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Spectral,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled burst from the scenario section.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Where to write the ground-truth labels.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Burst CSV to reflection points (JSON lines).
    Estimate {
        #[command(flatten)]
        common: Common,
    },
    /// Points to a k-means model (JSON).
    Cluster {
        #[command(flatten)]
        common: Common,
    },
    /// Score labels (or a model) against ground truth.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Simulate, estimate, cluster and evaluate in one run.
    Pipeline {
        #[command(flatten)]
        common: Common,
    },
    /// Doppler spectrum of the median (or mean) of a point set, as CSV.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "median")]
        center: CenterArg,
        #[arg(long, default_value_t = 256)]
        n_freq: usize,
    },
    /// Distance between the `a` and `b` block-Toeplitz parameter sets of a JSON file.
    SiegelDistance {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "spectral")]
        norm: NormArg,
    },
}

fn load_config(common: &Common) -> Result<Option<PipelineConfig>> {
    let Some(path) = &common.config else {
        return Ok(None);
    };
    let mut config = PipelineConfig::load(path)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
        config.validate()?;
    }
    Ok(Some(config))
}

fn require_config(common: &Common) -> Result<PipelineConfig> {
    load_config(common)?.ok_or_else(|| CliError::Config("--config is required".into()))
}

fn pick<'a>(flag: &'a Option<PathBuf>, fallback: Option<&'a PathBuf>, what: &'static str) -> Result<&'a Path> {
    flag.as_ref().or(fallback).map(PathBuf::as_path).ok_or(CliError::MissingPath(what))
}

fn emit(common: &Common, value: &impl serde::Serialize) {
    if !common.quiet {
        println!("{}", serde_json::to_string(value).expect("serializable"));
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, truth } => {
            let config = require_config(&common)?;
            let output = pick(&common.output, config.io.burst.as_ref(), "--output")?;
            let truth = truth.as_deref().or(config.io.truth.as_deref());
            let report = cmd_simulate(&config, output, truth)?;
            emit(&common, &report);
        }
        Command::Estimate { common } => {
            let config = load_config(&common)?;
            let io = config.as_ref().map(|c| &c.io);
            let input = pick(&common.input, io.and_then(|io| io.burst.as_ref()), "--input")?;
            let output = pick(&common.output, io.and_then(|io| io.points.as_ref()), "--output")?;
            let burg = config.as_ref().map(|c| c.burg.clone()).unwrap_or_default();
            let report = cmd_estimate(input, output, &burg)?;
            emit(&common, &report);
        }
        Command::Cluster { common } => {
            let config = require_config(&common)?;
            let opts = config.kmeans_options()?;
            let input = pick(&common.input, config.io.points.as_ref(), "--input")?;
            let output = pick(&common.output, config.io.model.as_ref(), "--output")?;
            let report = cmd_cluster(input, output, &opts)?;
            emit(&common, &report);
        }
        Command::Evaluate { common, truth } => {
            let config = load_config(&common)?;
            let io = config.as_ref().map(|c| &c.io);
            let labels = pick(&common.input, io.and_then(|io| io.model.as_ref()), "--input")?;
            let truth = pick(&truth, io.and_then(|io| io.truth.as_ref()), "--truth")?;
            let (report, stage) = cmd_evaluate(labels, truth, common.output.as_deref())?;
            if common.output.is_none() {
                emit(&common, &report);
            } else {
                emit(&common, &stage);
            }
        }
        Command::Pipeline { common } => {
            let config = require_config(&common)?;
            let report = cmd_pipeline(&config, common.output.as_deref())?;
            let summary = StageReport {
                stage: "pipeline",
                outputs: common.output.clone().or(config.io.report.clone()).into_iter().collect(),
                details: serde_json::json!({
                    "f1": report.eval.as_ref().map(|e| e.f1),
                    "inertia": report.inertia,
                    "n_iter": report.n_iter,
                }),
                seconds: report.timings.values().sum(),
            };
            emit(&common, &summary);
        }
        Command::Spectrum { common, center, n_freq } => {
            let config = load_config(&common)?;
            let io = config.as_ref().map(|c| &c.io);
            let input = pick(&common.input, io.and_then(|io| io.points.as_ref()), "--input")?;
            let output = pick(&common.output, None, "--output")?;
            let center = match center {
                CenterArg::Median => Center::Median,
                CenterArg::Mean => Center::Mean,
            };
            let report = cmd_spectrum(input, output, center, n_freq)?;
            emit(&common, &report);
        }
        Command::SiegelDistance { common, norm } => {
            let input = pick(&common.input, None, "--input")?;
            let norm = match norm {
                NormArg::Spectral => SiegelNorm::Spectral,
                NormArg::Full => SiegelNorm::Full,
            };
            let d = cmd_siegel_distance(input, norm)?;
            emit(&common, &serde_json::json!({"distance": d, "norm": norm}));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
