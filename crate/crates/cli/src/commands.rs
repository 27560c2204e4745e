use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use infogeo::cluster::{kmeans, ClusterModel, KMeansOptions};
use infogeo::estimate::{doppler_spectrum, estimate_cells, levinson, spectrum_frequency, ReflectionPoint};
use infogeo::evaluate::{best_permutation_score, EvalReport};
use infogeo::exec::Exec;
use infogeo::poincare::{best_effort, frechet_median, karcher_mean, uniform_weights, FlowOptions, ProductPoint};
use infogeo::siegel::{block_toeplitz_distance, SiegelNorm, SiegelParams};
use infogeo::simulate::{simulate_scenario, Burst};
use serde::{Deserialize, Serialize};

use crate::config::{BurgConfig, PipelineConfig};
use crate::error::{CliError, Result};
use crate::formats::{
    format_burst, format_points, read_burst, read_labels, read_points, read_text, to_json, write_atomic,
};

/// Summary printed after each command.
#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: &'static str,
    pub outputs: Vec<PathBuf>,
    pub details: serde_json::Value,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Resolved configuration, stage seeds included.
    pub config: PipelineConfig,
    pub labels: Vec<usize>,
    pub centroids: Vec<ReflectionPoint>,
    pub inertia: f64,
    pub n_iter: usize,
    pub converged: bool,
    pub karcher_failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalReport>,
    /// Wall-clock seconds per stage; excluded from determinism comparisons.
    pub timings: BTreeMap<String, f64>,
}

/// Writes every artifact only after all of them have been computed.
fn write_all(files: &[(&Path, String)]) -> Result<Vec<PathBuf>> {
    for (path, contents) in files {
        write_atomic(path, contents.as_bytes())?;
    }
    Ok(files.iter().map(|(p, _)| p.to_path_buf()).collect())
}

pub fn estimate_points(burst: &Burst, burg: &BurgConfig) -> Result<Vec<ProductPoint>> {
    let order = burg.order.resolve(burst.n_pulses());
    if order >= burst.n_pulses() {
        return Err(CliError::Config(format!(
            "burg.order {order} needs fewer than {} pulses",
            burst.n_pulses()
        )));
    }
    let reflections =
        estimate_cells(burst, order, burg.gamma, Exec::Parallel).map_err(|e| CliError::stage("estimate", e))?;
    reflections
        .into_iter()
        .map(|r| ProductPoint::new(r, burst.n_pulses()).map_err(|e| CliError::stage("estimate", e)))
        .collect()
}

pub fn cmd_simulate(config: &PipelineConfig, output: &Path, truth: Option<&Path>) -> Result<StageReport> {
    let start = Instant::now();
    let scenario = config.scenario()?;
    let (burst, labels) = simulate_scenario(&scenario, Exec::Parallel).map_err(|e| CliError::stage("simulate", e))?;
    let mut files = vec![(output, format_burst(&burst))];
    if let Some(t) = truth {
        files.push((t, to_json(&labels)));
    }
    let outputs = write_all(&files)?;
    Ok(StageReport {
        stage: "simulate",
        outputs,
        details: serde_json::json!({
            "seed": scenario.seed,
            "n_pulses": burst.n_pulses(),
            "n_cells": burst.n_cells(),
        }),
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn cmd_estimate(input: &Path, output: &Path, burg: &BurgConfig) -> Result<StageReport> {
    let start = Instant::now();
    let burst = read_burst(input)?;
    let points = estimate_points(&burst, burg)?;
    let outputs = write_all(&[(output, format_points(&points))])?;
    Ok(StageReport {
        stage: "estimate",
        outputs,
        details: serde_json::json!({
            "n_cells": points.len(),
            "order": burg.order.resolve(burst.n_pulses()),
            "gamma": burg.gamma,
        }),
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn cluster_points(points: &[ProductPoint], opts: &KMeansOptions) -> Result<ClusterModel> {
    kmeans(points, opts, Exec::Parallel).map_err(|e| CliError::stage("cluster", e))
}

pub fn cmd_cluster(input: &Path, output: &Path, opts: &KMeansOptions) -> Result<StageReport> {
    let start = Instant::now();
    let points = read_points(input)?;
    let model = cluster_points(&points, opts)?;
    let outputs = write_all(&[(output, to_json(&model))])?;
    Ok(StageReport {
        stage: "cluster",
        outputs,
        details: serde_json::json!({
            "k": model.k,
            "seed": opts.seed,
            "inertia": model.inertia,
            "n_iter": model.n_iter,
            "converged": model.converged,
            "karcher_failures": model.karcher_failures,
        }),
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn score(truth: &[usize], labels: &[usize]) -> Result<EvalReport> {
    best_permutation_score(truth, labels).map_err(|e| CliError::stage("evaluate", e))
}

pub fn cmd_evaluate(labels: &Path, truth: &Path, output: Option<&Path>) -> Result<(EvalReport, StageReport)> {
    let start = Instant::now();
    let predicted = read_labels(labels)?;
    let truth = read_labels(truth)?;
    let report = score(&truth, &predicted)?;
    let outputs = match output {
        Some(o) => write_all(&[(o, to_json(&report))])?,
        None => Vec::new(),
    };
    let stage = StageReport {
        stage: "evaluate",
        outputs,
        details: serde_json::json!({"f1": report.f1, "precision": report.precision, "recall": report.recall}),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, stage))
}

fn elapsed_since(timings: &mut BTreeMap<String, f64>, stage: &str, start: Instant) {
    timings.insert(stage.to_string(), start.elapsed().as_secs_f64());
}

pub struct PipelineRun {
    pub report: RunReport,
    pub burst: Burst,
    pub points: Vec<ProductPoint>,
    pub model: ClusterModel,
    pub truth: Option<Vec<usize>>,
}

/// Every stage in-process: simulate (or read `io.burst`), estimate, cluster
/// and, when ground truth is available, evaluate.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineRun> {
    let config = config.resolved();
    let mut timings = BTreeMap::new();

    let start = Instant::now();
    let (burst, truth) = match &config.scenario {
        Some(_) => {
            let (b, l) =
                simulate_scenario(&config.scenario()?, Exec::Parallel).map_err(|e| CliError::stage("simulate", e))?;
            (b, Some(l))
        }
        None => {
            let path = config.io.burst.as_ref().ok_or(CliError::MissingPath("scenario or io.burst"))?;
            let truth = config.io.truth.as_deref().map(read_labels).transpose()?;
            (read_burst(path)?, truth)
        }
    };
    let source = if config.scenario.is_some() { "simulate" } else { "read" };
    elapsed_since(&mut timings, source, start);

    let start = Instant::now();
    let points = estimate_points(&burst, &config.burg)?;
    elapsed_since(&mut timings, "estimate", start);

    let start = Instant::now();
    let model = cluster_points(&points, &config.kmeans_options()?)?;
    elapsed_since(&mut timings, "cluster", start);

    let start = Instant::now();
    let eval = truth.as_deref().map(|t| score(t, &model.labels)).transpose()?;
    elapsed_since(&mut timings, "evaluate", start);

    let report = RunReport {
        labels: model.labels.clone(),
        centroids: model.centroids.iter().map(|c| c.reflection()).collect(),
        inertia: model.inertia,
        n_iter: model.n_iter,
        converged: model.converged,
        karcher_failures: model.karcher_failures,
        eval,
        timings,
        config,
    };
    Ok(PipelineRun {
        report,
        burst,
        points,
        model,
        truth,
    })
}

pub fn cmd_pipeline(config: &PipelineConfig, output: Option<&Path>) -> Result<RunReport> {
    let PipelineRun {
        report,
        burst,
        points,
        model,
        truth,
    } = run_pipeline(config)?;
    let io = &config.io;
    let mut files: Vec<(&Path, String)> = Vec::new();
    if config.scenario.is_some() {
        if let Some(p) = &io.burst {
            files.push((p, format_burst(&burst)));
        }
        if let (Some(p), Some(t)) = (&io.truth, &truth) {
            files.push((p, to_json(t)));
        }
    }
    if let Some(p) = &io.points {
        files.push((p, format_points(&points)));
    }
    if let Some(p) = &io.model {
        files.push((p, to_json(&model)));
    }
    if let Some(p) = output.or(io.report.as_deref()) {
        files.push((p, to_json(&report)));
    }
    write_all(&files)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Center {
    Median,
    Mean,
}

pub fn spectrum_center(points: &[ProductPoint], center: Center) -> Result<(ProductPoint, bool)> {
    let w = uniform_weights(points.len());
    let opts = FlowOptions::default();
    let result = match center {
        Center::Median => frechet_median(points, &w, &opts),
        Center::Mean => karcher_mean(points, &w, &opts),
    };
    best_effort(result).map_err(|e| CliError::stage("spectrum", e))
}

pub fn format_spectrum(power: &[f64]) -> String {
    let mut out = String::from("frequency,power\n");
    for (j, p) in power.iter().enumerate() {
        out.push_str(&format!("{},{}\n", spectrum_frequency(j, power.len()), p));
    }
    out
}

pub fn cmd_spectrum(input: &Path, output: &Path, center: Center, n_freq: usize) -> Result<StageReport> {
    let start = Instant::now();
    let points = read_points(input)?;
    let (point, converged) = spectrum_center(&points, center)?;
    let model = levinson(&point.reflection());
    let power = doppler_spectrum(&model, n_freq).map_err(|e| CliError::stage("spectrum", e))?;
    let peak = power
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (j, &p)| if p > best.1 { (j, p) } else { best });
    let outputs = write_all(&[(output, format_spectrum(&power))])?;
    Ok(StageReport {
        stage: "spectrum",
        outputs,
        details: serde_json::json!({
            "center": point.reflection(),
            "center_converged": converged,
            "peak_frequency": spectrum_frequency(peak.0, n_freq),
            "peak_power": peak.1,
        }),
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsPair {
    a: SiegelParams,
    b: SiegelParams,
}

/// Block-Toeplitz distance between the `a` and `b` parameter sets of a JSON
/// document.
pub fn cmd_siegel_distance(input: &Path, norm: SiegelNorm) -> Result<f64> {
    let text = read_text(input)?;
    let pair: ParamsPair = serde_json::from_str(&text).map_err(|e| CliError::MalformedFile {
        path: input.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    block_toeplitz_distance(&pair.a, &pair.b, norm).map_err(|e| CliError::stage("siegel-distance", e))
}
