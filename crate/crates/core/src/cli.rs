//! Command-line front end.
//!
//! Any long flag may also come from a JSON object passed with `--config`. Top-level
//! keys apply to every subcommand that has such a flag; a key named after a
//! subcommand holds an object whose keys must all be flags of that subcommand.
//! Flags given on the command line win over the config file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cluster::{lid_dbscan, parse_labels_csv, parse_subspaces_json, ClusteringResult, LidDbscanParams};
use crate::dataset::{AttributeSet, Dataset, Label};
use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentName, Fig2Config, Fig3Config, Table3Config};
use crate::io::{self, DataFormat, GroundTruth};
use crate::lid::{decompose, Estimator, EstimatorConfig, LidDecomposition, Query};
use crate::metrics::{self, Metric};
use crate::synth::{self, GaussianSubspaceSpec, ManifoldKind, TPreset, UniformKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "lidspace", version, about = "Axis-wise LID estimation and subspace clustering")]
pub struct Cli {
    /// JSON file supplying default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset (CSV) and its ground truth (JSON).
    Generate(GenerateArgs),
    /// Per-axis LID estimates for one or all points.
    Estimate(EstimateArgs),
    /// LID-DBSCAN: labels CSV plus cluster subspace JSON.
    Cluster(ClusterArgs),
    /// Compare a prediction with ground truth.
    Evaluate(EvaluateArgs),
    /// Run one of the bundled experiments.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// ball, uniform, single_uniform, semi_uniform, almost_single_uniform,
    /// almost_semi_uniform, t1, t2, t3, dish3d, gaussian_subspace, or a manifold
    /// (m1, m2, m5, m7, m9, m10, m11, m12, sphere:D, affine:D, hypercube:D, gaussian:D).
    pub generator: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of points (ball, uniform variants, manifolds).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Dimension (ball, uniform variants).
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Points per cluster (t1, t2, t3, dish3d).
    #[arg(long, default_value_t = synth::DEFAULT_CLUSTER_SIZE)]
    pub cluster_size: usize,
    /// Uniform noise points (dish3d; default 10% of the total).
    #[arg(long)]
    pub noise_points: Option<usize>,
    /// Total coordinates for manifolds (default: the manifold's own).
    #[arg(long)]
    pub ambient_dim: Option<usize>,
    /// JSON cluster layout for gaussian_subspace.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    /// Ground-truth JSON path (default: next to --out with a .truth.json suffix).
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, conflicts_with = "all", required_unless_present = "all")]
    pub query_index: Option<usize>,
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    #[arg(long, default_value = "weighted_l2")]
    pub estimator: Estimator,
    /// Output file; `.json` gives JSON, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    #[arg(long, default_value = "unweighted_linf")]
    pub estimator: Estimator,
    /// Minimum support fraction of a subspace profile.
    #[arg(long, default_value_t = 0.02)]
    pub rho: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: f64,
    #[arg(long, default_value_t = 5)]
    pub min_pts: usize,
    /// Labels CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Cluster subspace JSON path (default: next to --out with a .subspaces.json suffix).
    #[arg(long)]
    pub subspaces_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Ground-truth JSON, or a dataset CSV with a label column.
    #[arg(long)]
    pub truth: PathBuf,
    /// Predicted labels CSV.
    #[arg(long)]
    pub pred: PathBuf,
    /// Cluster subspace JSON for subspace metrics (default: derived from --pred if present).
    #[arg(long)]
    pub pred_subspaces: Option<PathBuf>,
    /// Comma-separated metric names (default: every metric the inputs support).
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<Metric>>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub name: ExperimentName,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Largest dimension of the fig2/fig3 sweeps.
    #[arg(long, default_value_t = experiment::DEFAULT_MAX_M)]
    pub max_m: usize,
    /// table3: points per cluster.
    #[arg(long, default_value_t = synth::DEFAULT_CLUSTER_SIZE)]
    pub cluster_size: usize,
    /// table3 estimator.
    #[arg(long, default_value = "unweighted_linf")]
    pub estimator: Estimator,
    #[arg(long, default_value_t = 0.02)]
    pub rho: f64,
    #[arg(long, default_value_t = 5)]
    pub min_pts: usize,
    /// table3: comma-separated eps grid.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.3,0.5")]
    pub eps: Vec<f64>,
    /// table3: comma-separated presets.
    #[arg(long, value_delimiter = ',', default_value = "t1,t2,t3")]
    pub presets: Vec<TPreset>,
}

/// Parses `args` (including the program name), merging `--config` values first.
pub fn parse_with_config<I, T>(args: I) -> Result<std::result::Result<Cli, clap::Error>>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let merged = merge_config(&args)?;
    Ok(Cli::try_parse_from(merged))
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn flag_present(args: &[OsString], flag: &str) -> bool {
    let long = format!("--{flag}");
    let with_eq = format!("--{flag}=");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == long || s.starts_with(&with_eq)
    })
}

fn config_value(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Array(items) => Ok(items
            .iter()
            .map(config_value)
            .collect::<Result<Vec<_>>>()?
            .join(",")),
        other => Err(Error::invalid("config", format!("unsupported value {other}"))),
    }
}

fn merge_config(args: &[OsString]) -> Result<Vec<OsString>> {
    let Some(path) = config_path(args) else {
        return Ok(args.to_vec());
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let doc: Value = serde_json::from_str(&text)?;
    let Value::Object(top) = doc else {
        return Err(Error::invalid("config", "top level must be a JSON object"));
    };
    let command = Cli::command();
    let Some(sub) = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find_map(|a| command.find_subcommand(a))
    else {
        return Ok(args.to_vec());
    };
    let flags: Vec<String> = sub
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let to_flag = |key: &str| key.replace('_', "-");

    let mut entries: Vec<(String, Value, bool)> = Vec::new();
    for (key, value) in &top {
        if command.find_subcommand(key).is_some() {
            continue;
        }
        entries.push((to_flag(key), value.clone(), false));
    }
    if let Some(section) = top.get(sub.get_name()) {
        let Value::Object(section) = section else {
            return Err(Error::invalid("config", format!("{:?} must be an object", sub.get_name())));
        };
        for (key, value) in section {
            entries.retain(|(f, _, _)| *f != to_flag(key));
            entries.push((to_flag(key), value.clone(), true));
        }
    }

    let mut merged = args.to_vec();
    for (flag, value, strict) in entries {
        if flag == "config" {
            continue;
        }
        if !flags.contains(&flag) {
            if strict {
                return Err(Error::invalid(
                    "config",
                    format!("{} has no --{flag} flag", sub.get_name()),
                ));
            }
            continue;
        }
        if flag_present(args, &flag) {
            continue;
        }
        match value {
            Value::Bool(true) => merged.push(format!("--{flag}").into()),
            Value::Bool(false) | Value::Null => {}
            v => merged.push(format!("--{flag}={}", config_value(&v)?).into()),
        }
    }
    Ok(merged)
}

/// Dispatches a parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Estimate(a) => cmd_estimate(&a),
        Command::Cluster(a) => cmd_cluster(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Experiment(a) => cmd_experiment(&a),
    }
}

fn header(command: &str, params: &[(&str, String)]) -> String {
    let params: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("lidspace {VERSION} {command} {}", params.join(" "))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fully resolved generator request; its JSON form is hashed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Ball { n: usize, m: usize, radius: f64 },
    Uniform { kind: UniformKind, n: usize, m: usize },
    TPreset { preset: TPreset, cluster_size: usize },
    Dish3d { n_per_cluster: usize, noise_points: Option<usize> },
    GaussianSubspace { spec: GaussianSubspaceSpec },
    Manifold { kind: ManifoldKind, n: usize, ambient_dim: usize },
}

impl GeneratorSpec {
    pub fn from_args(a: &GenerateArgs) -> Result<Self> {
        let g = a.generator.as_str();
        if g == "ball" {
            return Ok(GeneratorSpec::Ball {
                n: a.n,
                m: a.m,
                radius: a.radius,
            });
        }
        if let Ok(kind) = g.parse::<UniformKind>() {
            return Ok(GeneratorSpec::Uniform { kind, n: a.n, m: a.m });
        }
        if let Ok(preset) = g.parse::<TPreset>() {
            return Ok(GeneratorSpec::TPreset {
                preset,
                cluster_size: a.cluster_size,
            });
        }
        if g == "dish3d" {
            return Ok(GeneratorSpec::Dish3d {
                n_per_cluster: a.cluster_size,
                noise_points: a.noise_points,
            });
        }
        if g == "gaussian_subspace" {
            let path = a
                .spec_file
                .as_ref()
                .ok_or_else(|| Error::invalid("generator", "gaussian_subspace needs --spec-file"))?;
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            return Ok(GeneratorSpec::GaussianSubspace {
                spec: serde_json::from_str(&text)?,
            });
        }
        if let Ok(kind) = g.parse::<ManifoldKind>() {
            return Ok(GeneratorSpec::Manifold {
                kind,
                n: a.n,
                ambient_dim: a.ambient_dim.unwrap_or(kind.touched()),
            });
        }
        Err(Error::Unknown {
            what: "generator",
            name: g.to_string(),
        })
    }

    pub fn generate(&self, seed: u64) -> Result<Dataset> {
        match self {
            GeneratorSpec::Ball { n, m, radius } => synth::gen_uniform_ball(*n, *m, *radius, seed),
            GeneratorSpec::Uniform { kind, n, m } => synth::gen_uniform_variant(*kind, *n, *m, seed),
            GeneratorSpec::TPreset { preset, cluster_size } => {
                synth::gen_t_preset(*preset, *cluster_size, seed)
            }
            GeneratorSpec::Dish3d {
                n_per_cluster,
                noise_points,
            } => synth::gen_dish3d(*n_per_cluster, *noise_points, seed),
            GeneratorSpec::GaussianSubspace { spec } => synth::gen_gaussian_subspace(spec, seed),
            GeneratorSpec::Manifold { kind, n, ambient_dim } => {
                synth::gen_manifold(*kind, *n, *ambient_dim, seed)
            }
        }
    }
}

/// Writes `text` and a newline to stdout; a closed pipe is not an error.
fn print_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let spec = GeneratorSpec::from_args(a)?;
    let data = spec.generate(a.seed)?;
    let spec_json = serde_json::to_string(&json!({ "spec": spec, "seed": a.seed }))?;
    let spec_hash = sha256_hex(spec_json.as_bytes());

    let features = Dataset::from_flat(data.n(), data.m(), data.values().to_vec(), data.attribute_names().to_vec())?;
    let comment = header("generate", &[("spec", spec_json.clone()), ("spec_sha256", spec_hash.clone())]);
    let csv = io::to_csv(&features, Some(&comment));
    io::write_file(&a.out, csv.as_bytes())?;

    let truth_path = a.truth_out.clone().unwrap_or_else(|| sibling(&a.out, ".truth.json"));
    let truth = serde_json::to_string(&GroundTruth::of(&data))?;
    io::write_file(&truth_path, truth.as_bytes())?;

    let manifest = json!({
        "tool": format!("lidspace {VERSION}"),
        "spec": spec,
        "seed": a.seed,
        "spec_sha256": spec_hash,
        "n": data.n(),
        "m": data.m(),
        "files": {
            "data": { "path": a.out, "sha256": sha256_hex(csv.as_bytes()) },
            "truth": { "path": truth_path, "sha256": sha256_hex(truth.as_bytes()) },
        },
    });
    print_stdout(&serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

fn load(path: &Path) -> Result<Dataset> {
    io::load_dataset(path, DataFormat::from_path(path))
}

#[derive(Serialize)]
struct EstimateRow<'a> {
    query_index: usize,
    #[serde(flatten)]
    decomposition: &'a LidDecomposition,
}

fn cmd_estimate(a: &EstimateArgs) -> Result<()> {
    let data = load(&a.data)?;
    let cfg = EstimatorConfig::default();
    let queries: Vec<usize> = match a.query_index {
        Some(i) => vec![i],
        None => (0..data.n()).collect(),
    };
    let results = queries
        .par_iter()
        .map(|&i| decompose(&data, Query::Row(i), a.k, a.estimator, &cfg))
        .collect::<Result<Vec<_>>>()?;

    let text = match DataFormat::from_path(&a.out) {
        DataFormat::Json => {
            let rows: Vec<EstimateRow> = queries
                .iter()
                .zip(&results)
                .map(|(&query_index, decomposition)| EstimateRow {
                    query_index,
                    decomposition,
                })
                .collect();
            serde_json::to_string_pretty(&rows)?
        }
        DataFormat::Csv => {
            let comment = header(
                "estimate",
                &[
                    ("data", a.data.display().to_string()),
                    ("k", a.k.to_string()),
                    ("estimator", a.estimator.to_string()),
                ],
            );
            let mut out = format!("# {comment}\nquery_index,axis_sum,total_distance_id");
            for name in data.attribute_names() {
                out.push_str(&format!(",id_{name}"));
            }
            out.push('\n');
            for (q, d) in queries.iter().zip(&results) {
                out.push_str(&format!("{q},{},{}", d.axis_sum(), d.total_distance_id()));
                for v in d.per_axis() {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
            out
        }
    };
    io::write_file(&a.out, text.as_bytes())
}

fn cmd_cluster(a: &ClusterArgs) -> Result<()> {
    let data = load(&a.data)?;
    let params = LidDbscanParams::new(a.k, a.estimator, a.rho, a.eps, a.min_pts);
    let result = lid_dbscan(&data, &params)?;
    let comment = header(
        "cluster",
        &[
            ("data", a.data.display().to_string()),
            ("k", a.k.to_string()),
            ("estimator", a.estimator.to_string()),
            ("rho", a.rho.to_string()),
            ("eps", a.eps.to_string()),
            ("min_pts", a.min_pts.to_string()),
        ],
    );
    io::write_file(&a.out, result.labels_csv(Some(&comment)).as_bytes())?;
    let sub_path = a.subspaces_out.clone().unwrap_or_else(|| sibling(&a.out, ".subspaces.json"));
    io::write_file(&sub_path, result.subspaces_json()?.as_bytes())?;
    eprintln!(
        "{} clusters, {} noise points",
        result.cluster_count(),
        result.labels().iter().filter(|&&l| l == crate::dataset::NOISE).count()
    );
    Ok(())
}

fn load_truth_any(path: &Path) -> Result<GroundTruth> {
    if DataFormat::from_path(path) == DataFormat::Json {
        return io::load_truth(path);
    }
    let data = load(path)?;
    let truth = GroundTruth::of(&data);
    if truth.labels.is_none() {
        return Err(Error::invalid("truth", format!("{} has no label column", path.display())));
    }
    Ok(truth)
}

/// Predicted per-point subspaces from labels and the cluster subspace map.
fn point_subspaces(labels: &[Label], map: &BTreeMap<Label, AttributeSet>) -> Result<Vec<AttributeSet>> {
    ClusteringResult::new(labels.to_vec(), map.clone()).map(|r| r.point_subspaces())
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let truth = load_truth_any(&a.truth)?;
    let pred_text = fs::read_to_string(&a.pred).map_err(|e| Error::io(&a.pred, e))?;
    let pred_labels = parse_labels_csv(&pred_text)?;

    let sub_path = a.pred_subspaces.clone().or_else(|| {
        let p = sibling(&a.pred, ".subspaces.json");
        p.exists().then_some(p)
    });
    let pred_subspaces = match sub_path {
        Some(p) => {
            let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            Some(point_subspaces(&pred_labels, &parse_subspaces_json(&text)?)?)
        }
        None => None,
    };

    let requested = match &a.metrics {
        Some(m) => m.clone(),
        None => Metric::ALL
            .into_iter()
            .filter(|m| !m.needs_subspaces() || (truth.subspaces.is_some() && pred_subspaces.is_some()))
            .collect(),
    };
    let report = metrics::evaluate(
        &requested,
        truth.labels.as_deref(),
        Some(&pred_labels),
        truth.subspaces.as_deref(),
        pred_subspaces.as_deref(),
    )?;
    let text = serde_json::to_string_pretty(&report)?;
    match &a.out {
        Some(p) => io::write_file(p, text.as_bytes()),
        None => {
            print_stdout(&text)?;
            Ok(())
        }
    }
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<()> {
    let cfg = EstimatorConfig::default();
    let mut params = vec![
        ("runs", a.runs.to_string()),
        ("seed", a.seed.to_string()),
        ("k", a.k.to_string()),
    ];
    let rows = match a.name {
        ExperimentName::Fig2 => {
            params.push(("max_m", a.max_m.to_string()));
            experiment::fig2(&Fig2Config::new(a.max_m, a.k, a.runs, a.seed), &cfg)?
        }
        ExperimentName::Fig3 => {
            params.push(("max_m", a.max_m.to_string()));
            experiment::fig3(&Fig3Config::new(a.max_m, a.k, a.runs, a.seed), &cfg)?
        }
        ExperimentName::Table3 => {
            let eps: Vec<String> = a.eps.iter().map(f64::to_string).collect();
            params.extend([
                ("cluster_size", a.cluster_size.to_string()),
                ("estimator", a.estimator.to_string()),
                ("rho", a.rho.to_string()),
                ("min_pts", a.min_pts.to_string()),
                ("eps", eps.join("|")),
            ]);
            let config = Table3Config {
                presets: a.presets.clone(),
                cluster_size: a.cluster_size,
                k: a.k,
                estimator: a.estimator,
                rho: a.rho,
                min_pts: a.min_pts,
                eps_grid: a.eps.clone(),
                runs: a.runs,
                seed: a.seed,
            };
            experiment::table3(&config, &cfg)?
        }
    };
    let comment = header(&format!("experiment {}", a.name), &params);
    io::write_file(&a.out, experiment::rows_to_csv(&rows, Some(&comment)).as_bytes())
}
