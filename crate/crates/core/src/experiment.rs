//! Experiment drivers: estimator accuracy against known dimension, the
//! uniform-variant study, and LID-DBSCAN on the T presets.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::cluster::{assign_subspaces, cluster_assignment};
use crate::error::{Error, Result};
use crate::lid::{hill_distances, sum_hill_projections, sum_w_hill_projections, Estimator, EstimatorConfig, Query};
use crate::metrics::{ami, ari, nmi, recall};
use crate::neighbors::{knn, Norm};
use crate::synth::{gen_t_preset, gen_uniform_ball, gen_uniform_variant, TPreset, UniformKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentName {
    Fig2,
    Fig3,
    Table3,
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentName::Fig2 => "fig2",
            ExperimentName::Fig3 => "fig3",
            ExperimentName::Table3 => "table3",
        })
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(ExperimentName::Fig2),
            "fig3" => Ok(ExperimentName::Fig3),
            "table3" => Ok(ExperimentName::Table3),
            _ => Err(Error::Unknown {
                what: "experiment",
                name: s.to_string(),
            }),
        }
    }
}

/// Default largest dimension for the dimension sweeps.
pub const DEFAULT_MAX_M: usize = 256;

/// Offset separating the cube stream from the ball stream of a run.
const CUBE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// 2, 4, 8, ... up to and including `max_m`.
pub fn powers_of_two(max_m: usize) -> Vec<usize> {
    std::iter::successors(Some(2usize), |m| m.checked_mul(2))
        .take_while(|&m| m <= max_m)
        .collect()
}

/// Mean with a two-sided 95% Student-t interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    pub ci95: Option<(f64, f64)>,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            runs: 0,
            mean: f64::NAN,
            std: f64::NAN,
            ci95: None,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Summary {
            runs: 1,
            mean,
            std: 0.0,
            ci95: None,
        };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.975);
    let half = t * std / (n as f64).sqrt();
    Summary {
        runs: n,
        mean,
        std,
        ci95: Some((mean - half, mean + half)),
    }
}

/// One aggregated output line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub dataset: String,
    pub estimator: String,
    pub m: usize,
    pub summary: Summary,
    pub detail: String,
}

/// Renders rows as CSV. CI columns are written only when some row has more than one run.
pub fn rows_to_csv(rows: &[SummaryRow], comment: Option<&str>) -> String {
    let with_ci = rows.iter().any(|r| r.summary.runs > 1);
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str("experiment,dataset,estimator,m,runs,mean");
    if with_ci {
        out.push_str(",std,ci95_low,ci95_high");
    }
    out.push_str(",detail\n");
    for r in rows {
        let s = &r.summary;
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            r.experiment, r.dataset, r.estimator, r.m, s.runs, s.mean
        ));
        if with_ci {
            match s.ci95 {
                Some((lo, hi)) => out.push_str(&format!(",{},{lo},{hi}", s.std)),
                None => out.push_str(&format!(",{},,", s.std)),
            }
        }
        out.push_str(&format!(",{}\n", r.detail));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Config {
    pub dims: Vec<usize>,
    pub k: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Fig2Config {
    pub fn new(max_m: usize, k: usize, runs: usize, seed: u64) -> Self {
        Fig2Config {
            dims: powers_of_two(max_m),
            k,
            runs,
            seed,
        }
    }
}

/// Estimates from one (m, run) cell: ball data for the distance and weighted
/// estimators, cube data for the box estimator, both of size k around the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig2Cell {
    pub m: usize,
    pub run: usize,
    pub hill_distances: f64,
    pub sum_hill_projections: f64,
    pub sum_w_hill_projections: f64,
}

pub const FIG2_ESTIMATORS: [&str; 3] = [
    "hill_distances",
    "sum_hill_projections",
    "sum_w_hill_projections",
];

impl Fig2Cell {
    pub fn get(&self, estimator: &str) -> Option<f64> {
        match estimator {
            "hill_distances" => Some(self.hill_distances),
            "sum_hill_projections" => Some(self.sum_hill_projections),
            "sum_w_hill_projections" => Some(self.sum_w_hill_projections),
            _ => None,
        }
    }
}

fn check_runs(runs: usize) -> Result<()> {
    if runs == 0 {
        return Err(Error::invalid("runs", "must be at least 1"));
    }
    Ok(())
}

pub fn fig2_cell(m: usize, k: usize, seed: u64, run: usize, cfg: &EstimatorConfig) -> Result<Fig2Cell> {
    let s = seed.wrapping_add(run as u64);
    let origin = vec![0.0; m];
    let ball = gen_uniform_ball(k, m, 1.0, s)?;
    let nbhd = knn(&ball, &origin, k, Norm::Euclidean, None)?;
    let hd = hill_distances(&nbhd, cfg)?;
    let sw = sum_w_hill_projections(&ball, Query::Point(&origin), k, cfg)?;
    let cube = gen_uniform_variant(UniformKind::UniformCube, k, m, s.wrapping_add(CUBE_SEED_OFFSET))?;
    let sh = sum_hill_projections(&cube, Query::Point(&origin), k, cfg)?;
    Ok(Fig2Cell {
        m,
        run,
        hill_distances: hd,
        sum_hill_projections: sh.axis_sum(),
        sum_w_hill_projections: sw.axis_sum(),
    })
}

/// All cells, ordered by m then run.
pub fn fig2_cells(config: &Fig2Config, cfg: &EstimatorConfig) -> Result<Vec<Fig2Cell>> {
    check_runs(config.runs)?;
    let jobs: Vec<(usize, usize)> = config
        .dims
        .iter()
        .flat_map(|&m| (0..config.runs).map(move |r| (m, r)))
        .collect();
    jobs.par_iter()
        .map(|&(m, r)| fig2_cell(m, config.k, config.seed, r, cfg))
        .collect()
}

pub fn fig2(config: &Fig2Config, cfg: &EstimatorConfig) -> Result<Vec<SummaryRow>> {
    let cells = fig2_cells(config, cfg)?;
    let mut rows = Vec::new();
    for &m in &config.dims {
        for est in FIG2_ESTIMATORS {
            let values: Vec<f64> = cells
                .iter()
                .filter(|c| c.m == m)
                .filter_map(|c| c.get(est))
                .collect();
            rows.push(SummaryRow {
                experiment: "fig2".into(),
                dataset: if est == "sum_hill_projections" {
                    "uniform_cube".into()
                } else {
                    "uniform_ball".into()
                },
                estimator: est.into(),
                m,
                summary: summarize(&values),
                detail: format!("k={}", config.k),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Config {
    pub kinds: Vec<UniformKind>,
    pub dims: Vec<usize>,
    pub k: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Fig3Config {
    pub fn new(max_m: usize, k: usize, runs: usize, seed: u64) -> Self {
        Fig3Config {
            kinds: UniformKind::ALL.to_vec(),
            dims: powers_of_two(max_m),
            k,
            runs,
            seed,
        }
    }
}

/// `axis_sum` of `sum_hill_projections` at the origin over `k` points of `kind`.
pub fn fig3_value(kind: UniformKind, m: usize, k: usize, seed: u64, cfg: &EstimatorConfig) -> Result<f64> {
    let data = gen_uniform_variant(kind, k, m, seed)?;
    let origin = vec![0.0; m];
    Ok(sum_hill_projections(&data, Query::Point(&origin), k, cfg)?.axis_sum())
}

pub fn fig3(config: &Fig3Config, cfg: &EstimatorConfig) -> Result<Vec<SummaryRow>> {
    check_runs(config.runs)?;
    let jobs: Vec<(UniformKind, usize)> = config
        .kinds
        .iter()
        .flat_map(|&kind| config.dims.iter().map(move |&m| (kind, m)))
        .collect();
    jobs.par_iter()
        .map(|&(kind, m)| {
            let values = (0..config.runs)
                .map(|r| fig3_value(kind, m, config.k, config.seed.wrapping_add(r as u64), cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(SummaryRow {
                experiment: "fig3".into(),
                dataset: kind.to_string(),
                estimator: "sum_hill_projections".into(),
                m,
                summary: summarize(&values),
                detail: format!("k={};expected={}", config.k, kind.active_axes(m)),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Config {
    pub presets: Vec<TPreset>,
    pub cluster_size: usize,
    pub k: usize,
    pub estimator: Estimator,
    pub rho: f64,
    pub min_pts: usize,
    pub eps_grid: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
}

impl Default for Table3Config {
    fn default() -> Self {
        Table3Config {
            presets: vec![TPreset::T1, TPreset::T2, TPreset::T3],
            cluster_size: crate::synth::DEFAULT_CLUSTER_SIZE,
            k: 100,
            estimator: Estimator::UnweightedLinf,
            rho: 0.02,
            min_pts: 5,
            eps_grid: vec![0.05, 0.1, 0.2, 0.3, 0.5],
            runs: 1,
            seed: 0,
        }
    }
}

/// Scores of the best grid point (by NMI) for one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringScores {
    pub eps: f64,
    pub nmi: f64,
    pub ami: f64,
    pub ari: f64,
    pub recall: f64,
    pub clusters: usize,
}

/// Runs LID-DBSCAN over `eps_grid` (subspace stage shared) and keeps the best NMI.
/// Earlier grid points win ties.
pub fn best_over_eps(
    data: &crate::dataset::Dataset,
    k: usize,
    estimator: Estimator,
    rho: f64,
    min_pts: usize,
    eps_grid: &[f64],
    cfg: &EstimatorConfig,
) -> Result<ClusteringScores> {
    let truth = data
        .true_labels()
        .ok_or_else(|| Error::invalid("dataset", "ground-truth labels required"))?;
    if eps_grid.is_empty() {
        return Err(Error::invalid("eps grid", "empty"));
    }
    let assignment = assign_subspaces(data, k, estimator, rho, None, cfg)?;
    let mut best: Option<ClusteringScores> = None;
    for &eps in eps_grid {
        let result = cluster_assignment(data, &assignment, eps, min_pts)?;
        let pred = result.labels();
        let scores = ClusteringScores {
            eps,
            nmi: nmi(truth, pred)?,
            ami: ami(truth, pred)?,
            ari: ari(truth, pred)?,
            recall: recall(truth, pred)?,
            clusters: result.cluster_count(),
        };
        if best.is_none_or(|b| scores.nmi > b.nmi) {
            best = Some(scores);
        }
    }
    Ok(best.expect("grid is nonempty"))
}

pub fn table3(config: &Table3Config, cfg: &EstimatorConfig) -> Result<Vec<SummaryRow>> {
    check_runs(config.runs)?;
    let mut rows = Vec::new();
    for &preset in &config.presets {
        let runs = (0..config.runs)
            .map(|r| {
                let data = gen_t_preset(preset, config.cluster_size, config.seed.wrapping_add(r as u64))?;
                best_over_eps(
                    &data,
                    config.k,
                    config.estimator,
                    config.rho,
                    config.min_pts,
                    &config.eps_grid,
                    cfg,
                )
                .map(|s| (data.m(), s))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = runs[0].0;
        let eps_used: Vec<String> = runs.iter().map(|(_, s)| s.eps.to_string()).collect();
        let metrics: [(&str, fn(&ClusteringScores) -> f64); 4] = [
            ("nmi", |s| s.nmi),
            ("ami", |s| s.ami),
            ("ari", |s| s.ari),
            ("recall", |s| s.recall),
        ];
        for (name, get) in metrics {
            let values: Vec<f64> = runs.iter().map(|(_, s)| get(s)).collect();
            rows.push(SummaryRow {
                experiment: "table3".into(),
                dataset: format!("{preset:?}").to_lowercase(),
                estimator: config.estimator.to_string(),
                m,
                summary: summarize(&values),
                detail: format!(
                    "metric={name};k={};rho={};min_pts={};best_eps={}",
                    config.k,
                    config.rho,
                    config.min_pts,
                    eps_used.join("|")
                ),
            });
        }
    }
    Ok(rows)
}
