//! Local intrinsic dimensionality estimators.
//!
//! Three estimators share one building block, the (weighted) Hill estimator with
//! threshold `w`:
//!
//! ```text
//! ID = ( -(1 / Σ ω_j) · Σ ω_j · ln(|p_j| / w) )^-1
//! ```
//!
//! * [`hill_distances`] applies it to neighbor distances with unit weights, giving the
//!   ordinary MLE of the total LID.
//! * [`sum_hill_projections`] applies it per coordinate axis to the query-centered
//!   projections of an L∞ (box) neighborhood, unit weights.
//! * [`sum_w_hill_projections`] does the same on a Euclidean neighborhood and weights
//!   each projection by `(1 - u²)^(-(m-1)/2)`, undoing the bias of a ball toward small
//!   projections.
//!
//! The per-axis estimates of one query form a [`LidDecomposition`]; their sum
//! estimates the total LID.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::neighbors::{knn, Neighborhood, Norm};

/// Threshold used by the weighted per-axis estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedThreshold {
    /// Largest absolute projection over all members and axes (the L∞ extent of the
    /// neighborhood). Weights still use `u = |p_i| / R` with `R` the Euclidean radius.
    LinfExtent,
    /// The Euclidean radius `R` itself.
    EuclideanRadius,
}

/// Guards for degenerate inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Ratios `|p| / w` below this are clamped up to it.
    pub zero_floor: f64,
    /// Lower bound on `1 - u²` inside the projection weight.
    pub weight_clamp: f64,
    pub weighted_threshold: WeightedThreshold,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            zero_floor: 1e-12,
            weight_clamp: 1e-12,
            weighted_threshold: WeightedThreshold::LinfExtent,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("zero_floor", self.zero_floor),
            ("weight_clamp", self.weight_clamp),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(what, format!("{v} is not in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Which per-axis estimator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// L∞ neighborhood, unit weights (`sum_hill_projections`).
    UnweightedLinf,
    /// Euclidean neighborhood, bias-correcting weights (`sum_w_hill_projections`).
    WeightedL2,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::UnweightedLinf => "unweighted_linf",
            Estimator::WeightedL2 => "weighted_l2",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unweighted_linf" | "sum_hill_projections" | "linf" => Ok(Estimator::UnweightedLinf),
            "weighted_l2" | "sum_w_hill_projections" | "l2" => Ok(Estimator::WeightedL2),
            _ => Err(Error::Unknown {
                what: "estimator",
                name: s.to_string(),
            }),
        }
    }
}

/// Where the neighborhood is centered.
#[derive(Debug, Clone, Copy)]
pub enum Query<'a> {
    /// An arbitrary point; every dataset row is a candidate neighbor.
    Point(&'a [f64]),
    /// A dataset row; the row itself is excluded from its neighborhood.
    Row(usize),
}

impl<'a> Query<'a> {
    pub(crate) fn resolve(self, data: &'a Dataset) -> Result<(&'a [f64], Option<usize>)> {
        match self {
            Query::Point(p) => Ok((p, None)),
            Query::Row(i) if i < data.n() => Ok((data.row(i), Some(i))),
            Query::Row(i) => Err(Error::invalid(
                "query index",
                format!("{i} out of range for n = {}", data.n()),
            )),
        }
    }
}

/// Per-axis LID estimates for one query, plus a distance-based total for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct LidDecomposition {
    per_axis: Vec<f64>,
    total_distance_id: f64,
}

impl LidDecomposition {
    pub fn new(per_axis: Vec<f64>, total_distance_id: f64) -> Result<Self> {
        if per_axis.is_empty() {
            return Err(Error::invalid("decomposition", "no axes"));
        }
        if per_axis
            .iter()
            .chain(std::iter::once(&total_distance_id))
            .any(|v| !(*v >= 0.0) || v.is_nan())
        {
            return Err(Error::invalid(
                "decomposition",
                "estimates must be nonnegative",
            ));
        }
        Ok(LidDecomposition {
            per_axis,
            total_distance_id,
        })
    }

    pub fn per_axis(&self) -> &[f64] {
        &self.per_axis
    }

    pub fn total_distance_id(&self) -> f64 {
        self.total_distance_id
    }

    /// Sum of the per-axis estimates.
    pub fn axis_sum(&self) -> f64 {
        self.per_axis.iter().sum()
    }
}

#[derive(Serialize, Deserialize)]
struct DecompositionDoc {
    per_axis: Vec<f64>,
    axis_sum: f64,
    total_distance_id: f64,
}

impl Serialize for LidDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DecompositionDoc {
            per_axis: self.per_axis.clone(),
            axis_sum: self.axis_sum(),
            total_distance_id: self.total_distance_id,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LidDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = DecompositionDoc::deserialize(d)?;
        // axis_sum is derived; the stored copy is ignored.
        LidDecomposition::new(doc.per_axis, doc.total_distance_id).map_err(serde::de::Error::custom)
    }
}

/// MLE (Hill) estimate of the total LID from the member distances of a Euclidean
/// neighborhood, with `w` the neighborhood radius.
pub fn hill_distances(nbhd: &Neighborhood, cfg: &EstimatorConfig) -> Result<f64> {
    if nbhd.norm() != Norm::Euclidean {
        return Err(Error::invalid(
            "neighborhood",
            "hill_distances needs a Euclidean neighborhood",
        ));
    }
    let w = nbhd.radius();
    if w <= 0.0 {
        return Err(Error::DegenerateNeighborhood);
    }
    let floor = cfg.zero_floor;
    let moment = -nbhd
        .distances()
        .iter()
        .map(|d| (d / w).max(floor).ln())
        .sum::<f64>()
        / nbhd.k() as f64;
    if moment <= 0.0 {
        return Err(Error::ZeroLogMoment);
    }
    Ok(moment.recip())
}

/// Bias-correction weight `(1 - u²)^(-(m-1)/2)` for a projection at relative
/// position `u = |p_i| / R` inside an m-ball of radius `R`.
pub fn projection_weight(u: f64, m: usize, cfg: &EstimatorConfig) -> f64 {
    projection_log_weight(u, m, cfg).exp()
}

/// Natural log of [`projection_weight`]; finite even where the weight overflows.
pub fn projection_log_weight(u: f64, m: usize, cfg: &EstimatorConfig) -> f64 {
    if m <= 1 {
        return 0.0;
    }
    let base = (1.0 - u * u).max(cfg.weight_clamp);
    -0.5 * (m as f64 - 1.0) * base.ln()
}

/// Weighted Hill estimate along one axis.
///
/// `projections` are query-centered coordinates, `w` the shared threshold. Returns
/// exactly 0 when every projection is below `zero_floor · w`.
pub fn axis_hill(
    projections: &[f64],
    w: f64,
    weights: &[f64],
    cfg: &EstimatorConfig,
) -> Result<f64> {
    if weights.len() != projections.len() {
        return Err(Error::DimensionMismatch {
            expected: projections.len(),
            got: weights.len(),
        });
    }
    let log_weights: Vec<f64> = weights.iter().map(|v| v.ln()).collect();
    axis_hill_log_weighted(projections, w, &log_weights, cfg)
}

/// [`axis_hill`] with weights given as logarithms. Only weight ratios matter, so the
/// weights are rescaled by their maximum before use.
pub fn axis_hill_log_weighted(
    projections: &[f64],
    w: f64,
    log_weights: &[f64],
    cfg: &EstimatorConfig,
) -> Result<f64> {
    if projections.is_empty() || log_weights.len() != projections.len() {
        return Err(Error::DimensionMismatch {
            expected: projections.len().max(1),
            got: log_weights.len(),
        });
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::invalid("threshold", format!("w = {w} must be positive")));
    }
    if let Some(p) = projections.iter().find(|p| p.abs() > w) {
        return Err(Error::ProjectionExceedsThreshold {
            projection: *p,
            threshold: w,
        });
    }
    let floor = cfg.zero_floor;
    if projections.iter().all(|p| p.abs() / w < floor) {
        return Ok(0.0);
    }
    let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::invalid("weights", "weights must be finite and positive"));
    }
    let mut weight_sum = 0.0;
    let mut weighted_log = 0.0;
    for (p, lw) in projections.iter().zip(log_weights) {
        let omega = (lw - top).exp();
        weight_sum += omega;
        weighted_log += omega * (p.abs() / w).max(floor).ln();
    }
    let moment = -weighted_log / weight_sum;
    if moment <= 0.0 {
        return Err(Error::ZeroLogMoment);
    }
    Ok(moment.recip())
}

/// Query-centered projections of the neighborhood members, one vector per axis.
fn centered_projections(data: &Dataset, nbhd: &Neighborhood) -> Vec<Vec<f64>> {
    let q = nbhd.query();
    let mut axes = vec![Vec::with_capacity(nbhd.k()); data.m()];
    for &i in nbhd.members() {
        for (axis, (x, qx)) in axes.iter_mut().zip(data.row(i).iter().zip(q)) {
            axis.push(x - qx);
        }
    }
    axes
}

/// Per-axis unit-weight Hill estimates over the L∞ k-neighborhood of the query.
///
/// The threshold is the L∞ radius. `total_distance_id` comes from [`hill_distances`]
/// on a separate Euclidean k-neighborhood.
pub fn sum_hill_projections(
    data: &Dataset,
    query: Query<'_>,
    k: usize,
    cfg: &EstimatorConfig,
) -> Result<LidDecomposition> {
    cfg.validate()?;
    let (q, exclude) = query.resolve(data)?;
    let box_nbhd = knn(data, q, k, Norm::Infinity, exclude)?;
    let w = box_nbhd.radius();
    if w <= 0.0 {
        return Err(Error::DegenerateNeighborhood);
    }
    let ones = vec![0.0; k];
    let per_axis = centered_projections(data, &box_nbhd)
        .iter()
        .map(|proj| axis_hill_log_weighted(proj, w, &ones, cfg))
        .collect::<Result<Vec<_>>>()?;
    let ball = knn(data, q, k, Norm::Euclidean, exclude)?;
    let total = hill_distances(&ball, cfg)?;
    LidDecomposition::new(per_axis, total)
}

/// Per-axis bias-weighted Hill estimates over the Euclidean k-neighborhood.
///
/// Weights are `projection_weight(|p_i| / R, m)` with `R` the Euclidean radius and `m`
/// the ambient dimension. The Hill threshold follows `cfg.weighted_threshold`.
pub fn sum_w_hill_projections(
    data: &Dataset,
    query: Query<'_>,
    k: usize,
    cfg: &EstimatorConfig,
) -> Result<LidDecomposition> {
    cfg.validate()?;
    let (q, exclude) = query.resolve(data)?;
    let nbhd = knn(data, q, k, Norm::Euclidean, exclude)?;
    let radius = nbhd.radius();
    if radius <= 0.0 {
        return Err(Error::DegenerateNeighborhood);
    }
    let m = data.m();
    let axes = centered_projections(data, &nbhd);
    let w = match cfg.weighted_threshold {
        WeightedThreshold::EuclideanRadius => radius,
        WeightedThreshold::LinfExtent => axes
            .iter()
            .flatten()
            .map(|p| p.abs())
            .fold(0.0, f64::max),
    };
    let per_axis = axes
        .iter()
        .map(|proj| {
            let log_w: Vec<f64> = proj
                .iter()
                .map(|p| projection_log_weight(p.abs() / radius, m, cfg))
                .collect();
            axis_hill_log_weighted(proj, w, &log_w, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = hill_distances(&nbhd, cfg)?;
    LidDecomposition::new(per_axis, total)
}

/// Runs the chosen per-axis estimator.
pub fn decompose(
    data: &Dataset,
    query: Query<'_>,
    k: usize,
    estimator: Estimator,
    cfg: &EstimatorConfig,
) -> Result<LidDecomposition> {
    match estimator {
        Estimator::UnweightedLinf => sum_hill_projections(data, query, k, cfg),
        Estimator::WeightedL2 => sum_w_hill_projections(data, query, k, cfg),
    }
}
