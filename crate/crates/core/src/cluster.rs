//! DBSCAN inside attribute subspaces, and the two-stage LID-DBSCAN pipeline.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeSet, Dataset, Label, NOISE};
use crate::error::{Error, Result};
use crate::lid::{Estimator, EstimatorConfig};
use crate::subspace::{assign_membership, preference_vectors, SubspacePreference, SubspaceProfileSet};

/// Per-point labels plus the subspace each cluster was found in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClusteringDoc", into = "ClusteringDoc")]
pub struct ClusteringResult {
    labels: Vec<Label>,
    cluster_subspaces: BTreeMap<Label, AttributeSet>,
}

#[derive(Serialize, Deserialize)]
struct ClusteringDoc {
    labels: Vec<Label>,
    cluster_subspaces: BTreeMap<Label, AttributeSet>,
}

impl TryFrom<ClusteringDoc> for ClusteringResult {
    type Error = Error;

    fn try_from(doc: ClusteringDoc) -> Result<Self> {
        ClusteringResult::new(doc.labels, doc.cluster_subspaces)
    }
}

impl From<ClusteringResult> for ClusteringDoc {
    fn from(r: ClusteringResult) -> Self {
        ClusteringDoc {
            labels: r.labels,
            cluster_subspaces: r.cluster_subspaces,
        }
    }
}

impl ClusteringResult {
    /// Labels must be `NOISE` or `0..C`, and every cluster in `0..C` needs a subspace.
    pub fn new(labels: Vec<Label>, cluster_subspaces: BTreeMap<Label, AttributeSet>) -> Result<Self> {
        let count = cluster_subspaces.len() as Label;
        if cluster_subspaces.keys().copied().ne(0..count) {
            return Err(Error::invalid(
                "clustering",
                "cluster ids must be contiguous from 0",
            ));
        }
        if let Some(l) = labels.iter().find(|&&l| l != NOISE && !(0..count).contains(&l)) {
            return Err(Error::invalid(
                "clustering",
                format!("label {l} has no subspace"),
            ));
        }
        Ok(ClusteringResult {
            labels,
            cluster_subspaces,
        })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn cluster_subspaces(&self) -> &BTreeMap<Label, AttributeSet> {
        &self.cluster_subspaces
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_subspaces.len()
    }

    /// Subspace of each point's cluster; empty for noise.
    pub fn point_subspaces(&self) -> Vec<AttributeSet> {
        self.labels
            .iter()
            .map(|l| self.cluster_subspaces.get(l).cloned().unwrap_or_default())
            .collect()
    }

    /// `point_index,label` rows with a header.
    pub fn labels_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str("point_index,label\n");
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("{i},{l}\n"));
        }
        out
    }

    /// JSON sidecar mapping cluster label to attribute list.
    pub fn subspaces_json(&self) -> Result<String> {
        let map: BTreeMap<String, &AttributeSet> = self
            .cluster_subspaces
            .iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Ok(serde_json::to_string_pretty(&map)?)
    }
}

/// Parses a `point_index,label` CSV as written by [`ClusteringResult::labels_csv`].
pub fn parse_labels_csv(text: &str) -> Result<Vec<Label>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut labels = Vec::new();
    for (expected, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let parse = |col: usize| -> Result<i64> {
            rec.get(col)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::Parse {
                    row: line,
                    column: col + 1,
                    message: "expected an integer".into(),
                })
        };
        let idx = parse(0)?;
        if idx != expected as i64 {
            return Err(Error::Parse {
                row: line,
                column: 1,
                message: format!("point_index {idx} out of order, expected {expected}"),
            });
        }
        labels.push(parse(1)?);
    }
    Ok(labels)
}

/// Parses the cluster-subspace sidecar written by [`ClusteringResult::subspaces_json`].
pub fn parse_subspaces_json(text: &str) -> Result<BTreeMap<Label, AttributeSet>> {
    let raw: BTreeMap<String, AttributeSet> = serde_json::from_str(text)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.parse::<Label>()
                .map(|k| (k, v))
                .map_err(|_| Error::invalid("cluster label", k))
        })
        .collect()
}

/// DBSCAN over `points` projected onto `attributes`, Euclidean distance.
///
/// `min_pts` counts the point itself. Points are visited in ascending index order, a
/// border point keeps the first cluster that reaches it, and cluster ids follow
/// discovery order. The returned labels align with `points`.
pub fn dbscan(
    data: &Dataset,
    points: &[usize],
    attributes: &AttributeSet,
    eps: f64,
    min_pts: usize,
) -> Result<Vec<Label>> {
    if points.is_empty() {
        return Err(Error::invalid("dbscan", "no points"));
    }
    if attributes.is_empty() || attributes.bound() > data.m() {
        return Err(Error::invalid(
            "dbscan",
            format!("attribute set {attributes} is empty or out of range"),
        ));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid("eps", format!("{eps} must be positive")));
    }
    if min_pts == 0 {
        return Err(Error::invalid("min_pts", "must be at least 1"));
    }
    if let Some(&i) = points.iter().find(|&&i| i >= data.n()) {
        return Err(Error::invalid("dbscan", format!("point {i} out of range")));
    }

    // Visit order is by dataset index regardless of how `points` is ordered.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&j| points[j]);
    let dims = attributes.len();
    let coords: Vec<f64> = order
        .iter()
        .flat_map(|&j| {
            let row = data.row(points[j]);
            attributes.iter().map(move |a| row[a])
        })
        .collect();
    let n = order.len();
    let eps2 = eps * eps;
    let region = |p: usize| -> Vec<usize> {
        let cp = &coords[p * dims..(p + 1) * dims];
        (0..n)
            .filter(|&q| {
                let cq = &coords[q * dims..(q + 1) * dims];
                cp.iter().zip(cq).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= eps2
            })
            .collect()
    };

    const UNSEEN: Label = -2;
    let mut labels = vec![UNSEEN; n];
    let mut next: Label = 0;
    for p in 0..n {
        if labels[p] != UNSEEN {
            continue;
        }
        let seeds = region(p);
        if seeds.len() < min_pts {
            labels[p] = NOISE;
            continue;
        }
        let cluster = next;
        next += 1;
        labels[p] = cluster;
        let mut queue: VecDeque<usize> = seeds.into_iter().filter(|&q| q != p).collect();
        while let Some(q) = queue.pop_front() {
            if labels[q] == NOISE {
                labels[q] = cluster;
            }
            if labels[q] != UNSEEN {
                continue;
            }
            labels[q] = cluster;
            let reach = region(q);
            if reach.len() >= min_pts {
                queue.extend(reach.into_iter().filter(|&r| labels[r] == UNSEEN || labels[r] == NOISE));
            }
        }
    }

    let mut out = vec![NOISE; n];
    for (sorted_pos, &j) in order.iter().enumerate() {
        out[j] = labels[sorted_pos];
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidDbscanParams {
    pub k: usize,
    pub estimator: Estimator,
    /// Minimum support fraction for a profile to be kept.
    pub rho: f64,
    pub eps: f64,
    pub min_pts: usize,
    /// Rows used to build profiles; all rows when `None`.
    pub sample: Option<Vec<usize>>,
    pub cfg: EstimatorConfig,
}

impl LidDbscanParams {
    pub fn new(k: usize, estimator: Estimator, rho: f64, eps: f64, min_pts: usize) -> Self {
        LidDbscanParams {
            k,
            estimator,
            rho,
            eps,
            min_pts,
            sample: None,
            cfg: EstimatorConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::invalid("eps", format!("{} must be positive", self.eps)));
        }
        if self.min_pts == 0 {
            return Err(Error::invalid("min_pts", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::invalid("rho", format!("{} is not in [0, 1)", self.rho)));
        }
        self.cfg.validate()
    }
}

/// Subspace stage of LID-DBSCAN: preference vectors, profiles and memberships.
#[derive(Debug, Clone)]
pub struct SubspaceAssignment {
    pub preferences: Vec<SubspacePreference>,
    pub profiles: SubspaceProfileSet,
    pub membership: Vec<Option<AttributeSet>>,
}

/// Computes preference vectors for every point, profiles over the sample, and the
/// profile membership of every point.
pub fn assign_subspaces(
    data: &Dataset,
    k: usize,
    estimator: Estimator,
    rho: f64,
    sample: Option<&[usize]>,
    cfg: &EstimatorConfig,
) -> Result<SubspaceAssignment> {
    let all: Vec<usize> = (0..data.n()).collect();
    let preferences = preference_vectors(data, &all, k, estimator, cfg)?;
    let profiles = match sample {
        Some(s) => {
            if s.is_empty() {
                return Err(Error::invalid("sample", "empty sample"));
            }
            if let Some(&i) = s.iter().find(|&&i| i >= data.n()) {
                return Err(Error::invalid("sample", format!("row {i} out of range")));
            }
            SubspaceProfileSet::from_preferences(s.iter().map(|&i| &preferences[i]), rho)?
        }
        None => SubspaceProfileSet::from_preferences(&preferences, rho)?,
    };
    let membership = preferences
        .iter()
        .map(|p| assign_membership(p, &profiles).cloned())
        .collect();
    Ok(SubspaceAssignment {
        preferences,
        profiles,
        membership,
    })
}

/// Clustering stage: DBSCAN per profile over its member points, then global
/// renumbering in profile order and discovery order.
pub fn cluster_assignment(
    data: &Dataset,
    assignment: &SubspaceAssignment,
    eps: f64,
    min_pts: usize,
) -> Result<ClusteringResult> {
    let groups: Vec<(&AttributeSet, Vec<usize>)> = assignment
        .profiles
        .profiles()
        .iter()
        .map(|p| {
            let members = assignment
                .membership
                .iter()
                .enumerate()
                .filter(|(_, m)| m.as_ref() == Some(&p.attributes))
                .map(|(i, _)| i)
                .collect();
            (&p.attributes, members)
        })
        .filter(|(_, members): &(_, Vec<usize>)| !members.is_empty())
        .collect();

    let local: Vec<Vec<Label>> = groups
        .par_iter()
        .map(|(attrs, members)| dbscan(data, members, attrs, eps, min_pts))
        .collect::<Result<_>>()?;

    let mut labels = vec![NOISE; data.n()];
    let mut subspaces = BTreeMap::new();
    let mut offset: Label = 0;
    for ((attrs, members), local) in groups.iter().zip(local) {
        let found = local.iter().copied().max().map_or(0, |m| m + 1);
        for (&i, l) in members.iter().zip(local) {
            if l != NOISE {
                labels[i] = offset + l;
            }
        }
        for c in 0..found {
            subspaces.insert(offset + c, (*attrs).clone());
        }
        offset += found;
    }
    ClusteringResult::new(labels, subspaces)
}

/// Full two-stage pipeline: assign points to LID-derived subspaces, then cluster.
pub fn lid_dbscan(data: &Dataset, params: &LidDbscanParams) -> Result<ClusteringResult> {
    params.validate()?;
    let assignment = assign_subspaces(
        data,
        params.k,
        params.estimator,
        params.rho,
        params.sample.as_deref(),
        &params.cfg,
    )?;
    cluster_assignment(data, &assignment, params.eps, params.min_pts)
}
