//! Subspace preference vectors and profile membership.
//!
//! A point's preference vector keeps the attributes with the lowest per-axis LID, cut
//! at the largest relative gap in the ascending sequence of estimates. Preference
//! vectors harvested from a sample become profiles; every point is then matched to
//! the highest-dimensional profile that forms a prefix of its attribute ordering.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeSet, Dataset};
use crate::error::{Error, Result};
use crate::lid::{decompose, Estimator, EstimatorConfig, Query};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspacePreference {
    /// Attribute indices sorted by ascending estimate (ties by index).
    pub ordered_attributes: Vec<usize>,
    /// The estimates in that order.
    pub sorted_ids: Vec<f64>,
    /// `(W[k+1] - W[k]) / W[k+1]` for consecutive sorted estimates; 0 where the
    /// denominator is 0.
    pub relative_diffs: Vec<f64>,
    /// The first `alpha` attributes of `ordered_attributes`.
    pub selected: AttributeSet,
    /// Set when all estimates are equal; `selected` is then the full attribute set.
    pub no_gap: bool,
}

impl SubspacePreference {
    /// Cuts an unordered vector of per-attribute estimates at its largest relative gap.
    pub fn from_estimates(ids: &[f64]) -> Result<Self> {
        let m = ids.len();
        if m < 2 {
            return Err(Error::invalid(
                "estimates",
                format!("need at least 2 attributes, got {m}"),
            ));
        }
        if ids.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::invalid("estimates", "must be nonnegative numbers"));
        }
        let mut ordered_attributes: Vec<usize> = (0..m).collect();
        ordered_attributes.sort_by(|&a, &b| ids[a].total_cmp(&ids[b]).then(a.cmp(&b)));
        let sorted_ids: Vec<f64> = ordered_attributes.iter().map(|&a| ids[a]).collect();
        let relative_diffs: Vec<f64> = sorted_ids
            .windows(2)
            .map(|w| if w[1] > 0.0 { (w[1] - w[0]) / w[1] } else { 0.0 })
            .collect();

        // First maximum wins, preferring the lower-dimensional cut.
        let (best_pos, best) = relative_diffs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &d)| {
                if d > acc.1 {
                    (i, d)
                } else {
                    acc
                }
            });
        let no_gap = !(best > 0.0);
        let alpha = if no_gap { m } else { best_pos + 1 };
        let selected = ordered_attributes[..alpha].iter().copied().collect();
        Ok(SubspacePreference {
            ordered_attributes,
            sorted_ids,
            relative_diffs,
            selected,
            no_gap,
        })
    }

    /// Dimensionality of the selected subspace.
    pub fn alpha(&self) -> usize {
        self.selected.len()
    }

    /// Whether `set` equals the first `|set|` ordered attributes.
    pub fn has_prefix(&self, set: &AttributeSet) -> bool {
        let mu = set.len();
        mu <= self.ordered_attributes.len()
            && self.ordered_attributes[..mu].iter().all(|a| set.contains(*a))
    }
}

/// Per-attribute estimates for `query`, cut into a preference vector.
pub fn preference_vector(
    data: &Dataset,
    query: Query<'_>,
    k: usize,
    estimator: Estimator,
    cfg: &EstimatorConfig,
) -> Result<SubspacePreference> {
    if data.m() < 2 {
        return Err(Error::invalid(
            "dataset",
            "subspace preference needs at least 2 attributes",
        ));
    }
    let dec = decompose(data, query, k, estimator, cfg)?;
    SubspacePreference::from_estimates(dec.per_axis())
}

/// Preference vectors of the given rows, computed in parallel, in input order.
pub fn preference_vectors(
    data: &Dataset,
    indices: &[usize],
    k: usize,
    estimator: Estimator,
    cfg: &EstimatorConfig,
) -> Result<Vec<SubspacePreference>> {
    indices
        .par_iter()
        .map(|&i| preference_vector(data, Query::Row(i), k, estimator, cfg))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub attributes: AttributeSet,
    pub support: usize,
}

/// Distinct preference subspaces seen in a sample, ascending by dimension, ties
/// broken lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceProfileSet {
    profiles: Vec<Profile>,
    sample_size: usize,
    min_support: f64,
}

impl SubspaceProfileSet {
    /// Counts the selected subspaces of `prefs` and drops those whose support fraction
    /// is at most `min_support`.
    pub fn from_preferences<'a>(
        prefs: impl IntoIterator<Item = &'a SubspacePreference>,
        min_support: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&min_support) {
            return Err(Error::invalid(
                "rho",
                format!("{min_support} is not in [0, 1)"),
            ));
        }
        let mut counts: HashMap<&AttributeSet, usize> = HashMap::new();
        let mut sample_size = 0;
        for p in prefs {
            *counts.entry(&p.selected).or_default() += 1;
            sample_size += 1;
        }
        if sample_size == 0 {
            return Err(Error::invalid("sample", "empty sample"));
        }
        let mut profiles: Vec<Profile> = counts
            .into_iter()
            .filter(|(_, c)| *c as f64 / sample_size as f64 > min_support)
            .map(|(s, c)| Profile {
                attributes: s.clone(),
                support: c,
            })
            .collect();
        if profiles.is_empty() {
            return Err(Error::EmptyProfileSet { rho: min_support });
        }
        profiles.sort_by(|a, b| {
            a.attributes
                .len()
                .cmp(&b.attributes.len())
                .then_with(|| a.attributes.cmp(&b.attributes))
        });
        Ok(SubspaceProfileSet {
            profiles,
            sample_size,
            min_support,
        })
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn min_support(&self) -> f64 {
        self.min_support
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.profiles)?)
    }
}

/// Preference vectors for `sample` rows, aggregated into profiles.
pub fn build_profiles(
    data: &Dataset,
    sample: &[usize],
    k: usize,
    estimator: Estimator,
    min_support: f64,
    cfg: &EstimatorConfig,
) -> Result<SubspaceProfileSet> {
    if sample.is_empty() {
        return Err(Error::invalid("sample", "empty sample"));
    }
    let prefs = preference_vectors(data, sample, k, estimator, cfg)?;
    SubspaceProfileSet::from_preferences(&prefs, min_support)
}

/// Scans profiles in ascending dimension and keeps the last one that equals a prefix
/// of the point's attribute ordering.
pub fn assign_membership<'p>(
    pref: &SubspacePreference,
    profiles: &'p SubspaceProfileSet,
) -> Option<&'p AttributeSet> {
    let mut membership = None;
    for p in profiles.profiles() {
        if pref.has_prefix(&p.attributes) {
            membership = Some(&p.attributes);
        }
    }
    membership
}
