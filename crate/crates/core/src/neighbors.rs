//! Exact k-nearest-neighbor search by linear scan.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Euclidean,
    Infinity,
}

impl Norm {
    #[inline]
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Norm::Infinity => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Euclidean => "euclidean",
            Norm::Infinity => "infinity",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "l2" => Ok(Norm::Euclidean),
            "infinity" | "linf" => Ok(Norm::Infinity),
            _ => Err(Error::Unknown {
                what: "norm",
                name: s.to_string(),
            }),
        }
    }
}

/// The k points closest to a query, sorted by ascending distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    query: Vec<f64>,
    members: Vec<usize>,
    distances: Vec<f64>,
    norm: Norm,
}

impl Neighborhood {
    /// Validating constructor; `distances[j]` is the distance of `members[j]`.
    pub fn new(
        query: Vec<f64>,
        members: Vec<usize>,
        distances: Vec<f64>,
        norm: Norm,
    ) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::invalid(
                "neighborhood",
                format!("need at least 2 members, got {}", members.len()),
            ));
        }
        if members.len() != distances.len() {
            return Err(Error::DimensionMismatch {
                expected: members.len(),
                got: distances.len(),
            });
        }
        if distances.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("neighborhood", "distances must be finite and >= 0"));
        }
        if distances.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("neighborhood", "members must be sorted by distance"));
        }
        Ok(Neighborhood {
            query,
            members,
            distances,
            norm,
        })
    }

    pub fn query(&self) -> &[f64] {
        &self.query
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    /// Distance of the farthest member (the threshold `w`).
    pub fn radius(&self) -> f64 {
        *self.distances.last().expect("neighborhood is never empty")
    }
}

/// Returns the `k` points of `data` closest to `query` under `norm`.
///
/// Ties are broken by ascending point index. With `exclude_self`, the query is taken to
/// be row `self_index` and that row is skipped; pass `None` to skip nothing.
pub fn knn(
    data: &Dataset,
    query: &[f64],
    k: usize,
    norm: Norm,
    exclude: Option<usize>,
) -> Result<Neighborhood> {
    let (members, distances) = knn_raw(data, query, k, norm, exclude)?;
    Neighborhood::new(query.to_vec(), members, distances, norm)
}

/// Neighborhood of the dataset's own row `index`, excluding that row.
pub fn knn_of_point(data: &Dataset, index: usize, k: usize, norm: Norm) -> Result<Neighborhood> {
    if index >= data.n() {
        return Err(Error::invalid(
            "query index",
            format!("{index} out of range for n = {}", data.n()),
        ));
    }
    knn(data, data.row(index), k, norm, Some(index))
}

/// Same as [`knn`] without the `k >= 2` requirement of [`Neighborhood`].
pub fn knn_raw(
    data: &Dataset,
    query: &[f64],
    k: usize,
    norm: Norm,
    exclude: Option<usize>,
) -> Result<(Vec<usize>, Vec<f64>)> {
    if query.len() != data.m() {
        return Err(Error::DimensionMismatch {
            expected: data.m(),
            got: query.len(),
        });
    }
    let available = data.n() - usize::from(exclude.is_some_and(|i| i < data.n()));
    if k == 0 || k > available {
        return Err(Error::KOutOfRange { k, max: available });
    }

    let mut cand: Vec<(f64, usize)> = data
        .rows()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, row)| (norm.distance(row, query), i))
        .collect();

    let cmp = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
    };
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, cmp);
        cand.truncate(k);
    }
    cand.sort_unstable_by(cmp);
    Ok(cand.into_iter().map(|(d, i)| (i, d)).unzip())
}
