//! The immutable point matrix every other module works on.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cluster label. Noise is [`NOISE`].
pub type Label = i64;

/// Label used for noise in both ground-truth and predicted labelings.
pub const NOISE: Label = -1;

/// A set of attribute (column) indices, kept sorted and duplicate-free.
///
/// The derived ordering is lexicographic over the sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct AttributeSet(Vec<usize>);

impl AttributeSet {
    pub fn new(attrs: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = attrs.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        AttributeSet(v)
    }

    pub fn empty() -> Self {
        AttributeSet(Vec::new())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, attr: usize) -> bool {
        self.0.binary_search(&attr).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &AttributeSet) -> bool {
        self.0.iter().all(|a| other.contains(*a))
    }

    pub fn intersection_len(&self, other: &AttributeSet) -> usize {
        self.0.iter().filter(|a| other.contains(**a)).count()
    }

    pub fn union_len(&self, other: &AttributeSet) -> usize {
        self.len() + other.len() - self.intersection_len(other)
    }

    /// Largest index plus one, or 0 for the empty set.
    pub fn bound(&self) -> usize {
        self.0.last().map_or(0, |a| a + 1)
    }
}

impl From<Vec<usize>> for AttributeSet {
    fn from(v: Vec<usize>) -> Self {
        AttributeSet::new(v)
    }
}

impl From<AttributeSet> for Vec<usize> {
    fn from(s: AttributeSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for AttributeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        AttributeSet::new(iter)
    }
}

impl fmt::Display for AttributeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// An n x m matrix of finite reals with named attributes and optional ground truth.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    m: usize,
    // row-major
    values: Vec<f64>,
    attribute_names: Vec<String>,
    true_labels: Option<Vec<Label>>,
    true_subspaces: Option<Vec<AttributeSet>>,
}

impl Dataset {
    /// Builds a dataset from row vectors, naming attributes `a0..a(m-1)`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        Self::new(rows, default_names(m))
    }

    pub fn new(rows: Vec<Vec<f64>>, attribute_names: Vec<String>) -> Result<Self> {
        let n = rows.len();
        let m = attribute_names.len();
        let mut values = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} values, expected {m}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Self::from_flat(n, m, values, attribute_names)
    }

    /// Builds a dataset from a row-major buffer of length `n * m`.
    pub fn from_flat(
        n: usize,
        m: usize,
        values: Vec<f64>,
        attribute_names: Vec<String>,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one point and one attribute, got n={n}, m={m}"
            )));
        }
        if values.len() != n * m {
            return Err(Error::InvalidDataset(format!(
                "buffer holds {} values, expected {n}x{m}",
                values.len()
            )));
        }
        if attribute_names.len() != m {
            return Err(Error::InvalidDataset(format!(
                "{} attribute names for {m} columns",
                attribute_names.len()
            )));
        }
        let mut seen = HashSet::with_capacity(m);
        for (column, name) in attribute_names.iter().enumerate() {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateAttribute {
                    name: name.clone(),
                    column,
                });
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let column = pos % m;
            return Err(Error::NonFinite {
                row: pos / m,
                column,
                attribute: attribute_names[column].clone(),
                value: values[pos].to_string(),
            });
        }
        Ok(Dataset {
            n,
            m,
            values,
            attribute_names,
            true_labels: None,
            true_subspaces: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l < NOISE) {
            return Err(Error::InvalidDataset(format!(
                "label {l} is below the noise label {NOISE}"
            )));
        }
        self.true_labels = Some(labels);
        Ok(self)
    }

    pub fn with_subspaces(mut self, subspaces: Vec<AttributeSet>) -> Result<Self> {
        if subspaces.len() != self.n {
            return Err(Error::InvalidDataset(format!(
                "{} subspaces for {} points",
                subspaces.len(),
                self.n
            )));
        }
        if let Some((i, s)) = subspaces.iter().enumerate().find(|(_, s)| s.bound() > self.m) {
            return Err(Error::InvalidDataset(format!(
                "subspace {s} of point {i} references an attribute >= {}",
                self.m
            )));
        }
        self.true_subspaces = Some(subspaces);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.m)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn true_labels(&self) -> Option<&[Label]> {
        self.true_labels.as_deref()
    }

    pub fn true_subspaces(&self) -> Option<&[AttributeSet]> {
        self.true_subspaces.as_deref()
    }

    /// Returns a copy with every point mapped through `f`; ground truth is kept.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let rows = self.rows().map(&mut f).collect();
        let mut out = Dataset::new(rows, self.attribute_names.clone())?;
        out.true_labels = self.true_labels.clone();
        out.true_subspaces = self.true_subspaces.clone();
        Ok(out)
    }

    /// Returns a copy with rows reordered so that new row `i` is old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: order.len(),
            });
        }
        let rows = order.iter().map(|&i| self.row(i).to_vec()).collect();
        let mut out = Dataset::new(rows, self.attribute_names.clone())?;
        if let Some(l) = &self.true_labels {
            out.true_labels = Some(order.iter().map(|&i| l[i]).collect());
        }
        if let Some(s) = &self.true_subspaces {
            out.true_subspaces = Some(order.iter().map(|&i| s[i].clone()).collect());
        }
        Ok(out)
    }
}

pub(crate) fn default_names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("a{j}")).collect()
}
