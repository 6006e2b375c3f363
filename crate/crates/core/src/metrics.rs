//! Partition and subspace agreement measures.
//!
//! Noise (`-1`) is an ordinary class for the contingency-based scores. Logs are natural.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeSet, Label, NOISE};
use crate::error::{Error, Result};

/// Counts of (true label, predicted label) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Contingency {
    true_classes: Vec<Label>,
    pred_classes: Vec<Label>,
    counts: Vec<Vec<usize>>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    n: usize,
}

fn index_labels(labels: &[Label]) -> (Vec<Label>, HashMap<Label, usize>) {
    let mut classes: Vec<Label> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let index = classes.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    (classes, index)
}

fn check_lengths(truth: usize, pred: usize) -> Result<()> {
    if truth != pred {
        return Err(Error::LengthMismatch { truth, pred });
    }
    Ok(())
}

impl Contingency {
    /// Rows are true classes, columns predicted classes, both in ascending label order.
    pub fn new(truth: &[Label], pred: &[Label]) -> Result<Self> {
        check_lengths(truth.len(), pred.len())?;
        let (true_classes, ti) = index_labels(truth);
        let (pred_classes, pi) = index_labels(pred);
        let mut counts = vec![vec![0usize; pred_classes.len()]; true_classes.len()];
        for (t, p) in truth.iter().zip(pred) {
            counts[ti[t]][pi[p]] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..pred_classes.len())
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        Ok(Contingency {
            true_classes,
            pred_classes,
            counts,
            row_sums,
            col_sums,
            n: truth.len(),
        })
    }

    pub fn true_classes(&self) -> &[Label] {
        &self.true_classes
    }

    pub fn pred_classes(&self) -> &[Label] {
        &self.pred_classes
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.counts.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .map(move |(j, &c)| (i, j, c))
        })
    }

    /// True when both labelings induce the same partition.
    pub fn is_bijective(&self) -> bool {
        self.true_classes.len() == self.pred_classes.len()
            && self
                .cells()
                .all(|(i, j, c)| c == self.row_sums[i] && c == self.col_sums[j])
    }

    pub fn entropy_true(&self) -> f64 {
        entropy(&self.row_sums, self.n)
    }

    pub fn entropy_pred(&self) -> f64 {
        entropy(&self.col_sums, self.n)
    }

    pub fn mutual_information(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        let mi: f64 = self
            .cells()
            .map(|(i, j, c)| {
                let c = c as f64;
                c / n * (n * c / (self.row_sums[i] as f64 * self.col_sums[j] as f64)).ln()
            })
            .sum();
        mi.max(0.0)
    }

    /// E[MI] when both marginals are held fixed and points are matched at random.
    pub fn expected_mutual_information(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        let lf = log_factorials(n);
        let nf = n as f64;
        let mut emi = 0.0;
        for &a in &self.row_sums {
            for &b in &self.col_sums {
                let lo = (a + b).saturating_sub(n).max(1);
                let hi = a.min(b);
                let fixed = lf[a] + lf[b] + lf[n - a] + lf[n - b] - lf[n];
                for nij in lo..=hi {
                    let log_p = fixed
                        - lf[nij]
                        - lf[a - nij]
                        - lf[b - nij]
                        - lf[n + nij - a - b];
                    let x = nij as f64;
                    emi += x / nf * (nf * x / (a as f64 * b as f64)).ln() * log_p.exp();
                }
            }
        }
        emi
    }
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut lf = Vec::with_capacity(n + 1);
    lf.push(0.0);
    let mut acc = 0.0;
    for i in 1..=n {
        acc += (i as f64).ln();
        lf.push(acc);
    }
    lf
}

fn entropy(sizes: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    -sizes
        .iter()
        .filter(|s| **s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

pub fn contingency(truth: &[Label], pred: &[Label]) -> Result<Contingency> {
    Contingency::new(truth, pred)
}

/// MI / sqrt(H(U)·H(V)); 1 when both entropies vanish, 0 when exactly one does.
pub fn nmi(truth: &[Label], pred: &[Label]) -> Result<f64> {
    let c = Contingency::new(truth, pred)?;
    let (hu, hv) = (c.entropy_true(), c.entropy_pred());
    if hu == 0.0 && hv == 0.0 {
        return Ok(1.0);
    }
    if hu == 0.0 || hv == 0.0 {
        return Ok(0.0);
    }
    if c.is_bijective() {
        return Ok(1.0);
    }
    Ok((c.mutual_information() / (hu * hv).sqrt()).clamp(0.0, 1.0))
}

/// (MI − E[MI]) / (max(H(U), H(V)) − E[MI]).
pub fn ami(truth: &[Label], pred: &[Label]) -> Result<f64> {
    let c = Contingency::new(truth, pred)?;
    if c.is_bijective() {
        return Ok(1.0);
    }
    let emi = c.expected_mutual_information();
    let denom = c.entropy_true().max(c.entropy_pred()) - emi;
    let num = c.mutual_information() - emi;
    if denom.abs() <= f64::EPSILON {
        return Ok(0.0);
    }
    Ok(num / denom)
}

fn pairs(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index.
pub fn ari(truth: &[Label], pred: &[Label]) -> Result<f64> {
    let c = Contingency::new(truth, pred)?;
    if c.is_bijective() {
        return Ok(1.0);
    }
    let index: f64 = c.cells().map(|(_, _, x)| pairs(x)).sum();
    let a: f64 = c.row_sums.iter().map(|&x| pairs(x)).sum();
    let b: f64 = c.col_sums.iter().map(|&x| pairs(x)).sum();
    let total = pairs(c.n);
    let expected = a * b / total;
    let max = 0.5 * (a + b);
    if max == expected {
        return Ok(0.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Best-match recall: every true non-noise cluster C scores max_P |C ∩ P| / |C| over
/// predicted non-noise clusters P; the result is the size-weighted mean.
///
/// Points predicted as noise still count in |C|. Returns 0 when the truth has no
/// non-noise cluster.
pub fn recall(truth: &[Label], pred: &[Label]) -> Result<f64> {
    let c = Contingency::new(truth, pred)?;
    let mut hit = 0usize;
    let mut total = 0usize;
    for (i, &t) in c.true_classes.iter().enumerate() {
        if t == NOISE {
            continue;
        }
        total += c.row_sums[i];
        hit += c.counts[i]
            .iter()
            .zip(&c.pred_classes)
            .filter(|(_, p)| **p != NOISE)
            .map(|(x, _)| *x)
            .max()
            .unwrap_or(0);
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(hit as f64 / total as f64)
}

/// Σ|S_i ∩ T_i| / Σ|S_i ∪ T_i| over points; 1 when every union is empty.
pub fn rnia(truth: &[AttributeSet], pred: &[AttributeSet]) -> Result<f64> {
    check_lengths(truth.len(), pred.len())?;
    let (mut i, mut u) = (0usize, 0usize);
    for (t, s) in truth.iter().zip(pred) {
        i += s.intersection_len(t);
        u += s.union_len(t);
    }
    if u == 0 {
        return Ok(1.0);
    }
    Ok(i as f64 / u as f64)
}

/// Mean of |S_i ∩ T_i| / |S_i|; points with an empty S_i contribute 0.
pub fn arr(truth: &[AttributeSet], pred: &[AttributeSet]) -> Result<f64> {
    check_lengths(truth.len(), pred.len())?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = truth
        .iter()
        .zip(pred)
        .filter(|(_, s)| !s.is_empty())
        .map(|(t, s)| s.intersection_len(t) as f64 / s.len() as f64)
        .sum();
    Ok(sum / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Nmi,
    Ami,
    Ari,
    Recall,
    Rnia,
    Arr,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Nmi,
        Metric::Ami,
        Metric::Ari,
        Metric::Recall,
        Metric::Rnia,
        Metric::Arr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Nmi => "nmi",
            Metric::Ami => "ami",
            Metric::Ari => "ari",
            Metric::Recall => "recall",
            Metric::Rnia => "rnia",
            Metric::Arr => "arr",
        }
    }

    pub fn needs_subspaces(self) -> bool {
        matches!(self, Metric::Rnia | Metric::Arr)
    }

    pub fn on_labels(self, truth: &[Label], pred: &[Label]) -> Result<f64> {
        match self {
            Metric::Nmi => nmi(truth, pred),
            Metric::Ami => ami(truth, pred),
            Metric::Ari => ari(truth, pred),
            Metric::Recall => recall(truth, pred),
            Metric::Rnia | Metric::Arr => Err(Error::invalid(
                "metric",
                format!("{self} compares subspaces, not labels"),
            )),
        }
    }

    pub fn on_subspaces(self, truth: &[AttributeSet], pred: &[AttributeSet]) -> Result<f64> {
        match self {
            Metric::Rnia => rnia(truth, pred),
            Metric::Arr => arr(truth, pred),
            _ => Err(Error::invalid(
                "metric",
                format!("{self} compares labels, not subspaces"),
            )),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Unknown {
                what: "metric",
                name: s.to_string(),
            })
    }
}

/// Metric name to value, in a stable order.
pub type MetricReport = BTreeMap<String, f64>;

/// Evaluates `metrics` on whatever pieces of truth and prediction are present.
pub fn evaluate(
    metrics: &[Metric],
    true_labels: Option<&[Label]>,
    pred_labels: Option<&[Label]>,
    true_subspaces: Option<&[AttributeSet]>,
    pred_subspaces: Option<&[AttributeSet]>,
) -> Result<MetricReport> {
    let mut report = MetricReport::new();
    for &metric in metrics {
        let value = if metric.needs_subspaces() {
            match (true_subspaces, pred_subspaces) {
                (Some(t), Some(p)) => metric.on_subspaces(t, p)?,
                _ => {
                    return Err(Error::invalid(
                        "metric",
                        format!("{metric} needs subspaces in both truth and prediction"),
                    ))
                }
            }
        } else {
            match (true_labels, pred_labels) {
                (Some(t), Some(p)) => metric.on_labels(t, p)?,
                _ => {
                    return Err(Error::invalid(
                        "metric",
                        format!("{metric} needs labels in both truth and prediction"),
                    ))
                }
            }
        };
        report.insert(metric.name().to_string(), value);
    }
    Ok(report)
}
