//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use lidspace::{AttributeSet, Dataset, Label, Norm};
use rand::Rng;

pub fn rng(seed: u64) -> lidspace::synth::SynthRng {
    lidspace::synth::rng(seed)
}

pub fn random_dataset(rng: &mut impl Rng, n: usize, m: usize) -> Dataset {
    let rows = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    Dataset::from_rows(rows).unwrap()
}

/// Full sort of every candidate by (distance, index).
pub fn brute_knn(data: &Dataset, q: &[f64], k: usize, norm: Norm, skip: Option<usize>) -> (Vec<usize>, Vec<f64>) {
    let mut all: Vec<(f64, usize)> = Vec::new();
    for i in 0..data.n() {
        if Some(i) == skip {
            continue;
        }
        let row = data.row(i);
        let d = match norm {
            Norm::Euclidean => {
                let mut s = 0.0;
                for j in 0..q.len() {
                    s += (row[j] - q[j]) * (row[j] - q[j]);
                }
                s.sqrt()
            }
            Norm::Infinity => {
                let mut s: f64 = 0.0;
                for j in 0..q.len() {
                    s = s.max((row[j] - q[j]).abs());
                }
                s
            }
        };
        all.push((d, i));
    }
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.truncate(k);
    (all.iter().map(|x| x.1).collect(), all.iter().map(|x| x.0).collect())
}

/// Maximizes the weighted power-law log-likelihood
/// `L(t) = S ln t + (t - 1) T`, `S = Σω`, `T = Σω ln u`, by golden-section search on
/// (0, 1000]. Comparisons use `L(a) - L(b) = S ln_1p((a-b)/b) + (a-b) T`, which stays
/// accurate when a and b are close.
pub fn golden_section_hill(projections: &[f64], w: f64, weights: &[f64], floor: f64) -> f64 {
    let s: f64 = weights.iter().sum();
    let t: f64 = projections
        .iter()
        .zip(weights)
        .map(|(p, om)| om * (p.abs() / w).max(floor).ln())
        .sum();
    let diff = |a: f64, b: f64| s * ((a - b) / b).ln_1p() + (a - b) * t;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1e-9, 1e3);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    for _ in 0..400 {
        if diff(c, d) > 0.0 {
            hi = d;
            d = c;
            c = hi - inv_phi * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + inv_phi * (hi - lo);
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Connected components of core points, then each border point joins the earliest
/// discovered component with a core point within eps. Components are discovered in
/// order of their smallest dataset index.
pub fn naive_dbscan(data: &Dataset, points: &[usize], attrs: &AttributeSet, eps: f64, min_pts: usize) -> Vec<Label> {
    let n = points.len();
    let dist = |a: usize, b: usize| -> f64 {
        let (ra, rb) = (data.row(points[a]), data.row(points[b]));
        attrs.iter().map(|j| (ra[j] - rb[j]).powi(2)).sum::<f64>().sqrt()
    };
    let near: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| dist(a, b) <= eps).collect()).collect();
    let core: Vec<bool> = (0..n).map(|a| near[a].iter().filter(|x| **x).count() >= min_pts).collect();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for a in 0..n {
        for b in 0..n {
            if core[a] && core[b] && near[a][b] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    // discovery order: components sorted by their smallest dataset index among cores
    let mut by_index: Vec<usize> = (0..n).collect();
    by_index.sort_by_key(|&a| points[a]);
    let mut comp_id = std::collections::HashMap::new();
    for &a in &by_index {
        if core[a] {
            let r = find(&mut parent, a);
            let next = comp_id.len() as Label;
            comp_id.entry(r).or_insert(next);
        }
    }
    (0..n)
        .map(|a| {
            if core[a] {
                comp_id[&find(&mut parent, a)]
            } else {
                (0..n)
                    .filter(|&b| core[b] && near[a][b])
                    .map(|b| comp_id[&find(&mut parent, b)])
                    .min()
                    .unwrap_or(-1)
            }
        })
        .collect()
}

/// ARI from explicit counts over all n-choose-2 pairs.
pub fn pair_count_ari(a: &[Label], b: &[Label]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (n00 * n11 - n01 * n10) / den
}

/// Plain MI of two labelings by counting.
pub fn mutual_information(a: &[Label], b: &[Label]) -> f64 {
    use std::collections::HashMap;
    let n = a.len() as f64;
    let mut joint: HashMap<(Label, Label), f64> = HashMap::new();
    let mut ca: HashMap<Label, f64> = HashMap::new();
    let mut cb: HashMap<Label, f64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *joint.entry((*x, *y)).or_default() += 1.0;
        *ca.entry(*x).or_default() += 1.0;
        *cb.entry(*y).or_default() += 1.0;
    }
    joint
        .iter()
        .map(|((x, y), c)| c / n * (n * c / (ca[x] * cb[y])).ln())
        .sum()
}

/// Kolmogorov-Smirnov statistic of `sample` against the CDF `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// KS critical value at the 1% level for large n.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

pub fn random_labels(rng: &mut impl Rng, n: usize, classes: i64, with_noise: bool) -> Vec<Label> {
    let lo = if with_noise { -1 } else { 0 };
    (0..n).map(|_| rng.random_range(lo..classes)).collect()
}
