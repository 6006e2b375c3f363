mod common;

use std::collections::{BTreeMap, BTreeSet};

use lidspace::cluster::dbscan;
use lidspace::lid::{hill_distances, projection_weight, sum_hill_projections, sum_w_hill_projections};
use lidspace::metrics::{ami, ari, arr, nmi, recall, rnia};
use lidspace::neighbors::knn;
use lidspace::subspace::{assign_membership, SubspacePreference, SubspaceProfileSet};
use lidspace::synth::{self, TPreset};
use lidspace::{io, AttributeSet, Dataset, EstimatorConfig, Label, Norm, Query, NOISE};
use proptest::prelude::*;

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (12usize..40, 2usize..6).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, m), n)
            .prop_map(|rows| Dataset::from_rows(rows).unwrap())
    })
}

fn labels_strategy() -> impl Strategy<Value = (Vec<Label>, Vec<Label>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(-1i64..4, n),
            prop::collection::vec(-1i64..5, n),
        )
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn all_estimates(data: &Dataset, k: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let cfg = EstimatorConfig::default();
    let q = Query::Row(0);
    let a = sum_hill_projections(data, q, k, &cfg).unwrap();
    let b = sum_w_hill_projections(data, q, k, &cfg).unwrap();
    let nb = knn(data, data.row(0), k, Norm::Euclidean, Some(0)).unwrap();
    let c = hill_distances(&nb, &cfg).unwrap();
    (a.per_axis().to_vec(), b.per_axis().to_vec(), c)
}

/// Relabels with an injective map that keeps noise as noise.
fn relabel(l: &[Label], offset: Label) -> Vec<Label> {
    l.iter().map(|&x| if x == NOISE { NOISE } else { 100 - 3 * x + offset }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimators_scale_invariant(data in dataset_strategy(), c in 0.01f64..100.0) {
        let k = data.n() / 2;
        let scaled = data.map_points(|p| p.iter().map(|v| v * c).collect()).unwrap();
        let (a, b, h) = all_estimates(&data, k);
        let (a2, b2, h2) = all_estimates(&scaled, k);
        prop_assert!(a.iter().zip(&a2).all(|(x, y)| close(*x, *y)));
        prop_assert!(b.iter().zip(&b2).all(|(x, y)| close(*x, *y)));
        prop_assert!(close(h, h2));
    }

    #[test]
    fn estimators_translation_invariant(data in dataset_strategy(), shift in -5.0f64..5.0) {
        let k = data.n() / 2;
        let moved = data.map_points(|p| p.iter().enumerate().map(|(j, v)| v + shift * (j as f64 + 1.0)).collect()).unwrap();
        let (a, b, h) = all_estimates(&data, k);
        let (a2, b2, h2) = all_estimates(&moved, k);
        let tol = |x: f64, y: f64| (x - y).abs() <= 1e-7 * x.abs().max(1.0);
        prop_assert!(a.iter().zip(&a2).all(|(x, y)| tol(*x, *y)));
        prop_assert!(b.iter().zip(&b2).all(|(x, y)| tol(*x, *y)));
        prop_assert!(tol(h, h2));
    }

    #[test]
    fn per_axis_permutes_with_coordinates(data in dataset_strategy(), seed in any::<u64>()) {
        let m = data.m();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut s = seed;
        for i in (1..m).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted = data.map_points(|p| perm.iter().map(|&j| p[j]).collect()).unwrap();
        let k = data.n() / 2;
        let (a, b, _) = all_estimates(&data, k);
        let (a2, b2, _) = all_estimates(&permuted, k);
        for (new, &old) in perm.iter().enumerate() {
            prop_assert!(close(a2[new], a[old]));
            prop_assert!(close(b2[new], b[old]));
        }
    }

    #[test]
    fn weight_monotone(u1 in 0.0f64..1.0, u2 in 0.0f64..1.0, m in 1usize..64) {
        let cfg = EstimatorConfig::default();
        let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        prop_assert!(projection_weight(lo, m, &cfg) <= projection_weight(hi, m, &cfg));
        prop_assert_eq!(projection_weight(0.0, m, &cfg), 1.0);
    }

    #[test]
    fn preference_scale_free(ids in prop::collection::vec(0.0f64..20.0, 2..12), c in 0.01f64..100.0) {
        let p = SubspacePreference::from_estimates(&ids).unwrap();
        let scaled: Vec<f64> = ids.iter().map(|v| v * c).collect();
        let q = SubspacePreference::from_estimates(&scaled).unwrap();
        prop_assert_eq!(&p.ordered_attributes, &q.ordered_attributes);
        prop_assert_eq!(&p.selected, &q.selected);
        prop_assert!(!p.selected.is_empty());
        prop_assert!(p.has_prefix(&p.selected));
        prop_assert!(p.relative_diffs.iter().all(|d| (0.0..=1.0).contains(d)));
    }

    #[test]
    fn membership_is_a_profile(
        sets in prop::collection::vec(prop::collection::vec(0.0f64..5.0, 6), 1..30),
        rho in 0.0f64..0.3,
    ) {
        let prefs: Vec<SubspacePreference> = sets.iter().map(|s| SubspacePreference::from_estimates(s).unwrap()).collect();
        if let Ok(profiles) = SubspaceProfileSet::from_preferences(&prefs, rho) {
            let dims: Vec<usize> = profiles.profiles().iter().map(|p| p.attributes.len()).collect();
            prop_assert!(dims.windows(2).all(|w| w[0] <= w[1]));
            for p in &prefs {
                if let Some(m) = assign_membership(p, &profiles) {
                    prop_assert!(profiles.profiles().iter().any(|q| &q.attributes == m));
                    prop_assert!(p.has_prefix(m));
                }
            }
        }
    }

    #[test]
    fn metrics_relabel_and_permutation_invariant((a, b) in labels_strategy(), shift in 0i64..7) {
        let n = a.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + shift as usize) % n).collect();
        let is_perm = perm.iter().collect::<BTreeSet<_>>().len() == n;
        let fs: [fn(&[Label], &[Label]) -> lidspace::Result<f64>; 4] = [nmi, ami, ari, recall];
        for f in fs {
            let base = f(&a, &b).unwrap();
            prop_assert!(close(base, f(&relabel(&a, shift), &relabel(&b, 2 * shift)).unwrap()));
            if is_perm {
                let pa: Vec<Label> = perm.iter().map(|&i| a[i]).collect();
                let pb: Vec<Label> = perm.iter().map(|&i| b[i]).collect();
                prop_assert!(close(base, f(&pa, &pb).unwrap()));
            }
        }
        prop_assert!(close(ari(&a, &b).unwrap(), ari(&b, &a).unwrap()));
        prop_assert!(close(nmi(&a, &b).unwrap(), nmi(&b, &a).unwrap()));
        let nm = nmi(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&nm));
        prop_assert!(ari(&a, &b).unwrap() <= 1.0 + 1e-12);
        prop_assert!(ami(&a, &b).unwrap() <= 1.0 + 1e-12);
        let r = recall(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn identical_partitions_score_one(a in prop::collection::vec(-1i64..6, 2..80)) {
        prop_assert_eq!(ari(&a, &a).unwrap(), 1.0);
        prop_assert_eq!(nmi(&a, &a).unwrap(), 1.0);
        prop_assert_eq!(ami(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn rnia_bounds(
        pairs in prop::collection::vec(
            (prop::collection::btree_set(0usize..8, 0..5), prop::collection::btree_set(0usize..8, 0..5)),
            1..20,
        )
    ) {
        let t: Vec<AttributeSet> = pairs.iter().map(|(x, _)| x.iter().copied().collect()).collect();
        let s: Vec<AttributeSet> = pairs.iter().map(|(_, y)| y.iter().copied().collect()).collect();
        let v = rnia(&t, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v == 1.0, t == s);
        prop_assert_eq!(rnia(&t, &t).unwrap(), 1.0);
        let a = arr(&t, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn dbscan_clusters_survive_reindexing(data in dataset_strategy(), eps in 0.1f64..0.8, min_pts in 1usize..5, rot in 1usize..11) {
        let n = data.n();
        let order: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let permuted = data.permute_rows(&order).unwrap();
        let attrs: AttributeSet = (0..data.m()).collect();
        let all: Vec<usize> = (0..n).collect();
        let a = dbscan(&data, &all, &attrs, eps, min_pts).unwrap();
        let b = dbscan(&permuted, &all, &attrs, eps, min_pts).unwrap();
        // core points: same partition; noise: same set
        let core = |d: &Dataset, i: usize| {
            (0..n).filter(|&j| Norm::Euclidean.distance(d.row(i), d.row(j)) <= eps).count() >= min_pts
        };
        let mut pairs_a = BTreeMap::new();
        let mut pairs_b = BTreeMap::new();
        for (new, &old) in order.iter().enumerate() {
            prop_assert_eq!(a[old] == NOISE, b[new] == NOISE);
            if core(&data, old) {
                pairs_a.insert(old, a[old]);
                pairs_b.insert(old, b[new]);
            }
        }
        let keys: Vec<usize> = pairs_a.keys().copied().collect();
        for &x in &keys {
            for &y in &keys {
                prop_assert_eq!(pairs_a[&x] == pairs_a[&y], pairs_b[&x] == pairs_b[&y]);
            }
        }
    }

    #[test]
    fn csv_roundtrip_is_exact(data in dataset_strategy()) {
        let text = io::to_csv(&data, Some("roundtrip"));
        prop_assert_eq!(io::parse_csv(&text).unwrap(), data);
    }

    #[test]
    fn generators_reproducible(seed in any::<u64>()) {
        prop_assert_eq!(synth::gen_uniform_ball(30, 4, 1.0, seed).unwrap(), synth::gen_uniform_ball(30, 4, 1.0, seed).unwrap());
        prop_assert_eq!(synth::gen_dish3d(10, None, seed).unwrap(), synth::gen_dish3d(10, None, seed).unwrap());
        prop_assert_eq!(synth::gen_t_preset(TPreset::T3, 5, seed).unwrap(), synth::gen_t_preset(TPreset::T3, 5, seed).unwrap());
    }
}

#[test]
fn full_attribute_projection_matches_full_space_distance() {
    let mut r = common::rng(2);
    let data = common::random_dataset(&mut r, 40, 3);
    let all: Vec<usize> = (0..40).collect();
    let attrs: AttributeSet = (0..3).collect();
    let l = dbscan(&data, &all, &attrs, 0.4, 3).unwrap();
    assert_eq!(l, common::naive_dbscan(&data, &all, &attrs, 0.4, 3));
}
