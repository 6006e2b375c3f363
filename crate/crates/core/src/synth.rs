//! Seeded synthetic data generators.
//!
//! Every generator draws from `Xoshiro256PlusPlus` seeded through `seed_from_u64`
//! (SplitMix64 expansion), uniforms via `rand`'s standard `f64` sampling and normals
//! via `rand_distr::StandardNormal`. The same seed gives a bit-identical dataset on
//! every platform.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeSet, Dataset, Label, NOISE};
use crate::error::{Error, Result};

pub type SynthRng = Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> SynthRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Radius of the small "almost zero" axes.
pub const ALMOST_ZERO_RADIUS: f64 = 1e-10;

fn uniform_sym(rng: &mut SynthRng, radius: f64) -> f64 {
    radius * (2.0 * rng.random::<f64>() - 1.0)
}

fn normal(rng: &mut SynthRng) -> f64 {
    rng.sample(StandardNormal)
}

fn all_attrs(m: usize) -> AttributeSet {
    (0..m).collect()
}

fn finish(
    n: usize,
    m: usize,
    values: Vec<f64>,
    labels: Vec<Label>,
    subspaces: Vec<AttributeSet>,
) -> Result<Dataset> {
    Dataset::from_flat(n, m, values, crate::dataset::default_names(m))?
        .with_labels(labels)?
        .with_subspaces(subspaces)
}

fn check_positive(what: &'static str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::invalid(what, "must be at least 1"));
    }
    Ok(())
}

/// Points uniform in the m-ball of `radius` around the origin: a normalized Gaussian
/// direction scaled by `radius · U^(1/m)`.
pub fn gen_uniform_ball(n: usize, m: usize, radius: f64, seed: u64) -> Result<Dataset> {
    check_positive("n", n)?;
    check_positive("m", m)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("radius", format!("{radius} must be positive")));
    }
    let mut rng = rng(seed);
    let mut values = Vec::with_capacity(n * m);
    let mut dir = vec![0.0; m];
    for _ in 0..n {
        let norm = loop {
            for d in dir.iter_mut() {
                *d = normal(&mut rng);
            }
            let s = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if s > 0.0 {
                break s;
            }
        };
        let r = radius * rng.random::<f64>().powf(1.0 / m as f64);
        values.extend(dir.iter().map(|d| d / norm * r));
    }
    finish(n, m, values, vec![0; n], vec![all_attrs(m); n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformKind {
    /// Uniform on [-1, 1] in every axis.
    UniformCube,
    /// Uniform on [-1, 1] in axis 0, exactly 0 elsewhere.
    SingleUniform,
    /// Uniform on [-1, 1] in the first m/2 axes, exactly 0 elsewhere.
    SemiUniform,
    /// Like `SingleUniform` but the other axes are uniform on ±1e-10.
    AlmostSingleUniform,
    /// Like `SemiUniform` but the other axes are uniform on ±1e-10.
    AlmostSemiUniform,
}

impl UniformKind {
    pub const ALL: [UniformKind; 5] = [
        UniformKind::UniformCube,
        UniformKind::SingleUniform,
        UniformKind::SemiUniform,
        UniformKind::AlmostSingleUniform,
        UniformKind::AlmostSemiUniform,
    ];

    /// Number of leading axes with radius 1.
    pub fn active_axes(self, m: usize) -> usize {
        match self {
            UniformKind::UniformCube => m,
            UniformKind::SingleUniform | UniformKind::AlmostSingleUniform => 1,
            UniformKind::SemiUniform | UniformKind::AlmostSemiUniform => m / 2,
        }
    }

    fn inactive_radius(self) -> f64 {
        match self {
            UniformKind::AlmostSingleUniform | UniformKind::AlmostSemiUniform => ALMOST_ZERO_RADIUS,
            _ => 0.0,
        }
    }

    fn needs_even(self) -> bool {
        matches!(self, UniformKind::SemiUniform | UniformKind::AlmostSemiUniform)
    }

    pub fn name(self) -> &'static str {
        match self {
            UniformKind::UniformCube => "uniform",
            UniformKind::SingleUniform => "single_uniform",
            UniformKind::SemiUniform => "semi_uniform",
            UniformKind::AlmostSingleUniform => "almost_single_uniform",
            UniformKind::AlmostSemiUniform => "almost_semi_uniform",
        }
    }
}

impl fmt::Display for UniformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UniformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform_cube" => Ok(UniformKind::UniformCube),
            "single_uniform" => Ok(UniformKind::SingleUniform),
            "semi_uniform" => Ok(UniformKind::SemiUniform),
            "almost_single_uniform" => Ok(UniformKind::AlmostSingleUniform),
            "almost_semi_uniform" => Ok(UniformKind::AlmostSemiUniform),
            _ => Err(Error::Unknown {
                what: "uniform kind",
                name: s.to_string(),
            }),
        }
    }
}

/// Axis-wise independent uniforms. `true_subspaces` holds the radius-1 axes.
pub fn gen_uniform_variant(kind: UniformKind, n: usize, m: usize, seed: u64) -> Result<Dataset> {
    check_positive("n", n)?;
    check_positive("m", m)?;
    if kind.needs_even() && !m.is_multiple_of(2) {
        return Err(Error::invalid("m", format!("{kind} needs an even m, got {m}")));
    }
    let active = kind.active_axes(m);
    let small = kind.inactive_radius();
    let mut rng = rng(seed);
    let mut values = Vec::with_capacity(n * m);
    for _ in 0..n {
        for j in 0..m {
            let v = if j < active {
                uniform_sym(&mut rng, 1.0)
            } else if small > 0.0 {
                uniform_sym(&mut rng, small)
            } else {
                0.0
            };
            values.push(v);
        }
    }
    finish(n, m, values, vec![0; n], vec![all_attrs(active); n])
}

/// One Gaussian cluster: `size` points concentrated on `attributes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub size: usize,
    pub attributes: AttributeSet,
}

/// Gaussian clusters in axis-parallel subspaces, everything else uniform noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSubspaceSpec {
    pub clusters: Vec<ClusterSpec>,
    pub total_m: usize,
    /// Attributes used by no cluster; must equal `total_m` minus the union of cluster sets.
    pub noise_attributes: usize,
    /// Extra points uniform in every attribute, labelled noise.
    #[serde(default)]
    pub noise_points: usize,
    /// Reject overlapping cluster subspaces.
    #[serde(default)]
    pub disjoint: bool,
}

/// Default points per cluster for the T presets.
pub const DEFAULT_CLUSTER_SIZE: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TPreset {
    T1,
    T2,
    T3,
}

impl FromStr for TPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(TPreset::T1),
            "t2" => Ok(TPreset::T2),
            "t3" => Ok(TPreset::T3),
            _ => Err(Error::Unknown {
                what: "preset",
                name: s.to_string(),
            }),
        }
    }
}

impl GaussianSubspaceSpec {
    /// Clusters on consecutive attribute blocks of the given widths.
    pub fn consecutive(widths: &[usize], cluster_size: usize, total_m: usize) -> Self {
        let mut start = 0;
        let clusters = widths
            .iter()
            .map(|&w| {
                let attributes = (start..start + w).collect();
                start += w;
                ClusterSpec {
                    size: cluster_size,
                    attributes,
                }
            })
            .collect();
        GaussianSubspaceSpec {
            clusters,
            total_m,
            noise_attributes: total_m.saturating_sub(start),
            noise_points: 0,
            disjoint: true,
        }
    }

    /// T1: 30 attributes, five 5-d clusters, 5 noise attributes.
    pub fn t1(cluster_size: usize) -> Self {
        Self::consecutive(&[5, 5, 5, 5, 5], cluster_size, 30)
    }

    /// T2: 50 attributes, clusters of 3, 5, 7, 7, 11 dimensions, 17 noise attributes.
    pub fn t2(cluster_size: usize) -> Self {
        Self::consecutive(&[3, 5, 7, 7, 11], cluster_size, 50)
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters.is_empty() {
            return Err(Error::invalid("spec", "no clusters"));
        }
        check_positive("total_m", self.total_m)?;
        let mut used = vec![false; self.total_m];
        for (i, c) in self.clusters.iter().enumerate() {
            check_positive("cluster size", c.size)?;
            if c.attributes.is_empty() || c.attributes.bound() > self.total_m {
                return Err(Error::invalid(
                    "spec",
                    format!("cluster {i} subspace {} is empty or exceeds m", c.attributes),
                ));
            }
            for a in c.attributes.iter() {
                if used[a] && self.disjoint {
                    return Err(Error::invalid(
                        "spec",
                        format!("cluster {i} reuses attribute {a} in a disjoint spec"),
                    ));
                }
                used[a] = true;
            }
        }
        let free = used.iter().filter(|u| !**u).count();
        if free != self.noise_attributes {
            return Err(Error::invalid(
                "spec",
                format!(
                    "{} noise attributes declared but {free} are unused by clusters",
                    self.noise_attributes
                ),
            ));
        }
        Ok(())
    }
}

/// Generates Gaussian subspace clusters.
///
/// For every (cluster, relevant attribute) pair a centre `c ~ U[-1, 1]` and a spread
/// `r ~ U(0, 0.2]` are drawn once; the cluster's points take `c + r·N(0, 1)` there.
/// All other attributes of every point are uniform on [-1, 1]. Points come cluster by
/// cluster, noise points last.
pub fn gen_gaussian_subspace(spec: &GaussianSubspaceSpec, seed: u64) -> Result<Dataset> {
    let mut rng = rng(seed);
    gaussian_subspace_with(spec, &mut rng)
}

fn gaussian_subspace_with(spec: &GaussianSubspaceSpec, rng: &mut SynthRng) -> Result<Dataset> {
    spec.validate()?;
    let m = spec.total_m;
    let n: usize = spec.clusters.iter().map(|c| c.size).sum::<usize>() + spec.noise_points;
    let mut values = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    let mut subspaces = Vec::with_capacity(n);
    for (ci, cluster) in spec.clusters.iter().enumerate() {
        let params: Vec<(usize, f64, f64)> = cluster
            .attributes
            .iter()
            .map(|a| {
                let c = uniform_sym(rng, 1.0);
                let r = 0.2 * (1.0 - rng.random::<f64>());
                (a, c, r)
            })
            .collect();
        for _ in 0..cluster.size {
            let start = values.len();
            for _ in 0..m {
                values.push(uniform_sym(rng, 1.0));
            }
            for &(a, c, r) in &params {
                values[start + a] = c + r * normal(rng);
            }
            labels.push(ci as Label);
            subspaces.push(cluster.attributes.clone());
        }
    }
    for _ in 0..spec.noise_points {
        for _ in 0..m {
            values.push(uniform_sym(rng, 1.0));
        }
        labels.push(NOISE);
        subspaces.push(AttributeSet::empty());
    }
    finish(n, m, values, labels, subspaces)
}

/// Number of uniform attributes T3 appends to T2.
pub const T3_EXTRA_ATTRIBUTES: usize = 50;

/// T1, T2 or T3 with `cluster_size` points per cluster. T3 is the T2 draw for the same
/// seed with 50 uniform attributes appended.
pub fn gen_t_preset(preset: TPreset, cluster_size: usize, seed: u64) -> Result<Dataset> {
    match preset {
        TPreset::T1 => gen_gaussian_subspace(&GaussianSubspaceSpec::t1(cluster_size), seed),
        TPreset::T2 => gen_gaussian_subspace(&GaussianSubspaceSpec::t2(cluster_size), seed),
        TPreset::T3 => {
            let mut rng = rng(seed);
            let t2 = gaussian_subspace_with(&GaussianSubspaceSpec::t2(cluster_size), &mut rng)?;
            let m = t2.m() + T3_EXTRA_ATTRIBUTES;
            let mut values = Vec::with_capacity(t2.n() * m);
            for row in t2.rows() {
                values.extend_from_slice(row);
                for _ in 0..T3_EXTRA_ATTRIBUTES {
                    values.push(uniform_sym(&mut rng, 1.0));
                }
            }
            finish(
                t2.n(),
                m,
                values,
                t2.true_labels().unwrap_or_default().to_vec(),
                t2.true_subspaces().unwrap_or_default().to_vec(),
            )
        }
    }
}

/// Spread of the Gaussian attributes in [`gen_dish3d`].
pub const DISH3D_SPREAD: f64 = 0.01;

/// The four subspace clusters of [`gen_dish3d`]: (relevant attributes, centres).
pub const DISH3D_CLUSTERS: [(&[usize], &[f64]); 4] = [
    // 1-d subspace: z ≈ 0.5, a plane in 3-space
    (&[2], &[0.5]),
    // 1-d subspace: x ≈ 0.2
    (&[0], &[0.2]),
    // 2-d subspace: (y, z) ≈ (0.8, 0.5), a line lying inside the z ≈ 0.5 plane
    (&[1, 2], &[0.8, 0.5]),
    // 2-d subspace: (x, y) ≈ (0.7, 0.3), a line parallel to z
    (&[0, 1], &[0.7, 0.3]),
];

/// A 3-d set with nested 1-d and 2-d subspace clusters plus uniform noise in [0,1]³.
///
/// A cluster with relevant attributes S is Gaussian (spread [`DISH3D_SPREAD`]) on S
/// and uniform on [0, 1] elsewhere; its `true_subspace` is S. The third cluster sits
/// inside the first. `noise_n` defaults to 10% of the total.
pub fn gen_dish3d(n_per_cluster: usize, noise_n: Option<usize>, seed: u64) -> Result<Dataset> {
    check_positive("n_per_cluster", n_per_cluster)?;
    let clustered = n_per_cluster * DISH3D_CLUSTERS.len();
    let noise_n = noise_n.unwrap_or((clustered as f64 / 9.0).round() as usize);
    let n = clustered + noise_n;
    let mut rng = rng(seed);
    let mut values = Vec::with_capacity(n * 3);
    let mut labels = Vec::with_capacity(n);
    let mut subspaces = Vec::with_capacity(n);
    for (ci, (attrs, centres)) in DISH3D_CLUSTERS.iter().enumerate() {
        let set: AttributeSet = attrs.iter().copied().collect();
        for _ in 0..n_per_cluster {
            let mut p = [0.0; 3];
            for v in p.iter_mut() {
                *v = rng.random::<f64>();
            }
            for (&a, &c) in attrs.iter().zip(centres.iter()) {
                p[a] = c + DISH3D_SPREAD * normal(&mut rng);
            }
            values.extend_from_slice(&p);
            labels.push(ci as Label);
            subspaces.push(set.clone());
        }
    }
    for _ in 0..noise_n {
        for _ in 0..3 {
            values.push(rng.random::<f64>());
        }
        labels.push(NOISE);
        subspaces.push(AttributeSet::empty());
    }
    finish(n, 3, values, labels, subspaces)
}

/// Well-known manifolds, embedded in the leading coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    /// Unit sphere in `dim` coordinates.
    Sphere { dim: usize },
    /// Random full-rank affine image of a `dim`-cube.
    Affine { dim: usize },
    /// Helicoid (2-d helix surface) in 3 coordinates.
    Helix,
    /// Swiss roll in 3 coordinates.
    SwissRoll,
    /// Uniform `dim`-cube [0, 1]^dim.
    Hypercube { dim: usize },
    /// Möbius band twisted 10 times, 3 coordinates.
    Moebius10,
    /// Isotropic standard normal in `dim` coordinates.
    Gaussian { dim: usize },
}

impl ManifoldKind {
    /// Number of coordinates the manifold occupies.
    pub fn touched(self) -> usize {
        match self {
            ManifoldKind::Sphere { dim }
            | ManifoldKind::Affine { dim }
            | ManifoldKind::Hypercube { dim }
            | ManifoldKind::Gaussian { dim } => dim,
            ManifoldKind::Helix | ManifoldKind::SwissRoll | ManifoldKind::Moebius10 => 3,
        }
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;

    /// Accepts `m1`, `m2`, `m5`, `m7`, `m9`, `m10`, `m11`, `m12`, or a name with an
    /// optional `:dim` suffix such as `sphere:4`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, dim) = match s.split_once(':') {
            Some((n, d)) => (
                n,
                Some(d.parse::<usize>().map_err(|_| Error::invalid("manifold dim", d))?),
            ),
            None => (s, None),
        };
        let kind = match name {
            "m1" => ManifoldKind::Sphere { dim: 11 },
            "m2" => ManifoldKind::Affine { dim: 5 },
            "m5" | "helix" => ManifoldKind::Helix,
            "m7" | "swiss_roll" => ManifoldKind::SwissRoll,
            "m9" => ManifoldKind::Affine { dim: 20 },
            "m10" => ManifoldKind::Hypercube { dim: 11 },
            "m11" | "moebius10" => ManifoldKind::Moebius10,
            "m12" => ManifoldKind::Gaussian { dim: 20 },
            "sphere" => ManifoldKind::Sphere { dim: dim.unwrap_or(11) },
            "affine" => ManifoldKind::Affine { dim: dim.unwrap_or(5) },
            "hypercube" => ManifoldKind::Hypercube { dim: dim.unwrap_or(11) },
            "gaussian" => ManifoldKind::Gaussian { dim: dim.unwrap_or(20) },
            _ => {
                return Err(Error::Unknown {
                    what: "manifold",
                    name: s.to_string(),
                })
            }
        };
        Ok(kind)
    }
}

/// Samples `n` points of `kind`, zero-padded to `ambient_dim` coordinates.
pub fn gen_manifold(kind: ManifoldKind, n: usize, ambient_dim: usize, seed: u64) -> Result<Dataset> {
    check_positive("n", n)?;
    let d = kind.touched();
    check_positive("manifold dimension", d)?;
    if ambient_dim < d {
        return Err(Error::invalid(
            "ambient_dim",
            format!("{ambient_dim} is below the {d} coordinates the manifold needs"),
        ));
    }
    let mut rng = rng(seed);
    let affine = if let ManifoldKind::Affine { dim } = kind {
        let a: Vec<f64> = (0..dim * dim).map(|_| normal(&mut rng)).collect();
        let b: Vec<f64> = (0..dim).map(|_| uniform_sym(&mut rng, 1.0)).collect();
        Some((a, b))
    } else {
        None
    };

    let mut values = Vec::with_capacity(n * ambient_dim);
    let mut p = vec![0.0; d];
    for _ in 0..n {
        match kind {
            ManifoldKind::Sphere { .. } => loop {
                for v in p.iter_mut() {
                    *v = normal(&mut rng);
                }
                let s = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                if s > 0.0 {
                    p.iter_mut().for_each(|v| *v /= s);
                    break;
                }
            },
            ManifoldKind::Affine { dim } => {
                let (a, b) = affine.as_ref().expect("affine map drawn above");
                let t: Vec<f64> = (0..dim).map(|_| uniform_sym(&mut rng, 1.0)).collect();
                for (i, v) in p.iter_mut().enumerate() {
                    *v = b[i] + (0..dim).map(|j| a[i * dim + j] * t[j]).sum::<f64>();
                }
            }
            ManifoldKind::Helix => {
                let t = 4.0 * PI * rng.random::<f64>();
                let s = uniform_sym(&mut rng, 1.0);
                p.copy_from_slice(&[s * t.cos(), s * t.sin(), t / (4.0 * PI)]);
            }
            ManifoldKind::SwissRoll => {
                let t = 1.5 * PI * (1.0 + 2.0 * rng.random::<f64>());
                let h = 21.0 * rng.random::<f64>();
                p.copy_from_slice(&[t * t.cos(), h, t * t.sin()]);
            }
            ManifoldKind::Hypercube { .. } => {
                for v in p.iter_mut() {
                    *v = rng.random::<f64>();
                }
            }
            ManifoldKind::Moebius10 => {
                let u = 2.0 * PI * rng.random::<f64>();
                let v = uniform_sym(&mut rng, 1.0);
                let half_twists = 10.0 * u / 2.0;
                let r = 1.0 + 0.5 * v * half_twists.cos();
                p.copy_from_slice(&[r * u.cos(), r * u.sin(), 0.5 * v * half_twists.sin()]);
            }
            ManifoldKind::Gaussian { .. } => {
                for v in p.iter_mut() {
                    *v = normal(&mut rng);
                }
            }
        }
        values.extend_from_slice(&p);
        values.extend(std::iter::repeat_n(0.0, ambient_dim - d));
    }
    finish(n, ambient_dim, values, vec![0; n], vec![all_attrs(d); n])
}
