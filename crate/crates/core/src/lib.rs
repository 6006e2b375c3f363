//! Axis-wise decomposition of local intrinsic dimensionality, subspace detection and
//! subspace clustering.

pub mod cli;
pub mod cluster;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod io;
pub mod lid;
pub mod metrics;
pub mod neighbors;
pub mod subspace;
pub mod synth;

pub use cluster::{lid_dbscan, ClusteringResult, LidDbscanParams};
pub use dataset::{AttributeSet, Dataset, Label, NOISE};
pub use error::{Error, Result};
pub use lid::{decompose, Estimator, EstimatorConfig, LidDecomposition, Query};
pub use neighbors::{knn, Neighborhood, Norm};
pub use subspace::{SubspacePreference, SubspaceProfileSet};
