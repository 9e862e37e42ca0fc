//! Spectral clustering pipeline: affinity graph, normalized Laplacian,
//! eigenvector embedding, row normalization, k-means and scoring.

mod graph;
mod kmeans;
mod metrics;

pub use graph::{
    affinity, normalized_laplacian, row_normalize, sc_baseline, AffinityMethod, AffinityParams,
    DEFAULT_NEIGHBOR_INDEX,
};
pub use kmeans::{kmeans, KMeansConfig, KMeansResult, KMeansRun, DEFAULT_MAX_ITERS};
pub use metrics::{ari, nmi};
