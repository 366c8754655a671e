//! Clustering on the Euler-kernel feature sphere.
//!
//! Data points are mapped coordinate-wise onto complex unit circles,
//! `x -> (1/sqrt 2) e^{i alpha pi x}`, where cosine-flavored distances make
//! the clustering robust to outliers. This crate implements plain k-means in
//! the original space plus three mapped-space variants — free-centroid Euler
//! k-means and two rectified forms that constrain centroids to the sphere
//! (as complex coordinates, or as explicit pre-image angles) — together with
//! the evaluation metrics, decision boundaries, brute-force reference
//! oracles, and dataset utilities used by the benchmark harness.
//!
//! Entry points: [`kernel::scale_angles`] to move a dataset into angle
//! space, the `algos::fit_*` drivers to cluster, and [`metrics`] to score
//! the results.

pub mod algos;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod kernel;
pub mod matrix;
pub mod metrics;
pub mod oracles;

pub use algos::{
    assign, assign_euclidean, assign_preimages, assign_sequential, fit_eulerk, fit_kmeans,
    fit_rek1, fit_rek2, init_sample_points, init_sphere_uniform,
    objective, objective_euclidean, objective_preimages, update_centroids_eulerk,
    update_centroids_rek1, update_preimages_rek2, Assignment, CentroidKind, Centroids,
    ClusteringResult, EmptyClusterPolicy, InitScheme, LloydConfig, PreImageAngles,
};
pub use dataset::{
    gen_halfmoon, load_csv, normalize, save_csv, save_result, HalfmoonSpec, LabelColumn,
    NormalizationMode, NormalizationParams, RealDataset,
};
pub use error::{Error, Result};
pub use kernel::{
    dist_centroid, dist_sphere, euler_kernel_entry, euler_kernel_matrix, map_point, scale_angles,
    AngleMatrix, KernelMatrix, MappedPoint,
};
pub use matrix::Matrix;
pub use metrics::{
    acc, boundary_eulerk, boundary_rek, deviation_degree, nmi, BoundaryCoefficients,
    BoundaryVariant, MetricReport,
};
pub use oracles::{exhaustive_acc, grid_preimage, kernel_objective_matrix, OracleCaps};
