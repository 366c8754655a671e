//! Benchmark harness for the Euler k-means family: seeded multi-restart
//! experiments with ACC/NMI/kappa aggregation, alpha-grid sweeps with
//! best-alpha selection, kappa-versus-k studies, and plot-ready decision
//! boundary grids. The `euler-bench` binary exposes all of it on the
//! command line; the library surface exists so tests and downstream tools
//! can drive the same experiments programmatically.

pub mod boundary;
pub mod experiment;
pub mod table;

pub use boundary::{compute_boundary_grid, emit_boundary_grid, BoundaryGrid, GridBounds};
pub use experiment::{
    alpha_sweep, default_alpha_grid, kappa_vs_k_study, run_experiment, Algorithm, AlphaSweepReport,
    DatasetSource, ExperimentConfig, ExperimentOutcome, ExperimentReport, KappaStudy,
    RestartRecord, Stat, SweepMetric,
};
