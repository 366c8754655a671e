//! Seeded multi-restart experiments, alpha-grid sweeps, and the
//! kappa-versus-k study.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use euler_clustering::algos::{
    fit_eulerk, fit_kmeans, fit_rek1, fit_rek2, ClusteringResult, EmptyClusterPolicy, InitScheme,
    LloydConfig,
};
use euler_clustering::dataset::{
    gen_halfmoon, load_csv, normalize, HalfmoonSpec, LabelColumn, NormalizationMode,
    NormalizationParams, RealDataset,
};
use euler_clustering::error::{Error, Result};
use euler_clustering::kernel::scale_angles;
use euler_clustering::metrics::{deviation_degree, MetricReport};

/// Clustering algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Kmeans,
    EulerK,
    Rek1,
    Rek2,
}

impl Algorithm {
    /// Whether the algorithm runs in the mapped angle space (and therefore
    /// needs an alpha scale).
    pub fn is_mapped(self) -> bool {
        self != Algorithm::Kmeans
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algorithm::Kmeans => "kmeans",
            Algorithm::EulerK => "eulerk",
            Algorithm::Rek1 => "rek1",
            Algorithm::Rek2 => "rek2",
        };
        f.write_str(name)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Algorithm::Kmeans),
            "eulerk" => Ok(Algorithm::EulerK),
            "rek1" => Ok(Algorithm::Rek1),
            "rek2" => Ok(Algorithm::Rek2),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm {other:?}; expected kmeans, eulerk, rek1, or rek2"
            ))),
        }
    }
}

/// Where the experiment's data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSource {
    /// A CSV file, with an optional label column given by name or index.
    Csv {
        path: PathBuf,
        label_col: Option<String>,
    },
    /// The built-in half-moon generator, seeded with the experiment's base
    /// seed.
    Halfmoon { n: usize, noise_sigma: f64 },
}

/// A complete description of one experiment. The same config with the same
/// base seed always produces the same report (timing aside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub source: DatasetSource,
    pub k: usize,
    /// Angle scale; required by mapped-space algorithms, rejected by kmeans.
    pub alpha: Option<f64>,
    /// Number of independent fits; restart `r` runs with seed
    /// `base_seed + r`.
    pub restarts: usize,
    pub base_seed: u64,
    pub normalization: NormalizationMode,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub init: InitScheme,
    pub empty_cluster: EmptyClusterPolicy,
}

impl ExperimentConfig {
    /// Defaults mirroring the CLI: 10 restarts, minmax01 normalization,
    /// 300 iterations, tolerance 1e-8, sample-points init, reseed policy.
    pub fn new(algorithm: Algorithm, source: DatasetSource, k: usize) -> Self {
        Self {
            algorithm,
            source,
            k,
            alpha: None,
            restarts: 10,
            base_seed: 0,
            normalization: NormalizationMode::MinMax01,
            max_iter: 300,
            rel_tol: 1e-8,
            init: InitScheme::SamplePoints,
            empty_cluster: EmptyClusterPolicy::ReseedFarthest,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        match (self.algorithm.is_mapped(), self.alpha) {
            (true, None) => {
                return Err(Error::InvalidParameter(format!(
                    "{} requires an alpha scale",
                    self.algorithm
                )))
            }
            (false, Some(_)) => {
                return Err(Error::InvalidParameter(
                    "kmeans runs in the original space and takes no alpha".into(),
                ))
            }
            (true, Some(a)) if !a.is_finite() || a <= 0.0 => {
                return Err(Error::InvalidParameter(format!(
                    "alpha must be positive, got {a}"
                )))
            }
            _ => {}
        }
        if let DatasetSource::Halfmoon { n, noise_sigma } = self.source {
            HalfmoonSpec {
                n,
                noise_sigma,
                seed: self.base_seed,
            }
            .validate()?;
        }
        Ok(())
    }

    fn lloyd(&self, seed: u64) -> LloydConfig {
        LloydConfig {
            k: self.k,
            max_iter: self.max_iter,
            rel_tol: self.rel_tol,
            seed,
            init: self.init,
            empty_cluster: self.empty_cluster,
        }
    }
}

/// One seeded fit inside an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub seed: u64,
    /// Final objective value (last trace entry).
    pub objective: f64,
    /// Objective after init and after each iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate_dims: usize,
    pub reseeded_clusters: usize,
    /// Mean deviation degree of the fitted centroids; absent for kmeans.
    pub kappa_mean: Option<f64>,
    /// Label-based scores; absent when the dataset has no ground truth.
    pub metrics: Option<MetricReport>,
}

/// Mean and sample standard deviation of a quantity over restarts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Sample statistics (n−1 denominator); a single value has std 0.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n > 0, "statistics need at least one value");
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        };
        Self { mean, std }
    }
}

/// Aggregate statistics over an experiment's restarts; always recomputable
/// from the per-restart records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub objective: Stat,
    pub acc: Option<Stat>,
    pub nmi: Option<Stat>,
    pub kappa: Option<Stat>,
}

impl Aggregates {
    pub fn from_records(records: &[RestartRecord]) -> Self {
        let collect = |f: &dyn Fn(&RestartRecord) -> Option<f64>| -> Option<Stat> {
            let values: Vec<f64> = records.iter().filter_map(f).collect();
            if values.len() == records.len() {
                Some(Stat::of(&values))
            } else {
                None
            }
        };
        Self {
            objective: Stat::of(&records.iter().map(|r| r.objective).collect::<Vec<_>>()),
            acc: collect(&|r| r.metrics.as_ref().map(|m| m.acc)),
            nmi: collect(&|r| r.metrics.as_ref().map(|m| m.nmi)),
            kappa: collect(&|r| r.kappa_mean),
        }
    }
}

/// Wall-clock bookkeeping, kept in its own section so that everything else
/// in a report is bit-for-bit reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub per_restart_secs: Vec<f64>,
    pub total_secs: f64,
}

/// The serializable outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n_points: usize,
    pub n_dims: usize,
    pub n_classes: Option<usize>,
    pub records: Vec<RestartRecord>,
    pub aggregates: Aggregates,
    /// Index of the restart with the lowest final objective.
    pub best_restart: usize,
    pub timing: TimingReport,
}

/// An experiment report together with the in-memory artifacts that are too
/// heavy to serialize: the winning fit and the prepared dataset.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    /// The fit from the best restart (lowest final objective, ties toward
    /// the earliest restart).
    pub best: ClusteringResult,
    /// The dataset after normalization, as the algorithm saw it.
    pub data: RealDataset,
    pub norm_params: NormalizationParams,
}

/// Loads or generates the configured dataset and applies normalization.
pub fn prepare_dataset(config: &ExperimentConfig) -> Result<(RealDataset, NormalizationParams)> {
    let raw = match &config.source {
        DatasetSource::Csv { path, label_col } => {
            let col = label_col
                .as_deref()
                .map(|s| s.parse::<LabelColumn>().expect("label column parse is infallible"));
            load_csv(path, col.as_ref())?
        }
        DatasetSource::Halfmoon { n, noise_sigma } => gen_halfmoon(&HalfmoonSpec {
            n: *n,
            noise_sigma: *noise_sigma,
            seed: config.base_seed,
        })?,
    };
    Ok(normalize(&raw, config.normalization))
}

/// Runs `config.restarts` independent seeded fits and aggregates the
/// metrics. Restart `r` uses seed `base_seed + r`, so any restart can be
/// reproduced in isolation.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let (data, norm_params) = prepare_dataset(config)?;
    run_prepared(config, data, norm_params)
}

/// Like [`run_experiment`] but on an already prepared (normalized) dataset;
/// used by sweeps to load the data once.
pub fn run_prepared(
    config: &ExperimentConfig,
    data: RealDataset,
    norm_params: NormalizationParams,
) -> Result<ExperimentOutcome> {
    config.validate()?;
    let total_start = Instant::now();
    let theta = match config.alpha {
        Some(alpha) => Some(scale_angles(&data, alpha)?),
        None => None,
    };

    let mut records = Vec::with_capacity(config.restarts);
    let mut per_restart_secs = Vec::with_capacity(config.restarts);
    let mut best: Option<(usize, ClusteringResult)> = None;
    for r in 0..config.restarts {
        let seed = config.base_seed.wrapping_add(r as u64);
        let lloyd = config.lloyd(seed);
        let start = Instant::now();
        let result = match config.algorithm {
            Algorithm::Kmeans => fit_kmeans(&data, &lloyd)?,
            Algorithm::EulerK => fit_eulerk(theta.as_ref().unwrap(), &lloyd)?,
            Algorithm::Rek1 => fit_rek1(theta.as_ref().unwrap(), &lloyd)?,
            Algorithm::Rek2 => fit_rek2(theta.as_ref().unwrap(), &lloyd)?,
        };
        per_restart_secs.push(start.elapsed().as_secs_f64());

        let kappa_mean = match config.algorithm {
            Algorithm::Kmeans => None,
            _ => Some(deviation_degree(&result.centroids)?.1),
        };
        let metrics = match data.labels() {
            Some(truth) => Some(MetricReport::compute(
                result.assignment.labels(),
                truth,
                &result.centroids,
            )?),
            None => None,
        };
        records.push(RestartRecord {
            restart: r,
            seed,
            objective: result.objective(),
            objective_trace: result.objective_trace.clone(),
            iterations: result.iterations,
            converged: result.converged,
            degenerate_dims: result.degenerate_dims,
            reseeded_clusters: result.reseeded_clusters,
            kappa_mean,
            metrics,
        });
        let better = best
            .as_ref()
            .is_none_or(|(_, b)| result.objective() < b.objective());
        if better {
            best = Some((r, result));
        }
    }

    let (best_restart, best) = best.expect("restarts >= 1");
    let aggregates = Aggregates::from_records(&records);
    let report = ExperimentReport {
        config: config.clone(),
        n_points: data.n_points(),
        n_dims: data.n_dims(),
        n_classes: data.n_classes(),
        records,
        aggregates,
        best_restart,
        timing: TimingReport {
            per_restart_secs,
            total_secs: total_start.elapsed().as_secs_f64(),
        },
    };
    Ok(ExperimentOutcome {
        report,
        best,
        data,
        norm_params,
    })
}

/// The default alpha grid: {1e-4, 0.001, 0.005, 0.01, 0.05} followed by
/// 0.1..=2.0 in steps of 0.1, then {5, 10, 50}, 100..=900 in steps of 100,
/// and 1000..=10000 in steps of 1000 — 47 distinct values in ascending
/// order.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut grid = vec![1e-4, 0.001, 0.005, 0.01, 0.05];
    grid.extend((1..=20).map(|i| i as f64 / 10.0));
    grid.extend([5.0, 10.0, 50.0]);
    grid.extend((1..=9).map(|i| (i * 100) as f64));
    grid.extend((1..=10).map(|i| (i * 1000) as f64));
    grid
}

/// Which metric ranks the alpha candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMetric {
    Nmi,
    Acc,
}

/// The winning alpha for one ranking metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBest {
    pub alpha: f64,
    pub mean: f64,
    pub std: f64,
}

/// Best alpha under each label-based metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub by_nmi: AlphaBest,
    pub by_acc: AlphaBest,
}

/// One experiment per grid value, in ascending alpha order, plus the best-
/// alpha summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSweepReport {
    pub reports: Vec<ExperimentReport>,
    pub summary: SweepSummary,
}

fn pick_best(reports: &[ExperimentReport], metric: SweepMetric) -> AlphaBest {
    let mut best: Option<AlphaBest> = None;
    for report in reports {
        let stat = match metric {
            SweepMetric::Nmi => report.aggregates.nmi,
            SweepMetric::Acc => report.aggregates.acc,
        }
        .expect("sweep requires labeled data");
        // Strict comparison keeps the smallest alpha on ties.
        if best.is_none_or(|b| stat.mean > b.mean) {
            best = Some(AlphaBest {
                alpha: report.config.alpha.expect("sweep reports carry alpha"),
                mean: stat.mean,
                std: stat.std,
            });
        }
    }
    best.expect("sweep grid is nonempty")
}

/// Runs the experiment once per alpha in the grid and summarizes the best
/// alpha by NMI and by ACC. The grid is sorted ascending and deduplicated;
/// the dataset must carry labels.
pub fn alpha_sweep(config: &ExperimentConfig, grid: &[f64]) -> Result<AlphaSweepReport> {
    if !config.algorithm.is_mapped() {
        return Err(Error::InvalidParameter(
            "alpha sweeps apply to mapped-space algorithms only".into(),
        ));
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("alpha grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|a| !a.is_finite() || **a <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha grid values must be positive, got {bad}"
        )));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let probe = config.clone().with_alpha(grid[0]);
    let (data, norm_params) = prepare_dataset(&probe)?;
    if data.labels().is_none() {
        return Err(Error::InvalidParameter(
            "alpha sweeps rank by label-based metrics; the dataset has no labels".into(),
        ));
    }

    let mut reports = Vec::with_capacity(grid.len());
    for &alpha in &grid {
        let cfg = config.clone().with_alpha(alpha);
        let outcome = run_prepared(&cfg, data.clone(), norm_params.clone())?;
        reports.push(outcome.report);
    }
    let summary = SweepSummary {
        by_nmi: pick_best(&reports, SweepMetric::Nmi),
        by_acc: pick_best(&reports, SweepMetric::Acc),
    };
    Ok(AlphaSweepReport { reports, summary })
}

/// One row of the kappa-versus-k study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub k: usize,
    pub kappa_mean: f64,
    pub kappa_std: f64,
}

/// Mean deviation degree of free-centroid fits as a function of k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaStudy {
    pub rows: Vec<KappaRow>,
}

/// Runs the configured experiment once per k and tabulates the mean
/// deviation degree. Defined for the free-centroid algorithm, where kappa
/// is nonzero; `k_values` must be strictly ascending (duplicates rejected)
/// and at most n.
pub fn kappa_vs_k_study(config: &ExperimentConfig, k_values: &[usize]) -> Result<KappaStudy> {
    if config.algorithm != Algorithm::EulerK {
        return Err(Error::InvalidParameter(
            "the kappa study measures free-centroid fits; use the eulerk algorithm".into(),
        ));
    }
    if k_values.is_empty() {
        return Err(Error::InvalidParameter("no k values given".into()));
    }
    if k_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "k values must be strictly ascending with no duplicates".into(),
        ));
    }
    let (data, norm_params) = prepare_dataset(config)?;
    if *k_values.last().unwrap() > data.n_points() {
        return Err(Error::InvalidParameter(format!(
            "k = {} exceeds the {} available points",
            k_values.last().unwrap(),
            data.n_points()
        )));
    }

    let mut rows = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let mut cfg = config.clone();
        cfg.k = k;
        let outcome = run_prepared(&cfg, data.clone(), norm_params.clone())?;
        let stat = outcome
            .report
            .aggregates
            .kappa
            .expect("eulerk reports always carry kappa");
        rows.push(KappaRow {
            k,
            kappa_mean: stat.mean,
            kappa_std: stat.std,
        });
    }
    Ok(KappaStudy { rows })
}
