//! Command-line experiment runner for the Euler k-means family.
//!
//! Exit codes: 0 on success, 2 for configuration errors (bad flags or
//! parameters), 3 for data errors (missing or malformed input files).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};

use euler_bench::boundary::{emit_boundary_grid, GridBounds};
use euler_bench::experiment::{
    alpha_sweep, default_alpha_grid, kappa_vs_k_study, run_experiment, Algorithm, DatasetSource,
    ExperimentConfig,
};
use euler_bench::table::{experiment_table, kappa_table, sweep_table};
use euler_clustering::algos::{EmptyClusterPolicy, InitScheme};
use euler_clustering::dataset::{save_result, NormalizationMode};
use euler_clustering::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Kmeans,
    Eulerk,
    Rek1,
    Rek2,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Kmeans => Algorithm::Kmeans,
            AlgoArg::Eulerk => Algorithm::EulerK,
            AlgoArg::Rek1 => Algorithm::Rek1,
            AlgoArg::Rek2 => Algorithm::Rek2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenerateKind {
    Halfmoon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalizeArg {
    None,
    Minmax01,
    Zscore,
}

impl From<NormalizeArg> for NormalizationMode {
    fn from(n: NormalizeArg) -> Self {
        match n {
            NormalizeArg::None => NormalizationMode::None,
            NormalizeArg::Minmax01 => NormalizationMode::MinMax01,
            NormalizeArg::Zscore => NormalizationMode::Zscore,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitArg {
    /// Seeded sample of k distinct data points.
    Sample,
    /// Uniform angles on the mapped sphere (mapped-space algorithms only).
    Sphere,
}

impl From<InitArg> for InitScheme {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Sample => InitScheme::SamplePoints,
            InitArg::Sphere => InitScheme::SphereUniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmptyArg {
    /// Reseed an emptied cluster with the farthest point of the largest
    /// contributor.
    Reseed,
    /// Abort the fit when a cluster empties.
    Error,
}

impl From<EmptyArg> for EmptyClusterPolicy {
    fn from(e: EmptyArg) -> Self {
        match e {
            EmptyArg::Reseed => EmptyClusterPolicy::ReseedFarthest,
            EmptyArg::Error => EmptyClusterPolicy::DropError,
        }
    }
}

/// Seeded clustering benchmarks for the Euler k-means family.
#[derive(Debug, Parser)]
#[command(
    name = "euler-bench",
    version,
    about,
    group(ArgGroup::new("data_source").required(true).args(["input", "generate"])),
    group(ArgGroup::new("alpha_choice").args(["alpha", "alpha_grid"]))
)]
struct Cli {
    /// Clustering algorithm.
    #[arg(long, value_enum)]
    algo: AlgoArg,

    /// CSV input file (numeric table, optional header).
    #[arg(long)]
    input: Option<PathBuf>,

    /// Generate a synthetic dataset instead of reading a file.
    #[arg(long, value_enum)]
    generate: Option<GenerateKind>,

    /// Points to generate (with --generate).
    #[arg(long, default_value_t = 1000, requires = "generate")]
    n: usize,

    /// Gaussian noise sigma for the generator (with --generate).
    #[arg(long, default_value_t = 0.1, requires = "generate")]
    noise: f64,

    /// Label column of the CSV, by header name or zero-based index.
    #[arg(long, requires = "input")]
    label_col: Option<String>,

    /// Number of clusters.
    #[arg(long)]
    k: Option<usize>,

    /// Angle scale for mapped-space algorithms.
    #[arg(long)]
    alpha: Option<f64>,

    /// Sweep alphas instead of fixing one: "default" or a comma list.
    #[arg(long)]
    alpha_grid: Option<String>,

    /// Independent seeded fits per experiment; restart r uses seed+r.
    #[arg(long, default_value_t = 10)]
    restarts: usize,

    /// Base seed for generation and restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Feature normalization applied before clustering.
    #[arg(long, value_enum, default_value_t = NormalizeArg::Minmax01)]
    normalize: NormalizeArg,

    /// Iteration cap per fit.
    #[arg(long, default_value_t = 300)]
    max_iter: usize,

    /// Relative objective-decrease tolerance for convergence.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,

    /// Centroid initialization scheme.
    #[arg(long, value_enum, default_value_t = InitArg::Sample)]
    init: InitArg,

    /// What to do when a cluster empties mid-fit.
    #[arg(long, value_enum, default_value_t = EmptyArg::Reseed)]
    empty_cluster: EmptyArg,

    /// Write the full-precision JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write a decision-boundary grid CSV here (2-D data, single alpha).
    #[arg(long, conflicts_with = "alpha_grid")]
    emit_boundaries: Option<PathBuf>,

    /// Grid resolution per axis for --emit-boundaries.
    #[arg(long, default_value_t = 200)]
    grid_res: usize,

    /// Run the kappa-versus-k study over this comma list of k values.
    #[arg(long, conflicts_with_all = ["alpha_grid", "emit_boundaries", "k"])]
    kappa_study: Option<String>,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Prints a line to stdout, exiting quietly if the reader has closed the
/// pipe (e.g. `euler-bench ... | head`).
fn emit(text: impl AsRef<str>) {
    use std::io::Write;
    if writeln!(std::io::stdout(), "{}", text.as_ref()).is_err() {
        std::process::exit(0);
    }
}

fn parse_alpha_grid(text: &str) -> Result<Vec<f64>, Error> {
    if text == "default" {
        return Ok(default_alpha_grid());
    }
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| config_error(format!("bad alpha grid entry {tok:?}")))
        })
        .collect()
}

fn parse_k_list(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| config_error(format!("bad k value {tok:?}")))
        })
        .collect()
}

fn build_config(cli: &Cli, k: usize) -> ExperimentConfig {
    let source = match (&cli.input, cli.generate) {
        (Some(path), _) => DatasetSource::Csv {
            path: path.clone(),
            label_col: cli.label_col.clone(),
        },
        (None, Some(GenerateKind::Halfmoon)) => DatasetSource::Halfmoon {
            n: cli.n,
            noise_sigma: cli.noise,
        },
        (None, None) => unreachable!("clap enforces the data source group"),
    };
    ExperimentConfig {
        algorithm: cli.algo.into(),
        source,
        k,
        alpha: cli.alpha,
        restarts: cli.restarts,
        base_seed: cli.seed,
        normalization: cli.normalize.into(),
        max_iter: cli.max_iter,
        rel_tol: cli.tol,
        init: cli.init.into(),
        empty_cluster: cli.empty_cluster.into(),
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Some(spec) = &cli.kappa_study {
        let k_values = parse_k_list(spec)?;
        let first = *k_values
            .first()
            .ok_or_else(|| config_error("empty k list for the kappa study"))?;
        let config = build_config(cli, first);
        if config.algorithm != Algorithm::EulerK {
            return Err(config_error(
                "the kappa study measures free-centroid fits; use --algo eulerk",
            ));
        }
        if config.alpha.is_none() {
            return Err(config_error("the kappa study needs --alpha"));
        }
        config.validate()?;
        let study = kappa_vs_k_study(&config, &k_values)?;
        emit(kappa_table(&study));
        if let Some(out) = &cli.out {
            save_result(out, &study)?;
            emit(format!("report written to {}", out.display()));
        }
        return Ok(());
    }

    let k = cli
        .k
        .ok_or_else(|| config_error("--k is required outside the kappa study"))?;
    let config = build_config(cli, k);

    if let Some(grid_spec) = &cli.alpha_grid {
        let grid = parse_alpha_grid(grid_spec)?;
        let sweep = alpha_sweep(&config, &grid)?;
        emit(sweep_table(&sweep));
        if let Some(out) = &cli.out {
            save_result(out, &sweep)?;
            emit(format!("report written to {}", out.display()));
        }
        return Ok(());
    }

    config.validate()?;
    if cli.emit_boundaries.is_some() && !config.algorithm.is_mapped() {
        return Err(config_error(
            "decision boundaries apply to mapped-space algorithms",
        ));
    }
    let outcome = run_experiment(&config)?;
    emit(experiment_table(&[&outcome.report]));
    emit(format!(
        "best restart: {} (objective {})",
        outcome.report.best_restart,
        outcome.best.objective()
    ));
    if let Some(out) = &cli.out {
        save_result(out, &outcome.report)?;
        emit(format!("report written to {}", out.display()));
    }
    if let Some(path) = &cli.emit_boundaries {
        let bounds = GridBounds::of(&outcome.data)?;
        emit_boundary_grid(&outcome.best, &bounds, cli.grid_res, path)?;
        emit(format!("boundary grid written to {}", path.display()));
    }
    Ok(())
}

/// Data problems (unreadable or malformed inputs) exit 3; everything else
/// that fails is a configuration problem and exits 2.
fn classify(error: &Error) -> u8 {
    match error {
        Error::Io { .. } | Error::Parse(_) | Error::InvalidData(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(classify(&error))
        }
    }
}
