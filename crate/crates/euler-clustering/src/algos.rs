//! Seeded Lloyd-style drivers for k-means in the original space and for the
//! three Euler-space variants, plus the individual initialization, assignment,
//! and update steps they alternate.
//!
//! The three Euler variants share one driver. They differ only in the M-step:
//! the free variant takes per-dimension means of the mapped coordinates (the
//! centroid may leave the sphere), the rectified variant renormalizes each
//! dimension back to unit modulus, and the pre-image variant keeps an angle
//! per dimension whose mapped image is the same rectified centroid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::RealDataset;
use crate::error::{Error, Result};
use crate::exec::{compensated_sum, map_indices};
use crate::kernel::{dist_centroid, dist_sphere, AngleMatrix};
use crate::matrix::Matrix;

/// Resultant moduli below this are treated as fully cancelled (antipodal
/// cluster members): the affected dimension keeps its previous value.
pub const DEGENERATE_RESULTANT_EPS: f64 = 1e-12;

/// Wraps an angle into the canonical interval `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(std::f64::consts::TAU);
    if r > std::f64::consts::PI {
        r - std::f64::consts::TAU
    } else {
        r
    }
}

/// Which space the centroid coordinates live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CentroidKind {
    /// Plain k-means centroids in the original space; `b` is unused (zero).
    #[serde(rename = "euclidean")]
    Euclidean,
    /// Per-dimension means of mapped points; modulus at most 1 per dimension.
    #[serde(rename = "euler-free")]
    EulerFree,
    /// Rectified centroids with unit modulus per dimension.
    #[serde(rename = "euler-unit")]
    EulerUnit,
}

/// Cluster centroids, stored as the real and imaginary parts `a` and `b`
/// (each `k x d`) of the unscaled complex coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroids {
    kind: CentroidKind,
    a: Matrix,
    b: Matrix,
}

impl Centroids {
    pub fn new(kind: CentroidKind, a: Matrix, b: Matrix) -> Result<Self> {
        if a.rows() != b.rows() || a.cols() != b.cols() {
            return Err(Error::Shape(format!(
                "centroid parts differ: {}x{} vs {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidData("non-finite centroid entry".into()));
        }
        let out = Self { kind, a, b };
        match kind {
            CentroidKind::Euclidean => {}
            CentroidKind::EulerFree => {
                if out.max_modulus2() > 1.0 + 1e-9 {
                    return Err(Error::InvalidData(format!(
                        "free Euler centroid modulus exceeds 1: {}",
                        out.max_modulus2()
                    )));
                }
            }
            CentroidKind::EulerUnit => {
                if out.max_unit_deviation() > 1e-9 {
                    return Err(Error::InvalidData(format!(
                        "unit centroid off the sphere by {}",
                        out.max_unit_deviation()
                    )));
                }
            }
        }
        Ok(out)
    }

    pub fn kind(&self) -> CentroidKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.a.cols()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn a_row(&self, c: usize) -> &[f64] {
        self.a.row(c)
    }

    pub fn b_row(&self, c: usize) -> &[f64] {
        self.b.row(c)
    }

    /// Squared modulus of one complex coordinate.
    pub fn modulus2(&self, c: usize, l: usize) -> f64 {
        let (a, b) = (self.a.get(c, l), self.b.get(c, l));
        a * a + b * b
    }

    fn max_modulus2(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..self.k() {
            for l in 0..self.d() {
                worst = worst.max(self.modulus2(c, l));
            }
        }
        worst
    }

    /// Largest per-dimension deviation `|a^2 + b^2 - 1|` from the sphere.
    pub fn max_unit_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..self.k() {
            for l in 0..self.d() {
                worst = worst.max((self.modulus2(c, l) - 1.0).abs());
            }
        }
        worst
    }
}

/// Pre-image angles: one angle per cluster and dimension, each in `(-pi, pi]`,
/// standing for the on-sphere centroid `(cos u, sin u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreImageAngles {
    u: Matrix,
}

impl PreImageAngles {
    pub fn new(u: Matrix) -> Result<Self> {
        for c in 0..u.rows() {
            for l in 0..u.cols() {
                let v = u.get(c, l);
                if !v.is_finite() || v <= -std::f64::consts::PI || v > std::f64::consts::PI {
                    return Err(Error::InvalidData(format!(
                        "pre-image angle out of (-pi, pi]: {v}"
                    )));
                }
            }
        }
        Ok(Self { u })
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn row(&self, c: usize) -> &[f64] {
        self.u.row(c)
    }

    /// The mapped on-sphere centroids these angles stand for.
    pub fn to_centroids(&self) -> Centroids {
        let a = self.u.map(f64::cos);
        let b = self.u.map(f64::sin);
        Centroids::new(CentroidKind::EulerUnit, a, b)
            .expect("mapped pre-images lie on the sphere")
    }
}

/// A hard partition of `n` points into `k` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<usize>,
    k: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidPartition(format!(
                "label {bad} out of range for k={k}"
            )));
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Points per cluster.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.k];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// How initial centroids are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitScheme {
    /// `k` distinct data points, sampled without replacement.
    #[serde(rename = "sample-points")]
    SamplePoints,
    /// Independent uniform angles per dimension, mapped onto the sphere.
    #[serde(rename = "sphere-uniform")]
    SphereUniform,
}

/// What to do when a cluster loses all members between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmptyClusterPolicy {
    /// Hand the point farthest from its current centroid to the empty cluster.
    #[serde(rename = "reseed-farthest")]
    ReseedFarthest,
    /// Abort the fit with an error.
    #[serde(rename = "drop-error")]
    DropError,
}

/// Knobs shared by all four Lloyd drivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig {
    pub k: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub init: InitScheme,
    pub empty_cluster: EmptyClusterPolicy,
}

impl LloydConfig {
    /// Defaults: 300 iterations, relative tolerance 1e-8, sample-points
    /// initialization, reseed-farthest empty-cluster handling.
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iter: 300,
            rel_tol: 1e-8,
            seed,
            init: InitScheme::SamplePoints,
            empty_cluster: EmptyClusterPolicy::ReseedFarthest,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.k > n {
            return Err(Error::InvalidParameter(format!(
                "k={} exceeds the number of points n={n}",
                self.k
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.rel_tol >= 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be a nonnegative real, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Everything a fit produces, sufficient to reproduce and audit the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub assignment: Assignment,
    pub centroids: Centroids,
    pub preimages: Option<PreImageAngles>,
    /// Objective after initialization, then after every iteration;
    /// non-increasing within 1e-10.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    /// Angle scale of the fit; absent for plain k-means.
    pub alpha: Option<f64>,
    /// Dimensions whose resultant cancelled during rectified updates.
    pub degenerate_dims: usize,
    /// Empty clusters recovered by the reseed policy.
    pub reseeded_clusters: usize,
    /// Worst observed deviation from the sphere constraint across all
    /// iterations (excess over modulus 1 for free centroids, absolute
    /// deviation for unit ones); absent for plain k-means.
    pub max_unit_violation: Option<f64>,
}

impl ClusteringResult {
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace holds at least the initial objective")
    }
}

fn sample_rows(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, n, k).into_vec()
}

/// Picks `k` distinct data points (seeded, without replacement) and uses
/// their mapped images as initial centroids.
pub fn init_sample_points(theta: &AngleMatrix, k: usize, seed: u64) -> Result<Centroids> {
    let n = theta.n_points();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cannot draw k={k} initial points from n={n}"
        )));
    }
    let d = theta.n_dims();
    let mut a = Vec::with_capacity(k * d);
    let mut b = Vec::with_capacity(k * d);
    for idx in sample_rows(n, k, seed) {
        for &t in theta.row(idx) {
            a.push(t.cos());
            b.push(t.sin());
        }
    }
    Centroids::new(
        CentroidKind::EulerUnit,
        Matrix::from_vec(k, d, a)?,
        Matrix::from_vec(k, d, b)?,
    )
}

/// Draws `k` centroids uniformly on the per-dimension circles: each
/// coordinate is `(cos psi, sin psi)` with `psi` uniform on `(-pi, pi]`.
pub fn init_sphere_uniform(d: usize, k: usize, seed: u64) -> Result<Centroids> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "sphere-uniform init needs d >= 1 and k >= 1, got d={d}, k={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(k * d);
    let mut b = Vec::with_capacity(k * d);
    for _ in 0..k * d {
        let psi = std::f64::consts::PI - std::f64::consts::TAU * rand::Rng::random::<f64>(&mut rng);
        a.push(psi.cos());
        b.push(psi.sin());
    }
    Centroids::new(
        CentroidKind::EulerUnit,
        Matrix::from_vec(k, d, a)?,
        Matrix::from_vec(k, d, b)?,
    )
}

/// Elementwise cosines and sines of the angle matrix, computed once per fit
/// so that every distance evaluation is a plain dot product.
struct Trig {
    cos: Matrix,
    sin: Matrix,
}

impl Trig {
    fn of(theta: &AngleMatrix) -> Self {
        Self {
            cos: theta.thetas().map(f64::cos),
            sin: theta.thetas().map(f64::sin),
        }
    }
}

fn half_norms(a: &Matrix, b: &Matrix) -> Vec<f64> {
    (0..a.rows())
        .map(|c| {
            let mut norm = 0.0;
            for l in 0..a.cols() {
                norm += a.get(c, l) * a.get(c, l) + b.get(c, l) * b.get(c, l);
            }
            0.5 * norm
        })
        .collect()
}

/// Distance from mapped point `j` to centroid `c` in the shared expanded
/// form `d/2 + half_norm - <trig_j, (a_c, b_c)>`.
fn point_centroid_dist(
    trig: &Trig,
    j: usize,
    a: &Matrix,
    b: &Matrix,
    half_norm: &[f64],
    c: usize,
) -> f64 {
    let (ct, st) = (trig.cos.row(j), trig.sin.row(j));
    let (ac, bc) = (a.row(c), b.row(c));
    let mut cross = 0.0;
    for l in 0..ac.len() {
        cross += ct[l] * ac[l] + st[l] * bc[l];
    }
    ac.len() as f64 / 2.0 + half_norm[c] - cross
}

fn assign_core(trig: &Trig, a: &Matrix, b: &Matrix, half_norm: &[f64]) -> Vec<usize> {
    let n = trig.cos.rows();
    let k = a.rows();
    map_indices(n, |j| {
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for c in 0..k {
            let dist = point_centroid_dist(trig, j, a, b, half_norm, c);
            if dist < best_dist {
                best_dist = dist;
                best = c;
            }
        }
        best
    })
}

fn objective_core(trig: &Trig, a: &Matrix, b: &Matrix, half_norm: &[f64], labels: &[usize]) -> f64 {
    let dists = map_indices(trig.cos.rows(), |j| {
        point_centroid_dist(trig, j, a, b, half_norm, labels[j])
    });
    compensated_sum(&dists)
}

/// Assigns every mapped point to its nearest Euler centroid (free or unit
/// kind), ties toward the lowest cluster index.
pub fn assign(theta: &AngleMatrix, centroids: &Centroids) -> Result<Assignment> {
    if centroids.kind() == CentroidKind::Euclidean {
        return Err(Error::InvalidParameter(
            "assign operates in the mapped space; use assign_euclidean for plain k-means".into(),
        ));
    }
    if centroids.d() != theta.n_dims() {
        return Err(Error::Shape(format!(
            "centroid dimension {} does not match data dimension {}",
            centroids.d(),
            theta.n_dims()
        )));
    }
    let trig = Trig::of(theta);
    let half_norm = half_norms(centroids.a(), centroids.b());
    Assignment::new(
        assign_core(&trig, centroids.a(), centroids.b(), &half_norm),
        centroids.k(),
    )
}

/// Sequential reference implementation of [`assign`]. The data-parallel path
/// must agree with this bit for bit; the benchmark suite compares their
/// throughput.
pub fn assign_sequential(theta: &AngleMatrix, centroids: &Centroids) -> Result<Assignment> {
    if centroids.kind() == CentroidKind::Euclidean {
        return Err(Error::InvalidParameter(
            "assign operates in the mapped space; use assign_euclidean for plain k-means".into(),
        ));
    }
    if centroids.d() != theta.n_dims() {
        return Err(Error::Shape(format!(
            "centroid dimension {} does not match data dimension {}",
            centroids.d(),
            theta.n_dims()
        )));
    }
    let trig = Trig::of(theta);
    let half_norm = half_norms(centroids.a(), centroids.b());
    let (a, b) = (centroids.a(), centroids.b());
    let labels = crate::exec::map_indices_seq(theta.n_points(), |j| {
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for c in 0..centroids.k() {
            let dist = point_centroid_dist(&trig, j, a, b, &half_norm, c);
            if dist < best_dist {
                best_dist = dist;
                best = c;
            }
        }
        best
    });
    Assignment::new(labels, centroids.k())
}

/// Assigns every mapped point to its nearest pre-image centroid.
pub fn assign_preimages(theta: &AngleMatrix, preimages: &PreImageAngles) -> Result<Assignment> {
    if preimages.u().cols() != theta.n_dims() {
        return Err(Error::Shape(format!(
            "pre-image dimension {} does not match data dimension {}",
            preimages.u().cols(),
            theta.n_dims()
        )));
    }
    let trig = Trig::of(theta);
    let a = preimages.u().map(f64::cos);
    let b = preimages.u().map(f64::sin);
    let half_norm = vec![theta.n_dims() as f64 / 2.0; preimages.u().rows()];
    Assignment::new(assign_core(&trig, &a, &b, &half_norm), preimages.u().rows())
}

/// Assigns every point to its nearest Euclidean centroid in the original
/// space (plain k-means E-step).
pub fn assign_euclidean(x: &Matrix, centroids: &Centroids) -> Result<Assignment> {
    if centroids.kind() != CentroidKind::Euclidean {
        return Err(Error::InvalidParameter(
            "assign_euclidean requires euclidean-kind centroids".into(),
        ));
    }
    if centroids.d() != x.cols() {
        return Err(Error::Shape(format!(
            "centroid dimension {} does not match data dimension {}",
            centroids.d(),
            x.cols()
        )));
    }
    let k = centroids.k();
    let labels = map_indices(x.rows(), |j| {
        let row = x.row(j);
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for c in 0..k {
            let dist = euclid_dist2(row, centroids.a_row(c));
            if dist < best_dist {
                best_dist = dist;
                best = c;
            }
        }
        best
    });
    Assignment::new(labels, k)
}

fn euclid_dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(v, m)| (v - m) * (v - m)).sum()
}

/// Per-cluster, per-dimension sums of mapped coordinates plus member counts.
fn cluster_trig_sums(trig: &Trig, labels: &[usize], k: usize) -> (Matrix, Matrix, Vec<usize>) {
    let d = trig.cos.cols();
    let mut sum_cos = Matrix::zeros(k, d);
    let mut sum_sin = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (j, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        let sc = sum_cos.row_mut(c);
        for (l, v) in trig.cos.row(j).iter().enumerate() {
            sc[l] += v;
        }
        let ss = sum_sin.row_mut(c);
        for (l, v) in trig.sin.row(j).iter().enumerate() {
            ss[l] += v;
        }
    }
    (sum_cos, sum_sin, counts)
}

fn require_nonempty(counts: &[usize]) -> Result<()> {
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyCluster(format!("cluster {c} has no members")));
    }
    Ok(())
}

fn eulerk_from_sums(sum_cos: &Matrix, sum_sin: &Matrix, counts: &[usize]) -> Result<Centroids> {
    require_nonempty(counts)?;
    let (k, d) = (sum_cos.rows(), sum_cos.cols());
    let mut a = Matrix::zeros(k, d);
    let mut b = Matrix::zeros(k, d);
    for (c, &count) in counts.iter().enumerate().take(k) {
        let inv = 1.0 / count as f64;
        for l in 0..d {
            a.set(c, l, sum_cos.get(c, l) * inv);
            b.set(c, l, sum_sin.get(c, l) * inv);
        }
    }
    Centroids::new(CentroidKind::EulerFree, a, b)
}

fn rek1_from_sums(
    sum_cos: &Matrix,
    sum_sin: &Matrix,
    counts: &[usize],
    previous: Option<&Centroids>,
) -> Result<(Centroids, usize)> {
    require_nonempty(counts)?;
    let (k, d) = (sum_cos.rows(), sum_cos.cols());
    let mut a = Matrix::zeros(k, d);
    let mut b = Matrix::zeros(k, d);
    let mut degenerate = 0usize;
    for c in 0..k {
        for l in 0..d {
            let (sc, ss) = (sum_cos.get(c, l), sum_sin.get(c, l));
            let resultant = sc.hypot(ss);
            if resultant < DEGENERATE_RESULTANT_EPS {
                degenerate += 1;
                let (pa, pb) = match previous {
                    Some(p) => (p.a().get(c, l), p.b().get(c, l)),
                    None => (1.0, 0.0),
                };
                a.set(c, l, pa);
                b.set(c, l, pb);
            } else {
                a.set(c, l, sc / resultant);
                b.set(c, l, ss / resultant);
            }
        }
    }
    Ok((Centroids::new(CentroidKind::EulerUnit, a, b)?, degenerate))
}

fn rek2_from_sums(
    sum_cos: &Matrix,
    sum_sin: &Matrix,
    counts: &[usize],
    previous: Option<&PreImageAngles>,
) -> Result<(PreImageAngles, usize)> {
    require_nonempty(counts)?;
    let (k, d) = (sum_cos.rows(), sum_cos.cols());
    let mut u = Matrix::zeros(k, d);
    let mut degenerate = 0usize;
    for c in 0..k {
        for l in 0..d {
            let (sc, ss) = (sum_cos.get(c, l), sum_sin.get(c, l));
            if sc.hypot(ss) < DEGENERATE_RESULTANT_EPS {
                degenerate += 1;
                u.set(c, l, previous.map_or(0.0, |p| p.u().get(c, l)));
            } else {
                u.set(c, l, wrap_angle(ss.atan2(sc)));
            }
        }
    }
    Ok((PreImageAngles::new(u)?, degenerate))
}

fn check_update_shapes(theta: &AngleMatrix, assignment: &Assignment) -> Result<()> {
    if assignment.n() != theta.n_points() {
        return Err(Error::Shape(format!(
            "assignment covers {} points, data has {}",
            assignment.n(),
            theta.n_points()
        )));
    }
    Ok(())
}

/// Free Euler centroid update: per-dimension means of the mapped cluster
/// members. The modulus can shrink below 1 wherever members disagree.
pub fn update_centroids_eulerk(theta: &AngleMatrix, assignment: &Assignment) -> Result<Centroids> {
    check_update_shapes(theta, assignment)?;
    let trig = Trig::of(theta);
    let (sum_cos, sum_sin, counts) = cluster_trig_sums(&trig, assignment.labels(), assignment.k());
    eulerk_from_sums(&sum_cos, &sum_sin, &counts)
}

/// Rectified centroid update: the per-dimension resultant normalized back to
/// unit modulus. Returns the centroids and the number of degenerate
/// (cancelled-resultant) dimensions, which keep their previous value.
pub fn update_centroids_rek1(
    theta: &AngleMatrix,
    assignment: &Assignment,
    previous: Option<&Centroids>,
) -> Result<(Centroids, usize)> {
    check_update_shapes(theta, assignment)?;
    let trig = Trig::of(theta);
    let (sum_cos, sum_sin, counts) = cluster_trig_sums(&trig, assignment.labels(), assignment.k());
    rek1_from_sums(&sum_cos, &sum_sin, &counts, previous)
}

/// Pre-image update: per dimension, the circular mean direction
/// `atan2(sum sin, sum cos)` of the cluster members, which maximizes the
/// summed cosine alignment in all quadrants. Returns the angles and the
/// degenerate-dimension count.
pub fn update_preimages_rek2(
    theta: &AngleMatrix,
    assignment: &Assignment,
    previous: Option<&PreImageAngles>,
) -> Result<(PreImageAngles, usize)> {
    check_update_shapes(theta, assignment)?;
    let trig = Trig::of(theta);
    let (sum_cos, sum_sin, counts) = cluster_trig_sums(&trig, assignment.labels(), assignment.k());
    rek2_from_sums(&sum_cos, &sum_sin, &counts, previous)
}

/// Sum of squared mapped-space distances from each point to its assigned
/// centroid (free or unit kind).
pub fn objective(theta: &AngleMatrix, centroids: &Centroids, assignment: &Assignment) -> Result<f64> {
    if centroids.kind() == CentroidKind::Euclidean {
        return Err(Error::InvalidParameter(
            "objective operates in the mapped space; use objective_euclidean".into(),
        ));
    }
    check_update_shapes(theta, assignment)?;
    if centroids.d() != theta.n_dims() || centroids.k() != assignment.k() {
        return Err(Error::Shape("centroid shape mismatch".into()));
    }
    let labels = assignment.labels();
    let dists = map_indices(theta.n_points(), |j| {
        dist_centroid(
            theta.row(j),
            centroids.a_row(labels[j]),
            centroids.b_row(labels[j]),
        )
        .expect("shapes validated")
    });
    Ok(compensated_sum(&dists))
}

/// Sum of squared mapped-space distances from each point to its assigned
/// pre-image centroid.
pub fn objective_preimages(
    theta: &AngleMatrix,
    preimages: &PreImageAngles,
    assignment: &Assignment,
) -> Result<f64> {
    check_update_shapes(theta, assignment)?;
    if preimages.u().cols() != theta.n_dims() || preimages.u().rows() != assignment.k() {
        return Err(Error::Shape("pre-image shape mismatch".into()));
    }
    let labels = assignment.labels();
    let dists = map_indices(theta.n_points(), |j| {
        dist_sphere(theta.row(j), preimages.row(labels[j])).expect("shapes validated")
    });
    Ok(compensated_sum(&dists))
}

/// Sum of squared original-space distances for plain k-means.
pub fn objective_euclidean(x: &Matrix, centroids: &Centroids, assignment: &Assignment) -> Result<f64> {
    if centroids.kind() != CentroidKind::Euclidean {
        return Err(Error::InvalidParameter(
            "objective_euclidean requires euclidean-kind centroids".into(),
        ));
    }
    if assignment.n() != x.rows() || centroids.d() != x.cols() || centroids.k() != assignment.k() {
        return Err(Error::Shape("shape mismatch in euclidean objective".into()));
    }
    let labels = assignment.labels();
    let dists = map_indices(x.rows(), |j| euclid_dist2(x.row(j), centroids.a_row(labels[j])));
    Ok(compensated_sum(&dists))
}

/// Moves points into empty clusters: repeatedly hands the point farthest
/// from its current centroid (among clusters that can spare a member) to the
/// lowest-numbered empty cluster. The distance closure receives the point
/// index and its current label. Returns the number of reseeded clusters.
fn reseed_empty<F: Fn(usize, usize) -> f64>(
    dist_to_assigned: F,
    labels: &mut [usize],
    counts: &mut [usize],
) -> usize {
    let empties: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] == 0).collect();
    let mut moved = 0usize;
    for c in empties {
        let mut farthest: Option<(usize, f64)> = None;
        for (j, &lab) in labels.iter().enumerate() {
            if counts[lab] < 2 {
                continue;
            }
            let dist = dist_to_assigned(j, lab);
            if farthest.is_none_or(|(_, best)| dist > best) {
                farthest = Some((j, dist));
            }
        }
        let (j, _) = farthest.expect("k <= n guarantees a donatable point");
        counts[labels[j]] -= 1;
        counts[c] += 1;
        labels[j] = c;
        moved += 1;
    }
    moved
}

/// Relative objective decrease used by the stopping rule; defined as 0 when
/// the previous objective is already 0.
fn relative_decrease(prev: f64, cur: f64) -> f64 {
    if prev > 0.0 {
        (prev - cur) / prev
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EulerVariant {
    EulerK,
    Rek1,
    Rek2,
}

fn unit_violation(a: &Matrix, b: &Matrix, free: bool) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..a.rows() {
        for l in 0..a.cols() {
            let m2 = a.get(c, l) * a.get(c, l) + b.get(c, l) * b.get(c, l);
            let v = if free { m2 - 1.0 } else { (m2 - 1.0).abs() };
            worst = worst.max(v);
        }
    }
    worst
}

fn fit_euler(theta: &AngleMatrix, cfg: &LloydConfig, variant: EulerVariant) -> Result<ClusteringResult> {
    let n = theta.n_points();
    let d = theta.n_dims();
    let k = cfg.k;
    cfg.validate(n)?;
    let trig = Trig::of(theta);

    let init = match cfg.init {
        InitScheme::SamplePoints => init_sample_points(theta, k, cfg.seed)?,
        InitScheme::SphereUniform => init_sphere_uniform(d, k, cfg.seed)?,
    };
    // Working distance model: coordinates (wa, wb) plus the per-cluster
    // half squared norm. Pre-image runs pin the norm at d/2 exactly.
    let mut preimages: Option<PreImageAngles> = None;
    let (mut wa, mut wb, mut half_norm) = match variant {
        EulerVariant::Rek2 => {
            let mut u = Matrix::zeros(k, d);
            for c in 0..k {
                for l in 0..d {
                    u.set(c, l, wrap_angle(init.b().get(c, l).atan2(init.a().get(c, l))));
                }
            }
            let pre = PreImageAngles::new(u)?;
            let (a, b) = (pre.u().map(f64::cos), pre.u().map(f64::sin));
            preimages = Some(pre);
            (a, b, vec![d as f64 / 2.0; k])
        }
        _ => {
            let half = half_norms(init.a(), init.b());
            (init.a().clone(), init.b().clone(), half)
        }
    };
    let mut centroids = match variant {
        EulerVariant::Rek2 => None,
        _ => Some(init),
    };

    let mut labels = assign_core(&trig, &wa, &wb, &half_norm);
    let mut trace = vec![objective_core(&trig, &wa, &wb, &half_norm, &labels)];
    let mut max_unit_violation =
        unit_violation(&wa, &wb, variant == EulerVariant::EulerK).max(0.0);
    let mut degenerate_dims = 0usize;
    let mut reseeded_clusters = 0usize;
    let mut converged = false;

    for iter in 1..=cfg.max_iter {
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        if counts.contains(&0) {
            match cfg.empty_cluster {
                EmptyClusterPolicy::DropError => {
                    let c = counts.iter().position(|&v| v == 0).unwrap();
                    return Err(Error::EmptyCluster(format!(
                        "cluster {c} became empty at iteration {iter}"
                    )));
                }
                EmptyClusterPolicy::ReseedFarthest => {
                    reseeded_clusters += reseed_empty(
                        |j, lab| point_centroid_dist(&trig, j, &wa, &wb, &half_norm, lab),
                        &mut labels,
                        &mut counts,
                    );
                }
            }
        }

        let (sum_cos, sum_sin, counts) = cluster_trig_sums(&trig, &labels, k);
        match variant {
            EulerVariant::EulerK => {
                let next = eulerk_from_sums(&sum_cos, &sum_sin, &counts)?;
                wa = next.a().clone();
                wb = next.b().clone();
                half_norm = half_norms(&wa, &wb);
                centroids = Some(next);
            }
            EulerVariant::Rek1 => {
                let (next, degen) =
                    rek1_from_sums(&sum_cos, &sum_sin, &counts, centroids.as_ref())?;
                degenerate_dims += degen;
                wa = next.a().clone();
                wb = next.b().clone();
                half_norm = half_norms(&wa, &wb);
                centroids = Some(next);
            }
            EulerVariant::Rek2 => {
                let (next, degen) =
                    rek2_from_sums(&sum_cos, &sum_sin, &counts, preimages.as_ref())?;
                degenerate_dims += degen;
                wa = next.u().map(f64::cos);
                wb = next.u().map(f64::sin);
                preimages = Some(next);
            }
        }
        max_unit_violation =
            max_unit_violation.max(unit_violation(&wa, &wb, variant == EulerVariant::EulerK));

        let new_labels = assign_core(&trig, &wa, &wb, &half_norm);
        let changed = new_labels != labels;
        labels = new_labels;
        let prev = *trace.last().unwrap();
        let cur = objective_core(&trig, &wa, &wb, &half_norm, &labels);
        trace.push(cur);
        if !changed || relative_decrease(prev, cur) < cfg.rel_tol {
            converged = true;
            break;
        }
    }

    let assignment = Assignment::new(labels, k)?;
    let centroids = match (&preimages, centroids) {
        (Some(pre), _) => pre.to_centroids(),
        (None, Some(c)) => c,
        (None, None) => unreachable!("non-preimage variants always carry centroids"),
    };
    Ok(ClusteringResult {
        assignment,
        centroids,
        preimages,
        iterations: trace.len() - 1,
        objective_trace: trace,
        converged,
        seed: cfg.seed,
        alpha: Some(theta.alpha()),
        degenerate_dims,
        reseeded_clusters,
        max_unit_violation: Some(max_unit_violation),
    })
}

/// Euler k-means: free per-dimension mean centroids in the mapped space.
pub fn fit_eulerk(theta: &AngleMatrix, cfg: &LloydConfig) -> Result<ClusteringResult> {
    fit_euler(theta, cfg, EulerVariant::EulerK)
}

/// Rectified Euler k-means, centroid form: unit modulus per dimension is
/// restored after every update.
pub fn fit_rek1(theta: &AngleMatrix, cfg: &LloydConfig) -> Result<ClusteringResult> {
    fit_euler(theta, cfg, EulerVariant::Rek1)
}

/// Rectified Euler k-means, pre-image form: centroids are carried as angles
/// whose mapped image is on the sphere by construction.
pub fn fit_rek2(theta: &AngleMatrix, cfg: &LloydConfig) -> Result<ClusteringResult> {
    fit_euler(theta, cfg, EulerVariant::Rek2)
}

/// Plain k-means in the original space.
pub fn fit_kmeans(data: &RealDataset, cfg: &LloydConfig) -> Result<ClusteringResult> {
    let x = data.values();
    let n = x.rows();
    let d = x.cols();
    let k = cfg.k;
    cfg.validate(n)?;
    if cfg.init == InitScheme::SphereUniform {
        return Err(Error::InvalidParameter(
            "sphere-uniform init applies to the mapped-space algorithms only".into(),
        ));
    }

    let mut a = Matrix::zeros(k, d);
    for (c, idx) in sample_rows(n, k, cfg.seed).into_iter().enumerate() {
        a.row_mut(c).copy_from_slice(x.row(idx));
    }
    let mut centroids = Centroids::new(CentroidKind::Euclidean, a, Matrix::zeros(k, d))?;

    let mut labels = assign_euclidean(x, &centroids)?.labels().to_vec();
    let objective_of = |cent: &Centroids, labels: &[usize]| {
        let dists = map_indices(n, |j| euclid_dist2(x.row(j), cent.a_row(labels[j])));
        compensated_sum(&dists)
    };
    let mut trace = vec![objective_of(&centroids, &labels)];
    let mut reseeded_clusters = 0usize;
    let mut converged = false;

    for iter in 1..=cfg.max_iter {
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        if counts.contains(&0) {
            match cfg.empty_cluster {
                EmptyClusterPolicy::DropError => {
                    let c = counts.iter().position(|&v| v == 0).unwrap();
                    return Err(Error::EmptyCluster(format!(
                        "cluster {c} became empty at iteration {iter}"
                    )));
                }
                EmptyClusterPolicy::ReseedFarthest => {
                    reseeded_clusters += reseed_empty(
                        |j, lab| euclid_dist2(x.row(j), centroids.a_row(lab)),
                        &mut labels,
                        &mut counts,
                    );
                }
            }
        }

        let mut a = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (j, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            let row = a.row_mut(c);
            for (l, v) in x.row(j).iter().enumerate() {
                row[l] += v;
            }
        }
        require_nonempty(&counts)?;
        for (c, &count) in counts.iter().enumerate() {
            let inv = 1.0 / count as f64;
            for v in a.row_mut(c) {
                *v *= inv;
            }
        }
        centroids = Centroids::new(CentroidKind::Euclidean, a, Matrix::zeros(k, d))?;

        let new_labels = assign_euclidean(x, &centroids)?.labels().to_vec();
        let changed = new_labels != labels;
        labels = new_labels;
        let prev = *trace.last().unwrap();
        let cur = objective_of(&centroids, &labels);
        trace.push(cur);
        if !changed || relative_decrease(prev, cur) < cfg.rel_tol {
            converged = true;
            break;
        }
    }

    Ok(ClusteringResult {
        assignment: Assignment::new(labels, k)?,
        centroids,
        preimages: None,
        iterations: trace.len() - 1,
        objective_trace: trace,
        converged,
        seed: cfg.seed,
        alpha: None,
        degenerate_dims: 0,
        reseeded_clusters,
        max_unit_violation: None,
    })
}
