//! Euler-kernel mathematics: angle scaling, the explicit complex mapping,
//! kernel entries, and distances in the induced space.
//!
//! A data point `x` is mapped coordinate-wise to `(1/sqrt(2)) e^{i a pi x}`,
//! so every mapped coordinate lies on a circle of radius `1/sqrt(2)` and the
//! whole point on a sphere of squared norm `d/2`. All distances below are
//! squared Euclidean distances in that complex space.

use num_complex::Complex64;

use crate::dataset::RealDataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default size cap for [`euler_kernel_matrix`]; the explicit matrix is a
/// test oracle and quadratic in `n`.
pub const KERNEL_MATRIX_CAP: usize = 2000;

pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Per-point, per-dimension angles `theta = alpha * pi * x`, the sole
/// representation consumed by the Euler-space algorithms.
///
/// Angles are stored unwrapped; every formula downstream goes through
/// `cos`/`sin`, so reduction mod 2 pi is never needed.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleMatrix {
    thetas: Matrix,
    alpha: f64,
}

impl AngleMatrix {
    /// Wraps a raw angle matrix. `alpha` records the scaling that produced it.
    pub fn new(thetas: Matrix, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !thetas.is_finite() {
            return Err(Error::InvalidData("non-finite angle entry".into()));
        }
        Ok(Self { thetas, alpha })
    }

    pub fn n_points(&self) -> usize {
        self.thetas.rows()
    }

    pub fn n_dims(&self) -> usize {
        self.thetas.cols()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn row(&self, j: usize) -> &[f64] {
        self.thetas.row(j)
    }

    pub fn thetas(&self) -> &Matrix {
        &self.thetas
    }
}

/// Scales a dataset into angle space: `theta[j][l] = alpha * pi * x[j][l]`.
pub fn scale_angles(data: &RealDataset, alpha: f64) -> Result<AngleMatrix> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !data.values().is_finite() {
        return Err(Error::InvalidData("non-finite value in dataset".into()));
    }
    let thetas = data.values().map(|v| alpha * std::f64::consts::PI * v);
    AngleMatrix::new(thetas, alpha)
}

/// The explicit image of one point: `re = cos(theta)/sqrt(2)`,
/// `im = sin(theta)/sqrt(2)` per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedPoint {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MappedPoint {
    /// Complex inner product `<self, other>` (conjugate-linear in `self`).
    pub fn inner(&self, other: &MappedPoint) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..self.re.len() {
            let a = Complex64::new(self.re[l], self.im[l]).conj();
            let b = Complex64::new(other.re[l], other.im[l]);
            acc += a * b;
        }
        acc
    }
}

/// Maps one row of angles onto the per-dimension circles of radius 1/sqrt(2).
pub fn map_point(theta_row: &[f64]) -> MappedPoint {
    let re = theta_row.iter().map(|t| t.cos() * FRAC_1_SQRT_2).collect();
    let im = theta_row.iter().map(|t| t.sin() * FRAC_1_SQRT_2).collect();
    MappedPoint { re, im }
}

/// One entry of the Euler kernel:
/// `(1/2) sum cos(dtheta) - (i/2) sum sin(dtheta)`.
pub fn euler_kernel_entry(theta_j: &[f64], theta_q: &[f64]) -> Result<Complex64> {
    if theta_j.len() != theta_q.len() {
        return Err(Error::Shape(format!(
            "kernel entry dimensions differ: {} vs {}",
            theta_j.len(),
            theta_q.len()
        )));
    }
    let mut re = 0.0;
    let mut im = 0.0;
    for (tj, tq) in theta_j.iter().zip(theta_q) {
        let delta = tj - tq;
        re += delta.cos();
        im -= delta.sin();
    }
    Ok(Complex64::new(0.5 * re, 0.5 * im))
}

/// Explicit `n x n` Euler kernel matrix. Oracle use only; capped because the
/// cost is quadratic in the dataset size.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, q: usize) -> Complex64 {
        self.entries[j * self.n + q]
    }

    /// Largest deviation from Hermitian symmetry, `max |K[j][q] - conj(K[q][j])|`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n {
            for q in j..self.n {
                let r = (self.get(j, q) - self.get(q, j).conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }
}

/// Builds the explicit Euler kernel matrix for all point pairs.
pub fn euler_kernel_matrix(theta: &AngleMatrix, cap: usize) -> Result<KernelMatrix> {
    let n = theta.n_points();
    if n > cap {
        return Err(Error::Capacity(format!(
            "kernel matrix for n={n} exceeds cap {cap}"
        )));
    }
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        for q in 0..n {
            entries.push(euler_kernel_entry(theta.row(j), theta.row(q))?);
        }
    }
    Ok(KernelMatrix { n, entries })
}

/// Squared distance between a mapped point and the mapped image of angle
/// vector `u`: `sum_l (1 - cos(theta_l - u_l))`, in `[0, 2d]`.
pub fn dist_sphere(theta: &[f64], u: &[f64]) -> Result<f64> {
    if theta.len() != u.len() {
        return Err(Error::Shape(format!(
            "sphere distance dimensions differ: {} vs {}",
            theta.len(),
            u.len()
        )));
    }
    Ok(theta
        .iter()
        .zip(u)
        .map(|(t, ul)| 1.0 - (t - ul).cos())
        .sum())
}

/// Squared distance between a mapped point and a free complex centroid with
/// unit-circle-scale parts `(a, b)`:
/// `d/2 + (1/2) sum (a^2 + b^2) - sum (cos(theta) a + sin(theta) b)`.
///
/// For on-sphere centroids (`a^2 + b^2 = 1` per dimension) this equals
/// [`dist_sphere`] against `atan2(b, a)`.
pub fn dist_centroid(theta: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
    let d = theta.len();
    if a.len() != d || b.len() != d {
        return Err(Error::Shape(format!(
            "centroid distance dimensions differ: point {}, centroid {}x{}",
            d,
            a.len(),
            b.len()
        )));
    }
    let mut norm = 0.0;
    let mut cross = 0.0;
    for l in 0..d {
        norm += a[l] * a[l] + b[l] * b[l];
        cross += theta[l].cos() * a[l] + theta[l].sin() * b[l];
    }
    Ok(d as f64 / 2.0 + 0.5 * norm - cross)
}
