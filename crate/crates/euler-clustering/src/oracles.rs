//! Slow, independent reference implementations used to certify the fast
//! paths: the kernel-matrix form of the clustering objective, a grid-search
//! pre-image maximizer, and exhaustive-permutation clustering accuracy.
//!
//! Nothing here is performance-tuned and nothing here is called by the
//! benchmark harness; these exist so the test suite can cross-check the
//! closed-form implementations against brute force.

use crate::algos::Assignment;
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;

/// Size limits for the brute-force oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    /// Largest n for explicit kernel-matrix work (quadratic cost).
    pub max_n: usize,
    /// Grid points used by the pre-image search.
    pub grid_resolution: usize,
    /// Largest label-space size for exhaustive permutation matching.
    pub max_k_permutation: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self {
            max_n: 2000,
            grid_resolution: 1_000_000,
            max_k_permutation: 8,
        }
    }
}

/// Clustering objective computed purely from the kernel matrix:
/// `Tr(K) - sum_c (sum of K over the c-block) / n_c`, i.e.
/// `Tr(K) - Tr(L^{1/2} P^T K P L^{1/2})` with `L = diag(1/n_c)`.
///
/// Equals the explicit-mapping objective against per-cluster mean centroids
/// for any partition. The traces are analytically real for Hermitian `K`;
/// the imaginary residue is checked against 1e-10 and discarded.
pub fn kernel_objective_matrix(
    kernel: &KernelMatrix,
    partition: &Assignment,
    caps: &OracleCaps,
) -> Result<f64> {
    let n = kernel.n();
    if n > caps.max_n {
        return Err(Error::Capacity(format!(
            "kernel objective for n={n} exceeds cap {}",
            caps.max_n
        )));
    }
    if partition.n() != n {
        return Err(Error::Shape(format!(
            "partition covers {} points, kernel has {n}",
            partition.n()
        )));
    }
    if kernel.hermitian_residual() > 1e-8 {
        return Err(Error::InvalidKernel(format!(
            "matrix is not Hermitian: residual {}",
            kernel.hermitian_residual()
        )));
    }
    let counts = partition.counts();
    if let Some(c) = counts.iter().position(|&v| v == 0) {
        return Err(Error::InvalidPartition(format!("cluster {c} is empty")));
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); partition.k()];
    for (j, &c) in partition.labels().iter().enumerate() {
        members[c].push(j);
    }
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    for j in 0..n {
        total += kernel.get(j, j);
    }
    for (c, block) in members.iter().enumerate() {
        let mut block_sum = num_complex::Complex64::new(0.0, 0.0);
        for &j in block {
            for &q in block {
                block_sum += kernel.get(j, q);
            }
        }
        total -= block_sum / counts[c] as f64;
    }
    if total.im.abs() > 1e-10 {
        return Err(Error::InvalidKernel(format!(
            "objective has imaginary residue {}",
            total.im
        )));
    }
    Ok(total.re)
}

/// Brute-force pre-image search: evaluates the alignment
/// `sum_j cos(theta_j - u)` at every point of a uniform grid over
/// `(-pi, pi]` and returns the maximizing grid angle, ties toward the
/// smallest angle.
pub fn grid_preimage(thetas: &[f64], resolution: usize) -> Result<f64> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter(
            "pre-image search needs at least one angle".into(),
        ));
    }
    if resolution == 0 {
        return Err(Error::InvalidParameter("grid resolution must be positive".into()));
    }
    let cos_t: Vec<f64> = thetas.iter().map(|t| t.cos()).collect();
    let sin_t: Vec<f64> = thetas.iter().map(|t| t.sin()).collect();
    let mut best_u = 0.0;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..resolution {
        // Computing the fraction first keeps the final grid point at
        // exactly pi, so the whole grid stays inside (-pi, pi].
        let frac = (i + 1) as f64 / resolution as f64;
        let u = -std::f64::consts::PI + frac * std::f64::consts::TAU;
        let (cu, su) = (u.cos(), u.sin());
        let mut score = 0.0;
        for j in 0..cos_t.len() {
            score += cos_t[j] * cu + sin_t[j] * su;
        }
        if score > best_score {
            best_score = score;
            best_u = u;
        }
    }
    Ok(best_u)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    heap_permute(&mut current, k, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, size: usize, out: &mut Vec<Vec<usize>>) {
    if size <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..size {
        heap_permute(items, size - 1, out);
        if size.is_multiple_of(2) {
            items.swap(i, size - 1);
        } else {
            items.swap(0, size - 1);
        }
    }
}

/// Clustering accuracy by trying every relabeling of the predicted clusters
/// and keeping the best match fraction. Exponential in the label-space size,
/// hence capped.
pub fn exhaustive_acc(pred: &[usize], truth: &[usize], caps: &OracleCaps) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!(
            "label sequences differ in length: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidParameter("empty label sequences".into()));
    }
    let k_pred = pred.iter().max().unwrap() + 1;
    let k_truth = truth.iter().max().unwrap() + 1;
    let k = k_pred.max(k_truth);
    if k > caps.max_k_permutation {
        return Err(Error::Capacity(format!(
            "exhaustive matching over k={k} labels exceeds cap {}",
            caps.max_k_permutation
        )));
    }
    let mut best = 0usize;
    for perm in permutations(k) {
        let matched = pred
            .iter()
            .zip(truth)
            .filter(|&(&p, &t)| perm[p] == t)
            .count();
        best = best.max(matched);
    }
    Ok(best as f64 / pred.len() as f64)
}
