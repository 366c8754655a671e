//! Clustering quality metrics (ACC, NMI), the deviation-degree diagnostic
//! for free centroids, and linear decision-surface coefficients between
//! centroid pairs in the mapped space.

use serde::{Deserialize, Serialize};

use crate::algos::{CentroidKind, Centroids};
use crate::error::{Error, Result};

/// The per-restart evaluation bundle reported by the benchmark harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Best-matching accuracy in [0, 1].
    pub acc: f64,
    /// Normalized mutual information in [0, 1].
    pub nmi: f64,
    /// Deviation degree per centroid; absent for original-space centroids.
    pub kappa_per_centroid: Option<Vec<f64>>,
    /// Arithmetic mean of the per-centroid deviation degrees.
    pub kappa_mean: Option<f64>,
}

impl MetricReport {
    /// Scores a predicted labeling against ground truth and, for
    /// mapped-space centroids, attaches the deviation degree.
    pub fn compute(pred: &[usize], truth: &[usize], centroids: &Centroids) -> Result<Self> {
        let (kappa_per_centroid, kappa_mean) = match centroids.kind() {
            CentroidKind::Euclidean => (None, None),
            _ => {
                let (per, mean) = deviation_degree(centroids)?;
                (Some(per), Some(mean))
            }
        };
        Ok(Self {
            acc: acc(pred, truth)?,
            nmi: nmi(pred, truth)?,
            kappa_per_centroid,
            kappa_mean,
        })
    }
}

fn check_labels(pred: &[usize], truth: &[usize]) -> Result<()> {
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
    Ok(())
}

fn contingency(pred: &[usize], truth: &[usize]) -> (Vec<Vec<usize>>, usize, usize) {
    let kp = pred.iter().max().map_or(0, |m| m + 1);
    let kt = truth.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; kt]; kp];
    for (&p, &t) in pred.iter().zip(truth) {
        table[p][t] += 1;
    }
    (table, kp, kt)
}

/// Exact minimum-cost assignment on a square cost matrix (Hungarian
/// algorithm with potentials, O(n^3)). Returns the column chosen for each
/// row.
fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut assigned_row = vec![0usize; n + 1]; // row occupying each column; 0 = free
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if assigned_row[j] > 0 {
            row_to_col[assigned_row[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Best-matching clustering accuracy: predicted clusters are matched
/// one-to-one to true classes by an exact assignment on the match-count
/// matrix (rectangular cases padded with zeros), and the matched fraction is
/// returned.
pub fn acc(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_labels(pred, truth)?;
    let (table, kp, kt) = contingency(pred, truth);
    let side = kp.max(kt);
    let mut cost = vec![vec![0i64; side]; side];
    for (p, row) in table.iter().enumerate() {
        for (t, &count) in row.iter().enumerate() {
            cost[p][t] = -(count as i64);
        }
    }
    let matching = min_cost_assignment(&cost);
    let matched: i64 = matching
        .iter()
        .enumerate()
        .map(|(p, &t)| -cost[p][t])
        .sum();
    Ok(matched as f64 / pred.len() as f64)
}

fn entropy(counts: impl Iterator<Item = usize>, n: usize) -> f64 {
    let n = n as f64;
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `2 I(pred; truth) / (H(pred) + H(truth))`,
/// computed from the contingency table with natural logarithms. Two trivial
/// single-cluster partitions score 1; a single-cluster partition against a
/// nontrivial one scores 0.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_labels(pred, truth)?;
    let n = pred.len();
    let (table, kp, kt) = contingency(pred, truth);
    let row_sums: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let mut col_sums = vec![0usize; kt];
    for row in &table {
        for (t, &c) in row.iter().enumerate() {
            col_sums[t] += c;
        }
    }
    let h_pred = entropy(row_sums.iter().copied(), n);
    let h_truth = entropy(col_sums.iter().copied(), n);
    if h_pred == 0.0 && h_truth == 0.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let mut mutual = 0.0;
    for p in 0..kp {
        for t in 0..kt {
            let joint = table[p][t];
            if joint == 0 {
                continue;
            }
            let pj = joint as f64 / nf;
            mutual += pj * (nf * joint as f64 / (row_sums[p] as f64 * col_sums[t] as f64)).ln();
        }
    }
    Ok((2.0 * mutual / (h_pred + h_truth)).clamp(0.0, 1.0))
}

/// Deviation degree per centroid: `kappa_c = 1 - (1/d) sum_l sqrt(a^2 + b^2)`,
/// one minus the mean per-dimension modulus. Zero exactly on the sphere,
/// 1 at the origin; quantifies how far free centroids shrank inward.
/// Returns the per-centroid values and their mean.
pub fn deviation_degree(centroids: &Centroids) -> Result<(Vec<f64>, f64)> {
    if centroids.kind() == CentroidKind::Euclidean {
        return Err(Error::InvalidParameter(
            "deviation degree is defined for mapped-space centroids only".into(),
        ));
    }
    let d = centroids.d() as f64;
    let per: Vec<f64> = (0..centroids.k())
        .map(|c| {
            let mean_modulus: f64 = (0..centroids.d())
                .map(|l| centroids.modulus2(c, l).sqrt())
                .sum::<f64>()
                / d;
            1.0 - mean_modulus
        })
        .collect();
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    Ok((per, mean))
}

/// Alternative normalization dividing the summed squared moduli by
/// `sqrt(d)`: `kappa_c = 1 - sum_l (a^2 + b^2) / sqrt(d)`. Kept for
/// comparison only — it does not vanish on the sphere for d > 1, so
/// [`deviation_degree`] is the form used everywhere in this crate.
pub fn deviation_degree_sqrt_norm(centroids: &Centroids) -> Result<(Vec<f64>, f64)> {
    if centroids.kind() == CentroidKind::Euclidean {
        return Err(Error::InvalidParameter(
            "deviation degree is defined for mapped-space centroids only".into(),
        ));
    }
    let sqrt_d = (centroids.d() as f64).sqrt();
    let per: Vec<f64> = (0..centroids.k())
        .map(|c| {
            let sum: f64 = (0..centroids.d()).map(|l| centroids.modulus2(c, l)).sum();
            1.0 - sum / sqrt_d
        })
        .collect();
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    Ok((per, mean))
}

/// Which centroid update rule a decision surface belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryVariant {
    EulerK,
    Rek,
}

/// Linear decision surface between two centroids in the mapped space: a
/// point with unit-scale coordinates `(a, b) = (cos theta, sin theta)` lies
/// on the surface when `coef_a . a + coef_b . b + offset = 0`.
///
/// Sign convention: the expression equals `dist(point, m_q) - dist(point,
/// m_p)`, so positive values mean the point is strictly nearer `m_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCoefficients {
    pub coef_a: Vec<f64>,
    pub coef_b: Vec<f64>,
    pub offset: f64,
    pub variant: BoundaryVariant,
}

impl BoundaryCoefficients {
    /// Evaluates the surface expression at unit-scale coordinates.
    pub fn evaluate(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = self.offset;
        for l in 0..self.coef_a.len() {
            acc += self.coef_a[l] * a[l] + self.coef_b[l] * b[l];
        }
        acc
    }

    /// Evaluates the surface expression at a mapped angle vector.
    pub fn evaluate_angles(&self, theta: &[f64]) -> f64 {
        let mut acc = self.offset;
        for (l, t) in theta.iter().enumerate() {
            acc += self.coef_a[l] * t.cos() + self.coef_b[l] * t.sin();
        }
        acc
    }
}

/// The `(a_p, b_p, a_q, b_q)` coordinate rows of a centroid pair.
type PairRows<'c> = (&'c [f64], &'c [f64], &'c [f64], &'c [f64]);

fn centroid_pair(centroids: &Centroids, p: usize, q: usize) -> Result<PairRows<'_>> {
    if p >= centroids.k() || q >= centroids.k() {
        return Err(Error::InvalidParameter(format!(
            "centroid pair ({p}, {q}) out of range for k={}",
            centroids.k()
        )));
    }
    let (ap, bp) = (centroids.a_row(p), centroids.b_row(p));
    let (aq, bq) = (centroids.a_row(q), centroids.b_row(q));
    if ap == aq && bp == bq {
        return Err(Error::DegenerateBoundary(format!(
            "centroids {p} and {q} coincide; no separating surface"
        )));
    }
    Ok((ap, bp, aq, bq))
}

/// Decision surface between two free centroids: `coef_a = a_p - a_q`,
/// `coef_b = b_p - b_q`, and an offset of half the squared-modulus
/// difference so that the zero set is exactly the equidistant set.
pub fn boundary_eulerk(centroids: &Centroids, p: usize, q: usize) -> Result<BoundaryCoefficients> {
    if centroids.kind() == CentroidKind::Euclidean {
        return Err(Error::InvalidParameter(
            "decision surfaces are defined in the mapped space".into(),
        ));
    }
    let (ap, bp, aq, bq) = centroid_pair(centroids, p, q)?;
    let d = ap.len();
    let mut coef_a = Vec::with_capacity(d);
    let mut coef_b = Vec::with_capacity(d);
    let mut offset = 0.0;
    for l in 0..d {
        coef_a.push(ap[l] - aq[l]);
        coef_b.push(bp[l] - bq[l]);
        offset -= 0.5 * (ap[l] * ap[l] - aq[l] * aq[l] + bp[l] * bp[l] - bq[l] * bq[l]);
    }
    Ok(BoundaryCoefficients {
        coef_a,
        coef_b,
        offset,
        variant: BoundaryVariant::EulerK,
    })
}

/// Decision surface between two unit-modulus centroids: the squared-modulus
/// terms cancel, leaving a surface through the origin (offset 0).
pub fn boundary_rek(centroids: &Centroids, p: usize, q: usize) -> Result<BoundaryCoefficients> {
    if centroids.kind() != CentroidKind::EulerUnit {
        return Err(Error::InvalidParameter(
            "rectified surfaces require unit-modulus centroids".into(),
        ));
    }
    let (ap, bp, aq, bq) = centroid_pair(centroids, p, q)?;
    let coef_a = ap.iter().zip(aq).map(|(x, y)| x - y).collect();
    let coef_b = bp.iter().zip(bq).map(|(x, y)| x - y).collect();
    Ok(BoundaryCoefficients {
        coef_a,
        coef_b,
        offset: 0.0,
        variant: BoundaryVariant::Rek,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algos::{update_centroids_eulerk, update_centroids_rek1, Assignment};
    use crate::kernel::{dist_centroid, AngleMatrix};
    use crate::matrix::Matrix;
    use crate::oracles::{exhaustive_acc, OracleCaps};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn angle_matrix(rows: &[Vec<f64>]) -> AngleMatrix {
        AngleMatrix::new(Matrix::from_rows(rows).unwrap(), 1.0).unwrap()
    }

    fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
        (0..n).map(|_| rng.random_range(0..k)).collect()
    }

    #[test]
    fn acc_direct_cases() {
        assert_eq!(acc(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(acc(&[1, 1, 0, 0], &[0, 0, 1, 1]).unwrap(), 1.0);
        let two_thirds = acc(&[0, 1, 1], &[0, 0, 1]).unwrap();
        assert!((two_thirds - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(acc(&[0], &[0, 1]), Err(Error::Shape(_))));
    }

    #[test]
    fn acc_handles_rectangular_label_spaces() {
        // Three predicted clusters against two classes and vice versa.
        let a = acc(&[0, 1, 2, 2], &[0, 0, 1, 1]).unwrap();
        assert!((a - 0.75).abs() < 1e-15);
        let b = acc(&[0, 0, 1, 1], &[0, 1, 2, 2]).unwrap();
        assert!((b - 0.75).abs() < 1e-15);
    }

    #[test]
    fn acc_matches_exhaustive_oracle_on_random_suites() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let caps = OracleCaps::default();
        for _ in 0..200 {
            let n = rng.random_range(1..30);
            let kp = rng.random_range(1..=8);
            let kt = rng.random_range(1..=8);
            let pred = random_labels(&mut rng, n, kp);
            let truth = random_labels(&mut rng, n, kt);
            let fast = acc(&pred, &truth).unwrap();
            let slow = exhaustive_acc(&pred, &truth, &caps).unwrap();
            assert!(
                (fast - slow).abs() < 1e-12,
                "pred {pred:?} truth {truth:?}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn acc_is_relabeling_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(2..40);
            let pred = random_labels(&mut rng, n, 4);
            let truth = random_labels(&mut rng, n, 3);
            let base = acc(&pred, &truth).unwrap();
            let perm = [2usize, 0, 3, 1];
            let relabeled: Vec<usize> = pred.iter().map(|&p| perm[p]).collect();
            assert!((acc(&relabeled, &truth).unwrap() - base).abs() < 1e-12);
            let tperm = [1usize, 2, 0];
            let t_relabel: Vec<usize> = truth.iter().map(|&t| tperm[t]).collect();
            assert!((acc(&pred, &t_relabel).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn nmi_direct_cases() {
        assert_eq!(nmi(&[0, 1, 0, 1], &[0, 1, 0, 1]).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        // Independent partitions carry no mutual information.
        assert!(nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap().abs() < 1e-12);
        // Trivial edge cases.
        assert_eq!(nmi(&[0, 0, 0], &[0, 0, 0]).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 0, 0], &[0, 1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn nmi_matches_hand_computed_contingency_value() {
        // 2x2 table for pred [0,0,1,1] vs truth [0,0,0,1]:
        //   joint counts 2, 0, 1, 1; marginals (2,2) and (3,1).
        let n = 4.0f64;
        let i = 2.0 / n * ((n * 2.0) / (2.0 * 3.0)).ln()
            + 1.0 / n * ((n * 1.0) / (2.0 * 3.0)).ln()
            + 1.0 / n * ((n * 1.0) / (2.0 * 1.0)).ln();
        let h_pred = -(0.5f64.ln());
        let h_truth = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let expected = 2.0 * i / (h_pred + h_truth);
        assert!((expected - 0.3437).abs() < 1e-4, "sanity: {expected}");

        let got = nmi(&[0, 0, 1, 1], &[0, 0, 0, 1]).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn nmi_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(2..40);
            let x = random_labels(&mut rng, n, 4);
            let y = random_labels(&mut rng, n, 3);
            assert!((nmi(&x, &y).unwrap() - nmi(&y, &x).unwrap()).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&nmi(&x, &y).unwrap()));
        }
    }

    #[test]
    fn deviation_degree_direct_cases() {
        // Unit-kind centroids sit on the sphere: kappa is exactly 0.
        let theta = angle_matrix(&[vec![0.3, -0.7], vec![1.1, 2.0]]);
        let asn = Assignment::new(vec![0, 1], 2).unwrap();
        let (unit, _) = update_centroids_rek1(&theta, &asn, None).unwrap();
        let (per, mean) = deviation_degree(&unit).unwrap();
        assert!(per.iter().all(|v| v.abs() < 1e-9));
        assert!(mean.abs() < 1e-9);

        // Antipodal pair: zero resultant, kappa = 1.
        let theta = angle_matrix(&[vec![0.0], vec![PI]]);
        let both = Assignment::new(vec![0, 0], 1).unwrap();
        let free = update_centroids_eulerk(&theta, &both).unwrap();
        let (per, _) = deviation_degree(&free).unwrap();
        assert!((per[0] - 1.0).abs() < 1e-12);

        // Quarter-turn pair: mean vector (0.5, 0.5), modulus sqrt(1/2).
        let theta = angle_matrix(&[vec![0.0], vec![FRAC_PI_2]]);
        let free = update_centroids_eulerk(&theta, &both).unwrap();
        let (per, _) = deviation_degree(&free).unwrap();
        assert!((per[0] - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn deviation_degree_stays_in_unit_interval_for_free_centroids() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random_range(-PI..PI)).collect())
            .collect();
        let theta = angle_matrix(&rows);
        let labels = random_labels(&mut rng, 40, 4);
        let asn = Assignment::new(labels, 4).unwrap();
        let free = update_centroids_eulerk(&theta, &asn).unwrap();
        let (per, mean) = deviation_degree(&free).unwrap();
        for v in &per {
            assert!((0.0..=1.0).contains(v));
        }
        assert!((mean - per.iter().sum::<f64>() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn deviation_degree_sqrt_norm_differs_on_sphere() {
        // The alternative normalization does not vanish on the sphere for
        // d > 1, which is exactly why it is not the default.
        let theta = angle_matrix(&[vec![0.3, -0.7]]);
        let asn = Assignment::new(vec![0], 1).unwrap();
        let (unit, _) = update_centroids_rek1(&theta, &asn, None).unwrap();
        let (per, _) = deviation_degree_sqrt_norm(&unit).unwrap();
        assert!((per[0] - (1.0 - 2.0 / 2.0f64.sqrt())).abs() < 1e-9);
    }

    fn unit_centroids(angles: &[Vec<f64>]) -> Centroids {
        let a: Vec<Vec<f64>> = angles
            .iter()
            .map(|r| r.iter().map(|v| v.cos()).collect())
            .collect();
        let b: Vec<Vec<f64>> = angles
            .iter()
            .map(|r| r.iter().map(|v| v.sin()).collect())
            .collect();
        Centroids::new(
            CentroidKind::EulerUnit,
            Matrix::from_rows(&a).unwrap(),
            Matrix::from_rows(&b).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn boundary_rek_antipodal_example() {
        let cents = unit_centroids(&[vec![0.0], vec![PI]]);
        let surface = boundary_rek(&cents, 0, 1).unwrap();
        assert!((surface.coef_a[0] - 2.0).abs() < 1e-12);
        assert!(surface.coef_b[0].abs() < 1e-12);
        assert_eq!(surface.offset, 0.0);
        assert!(surface.evaluate_angles(&[FRAC_PI_2]).abs() < 1e-12);
        assert!(surface.evaluate_angles(&[-FRAC_PI_2]).abs() < 1e-12);
    }

    #[test]
    fn boundary_swap_negates_coefficients() {
        let cents = unit_centroids(&[vec![0.4, 1.0], vec![-2.0, 0.1]]);
        let pq = boundary_rek(&cents, 0, 1).unwrap();
        let qp = boundary_rek(&cents, 1, 0).unwrap();
        for l in 0..2 {
            assert!((pq.coef_a[l] + qp.coef_a[l]).abs() < 1e-15);
            assert!((pq.coef_b[l] + qp.coef_b[l]).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_rejects_identical_centroids() {
        let cents = unit_centroids(&[vec![0.4], vec![0.4]]);
        assert!(matches!(
            boundary_rek(&cents, 0, 1),
            Err(Error::DegenerateBoundary(_))
        ));
        assert!(matches!(
            boundary_eulerk(&cents, 0, 1),
            Err(Error::DegenerateBoundary(_))
        ));
    }

    #[test]
    fn boundary_eulerk_zero_set_is_equidistant() {
        // The surface expression must equal dist(., m_q) - dist(., m_p) up
        // to rounding, making its zero set the equidistant set.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let theta = angle_matrix(
            &(0..30)
                .map(|_| (0..3).map(|_| rng.random_range(-PI..PI)).collect())
                .collect::<Vec<Vec<f64>>>(),
        );
        let labels = random_labels(&mut rng, 30, 2);
        let asn = Assignment::new(labels, 2).unwrap();
        let free = update_centroids_eulerk(&theta, &asn).unwrap();
        let surface = boundary_eulerk(&free, 0, 1).unwrap();
        for _ in 0..200 {
            let probe: Vec<f64> = (0..3).map(|_| rng.random_range(-PI..PI)).collect();
            let dp = dist_centroid(&probe, free.a_row(0), free.b_row(0)).unwrap();
            let dq = dist_centroid(&probe, free.a_row(1), free.b_row(1)).unwrap();
            let f = surface.evaluate_angles(&probe);
            assert!((f - (dq - dp)).abs() < 1e-10, "f {f} vs gap {}", dq - dp);
            if f > 1e-9 {
                assert!(dp < dq, "positive side must be nearer the first centroid");
            }
            if f < -1e-9 {
                assert!(dq < dp);
            }
        }
    }

    #[test]
    fn boundary_rek_matches_sphere_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let cents = unit_centroids(&[
            (0..4).map(|_| rng.random_range(-PI..PI)).collect(),
            (0..4).map(|_| rng.random_range(-PI..PI)).collect(),
        ]);
        let u0: Vec<f64> = (0..4)
            .map(|l| cents.b_row(0)[l].atan2(cents.a_row(0)[l]))
            .collect();
        let u1: Vec<f64> = (0..4)
            .map(|l| cents.b_row(1)[l].atan2(cents.a_row(1)[l]))
            .collect();
        let surface = boundary_rek(&cents, 0, 1).unwrap();
        for _ in 0..200 {
            let probe: Vec<f64> = (0..4).map(|_| rng.random_range(-PI..PI)).collect();
            let dp = crate::kernel::dist_sphere(&probe, &u0).unwrap();
            let dq = crate::kernel::dist_sphere(&probe, &u1).unwrap();
            let f = surface.evaluate_angles(&probe);
            assert!((f - (dq - dp)).abs() < 1e-9);
        }
    }

    #[test]
    fn boundary_forms_agree_for_on_sphere_centroids() {
        // With unit centroids the free-form offset vanishes, so both
        // constructions give the same surface.
        let cents = unit_centroids(&[vec![0.7, -1.2, 2.2], vec![-0.4, 0.9, -2.8]]);
        let free_form = boundary_eulerk(&cents, 0, 1).unwrap();
        let unit_form = boundary_rek(&cents, 0, 1).unwrap();
        assert!(free_form.offset.abs() < 1e-12);
        for l in 0..3 {
            assert!((free_form.coef_a[l] - unit_form.coef_a[l]).abs() < 1e-15);
            assert!((free_form.coef_b[l] - unit_form.coef_b[l]).abs() < 1e-15);
        }
    }

    #[test]
    fn metric_report_bundles_all_scores() {
        let theta = angle_matrix(&[vec![0.1], vec![0.2], vec![2.9], vec![3.0]]);
        let asn = Assignment::new(vec![0, 0, 1, 1], 2).unwrap();
        let free = update_centroids_eulerk(&theta, &asn).unwrap();
        let report = MetricReport::compute(asn.labels(), &[1, 1, 0, 0], &free).unwrap();
        assert_eq!(report.acc, 1.0);
        assert_eq!(report.nmi, 1.0);
        let kappa = report.kappa_per_centroid.unwrap();
        assert_eq!(kappa.len(), 2);
        assert!(report.kappa_mean.unwrap() >= 0.0);
    }
}
