//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//! Tolerances are part of the contract and must not be loosened.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use euler_bench::boundary::{emit_boundary_grid, GridBounds};
use euler_bench::experiment::{
    alpha_sweep, default_alpha_grid, kappa_vs_k_study, run_experiment, Algorithm, DatasetSource,
    ExperimentConfig,
};
use euler_clustering::algos::{
    fit_eulerk, fit_kmeans, fit_rek1, fit_rek2, update_centroids_eulerk, update_centroids_rek1,
    update_preimages_rek2, wrap_angle, Assignment, LloydConfig,
};
use euler_clustering::dataset::{gen_halfmoon, normalize, HalfmoonSpec, NormalizationMode, RealDataset};
use euler_clustering::kernel::{euler_kernel_matrix, scale_angles, AngleMatrix};
use euler_clustering::matrix::Matrix;
use euler_clustering::metrics::{acc, nmi};
use euler_clustering::objective;
use euler_clustering::oracles::{exhaustive_acc, grid_preimage, kernel_objective_matrix, OracleCaps};

fn check(criterion: usize, description: &str, ok: bool) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("acceptance {criterion:02} {verdict} — {description}");
    assert!(ok, "acceptance criterion {criterion} failed: {description}");
}

fn seeds_csv() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/seeds_synthetic.csv")
}

/// The shared run suite: 50 half-moon instances under default settings plus
/// 50 random Gaussian datasets with n <= 500, d <= 10, k <= 8.
struct SuiteInstance {
    data: RealDataset,
    theta: AngleMatrix,
    k: usize,
    seed: u64,
}

fn suite() -> Vec<SuiteInstance> {
    let mut instances = Vec::with_capacity(100);
    for i in 0..50u64 {
        let raw = gen_halfmoon(&HalfmoonSpec {
            n: 1000,
            noise_sigma: 0.1,
            seed: i,
        })
        .unwrap();
        let (data, _) = normalize(&raw, NormalizationMode::MinMax01);
        let theta = scale_angles(&data, 1.0).unwrap();
        instances.push(SuiteInstance {
            data,
            theta,
            k: 2,
            seed: i,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2_026);
    let normal = Normal::new(0.0, 1.0).unwrap();
    for i in 0..50u64 {
        let n = rng.random_range(50..=500);
        let d = rng.random_range(1..=10);
        let k = rng.random_range(2..=8);
        let alpha = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let values: Vec<f64> = (0..n * d).map(|_| normal.sample(&mut rng)).collect();
        let raw = RealDataset::unlabeled(Matrix::from_vec(n, d, values).unwrap()).unwrap();
        let (data, _) = normalize(&raw, NormalizationMode::MinMax01);
        let theta = scale_angles(&data, alpha).unwrap();
        instances.push(SuiteInstance {
            data,
            theta,
            k,
            seed: 1_000 + i,
        });
    }
    instances
}

#[test]
fn acceptance_01_unit_modulus_invariant() {
    let mut worst = 0.0f64;
    for inst in suite() {
        let cfg = LloydConfig::new(inst.k, inst.seed);
        let rek1 = fit_rek1(&inst.theta, &cfg).unwrap();
        worst = worst.max(rek1.max_unit_violation.unwrap());
        let rek2 = fit_rek2(&inst.theta, &cfg).unwrap();
        worst = worst.max(rek2.max_unit_violation.unwrap());
        // The pre-image angles map onto the unit circles by construction;
        // confirm on the final state explicitly.
        let pre = rek2.preimages.unwrap();
        for c in 0..inst.k {
            for &u in pre.row(c) {
                let modulus2 = u.cos() * u.cos() + u.sin() * u.sin();
                worst = worst.max((modulus2 - 1.0).abs());
            }
        }
    }
    check(
        1,
        &format!("rectified centroids stay on the sphere every iteration (worst |a^2+b^2-1| = {worst:.2e}, cap 1e-9)"),
        worst <= 1e-9,
    );
}

#[test]
fn acceptance_02_monotone_convergence() {
    let mut worst_rise = f64::NEG_INFINITY;
    let mut all_finished = true;
    for inst in suite() {
        let cfg = LloydConfig::new(inst.k, inst.seed);
        let traces = [
            fit_kmeans(&inst.data, &cfg).unwrap(),
            fit_eulerk(&inst.theta, &cfg).unwrap(),
            fit_rek1(&inst.theta, &cfg).unwrap(),
            fit_rek2(&inst.theta, &cfg).unwrap(),
        ];
        for result in traces {
            for w in result.objective_trace.windows(2) {
                worst_rise = worst_rise.max(w[1] - w[0]);
            }
            all_finished &= result.converged && result.iterations <= 300;
        }
    }
    check(
        2,
        &format!("all four objectives are non-increasing (worst step rise {worst_rise:.2e}, cap 1e-10) and converge within 300 iterations"),
        worst_rise <= 1e-10 && all_finished,
    );
}

#[test]
fn acceptance_03_kernel_objective_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let caps = OracleCaps::default();
    let mut worst_rel = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(4..=50);
        let d = rng.random_range(1..=4);
        let k = rng.random_range(1..=3.min(n));
        let values: Vec<f64> = (0..n * d).map(|_| rng.random_range(-PI..PI)).collect();
        let theta = AngleMatrix::new(Matrix::from_vec(n, d, values).unwrap(), 1.0).unwrap();
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        for (c, slot) in labels.iter_mut().enumerate().take(k) {
            *slot = c;
        }
        let partition = Assignment::new(labels, k).unwrap();
        let centroids = update_centroids_eulerk(&theta, &partition).unwrap();
        let explicit = objective(&theta, &centroids, &partition).unwrap();
        let kernel = euler_kernel_matrix(&theta, caps.max_n).unwrap();
        let matrix_form = kernel_objective_matrix(&kernel, &partition, &caps).unwrap();
        let rel = (explicit - matrix_form).abs() / explicit.abs().max(matrix_form.abs()).max(1.0);
        worst_rel = worst_rel.max(rel);
    }
    check(
        3,
        &format!("explicit and kernel-matrix objectives agree on 50 instances (worst relative gap {worst_rel:.2e}, cap 1e-8)"),
        worst_rel <= 1e-8,
    );
}

#[test]
fn acceptance_04_rek2_maximizer_certification() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_angle_gap = 0.0f64;
    let mut worst_value_gap = f64::NEG_INFINITY;
    for _ in 0..200 {
        let m = rng.random_range(1..=50);
        let angles: Vec<f64> = (0..m).map(|_| rng.random_range(-PI..PI)).collect();
        let theta = AngleMatrix::new(Matrix::from_vec(m, 1, angles.clone()).unwrap(), 1.0).unwrap();
        let all_one = Assignment::new(vec![0; m], 1).unwrap();
        let (pre, _) = update_preimages_rek2(&theta, &all_one, None).unwrap();
        let u = pre.row(0)[0];

        let grid_u = grid_preimage(&angles, 1_000_000).unwrap();
        let align = |v: f64| angles.iter().map(|t| (t - v).cos()).sum::<f64>();
        worst_value_gap = worst_value_gap.max(align(grid_u) - align(u));

        let resultant = f64::hypot(
            angles.iter().map(|t| t.cos()).sum(),
            angles.iter().map(|t| t.sin()).sum(),
        );
        if resultant > 1e-6 {
            worst_angle_gap = worst_angle_gap.max(wrap_angle(u - grid_u).abs());
        }
    }
    check(
        4,
        &format!("closed-form pre-image matches the 1e6-point grid search (worst angle gap {worst_angle_gap:.2e} <= 1e-5, worst value shortfall {worst_value_gap:.2e} <= 1e-9)"),
        worst_angle_gap <= 1e-5 && worst_value_gap <= 1e-9,
    );
}

#[test]
fn acceptance_05_rek1_rek2_update_agreement() {
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for inst in suite() {
        let mut rng = ChaCha8Rng::seed_from_u64(inst.seed ^ 0x5eed);
        let n = inst.theta.n_points();
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..inst.k)).collect();
        for (c, slot) in labels.iter_mut().enumerate().take(inst.k) {
            *slot = c;
        }
        let assignment = Assignment::new(labels, inst.k).unwrap();
        let (rek1, _) = update_centroids_rek1(&inst.theta, &assignment, None).unwrap();
        let (rek2, _) = update_preimages_rek2(&inst.theta, &assignment, None).unwrap();

        // Per-dimension resultants decide which entries are well-defined.
        let d = inst.theta.n_dims();
        let mut sums = vec![(0.0f64, 0.0f64); inst.k * d];
        for (j, &c) in assignment.labels().iter().enumerate() {
            for (l, &t) in inst.theta.row(j).iter().enumerate() {
                sums[c * d + l].0 += t.cos();
                sums[c * d + l].1 += t.sin();
            }
        }
        for c in 0..inst.k {
            for l in 0..d {
                let (sc, ss) = sums[c * d + l];
                if f64::hypot(sc, ss) <= 1e-12 {
                    continue;
                }
                let u = rek2.row(c)[l];
                worst = worst.max((rek1.a_row(c)[l] - u.cos()).abs());
                worst = worst.max((rek1.b_row(c)[l] - u.sin()).abs());
                compared += 1;
            }
        }
    }
    check(
        5,
        &format!("the two rectified updates agree on {compared} centroid dimensions (worst gap {worst:.2e}, cap 1e-9)"),
        worst <= 1e-9 && compared > 0,
    );
}

fn halfmoon_config(algorithm: Algorithm) -> ExperimentConfig {
    ExperimentConfig::new(
        algorithm,
        DatasetSource::Halfmoon {
            n: 1000,
            noise_sigma: 0.1,
        },
        2,
    )
    .with_alpha(1.0)
}

#[test]
fn acceptance_06_kappa_separation_on_halfmoon() {
    let free = run_experiment(&halfmoon_config(Algorithm::EulerK)).unwrap();
    let kappa_free = free.report.aggregates.kappa.unwrap().mean;
    let mut kappa_rectified = 0.0f64;
    for algorithm in [Algorithm::Rek1, Algorithm::Rek2] {
        let outcome = run_experiment(&halfmoon_config(algorithm)).unwrap();
        for record in &outcome.report.records {
            kappa_rectified = kappa_rectified.max(record.kappa_mean.unwrap().abs());
        }
    }
    check(
        6,
        &format!("free centroids leave the sphere (kappa = {kappa_free:.4} > 0.05) while rectified ones do not (worst {kappa_rectified:.2e} <= 1e-9)"),
        kappa_free > 0.05 && kappa_rectified <= 1e-9,
    );
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut ranks = vec![0.0; v.len()];
        for (pos, &i) in order.iter().enumerate() {
            ranks[i] = pos as f64;
        }
        ranks
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let n = xs.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for i in 0..xs.len() {
        cov += (rx[i] - mean) * (ry[i] - mean);
        var_x += (rx[i] - mean) * (rx[i] - mean);
        var_y += (ry[i] - mean) * (ry[i] - mean);
    }
    cov / (var_x * var_y).sqrt()
}

#[test]
fn acceptance_07_kappa_shrinks_as_k_grows() {
    let config = halfmoon_config(Algorithm::EulerK);
    let study = kappa_vs_k_study(&config, &[2, 4, 8, 16, 32, 1000]).unwrap();
    let trend = &study.rows[..5];
    let ks: Vec<f64> = trend.iter().map(|r| r.k as f64).collect();
    let kappas: Vec<f64> = trend.iter().map(|r| r.kappa_mean).collect();
    let rho = spearman(&ks, &kappas);
    let at_n = study.rows[5].kappa_mean;
    check(
        7,
        &format!("kappa falls as k grows (Spearman {rho:.3} < 0 over k = 2..32) and vanishes at k = n ({at_n:.2e} <= 1e-9)"),
        rho < 0.0 && at_n.abs() <= 1e-9,
    );
}

#[test]
fn acceptance_08_metric_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let caps = OracleCaps::default();
    let mut exact = true;
    for _ in 0..200 {
        let n = rng.random_range(1..=40);
        let kp = rng.random_range(1..=6);
        let kt = rng.random_range(1..=6);
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..kp)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..kt)).collect();
        exact &= acc(&pred, &truth).unwrap() == exhaustive_acc(&pred, &truth, &caps).unwrap();

        let perm = [3usize, 0, 5, 1, 4, 2];
        let relabeled: Vec<usize> = pred.iter().map(|&p| perm[p]).collect();
        exact &= acc(&relabeled, &truth).unwrap() == acc(&pred, &truth).unwrap();
        exact &= (nmi(&relabeled, &truth).unwrap() - nmi(&pred, &truth).unwrap()).abs() < 1e-12;
    }

    // Hand-computed 2x2 contingency fixture: joints (2,0,1,1).
    let n = 4.0f64;
    let information = 2.0 / n * ((n * 2.0) / (2.0 * 3.0)).ln()
        + 1.0 / n * ((n * 1.0) / (2.0 * 3.0)).ln()
        + 1.0 / n * ((n * 1.0) / (2.0 * 1.0)).ln();
    let entropy_pred = -(0.5f64.ln());
    let entropy_truth = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
    let expected = 2.0 * information / (entropy_pred + entropy_truth);
    let fixture_gap = (nmi(&[0, 0, 1, 1], &[0, 0, 0, 1]).unwrap() - expected).abs();

    check(
        8,
        &format!("ACC equals the exhaustive matching on 200 label pairs, both metrics are relabeling-invariant, and NMI matches the hand-computed fixture (gap {fixture_gap:.2e} <= 1e-12)"),
        exact && fixture_gap <= 1e-12,
    );
}

#[test]
fn acceptance_09_directional_result_on_seeds() {
    let source = DatasetSource::Csv {
        path: seeds_csv(),
        label_col: Some("class".to_string()),
    };
    let grid = default_alpha_grid();
    let free = alpha_sweep(
        &ExperimentConfig::new(Algorithm::EulerK, source.clone(), 3),
        &grid,
    )
    .unwrap();
    let rectified = alpha_sweep(&ExperimentConfig::new(Algorithm::Rek1, source, 3), &grid).unwrap();

    let free_best = free.summary.by_nmi;
    let rect_best = rectified.summary.by_nmi;
    println!(
        "seeds fixture, 10 restarts each: eulerk best alpha {} -> NMI {:.4} ± {:.4}; rek1 best alpha {} -> NMI {:.4} ± {:.4}",
        free_best.alpha, free_best.mean, free_best.std, rect_best.alpha, rect_best.mean, rect_best.std
    );
    check(
        9,
        &format!("rectification does not hurt: best-alpha mean NMI rek1 {:.4} >= eulerk {:.4}", rect_best.mean, free_best.mean),
        rect_best.mean >= free_best.mean,
    );
}

fn strip_timing(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.remove("timing");
            for v in map.values_mut() {
                strip_timing(v);
            }
        }
        serde_json::Value::Array(items) => {
            for v in items {
                strip_timing(v);
            }
        }
        _ => {}
    }
}

fn run_cli(args: &[&str]) -> (String, Vec<u8>) {
    let out_dir = std::env::temp_dir().join(format!(
        "euler-bench-acceptance-{}-{}",
        std::process::id(),
        args.len()
    ));
    std::fs::create_dir_all(&out_dir).unwrap();
    let json_path = out_dir.join("report.json");
    let output = Command::new(env!("CARGO_BIN_EXE_euler-bench"))
        .args(args)
        .arg("--out")
        .arg(&json_path)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "CLI failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let json = std::fs::read(&json_path).unwrap();
    std::fs::remove_dir_all(&out_dir).ok();
    (String::from_utf8(output.stdout).unwrap(), json)
}

#[test]
fn acceptance_10_cli_determinism() {
    let seeds = seeds_csv();
    let seeds = seeds.to_str().unwrap();
    let invocations: Vec<Vec<&str>> = vec![
        vec![
            "--algo", "rek1", "--input", seeds, "--label-col", "class", "--k", "3", "--alpha",
            "0.8", "--restarts", "3", "--seed", "5",
        ],
        vec![
            "--algo", "eulerk", "--generate", "halfmoon", "--n", "400", "--noise", "0.1", "--k",
            "2", "--alpha-grid", "0.5,1", "--restarts", "2", "--seed", "9",
        ],
    ];
    let mut identical = true;
    for args in &invocations {
        let (stdout_a, json_a) = run_cli(args);
        let (stdout_b, json_b) = run_cli(args);
        let canonical = |raw: &[u8]| {
            let mut value: serde_json::Value = serde_json::from_slice(raw).unwrap();
            strip_timing(&mut value);
            serde_json::to_vec(&value).unwrap()
        };
        identical &= stdout_a == stdout_b && canonical(&json_a) == canonical(&json_b);
    }
    check(
        10,
        "repeated CLI invocations produce identical tables and byte-identical JSON (wall-clock section excluded)",
        identical,
    );
}

#[test]
fn acceptance_11_boundary_surfaces_match_labels() {
    let mut ok = true;
    let mut checked_flips = 0usize;
    for algorithm in [Algorithm::EulerK, Algorithm::Rek1, Algorithm::Rek2] {
        let mut config = ExperimentConfig::new(
            algorithm,
            DatasetSource::Halfmoon {
                n: 400,
                noise_sigma: 0.1,
            },
            3,
        )
        .with_alpha(1.0);
        config.restarts = 3;
        let outcome = run_experiment(&config).unwrap();
        let bounds = GridBounds::of(&outcome.data).unwrap();
        let dir = std::env::temp_dir().join(format!("euler-bench-acc11-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{algorithm}.csv"));
        let grid = emit_boundary_grid(&outcome.best, &bounds, 40, &path).unwrap();

        // Read the emitted artifact back and scan it.
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let mut labels = Vec::new();
        let mut surfaces: Vec<Vec<f64>> = Vec::new();
        for record in reader.records() {
            let record = record.unwrap();
            labels.push(record[2].parse::<usize>().unwrap());
            surfaces.push(
                (3..record.len())
                    .map(|i| record[i].parse::<f64>().unwrap())
                    .collect(),
            );
        }
        std::fs::remove_dir_all(&dir).ok();

        let res = grid.resolution;
        let pair_index = |p: usize, q: usize| grid.pairs.iter().position(|&x| x == (p, q)).unwrap();
        let mut scan = |a: usize, b: usize| {
            let (la, lb) = (labels[a], labels[b]);
            // Cellwise: the owning label's side of every surface it takes
            // part in is nonnegative.
            for (i, &(p, q)) in grid.pairs.iter().enumerate() {
                if la == p {
                    ok &= surfaces[a][i] >= -1e-9;
                } else if la == q {
                    ok &= surfaces[a][i] <= 1e-9;
                }
            }
            // Across a label flip, the pair's surface changes sign within
            // this one-cell window.
            if la != lb {
                let i = pair_index(la.min(lb), la.max(lb));
                let (sp, sq) = if la < lb {
                    (surfaces[a][i], surfaces[b][i])
                } else {
                    (surfaces[b][i], surfaces[a][i])
                };
                ok &= sp >= -1e-9 && sq <= 1e-9;
                checked_flips += 1;
            }
        };
        for row in 0..res {
            for col in 0..res {
                let here = row * res + col;
                if col + 1 < res {
                    scan(here, here + 1);
                }
                if row + 1 < res {
                    scan(here, here + res);
                }
            }
        }
    }
    check(
        11,
        &format!("emitted boundary grids stay sign-consistent with assignments across {checked_flips} label flips"),
        ok && checked_flips > 0,
    );
}
