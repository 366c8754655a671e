//! Plain-text result tables: metric columns as two-decimal percent
//! mean ± std, mirroring how clustering benchmarks are usually reported.
//! Full-precision numbers live in the JSON reports.

use crate::experiment::{AlphaSweepReport, ExperimentReport, KappaStudy, Stat};

fn percent(stat: Option<Stat>) -> String {
    match stat {
        Some(s) => format!("{:.2} ± {:.2}", 100.0 * s.mean, 100.0 * s.std),
        None => "—".to_string(),
    }
}

fn alpha_label(report: &ExperimentReport) -> String {
    match report.config.alpha {
        Some(a) => format!("{a}"),
        None => "—".to_string(),
    }
}

fn row(report: &ExperimentReport) -> String {
    let converged = report.records.iter().filter(|r| r.converged).count();
    let mean_iters = report
        .records
        .iter()
        .map(|r| r.iterations as f64)
        .sum::<f64>()
        / report.records.len() as f64;
    format!(
        "{:<8} {:>10} {:>16} {:>16} {:>16} {:>14.2} {:>7.1} {:>6}",
        report.config.algorithm.to_string(),
        alpha_label(report),
        percent(report.aggregates.acc),
        percent(report.aggregates.nmi),
        percent(report.aggregates.kappa),
        report.aggregates.objective.mean,
        mean_iters,
        format!("{}/{}", converged, report.records.len()),
    )
}

fn header() -> String {
    format!(
        "{:<8} {:>10} {:>16} {:>16} {:>16} {:>14} {:>7} {:>6}",
        "algo", "alpha", "ACC %", "NMI %", "kappa %", "objective", "iters", "conv"
    )
}

/// One row per report, with ACC/NMI/kappa as percent mean ± std over
/// restarts.
pub fn experiment_table(reports: &[&ExperimentReport]) -> String {
    let mut out = header();
    for report in reports {
        out.push('\n');
        out.push_str(&row(report));
    }
    out
}

/// The sweep table plus the best-alpha summary lines.
pub fn sweep_table(sweep: &AlphaSweepReport) -> String {
    let refs: Vec<&ExperimentReport> = sweep.reports.iter().collect();
    let mut out = experiment_table(&refs);
    let nmi = &sweep.summary.by_nmi;
    let acc = &sweep.summary.by_acc;
    out.push_str(&format!(
        "\nbest alpha by NMI: {} (NMI {:.2} ± {:.2} %)",
        nmi.alpha,
        100.0 * nmi.mean,
        100.0 * nmi.std
    ));
    out.push_str(&format!(
        "\nbest alpha by ACC: {} (ACC {:.2} ± {:.2} %)",
        acc.alpha,
        100.0 * acc.mean,
        100.0 * acc.std
    ));
    out
}

/// Mean deviation degree per k.
pub fn kappa_table(study: &KappaStudy) -> String {
    let mut out = format!("{:>6} {:>16}", "k", "kappa %");
    for row in &study.rows {
        out.push('\n');
        out.push_str(&format!(
            "{:>6} {:>16}",
            row.k,
            format!("{:.2} ± {:.2}", 100.0 * row.kappa_mean, 100.0 * row.kappa_std)
        ));
    }
    out
}
