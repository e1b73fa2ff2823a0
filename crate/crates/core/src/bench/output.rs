//! CSV and JSON files written by benchmark runs.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{BenchError, BenchOutcome, MetricReport, SweepRow, TraceRecord};

pub const METRICS_HEADER: [&str; 14] = [
    "suite",
    "problem",
    "n",
    "d_or_p",
    "solver",
    "seed_count",
    "metric_name",
    "mean",
    "std",
    "reference",
    "wall_time_s",
    "instance_seed",
    "config_hash",
    "code_version",
];

pub const TRACE_HEADER: [&str; 12] = [
    "suite", "problem", "n", "d_or_p", "solver", "instance", "seed", "epoch", "loss", "phi", "gamma",
    "mean_p",
];

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Three rows per report: the value metric, `apr` (empty without a reference)
/// and `feasible_fraction`.
fn metric_rows(r: &MetricReport) -> Vec<Vec<String>> {
    let prefix = [
        r.suite.clone(),
        r.problem.kind().to_string(),
        r.n.to_string(),
        r.d_or_p.clone(),
        r.solver.clone(),
        r.seed_count.to_string(),
    ];
    let suffix = [
        r.reference.to_string(),
        opt(r.wall_time_s),
        r.instance_seed.map(|s| s.to_string()).unwrap_or_default(),
        r.config_hash.clone(),
        r.code_version.clone(),
    ];
    let metrics = [
        (r.metric_name.clone(), Some(r.mean), Some(r.std)),
        ("apr".to_string(), r.apr, r.apr_std),
        ("feasible_fraction".to_string(), Some(r.feasible_fraction), None),
    ];
    metrics
        .into_iter()
        .map(|(name, mean, std)| {
            let mut row: Vec<String> = prefix.to_vec();
            row.push(name);
            row.push(opt(mean));
            row.push(opt(std));
            row.extend(suffix.iter().cloned());
            row
        })
        .collect()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, BenchError> {
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_metrics_csv(path: &Path, reports: &[MetricReport]) -> Result<(), BenchError> {
    let mut w = csv_writer(path)?;
    w.write_record(METRICS_HEADER)?;
    for r in reports {
        for row in metric_rows(r) {
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn write_trace_csv(path: &Path, traces: &[TraceRecord]) -> Result<(), BenchError> {
    let mut w = csv_writer(path)?;
    w.write_record(TRACE_HEADER)?;
    for t in traces {
        let tr = &t.trace;
        for i in 0..tr.len() {
            w.write_record([
                t.suite.clone(),
                t.problem.kind().to_string(),
                t.n.to_string(),
                t.d_or_p.clone(),
                t.solver.clone(),
                t.instance.clone(),
                t.seed.0.to_string(),
                tr.epoch[i].to_string(),
                tr.loss[i].to_string(),
                tr.phi[i].to_string(),
                tr.gamma[i].to_string(),
                tr.mean_p[i].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), BenchError> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["gamma0", "rate", "alpha"];
    header.extend(METRICS_HEADER);
    w.write_record(&header)?;
    for row in rows {
        for metric in metric_rows(&row.report) {
            let mut rec = vec![row.gamma0.to_string(), row.rate.to_string(), row.alpha.to_string()];
            rec.extend(metric);
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_summary_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), BenchError> {
    let mut file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n").map_err(|e| BenchError::io(path, e))
}

/// Writes `metrics.csv` and `summary.json`, plus `trace.csv` when traces were
/// recorded. Returns the paths written.
pub fn write_outputs(outcome: &BenchOutcome, dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut written = Vec::new();
    let metrics = dir.join("metrics.csv");
    write_metrics_csv(&metrics, &outcome.reports)?;
    written.push(metrics);
    let summary = dir.join("summary.json");
    write_summary_json(
        &summary,
        &serde_json::json!({
            "reports": outcome.reports,
            "failures": outcome.failures,
        }),
    )?;
    written.push(summary);
    if !outcome.traces.is_empty() {
        let trace = dir.join("trace.csv");
        write_trace_csv(&trace, &outcome.traces)?;
        written.push(trace);
    }
    Ok(written)
}
