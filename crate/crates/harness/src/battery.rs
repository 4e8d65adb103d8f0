//! Concurrent execution of a list of experiments and the summary table.

use muskat_core::parallel::with_workers;
use rayon::prelude::*;

use crate::calibration::Calibration;
use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::experiments::run_experiment;
use crate::result::RunResult;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "MUSKATLAB_THREADS";

/// `min(requested, MUSKATLAB_THREADS)`, defaulting to the available cores.
pub fn worker_budget(requested: Option<usize>) -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let n = requested.unwrap_or(cores);
    cap.map_or(n, |c| n.min(c)).max(1)
}

/// Run every experiment, at most `workers` at a time. Results come back in
/// input order.
pub fn run_battery(
    specs: &[ExperimentSpec],
    calibration: Option<&Calibration>,
    workers: usize,
) -> Result<Vec<RunResult>> {
    Ok(with_workers(workers, || {
        specs
            .par_iter()
            .map(|s| run_experiment(s, calibration))
            .collect()
    })?)
}

/// Nonzero iff some hard assertion failed.
pub fn exit_code(results: &[RunResult]) -> i32 {
    if results.iter().all(RunResult::passed) {
        0
    } else {
        1
    }
}

/// Fixed-width table: experiment, kind, verdict, key statistic. Contains no
/// timings, so repeated batteries print identical tables.
pub fn summary_table(results: &[RunResult]) -> String {
    let rows: Vec<[String; 4]> = results
        .iter()
        .map(|r| {
            let key = r.key_verdict().map_or_else(String::new, |v| {
                format!("{} = {:.6e} (threshold {:.6e})", v.id, v.measured, v.threshold)
            });
            [
                r.manifest.name.clone(),
                r.manifest.kind.id().to_string(),
                r.label().to_string(),
                key,
            ]
        })
        .collect();
    let header = ["experiment", "kind", "verdict", "key statistic"];
    let mut width = header.map(str::len);
    for row in &rows {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: [&str; 4]| {
        format!(
            "{:<w0$}  {:<w1$}  {:<w2$}  {}\n",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            w0 = width[0],
            w1 = width[1],
            w2 = width[2]
        )
    };
    let mut out = line(header);
    out.push_str(&line([
        &"-".repeat(width[0]),
        &"-".repeat(width[1]),
        &"-".repeat(width[2]),
        &"-".repeat(width[3]),
    ]));
    for row in &rows {
        out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    out.push_str(&format!("{} experiments, {failed} failed\n", results.len()));
    out
}
