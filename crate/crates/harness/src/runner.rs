//! Parallel trial execution and report emission.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use rayon::prelude::*;

use crate::config::{ExperimentConfig, Format, RunConfig};
use crate::error::HarnessError;
use crate::experiments::{run_trial, statistics, TrialOutcome};
use crate::report::{
    sort_canonical, write_csv, write_json, ExperimentSummary, Report, ReportConfig, ReportRow, Summary,
    MIN_PASS_RATE,
};

/// Runs every trial of one experiment on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<ReportRow>, ExperimentSummary), HarnessError> {
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<_, _>>()?;
    let names = statistics(cfg.experiment);
    let mut rows = Vec::with_capacity(outcomes.len() * names.len());
    for (trial, o) in outcomes.iter().enumerate() {
        for (&statistic, &value) in names.iter().zip(&o.values) {
            rows.push(ReportRow {
                experiment: cfg.experiment,
                seed: cfg.seed,
                trial: trial as u64,
                statistic,
                value,
                pass: o.pass,
            });
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let pass_rate = passed as f64 / cfg.trials as f64;
    let summary = ExperimentSummary {
        experiment: cfg.experiment,
        trials: cfg.trials,
        passed,
        pass_rate,
        max_discrepancy: outcomes.iter().map(|o| o.discrepancy).fold(0.0, f64::max),
        pass: pass_rate >= MIN_PASS_RATE,
    };
    Ok((rows, summary))
}

/// Runs every configured experiment and assembles the sorted report.
pub fn execute(run: &RunConfig) -> Result<Report, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = run.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
    pool.install(|| {
        let mut rows = Vec::new();
        let mut summaries = Vec::new();
        for cfg in &run.runs {
            let (r, s) = run_experiment(cfg)?;
            rows.extend(r);
            summaries.push(s);
        }
        sort_canonical(&mut rows);
        Ok(Report {
            config: ReportConfig {
                experiment: run.experiment,
                runs: run.runs.clone(),
            },
            rows,
            summary: Summary::from_experiments(summaries),
        })
    })
}

/// Writes the report in the requested format.
pub fn write_report<W: Write>(report: &Report, format: Format, out: W) -> Result<(), HarnessError> {
    match format {
        Format::Csv => write_csv(&report.rows, out),
        Format::Json => write_json(report, out),
    }
}

/// Executes `run`, writes the report and returns the exit status
/// (0 when every experiment reached the minimum pass rate, 1 otherwise).
pub fn run(run: &RunConfig) -> Result<u8, HarnessError> {
    let report = execute(run)?;
    match &run.out {
        Some(path) => {
            let io_err = |source| HarnessError::Io {
                path: path.clone(),
                source,
            };
            let file = File::create(path).map_err(io_err)?;
            write_report(&report, run.format, BufWriter::new(file)).map_err(|e| match e {
                HarnessError::Write(source) => io_err(source),
                other => other,
            })?;
        }
        None => write_report(&report, run.format, io::stdout().lock())?,
    }
    for s in &report.summary.experiments {
        eprintln!(
            "{:<13} {:>4}/{:<4} pass_rate={:.3} max_discrepancy={:.6} {}",
            s.experiment.name(),
            s.passed,
            s.trials,
            s.pass_rate,
            s.max_discrepancy,
            if s.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(if report.summary.pass() { 0 } else { 1 })
}
