//! Report rows, summaries and the CSV / JSON writers.
//!
//! Both writers are byte-deterministic for a fixed row list: rows are put in
//! canonical order first, and floats are written with 17 significant digits
//! (CSV) or the shortest round-trip representation (JSON).

use std::io::Write;

use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::HarnessError;

/// Minimum fraction of passing trials for an experiment to pass.
pub const MIN_PASS_RATE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: Experiment,
    pub seed: u64,
    pub trial: u64,
    pub statistic: &'static str,
    pub value: f64,
    pub pass: bool,
}

impl ReportRow {
    fn key(&self) -> (&'static str, u64, u64, &'static str) {
        (self.experiment.name(), self.seed, self.trial, self.statistic)
    }
}

/// Sorts rows by `(experiment, seed, trial, statistic)`.
pub fn sort_canonical(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub experiment: Experiment,
    pub trials: usize,
    pub passed: usize,
    pub pass_rate: f64,
    pub max_discrepancy: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    /// Passing trials over all trials of all experiments.
    pub pass_rate: f64,
    pub max_discrepancy: f64,
    pub min_pass_rate: f64,
    pub experiments: Vec<ExperimentSummary>,
}

impl Summary {
    pub fn from_experiments(experiments: Vec<ExperimentSummary>) -> Self {
        let trials: usize = experiments.iter().map(|e| e.trials).sum();
        let passed: usize = experiments.iter().map(|e| e.passed).sum();
        Self {
            pass_rate: if trials == 0 { 0.0 } else { passed as f64 / trials as f64 },
            max_discrepancy: experiments.iter().map(|e| e.max_discrepancy).fold(0.0, f64::max),
            min_pass_rate: MIN_PASS_RATE,
            experiments,
        }
    }

    /// Every experiment reached [`MIN_PASS_RATE`].
    pub fn pass(&self) -> bool {
        self.experiments.iter().all(|e| e.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub experiment: Experiment,
    pub runs: Vec<ExperimentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: ReportConfig,
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

/// Header `experiment,seed,trial,statistic,value,pass`, LF line endings.
pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| HarnessError::Serialize(e.to_string());
    w.write_record(["experiment", "seed", "trial", "statistic", "value", "pass"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.experiment.name(),
            &r.seed.to_string(),
            &r.trial.to_string(),
            r.statistic,
            &format!("{:.16e}", r.value),
            if r.pass { "true" } else { "false" },
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// A single JSON document `{config, rows, summary}` followed by a newline.
pub fn write_json<W: Write>(report: &Report, mut out: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| HarnessError::Serialize(e.to_string()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(exp: Experiment, trial: u64, statistic: &'static str) -> ReportRow {
        ReportRow {
            experiment: exp,
            seed: 1,
            trial,
            statistic,
            value: 0.25,
            pass: true,
        }
    }

    #[test]
    fn canonical_order() {
        let mut rows = vec![
            row(Experiment::Rip, 1, "sup_discrepancy"),
            row(Experiment::Crofton, 2, "abs_error"),
            row(Experiment::Crofton, 10, "abs_error"),
            row(Experiment::Embed, 0, "sup_discrepancy"),
            row(Experiment::Embed, 0, "m"),
        ];
        sort_canonical(&mut rows);
        let keys: Vec<_> = rows.iter().map(|r| (r.experiment.name(), r.trial, r.statistic)).collect();
        assert_eq!(
            keys,
            [
                ("crofton", 2, "abs_error"),
                ("crofton", 10, "abs_error"),
                ("embed", 0, "m"),
                ("embed", 0, "sup_discrepancy"),
                ("rip", 1, "sup_discrepancy"),
            ]
        );
    }

    #[test]
    fn csv_dialect() {
        let mut buf = Vec::new();
        write_csv(&[row(Experiment::Rip, 3, "sup_discrepancy")], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "experiment,seed,trial,statistic,value,pass\nrip,1,3,sup_discrepancy,2.5000000000000000e-1,true\n"
        );
    }

    #[test]
    fn csv_floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2773.0, 1e-300, std::f64::consts::PI] {
            let s = format!("{v:.16e}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
