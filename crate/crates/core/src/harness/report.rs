//! Metric tables across replications.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::log::RunLog;
use crate::error::{Error, Result};
use crate::metrics::{
    best_so_far_series, mean, normalized_series, regret_series, sample_std, value_source,
    ValueSource,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Best constrained regret so far.
    ConstrainedRegret,
    /// Normalized regret plus violation of each step's sample.
    Normalized,
    /// Running minimum of the normalized metric.
    BestSoFar,
}

/// Metric value after every record of one log.
pub fn log_series(log: &RunLog, metric: MetricKind) -> Result<Vec<f64>> {
    let h = &log.header;
    let source = value_source(&log.records);
    let missing = |what: &str| {
        Error::Config(format!(
            "{} has no {what} in its header",
            log.paths.header.display()
        ))
    };
    match metric {
        MetricKind::ConstrainedRegret => {
            let j = h.j_star.ok_or_else(|| missing("reference optimum"))?;
            regret_series(&log.records, j, source)
        }
        MetricKind::Normalized | MetricKind::BestSoFar => {
            let sigmas = h.sigmas.as_ref().ok_or_else(|| missing("normalizers"))?;
            let s = normalized_series(&log.records, h.j_star, sigmas, source)?;
            Ok(if metric == MetricKind::BestSoFar {
                best_so_far_series(&s)
            } else {
                s
            })
        }
    }
}

/// Per-label mean and sample standard deviation at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub labels: Vec<String>,
    /// `mean[label][step]`
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
    pub value_source: ValueSource,
}

impl MetricTable {
    pub fn steps(&self) -> usize {
        self.mean.first().map_or(0, Vec::len)
    }

    pub fn column(&self, label: &str) -> Option<(&[f64], &[f64])> {
        let i = self.labels.iter().position(|l| l == label)?;
        Some((&self.mean[i], &self.std[i]))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step");
        for l in &self.labels {
            let _ = write!(out, ",{l}_mean,{l}_std");
        }
        out.push_str(",value_source\n");
        for k in 0..self.steps() {
            let _ = write!(out, "{}", k + 1);
            for (m, s) in self.mean.iter().zip(&self.std) {
                let _ = write!(out, ",{},{}", m[k], s[k]);
            }
            let _ = writeln!(out, ",{}", self.value_source.as_str());
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Aggregates `logs` by label. Shorter series (runs that stopped at an
/// infeasibility declaration) are extended with their last value.
pub fn emit_metrics(logs: &[RunLog], metric: MetricKind) -> Result<MetricTable> {
    let mut labels: Vec<String> = Vec::new();
    let mut series: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut source = ValueSource::True;
    for log in logs {
        if value_source(&log.records) == ValueSource::Measured {
            source = ValueSource::Measured;
        }
        let s = log_series(log, metric)?;
        let i = match labels.iter().position(|l| *l == log.header.label) {
            Some(i) => i,
            None => {
                labels.push(log.header.label.clone());
                series.push(vec![]);
                labels.len() - 1
            }
        };
        series[i].push(s);
    }
    let steps = series.iter().flatten().map(Vec::len).max().unwrap_or(0);
    let mut means = Vec::new();
    let mut stds = Vec::new();
    for group in &series {
        let (mut m, mut sd) = (Vec::with_capacity(steps), Vec::with_capacity(steps));
        for k in 0..steps {
            let col: Vec<f64> = group
                .iter()
                .filter_map(|s| s.get(k).or(s.last()).copied())
                .collect();
            m.push(mean(&col));
            sd.push(sample_std(&col));
        }
        means.push(m);
        stds.push(sd);
    }
    Ok(MetricTable {
        labels,
        mean: means,
        std: stds,
        value_source: source,
    })
}
