//! On-disk layout of run logs.
//!
//! Each replication writes three files under `<output_dir>/<label>/`:
//! `seed-<seed>.jsonl` holds one [`RunRecord`] per line,
//! `seed-<seed>.header.json` the settings that produced it and
//! `seed-<seed>.timing.jsonl` wall-clock timings. Only the timing file varies
//! between identical runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{OutputKernel, PolicySpec, ProblemSpec};
use crate::acquisition::BetaSchedule;
use crate::error::{Error, Result};
use crate::gp::KernelFamily;
use crate::metrics::{RunRecord, ValueSource};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogPaths {
    pub log: PathBuf,
    pub header: PathBuf,
    pub timing: PathBuf,
}

impl LogPaths {
    pub fn new(output_dir: &Path, label: &str, seed: u64) -> Self {
        let dir = output_dir.join(label);
        Self::from_log(dir.join(format!("seed-{seed}.jsonl")))
    }

    /// Sidecar paths belonging to the log file `log`.
    pub fn from_log(log: PathBuf) -> Self {
        let stem = log
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let dir = log.parent().map(Path::to_path_buf).unwrap_or_default();
        Self {
            header: dir.join(format!("{stem}.header.json")),
            timing: dir.join(format!("{stem}.timing.jsonl")),
            log,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialPoints {
    pub feasible_start: Option<Vec<f64>>,
    pub uniform: usize,
}

/// Everything that determines a replication's log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub version: String,
    pub problem: ProblemSpec,
    pub label: String,
    pub policy: PolicySpec,
    pub seed: u64,
    pub budget: usize,
    pub grid: Vec<usize>,
    pub beta: BetaSchedule,
    pub kernels: Vec<OutputKernel>,
    pub kernel_refit: Option<KernelFamily>,
    pub initial_design: InitialPoints,
    pub j_star: Option<f64>,
    pub j_star_grid: Option<Vec<usize>>,
    pub sigmas: Option<Vec<f64>>,
    pub sigma_seed: u64,
    pub value_source: ValueSource,
}

impl RunHeader {
    pub fn to_text(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Complete records of a possibly truncated log, plus the byte length of
/// that complete prefix. A missing file reads as empty.
pub fn read_records(path: &Path) -> Result<(Vec<RunRecord>, u64)> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((vec![], 0)),
        Err(e) => return Err(e.into()),
    };
    let complete = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
    let mut records = Vec::new();
    for line in bytes[..complete].split(|b| *b == b'\n') {
        if line.is_empty() {
            continue;
        }
        records.push(serde_json::from_slice(line)?);
    }
    Ok((records, complete as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub paths: LogPaths,
    pub header: RunHeader,
    pub records: Vec<RunRecord>,
}

impl RunLog {
    pub fn load(log: &Path) -> Result<Self> {
        let paths = LogPaths::from_log(log.to_path_buf());
        let header: RunHeader = serde_json::from_str(&fs::read_to_string(&paths.header)?)?;
        let (records, _) = read_records(&paths.log)?;
        Ok(Self {
            paths,
            header,
            records,
        })
    }
}

/// Every run log below `dir`, sorted by path.
pub fn discover_logs(dir: &Path) -> Result<Vec<RunLog>> {
    let mut found = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if is_log_file(&path) {
                found.push(path);
            }
        }
    }
    found.sort();
    found.iter().map(|p| RunLog::load(p)).collect()
}

fn is_log_file(path: &Path) -> bool {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy())
        .unwrap_or_default();
    name.ends_with(".jsonl") && !name.ends_with(".timing.jsonl")
}

/// Appends records and flushes each one, so a crash loses at most the line
/// being written.
pub struct LogWriter {
    log: fs::File,
    timing: fs::File,
}

impl LogWriter {
    /// Opens `paths.log` truncated to `keep` bytes for appending.
    pub fn open(paths: &LogPaths, keep: u64) -> Result<Self> {
        let log = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&paths.log)?;
        log.set_len(keep)?;
        let timing = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&paths.timing)?;
        Ok(Self { log, timing })
    }

    pub fn write(&mut self, record: &RunRecord) -> Result<()> {
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        self.log.write_all(line.as_bytes())?;
        self.log.flush()?;
        Ok(())
    }

    pub fn write_timing(&mut self, t: usize, seconds: f64) -> Result<()> {
        writeln!(
            self.timing,
            "{}",
            serde_json::json!({ "t": t, "seconds": seconds })
        )?;
        Ok(())
    }
}

/// Writes `header` to `path`, or checks that an existing header is identical.
pub fn ensure_header(path: &Path, header: &RunHeader) -> Result<()> {
    let text = header.to_text()?;
    match fs::read_to_string(path) {
        Ok(existing) if existing == text => Ok(()),
        Ok(_) => Err(Error::Config(format!(
            "{} was written by a different configuration",
            path.display()
        ))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            fs::write(path, text)?;
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}
