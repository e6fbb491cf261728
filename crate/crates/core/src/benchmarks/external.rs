//! Adapter for objectives computed by an external process.
//!
//! The child speaks newline-delimited JSON over its standard streams: for each
//! request line `{"theta": [..]}` it must answer with exactly one line
//! `{"objective": J, "constraints": [g_1, ..]}`. One request is in flight at a
//! time.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::problem::Problem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Program and arguments.
    pub command: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub n_constraints: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

fn default_name() -> String {
    "external".into()
}

fn default_timeout() -> f64 {
    60.0
}

#[derive(Serialize)]
struct Request<'a> {
    theta: &'a [f64],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Response {
    objective: f64,
    constraints: Vec<f64>,
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

pub struct ExternalBlackBox {
    config: ExternalConfig,
    session: Option<Session>,
}

impl std::fmt::Debug for ExternalBlackBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalBlackBox")
            .field("config", &self.config)
            .field("running", &self.session.is_some())
            .finish()
    }
}

impl ExternalBlackBox {
    pub fn new(config: ExternalConfig) -> Result<Self> {
        if config.command.is_empty() {
            return Err(Error::Config("external command is empty".into()));
        }
        if config.lower.len() != config.upper.len() || config.lower.is_empty() {
            return Err(Error::Config(
                "external bounds must be non-empty and equal length".into(),
            ));
        }
        if !(config.timeout_secs > 0.0) {
            return Err(Error::Config("timeout must be positive".into()));
        }
        Ok(Self {
            config,
            session: None,
        })
    }

    pub fn config(&self) -> &ExternalConfig {
        &self.config
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.config.timeout_secs)
    }

    fn spawn(&self) -> Result<Session> {
        let mut child = Command::new(&self.config.command[0])
            .args(&self.config.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Ok(Session {
            child,
            stdin,
            lines: rx,
        })
    }

    fn exit_status(&mut self) -> String {
        match self.session.take() {
            Some(mut s) => {
                let status = s.child.wait().map(|st| st.to_string());
                status.unwrap_or_else(|e| e.to_string())
            }
            None => "not running".into(),
        }
    }

    fn kill(&mut self) {
        if let Some(mut s) = self.session.take() {
            let _ = s.child.kill();
            let _ = s.child.wait();
        }
    }

    /// One request/response round trip.
    pub fn call(&mut self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        if theta.len() != self.config.lower.len() {
            return Err(Error::DimensionMismatch {
                expected: self.config.lower.len(),
                got: theta.len(),
            });
        }
        if self.session.is_none() {
            self.session = Some(self.spawn()?);
        }
        let mut request = serde_json::to_string(&Request { theta })?;
        request.push('\n');
        let timeout = self.timeout();
        let session = self.session.as_mut().expect("session started");
        if let Err(e) = session
            .stdin
            .write_all(request.as_bytes())
            .and_then(|_| session.stdin.flush())
        {
            let status = self.exit_status();
            return Err(Error::ChildExited(format!(
                "write failed ({e}); status {status}"
            )));
        }
        let line = match session.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                self.kill();
                return Err(Error::Io(e));
            }
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                return Err(Error::Timeout(timeout));
            }
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.exit_status();
                return Err(Error::ChildExited(status));
            }
        };
        let response: Response = match serde_json::from_str(line.trim_end()) {
            Ok(r) => r,
            Err(e) => {
                self.kill();
                return Err(Error::Protocol(format!(
                    "malformed response {:?}: {e}",
                    line.trim_end()
                )));
            }
        };
        if response.constraints.len() != self.config.n_constraints {
            self.kill();
            return Err(Error::Protocol(format!(
                "expected {} constraint values, got {}",
                self.config.n_constraints,
                response.constraints.len()
            )));
        }
        if !response.objective.is_finite() || response.constraints.iter().any(|g| !g.is_finite()) {
            self.kill();
            return Err(Error::Protocol("non-finite value in response".into()));
        }
        Ok((response.objective, response.constraints))
    }
}

impl Drop for ExternalBlackBox {
    fn drop(&mut self) {
        if let Some(mut s) = self.session.take() {
            // closing stdin lets well-behaved children exit on their own
            drop(s.stdin);
            let _ = s.child.kill();
            let _ = s.child.wait();
        }
    }
}

impl Problem for ExternalBlackBox {
    fn name(&self) -> &str {
        &self.config.name
    }

    fn lower(&self) -> &[f64] {
        &self.config.lower
    }

    fn upper(&self) -> &[f64] {
        &self.config.upper
    }

    fn n_constraints(&self) -> usize {
        self.config.n_constraints
    }

    fn evaluate(&mut self, theta: &[f64]) -> Result<Vec<f64>> {
        let (j, g) = self.call(theta)?;
        let mut out = Vec::with_capacity(g.len() + 1);
        out.push(j);
        out.extend(g);
        Ok(out)
    }

    fn is_pure(&self) -> bool {
        false
    }
}
