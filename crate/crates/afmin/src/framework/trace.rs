//! Iteration traces and stopping rules.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::error::{Error, Result};

/// One iteration of a descent run.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    /// 1-based iteration index.
    pub k: usize,
    /// Iterate after step k.
    pub x: Vec<f64>,
    /// Objective value at the iterate.
    pub f: f64,
    /// Solver-specific distance from the previous iterate.
    pub step_distance: f64,
    /// Named per-iteration slack values (descent margin, mass slack, ...).
    pub slacks: BTreeMap<String, f64>,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Objective drop fell below `f_tol`.
    FTol,
    /// Step distance fell below `step_tol`.
    StepTol,
    /// Iteration cap reached without meeting a tolerance.
    MaxIters,
}

impl StopReason {
    pub fn converged(self) -> bool {
        !matches!(self, StopReason::MaxIters)
    }
}

/// Append-only record of a descent run. Objective values are non-increasing
/// along the records; the run loops enforce this and abort on violations.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    /// Starting vector, when the run had one in iterate space.
    pub x0: Option<Vec<f64>>,
    records: Vec<TraceRecord>,
    pub stop: StopReason,
}

impl IterationTrace {
    pub(crate) fn new(x0: Option<Vec<f64>>) -> Self {
        IterationTrace {
            x0,
            records: Vec::new(),
            stop: StopReason::MaxIters,
        }
    }

    pub(crate) fn push(&mut self, rec: TraceRecord) -> Result<()> {
        let expected = self.records.len() + 1;
        if rec.k != expected {
            return Err(Error::Evaluation(format!(
                "trace records must be consecutive: expected k={expected}, got k={}",
                rec.k
            )));
        }
        if let Some(prev) = self.records.last() {
            if rec.slacks.len() != prev.slacks.len() || !rec.slacks.keys().eq(prev.slacks.keys()) {
                return Err(Error::Evaluation(
                    "trace records must share one set of slack names".into(),
                ));
            }
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_x(&self) -> Option<&[f64]> {
        self.records.last().map(|r| r.x.as_slice())
    }

    pub fn final_f(&self) -> Option<f64> {
        self.records.last().map(|r| r.f)
    }

    /// Iterate with index `k` treating `x0` as index 0.
    pub fn iterate(&self, k: usize) -> Option<&[f64]> {
        if k == 0 {
            self.x0.as_deref()
        } else {
            self.records.get(k - 1).map(|r| r.x.as_slice())
        }
    }

    /// Slack column names, alphabetical (the CSV column order).
    pub fn slack_names(&self) -> Vec<String> {
        self.records
            .first()
            .map(|r| r.slacks.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// Write the trace as delimited text: header row
    /// `k,f,step_distance,<slack names alphabetical>`, one row per iteration.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let names = self.slack_names();
        let mut header = String::from("k,f,step_distance");
        for n in &names {
            header.push(',');
            header.push_str(n);
        }
        writeln!(w, "{header}")?;
        for r in &self.records {
            let mut line = format!("{},{},{}", r.k, r.f, r.step_distance);
            for n in &names {
                line.push(',');
                line.push_str(&r.slacks[n].to_string());
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Termination bounds for a descent run. At least the iteration cap is
/// always finite; the two tolerances are optional refinements.
#[derive(Debug, Clone, Copy)]
pub struct StoppingRule {
    pub max_iters: usize,
    /// Stop once f(x^{k-1}) − f(x^k) < f_tol (inactive at 0).
    pub f_tol: f64,
    /// Stop once the step distance drops below step_tol.
    pub step_tol: f64,
}

impl StoppingRule {
    pub fn new(max_iters: usize, f_tol: f64, step_tol: f64) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if f_tol.is_nan() || f_tol < 0.0 || step_tol.is_nan() || step_tol < 0.0 {
            return Err(Error::Config(
                "tolerances must be nonnegative and not NaN".into(),
            ));
        }
        Ok(StoppingRule {
            max_iters,
            f_tol,
            step_tol,
        })
    }

    pub fn with_max_iters(self, max_iters: usize) -> Self {
        StoppingRule { max_iters, ..self }
    }
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            max_iters: 1000,
            f_tol: 0.0,
            step_tol: 1e-12,
        }
    }
}
