//! Pass/fail reports for numerical property checks.
//!
//! A check evaluates a named inequality (or identity) over many samples and
//! summarizes the signed slacks. The convention throughout the crate:
//! slack >= 0 means the property held on that sample, and a check passes
//! when the worst slack stays above `-tolerance`. Identity checks report
//! `-|residual|` as the slack so the same convention applies.

use std::io::{self, Write};

/// Outcome of one property check over a set of samples.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    /// Number of slack evaluations that went into the summary.
    pub samples: usize,
    pub worst_slack: f64,
    pub mean_slack: f64,
    /// Pass threshold: the check passes iff `worst_slack >= -tolerance`.
    pub tolerance: f64,
    pub pass: bool,
    /// Free-form context (seed, normalization, sub-condition worsts, ...).
    /// Kept comma-free so reports stay single CSV cells.
    pub notes: String,
}

impl CheckReport {
    /// Summarize a slice of signed slacks under the given tolerance.
    ///
    /// Any NaN slack fails the check outright.
    pub fn from_slacks(
        name: impl Into<String>,
        slacks: &[f64],
        tolerance: f64,
        notes: impl Into<String>,
    ) -> Self {
        let mut worst = f64::INFINITY;
        let mut sum = 0.0;
        let mut saw_nan = false;
        for &s in slacks {
            if s.is_nan() {
                saw_nan = true;
            } else if s < worst {
                worst = s;
            }
            sum += s;
        }
        let n = slacks.len();
        let mean = if n == 0 { 0.0 } else { sum / n as f64 };
        if n == 0 {
            worst = 0.0;
        }
        let pass = !saw_nan && worst >= -tolerance;
        let mut notes = sanitize_notes(notes.into());
        if saw_nan {
            if !notes.is_empty() {
                notes.push_str("; ");
            }
            notes.push_str("NaN slack encountered");
        }
        CheckReport {
            name: name.into(),
            samples: n,
            worst_slack: worst,
            mean_slack: mean,
            tolerance,
            pass,
            notes,
        }
    }

    /// A report that records observations without asserting anything.
    /// Probes always pass; their statistics live in the slack fields and
    /// notes.
    pub fn probe(name: impl Into<String>, slacks: &[f64], notes: impl Into<String>) -> Self {
        let mut report = Self::from_slacks(name, slacks, f64::INFINITY, notes);
        report.pass = true;
        report
    }

    /// True when the report asserts nothing (see [`CheckReport::probe`]).
    pub fn is_probe(&self) -> bool {
        self.tolerance.is_infinite()
    }

    pub fn csv_header() -> &'static str {
        "name,samples,worst_slack,mean_slack,tolerance,pass,notes"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.name,
            self.samples,
            self.worst_slack,
            self.mean_slack,
            self.tolerance,
            self.pass,
            self.notes
        )
    }
}

/// Write reports as delimited text: a header row then one row per report.
pub fn write_reports_csv<W: Write>(mut w: W, reports: &[CheckReport]) -> io::Result<()> {
    writeln!(w, "{}", CheckReport::csv_header())?;
    for r in reports {
        writeln!(w, "{}", r.to_csv_row())?;
    }
    Ok(())
}

fn sanitize_notes(notes: String) -> String {
    notes.replace([',', '\n'], ";")
}
