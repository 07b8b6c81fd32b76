//! Report types shared by the verification suites and the CLI.

use serde::{Deserialize, Serialize};

/// Outcome of one verified identity: the worst relative error observed over
/// `samples` evaluations, and whether it stayed inside the declared tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_rel_err: f64,
    pub samples: usize,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, max_rel_err: f64, samples: usize, tol: f64) -> Self {
        Self {
            name: name.into(),
            max_rel_err,
            samples,
            pass: max_rel_err.is_finite() && max_rel_err <= tol,
        }
    }

    /// A check that asserts a boolean condition rather than an error figure.
    pub fn gate(name: impl Into<String>, pass: bool, figure: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            max_rel_err: figure,
            samples,
            pass,
        }
    }
}

/// Render reports as aligned pass/fail lines for terminal output.
pub fn summary_lines(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!(
            "{}  {:width$}  max_rel_err={:.3e}  samples={}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.max_rel_err,
            r.samples,
            width = width
        ));
    }
    out
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
