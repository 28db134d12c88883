//! Plain-text reports. Output depends only on the inputs, never on timing.

use std::fmt;

/// How a check's value compares with its limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Passes when `value ≤ limit`.
    Residual,
    /// Passes when `value ≥ −limit`.
    Slack,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub metric: Metric,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn residual(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), metric: Metric::Residual, value, limit, pass: value <= limit }
    }

    pub fn slack(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { name: name.into(), metric: Metric::Slack, value, limit, pass: value >= -limit }
    }

    /// Failed check carrying an error message in its name.
    pub fn error(name: impl Into<String>, message: &str) -> Self {
        Check { name: format!("{} ({message})", name.into()), metric: Metric::Residual, value: f64::NAN, limit: 0.0, pass: false }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        match self.metric {
            Metric::Residual => write!(f, "{status} {} residual={:.3e} tol={:.1e}", self.name, self.value, self.limit),
            Metric::Slack => write!(f, "{status} {} slack={:.3e} tol={:.1e}", self.name, self.value, self.limit),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), ..Default::default() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn render(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for c in &self.checks {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str("note: ");
            out.push_str(n);
            out.push('\n');
        }
        out.push_str(&format!("summary: {} checks, {} failed\n", self.checks.len(), self.failures()));
        out
    }
}
