//! Trace documents: JSON, CSV and a plain-text table.
//!
//! Every number is written as a decimal string so nothing is lost to binary
//! floats on the way through.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use baryiter_core::analysis::empirical_order;
use baryiter_core::{IterationTrace, Real};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub problem: String,
    pub method: String,
    pub config: BTreeMap<String, String>,
    pub steps: Vec<StepRow>,
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub i: usize,
    pub x: String,
    pub f: String,
    pub abs_error: Option<String>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub status: String,
    pub iterations: usize,
    pub empirical_order: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Pairs averaged for the summary order.
const ORDER_PAIRS: usize = 3;

/// Mean order over the last three usable pairs, or fewer if that is all
/// the trace has.
pub fn summary_order<R: Real>(trace: &IterationTrace<R>) -> Option<f64> {
    (1..=ORDER_PAIRS)
        .rev()
        .find_map(|k| empirical_order(trace, k).ok())
}

impl TraceReport {
    /// `error` names the solver failure that ended the run, if any.
    pub fn from_trace<R: Real>(
        problem: &str,
        method: &str,
        config: BTreeMap<String, String>,
        trace: &IterationTrace<R>,
        digits: usize,
        error: Option<&str>,
    ) -> Self {
        let steps = trace
            .steps()
            .iter()
            .map(|s| StepRow {
                i: s.index,
                x: s.x.to_decimal(digits),
                f: s.f.to_decimal(digits),
                abs_error: s.abs_error().map(|e| e.to_decimal(digits)),
                status: s.status.as_str().to_string(),
            })
            .collect();
        let status = match (error, trace.status()) {
            (Some(_), _) | (None, None) => "error".to_string(),
            (None, Some(s)) => s.as_str().to_string(),
        };
        TraceReport {
            problem: problem.to_string(),
            method: method.to_string(),
            config,
            steps,
            summary: Summary {
                status,
                iterations: trace.len().saturating_sub(1),
                empirical_order: summary_order(trace).map(|l| format!("{l:.5}")),
                error: error.map(str::to_string),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialise");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,x,f,abs_error,status\n");
        for row in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.i,
                row.x,
                row.f,
                row.abs_error.as_deref().unwrap_or(""),
                row.status
            );
        }
        out
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem  {}", self.problem);
        let _ = writeln!(out, "method   {}", self.method);
        for (k, v) in &self.config {
            let _ = writeln!(out, "  {k} = {v}");
        }
        let xw = self
            .steps
            .iter()
            .map(|r| r.x.len())
            .max()
            .unwrap_or(1)
            .max(1);
        let fw = self
            .steps
            .iter()
            .map(|r| r.f.len())
            .max()
            .unwrap_or(1)
            .max(1);
        let ew = self
            .steps
            .iter()
            .filter_map(|r| r.abs_error.as_ref().map(String::len))
            .max()
            .unwrap_or(1)
            .max(7);
        let _ = writeln!(
            out,
            "{:>4}  {:>xw$}  {:>fw$}  {:>ew$}  status",
            "i", "x", "f", "|error|"
        );
        for row in &self.steps {
            let _ = writeln!(
                out,
                "{:>4}  {:>xw$}  {:>fw$}  {:>ew$}  {}",
                row.i,
                row.x,
                row.f,
                row.abs_error.as_deref().unwrap_or("-"),
                row.status
            );
        }
        let s = &self.summary;
        let _ = write!(out, "{} after {} iterations", s.status, s.iterations);
        if let Some(order) = &s.empirical_order {
            let _ = write!(out, ", empirical order {order}");
        }
        if let Some(e) = &s.error {
            let _ = write!(out, ", error {e}");
        }
        out.push('\n');
        out
    }
}
