//! Deterministic report formatting: flat key-value dumps, CSV and JSON.
//!
//! Numbers are printed with 17 significant digits ('.' decimal separator,
//! '\n' line endings) so identical inputs produce byte-identical artifacts.

use qotto_core::CycleReport;
use serde::Serialize;

/// 17-significant-digit scientific notation, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SWEEP_COLUMNS: &str = "tau,w_total,w_lb,w_ub,q_hot,q_cold,entropy_production,delta1,delta2,trace_drift_max,status";

/// One sweep row; `error` is set instead of the numeric fields when the
/// point failed.
#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_total: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_lb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_ub: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_hot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_cold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_production: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_drift_max: Option<f64>,
    pub status: String,
}

impl SweepRow {
    pub fn ok(tau: f64, r: &CycleReport) -> Self {
        Self {
            tau,
            w_total: Some(r.w_total),
            w_lb: Some(r.w_lower_bound),
            w_ub: Some(r.w_upper_bound),
            q_hot: Some(r.q_hot),
            q_cold: Some(r.q_cold),
            entropy_production: Some(r.entropy_production_total),
            delta1: Some(r.delta_branch1),
            delta2: Some(r.delta_branch2),
            trace_drift_max: Some(r.trace_drift_max),
            status: "ok".into(),
        }
    }

    pub fn failed(tau: f64, error: &str) -> Self {
        Self {
            tau,
            w_total: None,
            w_lb: None,
            w_ub: None,
            q_hot: None,
            q_cold: None,
            entropy_production: None,
            delta1: None,
            delta2: None,
            trace_drift_max: None,
            // commas would break the CSV shape
            status: error.replace(',', ";"),
        }
    }

    pub fn to_csv_line(&self) -> String {
        let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "nan".into());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(self.tau),
            cell(self.w_total),
            cell(self.w_lb),
            cell(self.w_ub),
            cell(self.q_hot),
            cell(self.q_cold),
            cell(self.entropy_production),
            cell(self.delta1),
            cell(self.delta2),
            cell(self.trace_drift_max),
            self.status
        )
    }
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_COLUMNS);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn render_json(rows: &[SweepRow]) -> String {
    let mut out = serde_json::to_string_pretty(rows).expect("sweep rows serialize");
    out.push('\n');
    out
}

/// Flat key = value dump of a single-cycle report.
pub fn render_cycle_report(tau: f64, r: &CycleReport) -> String {
    let mut lines = vec![
        ("tau", tau),
        ("w_branch1", r.w_branch1),
        ("w_branch2", r.w_branch2),
        ("w_total", r.w_total),
        ("q_hot", r.q_hot),
        ("q_cold", r.q_cold),
        ("w_lower_bound", r.w_lower_bound),
        ("w_upper_bound", r.w_upper_bound),
        ("entropy_production_branch1", r.entropy_production_branch1),
        ("entropy_production_branch2", r.entropy_production_branch2),
        ("entropy_production_total", r.entropy_production_total),
        ("delta_branch1", r.delta_branch1),
        ("delta_branch2", r.delta_branch2),
        ("trace_drift_max", r.trace_drift_max),
        ("hermiticity_drift_max", r.hermiticity_drift_max),
    ]
    .into_iter()
    .map(|(k, v)| format!("{k} = {}", fmt_f64(v)))
    .collect::<Vec<_>>();
    for (name, pops) in [
        ("p", &r.p),
        ("p_prime", &r.p_prime),
        ("q", &r.q),
        ("q_prime", &r.q_prime),
    ] {
        for (i, v) in pops.as_array().iter().enumerate() {
            lines.push(format!("{name}{} = {}", i + 1, fmt_f64(*v)));
        }
    }
    lines.push(format!("infeasible = {}", r.infeasible));
    lines.join("\n") + "\n"
}
