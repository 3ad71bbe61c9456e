//! Human- and machine-readable rendering of fit results.

use serde::Serialize;

use twoway_core::bandwidth::BandwidthRule;
use twoway_core::{InferenceRow, Result};

use crate::commands::FormatArg;

/// Eigenvalue-correction and lag-truncation metadata for a fit.
#[derive(Debug, Serialize)]
pub struct EvcDiagnostics {
    pub applied: bool,
    pub clipped_eigenvalues: usize,
    pub pre_evc_min_eigenvalue: Option<f64>,
    pub lag_clamped: bool,
}

/// Everything `fit` reports: estimates, standard errors, the bandwidth
/// actually used, and correction diagnostics.
#[derive(Debug, Serialize)]
pub struct FitReport {
    pub estimator: String,
    pub fixed_effects: bool,
    pub n_units: usize,
    pub n_periods: usize,
    pub columns: Vec<String>,
    pub beta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub m_hat: Option<f64>,
    pub bandwidth_rule: Option<BandwidthRule>,
    pub rho_hats: Option<Vec<f64>>,
    pub evc: EvcDiagnostics,
    pub negative_variance_flags: Vec<bool>,
    pub dof_adjustment: f64,
    pub level: f64,
    pub inference: Vec<InferenceRow>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

fn table(report: &FitReport) -> String {
    let mut out = format!(
        "estimator: {}   N: {}   T: {}   level: {}\n",
        report.estimator, report.n_units, report.n_periods, report.level
    );
    if let Some(m) = report.m_hat {
        out.push_str(&format!("lag truncation M: {m:.4}"));
        if let Some(rule) = &report.bandwidth_rule {
            out.push_str(&format!(" ({rule:?})"));
        }
        out.push('\n');
    }
    if report.evc.applied {
        out.push_str(&format!(
            "eigenvalue correction: {} clipped (min eigenvalue before: {})\n",
            report.evc.clipped_eigenvalues,
            fmt_opt(report.evc.pre_evc_min_eigenvalue)
        ));
    }
    out.push_str(&format!(
        "{:<16} {:>14} {:>14} {:>10} {:>10} {:>14} {:>14}\n",
        "name", "estimate", "std_error", "t", "p", "ci_lower", "ci_upper"
    ));
    for row in &report.inference {
        out.push_str(&format!(
            "{:<16} {:>14.6} {:>14.6} {:>10} {:>10} {:>14.6} {:>14.6}\n",
            row.name,
            row.estimate,
            row.std_error,
            row.t_stat
                .map_or_else(|| "-".to_string(), |t| format!("{t:.3}")),
            row.p_value
                .map_or_else(|| "-".to_string(), |p| format!("{p:.4}")),
            row.ci_lower,
            row.ci_upper,
        ));
    }
    out
}

fn csv(report: &FitReport) -> String {
    let mut out =
        String::from("name,estimate,std_error,t_stat,p_value,ci_lower,ci_upper\n");
    for row in &report.inference {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.name,
            row.estimate,
            row.std_error,
            row.t_stat.map_or(String::new(), |t| t.to_string()),
            row.p_value.map_or(String::new(), |p| p.to_string()),
            row.ci_lower,
            row.ci_upper,
        ));
    }
    out
}

pub fn print_fit_report(report: &FitReport, format: FormatArg) -> Result<()> {
    match format {
        FormatArg::Json => println!(
            "{}",
            serde_json::to_string_pretty(report).expect("report serializes")
        ),
        FormatArg::Table => print!("{}", table(report)),
        FormatArg::Csv => print!("{}", csv(report)),
    }
    Ok(())
}
