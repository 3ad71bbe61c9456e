//! `twoway bandwidth`: lag-truncation diagnostics for a dataset — the
//! AR(1) coefficients of the score time sums and the truncation each rule
//! would pick.

use clap::Args;
use serde::Serialize;

use twoway_core::bandwidth::{andrews_m, ar1_coefficients, stock_watson_m, BandwidthChoice};
use twoway_core::{cluster_sums, fe_fit, ols_fit, scores, Result};

use crate::commands::{load_panel, FormatArg, SchemaArgs};

#[derive(Args)]
pub struct BandwidthArgs {
    #[command(flatten)]
    schema: SchemaArgs,
    /// Use the within estimator instead of least squares with an intercept.
    #[arg(long)]
    fixed_effects: bool,
    /// Drop the intercept (ignored with --fixed-effects).
    #[arg(long)]
    no_intercept: bool,
    /// Output format (csv is treated as table).
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Serialize)]
struct BandwidthReport {
    columns: Vec<String>,
    n_units: usize,
    n_periods: usize,
    rho_hats: Vec<f64>,
    rho_clamped: bool,
    andrews: BandwidthChoice,
    stock_watson: BandwidthChoice,
}

pub fn run(args: &BandwidthArgs) -> Result<()> {
    let panel = load_panel(&args.schema)?;
    let fit = if args.fixed_effects {
        fe_fit(&panel)?
    } else {
        ols_fit(&panel, !args.no_intercept)?
    };
    let sc = scores(&fit);
    let sums = cluster_sums(&sc);
    let rho = ar1_coefficients(&sums)?;
    let andrews = andrews_m(&rho.rho_hats, fit.n_periods())?;
    let stock_watson = stock_watson_m(fit.n_periods())?;

    let report = BandwidthReport {
        columns: fit.column_names().to_vec(),
        n_units: fit.n_units(),
        n_periods: fit.n_periods(),
        rho_hats: rho.rho_hats,
        rho_clamped: rho.any_clamped,
        andrews,
        stock_watson,
    };
    match args.format {
        FormatArg::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        ),
        FormatArg::Table | FormatArg::Csv => {
            println!("N: {}   T: {}", report.n_units, report.n_periods);
            for (name, rho) in report.columns.iter().zip(&report.rho_hats) {
                println!("rho_hat[{name}] = {rho:.6}");
            }
            if report.rho_clamped {
                println!("(one or more AR(1) coefficients were clamped)");
            }
            println!(
                "andrews M      = {:.4}{}",
                report.andrews.m_value,
                if report.andrews.clamped { " (clamped)" } else { "" }
            );
            println!(
                "stock-watson M = {:.4}{}",
                report.stock_watson.m_value,
                if report.stock_watson.clamped { " (clamped)" } else { "" }
            );
        }
    }
    Ok(())
}
