//! `twoway fit`: estimate a regression from a CSV and print inference
//! results with the chosen covariance estimator.

use clap::Args;

use twoway_core::bandwidth::{
    andrews_m, ar1_coefficients, stock_watson_m, BandwidthChoice, BandwidthRule,
};
use twoway_core::{
    cluster_sums, fe_fit, inference_table, ols_fit, omega_cgm, omega_chs, omega_cluster,
    omega_ehw, omega_thompson, sandwich, scores, ClusterAxis, Error, OmegaEstimate, Result,
};

use crate::commands::{load_panel, BandwidthArg, EstimatorArg, FormatArg, SchemaArgs, WeightArg};
use crate::output::{print_fit_report, EvcDiagnostics, FitReport};

#[derive(Args)]
pub struct FitArgs {
    #[command(flatten)]
    schema: SchemaArgs,
    /// Absorb additive unit and time effects with the within transform.
    #[arg(long)]
    fixed_effects: bool,
    /// Drop the intercept (ignored with --fixed-effects, which has none).
    #[arg(long)]
    no_intercept: bool,
    /// Covariance estimator.
    #[arg(long, value_enum, default_value_t = EstimatorArg::Chs)]
    estimator: EstimatorArg,
    /// Lag-truncation rule for the chs estimator.
    #[arg(long, value_enum, default_value_t = BandwidthArg::Andrews)]
    bandwidth: BandwidthArg,
    /// Fixed lag truncation; overrides --bandwidth. Required for thompson.
    #[arg(long)]
    m: Option<f64>,
    /// Kernel weights for the chs lag terms.
    #[arg(long, value_enum, default_value_t = WeightArg::Triangular)]
    weights: WeightArg,
    /// Skip the eigenvalue correction (chs only).
    #[arg(long)]
    no_evc: bool,
    /// Confidence level for intervals.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Multiplicative degrees-of-freedom adjustment on the covariance.
    #[arg(long, default_value_t = 1.0)]
    dof: f64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

struct OmegaOutcome {
    estimate: OmegaEstimate,
    m_hat: Option<f64>,
    rule: Option<BandwidthRule>,
    rho_hats: Option<Vec<f64>>,
}

fn build_omega(args: &FitArgs, sc: &twoway_core::ScoreMatrix) -> Result<OmegaOutcome> {
    let plain = |estimate| OmegaOutcome {
        estimate,
        m_hat: None,
        rule: None,
        rho_hats: None,
    };
    match args.estimator {
        EstimatorArg::Ehw => Ok(plain(omega_ehw(sc))),
        EstimatorArg::CrI => Ok(plain(omega_cluster(sc, ClusterAxis::Unit))),
        EstimatorArg::CrT => Ok(plain(omega_cluster(sc, ClusterAxis::Time))),
        EstimatorArg::Cgm => Ok(plain(omega_cgm(sc))),
        EstimatorArg::Thompson => {
            let m = args.m.ok_or_else(|| Error::InvalidParameter {
                detail: "the thompson estimator needs an explicit --m".into(),
            })?;
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidParameter {
                    detail: format!("--m must be finite and nonnegative, got {m}"),
                });
            }
            let lags = (m.floor() as usize).min(sc.n_periods() - 1);
            Ok(OmegaOutcome {
                estimate: omega_thompson(sc, lags)?,
                m_hat: Some(lags as f64),
                rule: Some(BandwidthRule::Fixed),
                rho_hats: None,
            })
        }
        EstimatorArg::Chs => {
            let mut rho_hats = None;
            let choice: BandwidthChoice = if let Some(m) = args.m {
                BandwidthChoice::fixed(m)
            } else {
                match args.bandwidth {
                    BandwidthArg::Andrews => {
                        let sums = cluster_sums(sc);
                        let rho = ar1_coefficients(&sums)?;
                        if rho.any_clamped {
                            eprintln!(
                                "warning: one or more AR(1) coefficients were clamped \
                                 before bandwidth selection"
                            );
                        }
                        let choice = andrews_m(&rho.rho_hats, sc.n_periods())?;
                        rho_hats = Some(rho.rho_hats);
                        choice
                    }
                    BandwidthArg::StockWatson => stock_watson_m(sc.n_periods())?,
                }
            };
            if choice.clamped {
                eprintln!(
                    "warning: lag truncation clamped to [0, T-1], using M = {}",
                    choice.m_value
                );
            }
            let estimate = omega_chs(sc, choice.m_value, args.weights.to_core(), !args.no_evc)?;
            if estimate.lag_clamped {
                eprintln!(
                    "warning: requested lag truncation exceeds T-1, using M = {}",
                    estimate.lag_truncation.unwrap_or_default()
                );
            }
            Ok(OmegaOutcome {
                m_hat: estimate.lag_truncation,
                rule: Some(choice.rule),
                rho_hats,
                estimate,
            })
        }
    }
}

pub fn run(args: &FitArgs) -> Result<()> {
    let panel = load_panel(&args.schema)?;
    let fit = if args.fixed_effects {
        fe_fit(&panel)?
    } else {
        ols_fit(&panel, !args.no_intercept)?
    };
    let sc = scores(&fit);
    let omega = build_omega(args, &sc)?;
    let evc = EvcDiagnostics {
        applied: omega.estimate.evc_applied,
        clipped_eigenvalues: omega.estimate.clipped_eigenvalues,
        pre_evc_min_eigenvalue: omega.estimate.pre_evc_min_eigenvalue,
        lag_clamped: omega.estimate.lag_clamped,
    };
    let cov = sandwich(&fit, omega.estimate, args.dof)?;
    for (j, flagged) in cov.negative_variance_flags.iter().enumerate() {
        if *flagged {
            eprintln!(
                "warning: negative variance estimate for `{}`; its standard error is \
                 reported as zero (consider the eigenvalue correction)",
                fit.column_names()[j]
            );
        }
    }
    let inference = inference_table(&fit, &cov, args.level)?;

    let report = FitReport {
        estimator: format!("{}", cov.omega.kind),
        fixed_effects: fit.used_fixed_effects(),
        n_units: fit.n_units(),
        n_periods: fit.n_periods(),
        columns: fit.column_names().to_vec(),
        beta: fit.beta_hat().iter().copied().collect(),
        std_errors: cov.std_errors.clone(),
        m_hat: omega.m_hat,
        bandwidth_rule: omega.rule,
        rho_hats: omega.rho_hats,
        evc,
        negative_variance_flags: cov.negative_variance_flags.clone(),
        dof_adjustment: cov.dof_adjustment,
        level: args.level,
        inference,
    };
    print_fit_report(&report, args.format)
}
