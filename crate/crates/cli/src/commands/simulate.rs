//! `twoway simulate`: deterministic coverage and power experiments over the
//! built-in simulation designs.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use twoway_core::montecarlo::{
    linspace, run_coverage, run_power, BandwidthSpec, Design, DgpConfig, EstimatorSpec,
};
use twoway_core::{Error, Result};

use crate::commands::{BandwidthArg, EstimatorArg, WeightArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Confidence-interval coverage of the true slope.
    Coverage,
    /// Rejection frequency over a grid of hypothesized slopes.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DesignArg {
    /// Additive unit/time components in both regressor and error.
    Baseline,
    /// Interactive factors; estimated by the within estimator.
    FixedEffect,
}

impl DesignArg {
    fn to_core(self) -> Design {
        match self {
            DesignArg::Baseline => Design::Baseline,
            DesignArg::FixedEffect => Design::FixedEffect,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FileFormatArg {
    Json,
    Csv,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Coverage)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = DesignArg::Baseline)]
    design: DesignArg,
    /// Number of units.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Number of periods.
    #[arg(long, default_value_t = 100)]
    t: usize,
    /// AR(1) coefficient of the common time effects.
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Component weights, comma separated (3 for baseline, 8 for
    /// fixed-effect). Defaults to the i.i.d. weights when rho is 0 and the
    /// dependence weights otherwise.
    #[arg(long, value_delimiter = ',')]
    dgp_weights: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    beta0: f64,
    /// True slope; coverage targets this value.
    #[arg(long, default_value_t = 1.0)]
    beta1: f64,
    /// Replication count (always explicit, to keep runtimes intentional).
    #[arg(long)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; defaults to $TWOWAY_WORKERS, then 1.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Estimators to evaluate, comma separated. Defaults to all of them.
    #[arg(long, value_delimiter = ',', value_enum)]
    estimators: Option<Vec<EstimatorArg>>,
    /// Lag count for the thompson estimator.
    #[arg(long, default_value_t = 2)]
    thompson_lags: usize,
    /// Lag-truncation rule for the chs estimator.
    #[arg(long, value_enum, default_value_t = BandwidthArg::Andrews)]
    bandwidth: BandwidthArg,
    /// Fixed lag truncation for the chs estimator; overrides --bandwidth.
    #[arg(long)]
    m: Option<f64>,
    /// Kernel weights for the chs lag terms.
    #[arg(long, value_enum, default_value_t = WeightArg::Triangular)]
    weights: WeightArg,
    /// Skip the eigenvalue correction (chs only).
    #[arg(long)]
    no_evc: bool,
    /// Power grid lower endpoint.
    #[arg(long, default_value_t = 0.5)]
    b_min: f64,
    /// Power grid upper endpoint.
    #[arg(long, default_value_t = 1.5)]
    b_max: f64,
    /// Number of power grid points.
    #[arg(long, default_value_t = 21)]
    b_points: usize,
    /// Preset: a coverage-table row (I..XII) of the baseline design.
    /// Overrides --design/--n/--t/--rho/--dgp-weights.
    #[arg(long, conflicts_with_all = ["table3_row", "dgp_weights"])]
    table1_row: Option<String>,
    /// Preset: a coverage-table row (I..XII) of the fixed-effect design.
    /// Overrides --design/--n/--t/--rho/--dgp-weights.
    #[arg(long, conflicts_with = "dgp_weights")]
    table3_row: Option<String>,
    /// Write the full report to this path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Format of the --output file.
    #[arg(long, value_enum, default_value_t = FileFormatArg::Json)]
    output_format: FileFormatArg,
}

/// Decode a table-row label: rows cycle through (N,T) in {(50,100),
/// (75,75), (100,50)} and rho in {0 (i.i.d.), 0.25, 0.50, 0.75}.
fn preset(label: &str) -> Result<(usize, usize, f64)> {
    const ROMAN: [&str; 12] = [
        "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII",
    ];
    let upper = label.to_ascii_uppercase();
    let idx = ROMAN
        .iter()
        .position(|r| *r == upper)
        .ok_or_else(|| Error::InvalidParameter {
            detail: format!("unknown table row `{label}`; expected I..XII"),
        })?;
    let (n, t) = [(50, 100), (75, 75), (100, 50)][idx % 3];
    let rho = [0.0, 0.25, 0.50, 0.75][idx / 3];
    Ok((n, t, rho))
}

fn config(args: &SimulateArgs) -> Result<DgpConfig> {
    let (design, n, t, rho) = if let Some(label) = &args.table1_row {
        let (n, t, rho) = preset(label)?;
        (Design::Baseline, n, t, rho)
    } else if let Some(label) = &args.table3_row {
        let (n, t, rho) = preset(label)?;
        (Design::FixedEffect, n, t, rho)
    } else {
        (args.design.to_core(), args.n, args.t, args.rho)
    };
    let weights = match &args.dgp_weights {
        Some(w) => w.clone(),
        None if rho == 0.0 => DgpConfig::iid_weights(design),
        None => DgpConfig::dependence_weights(design),
    };
    Ok(DgpConfig {
        design,
        n_units: n,
        n_periods: t,
        rho,
        weights,
        beta0: args.beta0,
        beta1: args.beta1,
        seed: args.seed,
    })
}

fn estimator_specs(args: &SimulateArgs) -> Vec<EstimatorSpec> {
    let chosen = args.estimators.clone().unwrap_or_else(|| {
        vec![
            EstimatorArg::Ehw,
            EstimatorArg::CrI,
            EstimatorArg::CrT,
            EstimatorArg::Cgm,
            EstimatorArg::Thompson,
            EstimatorArg::Chs,
        ]
    });
    chosen
        .into_iter()
        .map(|e| match e {
            EstimatorArg::Ehw => EstimatorSpec::Ehw,
            EstimatorArg::CrI => EstimatorSpec::CrUnit,
            EstimatorArg::CrT => EstimatorSpec::CrTime,
            EstimatorArg::Cgm => EstimatorSpec::Cgm,
            EstimatorArg::Thompson => EstimatorSpec::Thompson {
                lags: args.thompson_lags,
            },
            EstimatorArg::Chs => EstimatorSpec::Chs {
                bandwidth: match args.m {
                    Some(m) => BandwidthSpec::Fixed(m),
                    None => match args.bandwidth {
                        BandwidthArg::Andrews => BandwidthSpec::Andrews,
                        BandwidthArg::StockWatson => BandwidthSpec::StockWatson,
                    },
                },
                weight: args.weights.to_core(),
                evc: !args.no_evc,
            },
        })
        .collect()
}

fn workers(args: &SimulateArgs) -> usize {
    args.workers
        .or_else(|| {
            std::env::var("TWOWAY_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1)
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let cfg = config(args)?;
    cfg.validate()?;
    let specs = estimator_specs(args);
    let workers = workers(args);

    let (summary, file_body, elapsed) = match args.mode {
        ModeArg::Coverage => {
            let report = run_coverage(&cfg, args.reps, &specs, args.level, workers)?;
            let body = match args.output_format {
                FileFormatArg::Json => {
                    serde_json::to_string_pretty(&report).expect("report serializes")
                }
                FileFormatArg::Csv => report.to_csv(),
            };
            (report.to_text_table(), body, report.elapsed)
        }
        ModeArg::Power => {
            let grid = linspace(args.b_min, args.b_max, args.b_points);
            let report = run_power(&cfg, args.reps, &specs, args.level, &grid, workers)?;
            let body = match args.output_format {
                FileFormatArg::Json => {
                    serde_json::to_string_pretty(&report).expect("report serializes")
                }
                FileFormatArg::Csv => report.to_csv(),
            };
            (report.to_text_table(), body, report.elapsed)
        }
    };

    print!("{summary}");
    if let Some(path) = &args.output {
        std::fs::write(path, file_body)?;
    }
    eprintln!(
        "simulate: {} replications in {:.2}s with {} worker(s)",
        args.reps,
        elapsed.as_secs_f64(),
        workers
    );
    Ok(())
}
