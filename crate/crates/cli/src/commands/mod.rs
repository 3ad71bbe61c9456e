//! Subcommand implementations and shared argument plumbing.

pub mod bandwidth;
pub mod fit;
pub mod simulate;

use std::fs::File;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use twoway_core::{load_long_csv, to_balanced, BalancedPanel, CsvSchema, Result};

/// CSV location and column mapping, shared by `fit` and `bandwidth`.
#[derive(Args)]
pub struct SchemaArgs {
    /// Path to a long-format CSV with one row per (unit, period).
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding the unit identifier.
    #[arg(long, default_value = "unit")]
    pub unit_col: String,
    /// Column holding the period identifier.
    #[arg(long, default_value = "time")]
    pub time_col: String,
    /// Outcome column.
    #[arg(long, default_value = "y")]
    pub y_col: String,
    /// Regressor columns, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x_cols: Vec<String>,
}

pub fn load_panel(args: &SchemaArgs) -> Result<BalancedPanel> {
    let schema = CsvSchema {
        unit_col: args.unit_col.clone(),
        time_col: args.time_col.clone(),
        y_col: args.y_col.clone(),
        x_cols: args.x_cols.clone(),
    };
    let file = File::open(&args.input)?;
    let long = load_long_csv(file, &schema)?;
    to_balanced(&long)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    /// Unclustered heteroskedasticity-robust.
    Ehw,
    /// Clustered by unit.
    CrI,
    /// Clustered by time.
    CrT,
    /// Two-way clustered.
    Cgm,
    /// Two-way clustered plus unweighted lag terms.
    Thompson,
    /// Two-way clustered plus kernel-weighted lag terms with an optional
    /// eigenvalue correction.
    Chs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandwidthArg {
    Andrews,
    StockWatson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Triangular,
    Uniform,
}

impl WeightArg {
    pub fn to_core(self) -> twoway_core::WeightKind {
        match self {
            WeightArg::Triangular => twoway_core::WeightKind::Triangular,
            WeightArg::Uniform => twoway_core::WeightKind::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Table,
    Csv,
}
