//! Coverage and power experiments over the simulation designs.
//!
//! Each replication derives its own child seed from the configuration seed,
//! so reports are bit-identical for any worker count: the per-replication
//! results are collected in replication order and reduced sequentially.

mod dgp;
mod rng;

pub use dgp::{ar1_path, simulate, simulate_baseline, simulate_fe, Design, DgpConfig};
pub use rng::SeedStream;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bandwidth::{andrews_m, ar1_coefficients, stock_watson_m, BandwidthChoice};
use crate::error::{Error, Result};
use crate::regression::{fe_fit, ols_fit, sandwich, RegressionFit};
use crate::variance::{
    cluster_sums, omega_cgm, omega_chs, omega_cluster, omega_ehw, omega_thompson, scores,
    ClusterAxis, OmegaEstimate, ScoreMatrix, WeightKind,
};

/// How the serial-correlation-robust estimator picks its lag truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthSpec {
    Andrews,
    StockWatson,
    Fixed(f64),
}

/// An estimator to evaluate inside an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorSpec {
    Ehw,
    CrUnit,
    CrTime,
    Cgm,
    Thompson { lags: usize },
    Chs { bandwidth: BandwidthSpec, weight: WeightKind, evc: bool },
}

impl EstimatorSpec {
    /// The recommended default: triangular weights, eigenvalue correction,
    /// Andrews bandwidth.
    pub fn chs_default() -> Self {
        EstimatorSpec::Chs {
            bandwidth: BandwidthSpec::Andrews,
            weight: WeightKind::Triangular,
            evc: true,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EstimatorSpec::Ehw => "ehw",
            EstimatorSpec::CrUnit => "cr_i",
            EstimatorSpec::CrTime => "cr_t",
            EstimatorSpec::Cgm => "cgm",
            EstimatorSpec::Thompson { .. } => "thompson",
            EstimatorSpec::Chs { .. } => "chs",
        }
    }

    /// Compute the score covariance for a fitted replication. Returns the
    /// estimate and the bandwidth actually used, when rule-based.
    pub fn omega(&self, sc: &ScoreMatrix) -> Result<(OmegaEstimate, Option<f64>)> {
        match *self {
            EstimatorSpec::Ehw => Ok((omega_ehw(sc), None)),
            EstimatorSpec::CrUnit => Ok((omega_cluster(sc, ClusterAxis::Unit), None)),
            EstimatorSpec::CrTime => Ok((omega_cluster(sc, ClusterAxis::Time), None)),
            EstimatorSpec::Cgm => Ok((omega_cgm(sc), None)),
            EstimatorSpec::Thompson { lags } => {
                let capped = lags.min(sc.n_periods() - 1);
                Ok((omega_thompson(sc, capped)?, Some(capped as f64)))
            }
            EstimatorSpec::Chs {
                bandwidth,
                weight,
                evc,
            } => {
                let choice: BandwidthChoice = match bandwidth {
                    BandwidthSpec::Andrews => {
                        let sums = cluster_sums(sc);
                        let rho = ar1_coefficients(&sums)?;
                        andrews_m(&rho.rho_hats, sc.n_periods())?
                    }
                    BandwidthSpec::StockWatson => stock_watson_m(sc.n_periods())?,
                    BandwidthSpec::Fixed(m) => BandwidthChoice::fixed(m),
                };
                let est = omega_chs(sc, choice.m_value, weight, evc)?;
                let used = est.lag_truncation;
                Ok((est, used))
            }
        }
    }
}

/// Per-replication slope estimate and, per estimator, the standard error.
#[derive(Debug, Clone)]
struct RepOutcome {
    beta1: f64,
    /// (standard error, negative-variance flag, bandwidth used)
    estimates: Vec<(f64, bool, Option<f64>)>,
}

fn fit_for_design(cfg: &DgpConfig, panel: &crate::panel::BalancedPanel) -> Result<RegressionFit> {
    match cfg.design {
        Design::Baseline => ols_fit(panel, true),
        Design::FixedEffect => fe_fit(panel),
    }
}

fn slope_index(cfg: &DgpConfig) -> usize {
    match cfg.design {
        Design::Baseline => 1, // after the intercept
        Design::FixedEffect => 0,
    }
}

fn replicate(cfg: &DgpConfig, estimators: &[EstimatorSpec], rep: u64) -> Result<RepOutcome> {
    let stream = SeedStream::new(cfg.seed).child(rep);
    let panel = simulate(cfg, &stream)?;
    let fit = fit_for_design(cfg, &panel)?;
    let sc = scores(&fit);
    let idx = slope_index(cfg);

    let mut estimates = Vec::with_capacity(estimators.len());
    for spec in estimators {
        let (omega, m_used) = spec.omega(&sc)?;
        let cov = sandwich(&fit, omega, 1.0)?;
        estimates.push((cov.std_errors[idx], cov.negative_variance_flags[idx], m_used));
    }
    Ok(RepOutcome {
        beta1: fit.beta_hat()[idx],
        estimates,
    })
}

fn run_replications(
    cfg: &DgpConfig,
    estimators: &[EstimatorSpec],
    replications: usize,
    workers: usize,
) -> Result<Vec<RepOutcome>> {
    cfg.validate()?;
    if replications == 0 {
        return Err(Error::InvalidParameter {
            detail: "need at least one replication".into(),
        });
    }
    if workers <= 1 {
        return (0..replications as u64)
            .map(|r| replicate(cfg, estimators, r))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter {
            detail: format!("cannot build worker pool: {e}"),
        })?;
    pool.install(|| {
        (0..replications as u64)
            .into_par_iter()
            .map(|r| replicate(cfg, estimators, r))
            .collect()
    })
}

fn normal_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter {
            detail: format!("confidence level must be in (0,1), got {level}"),
        });
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(0.5 + level / 2.0))
}

/// The interval `beta1 +- z * se` contains `target`. A zero standard error
/// (flagged or degenerate) never covers.
#[inline]
fn covers(beta1: f64, se: f64, z: f64, target: f64) -> bool {
    se > 0.0 && (beta1 - target).abs() <= z * se
}

/// Coverage results for one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorCoverage {
    pub label: String,
    pub coverage: f64,
    /// `sqrt(p (1-p) / replications)`.
    pub mc_std_error: f64,
    pub negative_variance_rate: f64,
    /// Mean bandwidth across replications, when the estimator is rule-based.
    pub mean_m_hat: Option<f64>,
}

/// A finished coverage experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: DgpConfig,
    pub replications: usize,
    pub level: f64,
    pub estimators: Vec<EstimatorCoverage>,
    /// Wall-clock time; excluded from serialized reports so that files are
    /// byte-identical across runs.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ExperimentReport {
    /// One line per estimator: label, coverage, MC standard error,
    /// negative-variance rate, mean bandwidth.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "estimator,coverage,mc_std_error,negative_variance_rate,mean_m_hat\n",
        );
        for e in &self.estimators {
            let m = e
                .mean_m_hat
                .map_or(String::new(), |v| format!("{v}"));
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.label, e.coverage, e.mc_std_error, e.negative_variance_rate, m
            ));
        }
        out
    }

    pub fn to_text_table(&self) -> String {
        let mut out = format!(
            "{:<10} {:>10} {:>12} {:>10} {:>10}\n",
            "estimator", "coverage", "mc_se", "neg_var", "mean_m"
        );
        for e in &self.estimators {
            out.push_str(&format!(
                "{:<10} {:>10.4} {:>12.4} {:>10.4} {:>10}\n",
                e.label,
                e.coverage,
                e.mc_std_error,
                e.negative_variance_rate,
                e.mean_m_hat
                    .map_or_else(|| "-".to_string(), |v| format!("{v:.3}")),
            ));
        }
        out
    }
}

/// Run a coverage experiment: simulate, fit, build each estimator's
/// confidence interval for the slope, record containment of the truth.
pub fn run_coverage(
    cfg: &DgpConfig,
    replications: usize,
    estimators: &[EstimatorSpec],
    level: f64,
    workers: usize,
) -> Result<ExperimentReport> {
    let z = normal_quantile(level)?;
    let start = Instant::now();
    let outcomes = run_replications(cfg, estimators, replications, workers)?;

    let mut estimates = Vec::with_capacity(estimators.len());
    for (e_idx, spec) in estimators.iter().enumerate() {
        let mut hits = 0usize;
        let mut flagged = 0usize;
        let mut m_sum = 0.0;
        let mut m_count = 0usize;
        for rep in &outcomes {
            let (se, flag, m) = rep.estimates[e_idx];
            if covers(rep.beta1, se, z, cfg.beta1) {
                hits += 1;
            }
            if flag {
                flagged += 1;
            }
            if let Some(m) = m {
                m_sum += m;
                m_count += 1;
            }
        }
        let p = hits as f64 / replications as f64;
        estimates.push(EstimatorCoverage {
            label: spec.label().to_string(),
            coverage: p,
            mc_std_error: (p * (1.0 - p) / replications as f64).sqrt(),
            negative_variance_rate: flagged as f64 / replications as f64,
            mean_m_hat: (m_count > 0).then(|| m_sum / m_count as f64),
        });
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        replications,
        level,
        estimators: estimates,
        elapsed: start.elapsed(),
    })
}

/// Power curve for one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub label: String,
    /// Rejection frequency of `H0: beta1 = b` at each grid point.
    pub rejection: Vec<f64>,
    pub negative_variance_rate: f64,
}

/// A finished power experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub config: DgpConfig,
    pub replications: usize,
    pub level: f64,
    pub b_grid: Vec<f64>,
    pub curves: Vec<PowerCurve>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl PowerReport {
    /// One row per grid point, one rejection column per estimator.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("b");
        for c in &self.curves {
            out.push(',');
            out.push_str(&c.label);
        }
        out.push('\n');
        for (g_idx, b) in self.b_grid.iter().enumerate() {
            out.push_str(&format!("{b}"));
            for c in &self.curves {
                out.push_str(&format!(",{}", c.rejection[g_idx]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text_table(&self) -> String {
        let mut out = format!("{:>8}", "b");
        for c in &self.curves {
            out.push_str(&format!(" {:>10}", c.label));
        }
        out.push('\n');
        for (g_idx, b) in self.b_grid.iter().enumerate() {
            out.push_str(&format!("{b:>8.3}"));
            for c in &self.curves {
                out.push_str(&format!(" {:>10.4}", c.rejection[g_idx]));
            }
            out.push('\n');
        }
        out
    }
}

/// Run a power experiment: rejection frequency of `H0: beta1 = b` over a
/// grid of alternatives, with the same per-replication seeds as
/// [`run_coverage`], so at `b = beta1` rejection equals one minus coverage
/// exactly.
pub fn run_power(
    cfg: &DgpConfig,
    replications: usize,
    estimators: &[EstimatorSpec],
    level: f64,
    b_grid: &[f64],
    workers: usize,
) -> Result<PowerReport> {
    if b_grid.is_empty() {
        return Err(Error::InvalidParameter {
            detail: "power grid must be non-empty".into(),
        });
    }
    let z = normal_quantile(level)?;
    let start = Instant::now();
    let outcomes = run_replications(cfg, estimators, replications, workers)?;

    let mut curves = Vec::with_capacity(estimators.len());
    for (e_idx, spec) in estimators.iter().enumerate() {
        let mut rejection = Vec::with_capacity(b_grid.len());
        for &b in b_grid {
            let rejections = outcomes
                .iter()
                .filter(|rep| {
                    let (se, _, _) = rep.estimates[e_idx];
                    !covers(rep.beta1, se, z, b)
                })
                .count();
            rejection.push(rejections as f64 / replications as f64);
        }
        let flagged = outcomes
            .iter()
            .filter(|rep| rep.estimates[e_idx].1)
            .count();
        curves.push(PowerCurve {
            label: spec.label().to_string(),
            rejection,
            negative_variance_rate: flagged as f64 / replications as f64,
        });
    }

    Ok(PowerReport {
        config: cfg.clone(),
        replications,
        level,
        b_grid: b_grid.to_vec(),
        curves,
        elapsed: start.elapsed(),
    })
}

/// Evenly spaced grid over `[lo, hi]` with `points` entries.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> DgpConfig {
        DgpConfig {
            design: Design::Baseline,
            n_units: 12,
            n_periods: 15,
            rho: 0.5,
            weights: DgpConfig::dependence_weights(Design::Baseline),
            beta0: 1.0,
            beta1: 1.0,
            seed: 7,
        }
    }

    #[test]
    fn coverage_deterministic_across_workers() {
        let cfg = small_cfg();
        let ests = [EstimatorSpec::Cgm, EstimatorSpec::chs_default()];
        let a = run_coverage(&cfg, 40, &ests, 0.95, 1).unwrap();
        let b = run_coverage(&cfg, 40, &ests, 0.95, 4).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn power_complements_coverage_at_truth() {
        let cfg = small_cfg();
        let ests = [EstimatorSpec::Ehw, EstimatorSpec::chs_default()];
        let cov = run_coverage(&cfg, 60, &ests, 0.95, 1).unwrap();
        let pow = run_power(&cfg, 60, &ests, 0.95, &[cfg.beta1], 1).unwrap();
        for (c, p) in cov.estimators.iter().zip(&pow.curves) {
            assert_eq!(p.rejection[0], 1.0 - c.coverage);
        }
    }

    #[test]
    fn infinite_interval_stub_covers_everything() {
        // harness sanity: an SE large enough to span everything -> coverage 1
        let cfg = small_cfg();
        let outcomes = run_replications(&cfg, &[EstimatorSpec::Cgm], 20, 1).unwrap();
        let z = normal_quantile(0.95).unwrap();
        let all = outcomes
            .iter()
            .all(|rep| covers(rep.beta1, f64::MAX / 4.0, z, cfg.beta1));
        assert!(all);
    }

    #[test]
    fn linspace_grid_endpoints() {
        let g = linspace(0.5, 1.5, 21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[20], 1.5);
        assert!((g[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_zero_reps_rejected() {
        let cfg = small_cfg();
        assert!(run_coverage(&cfg, 0, &[EstimatorSpec::Ehw], 0.95, 1).is_err());
    }
}
