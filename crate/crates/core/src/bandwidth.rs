//! Data-driven lag truncation: AR(1) fits on the time sums of the scores,
//! the Andrews plug-in rule, and the Stock-Watson rule-of-thumb.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::variance::ClusterSums;

/// Default clamp on the AR(1) coefficients; the Andrews rule diverges as
/// rho approaches 1.
pub const DEFAULT_RHO_CLAMP: f64 = 0.97;

/// How a lag truncation was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRule {
    Andrews,
    StockWatson,
    Fixed,
}

/// A chosen lag truncation with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthChoice {
    /// Nonnegative, possibly non-integer truncation M.
    pub m_value: f64,
    pub rule: BandwidthRule,
    /// Per-regressor AR(1) coefficients (Andrews rule only).
    pub rho_hats: Option<Vec<f64>>,
    /// True when `m_value` was clamped into `[0, T-1]`.
    pub clamped: bool,
}

impl BandwidthChoice {
    pub fn fixed(m: f64) -> Self {
        Self {
            m_value: m,
            rule: BandwidthRule::Fixed,
            rho_hats: None,
            clamped: false,
        }
    }
}

/// Per-regressor AR(1) slopes of the score time sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Coefficients {
    pub rho_hats: Vec<f64>,
    /// True if any coefficient was clamped or replaced by the zero fallback.
    pub any_clamped: bool,
}

/// No-intercept AR(1) slope for each regressor's time-sum series:
/// `rho_j = sum_{t>=2} S_{j,t-1} S_{jt} / sum_{t>=2} S_{j,t-1}^2`,
/// clamped to `[-clamp, clamp]`. A zero denominator yields `rho_j = 0`.
pub fn ar1_coefficients_with_clamp(sums: &ClusterSums, clamp: f64) -> Result<Ar1Coefficients> {
    let t = sums.time_sums.len();
    if t < 3 {
        return Err(Error::DegeneratePanel {
            dimension: "periods",
            required: 3,
            found: t,
        });
    }
    let k = sums.time_sums[0].len();
    let mut rho_hats = Vec::with_capacity(k);
    let mut any_clamped = false;
    for j in 0..k {
        let mut num = 0.0;
        let mut den = 0.0;
        for tt in 1..t {
            let prev = sums.time_sums[tt - 1][j];
            num += prev * sums.time_sums[tt][j];
            den += prev * prev;
        }
        let rho = if den == 0.0 {
            any_clamped = true;
            0.0
        } else {
            let raw = num / den;
            if raw.abs() > clamp {
                any_clamped = true;
                clamp.copysign(raw)
            } else {
                raw
            }
        };
        rho_hats.push(rho);
    }
    Ok(Ar1Coefficients {
        rho_hats,
        any_clamped,
    })
}

pub fn ar1_coefficients(sums: &ClusterSums) -> Result<Ar1Coefficients> {
    ar1_coefficients_with_clamp(sums, DEFAULT_RHO_CLAMP)
}

/// Andrews plug-in truncation:
/// `M = 1.8171 * (sum_j rho_j^2/(1-rho_j)^4 / sum_j (1-rho_j^2)^2/(1-rho_j)^4)^(1/3) * T^(1/3)`,
/// clamped to `[0, T-1]`.
pub fn andrews_m(rho_hats: &[f64], t: usize) -> Result<BandwidthChoice> {
    if t < 1 {
        return Err(Error::InvalidParameter {
            detail: "T must be at least 1".into(),
        });
    }
    if rho_hats.is_empty() {
        return Err(Error::InvalidParameter {
            detail: "need at least one AR(1) coefficient".into(),
        });
    }
    if rho_hats.iter().any(|r| !r.is_finite() || r.abs() >= 1.0) {
        return Err(Error::InvalidParameter {
            detail: "AR(1) coefficients must be finite with |rho| < 1".into(),
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &rho in rho_hats {
        let d4 = (1.0 - rho).powi(4);
        num += rho * rho / d4;
        den += (1.0 - rho * rho).powi(2) / d4;
    }
    let raw = 1.8171 * (num / den).cbrt() * (t as f64).cbrt();
    let max = (t - 1) as f64;
    let m_value = raw.clamp(0.0, max);
    Ok(BandwidthChoice {
        m_value,
        rule: BandwidthRule::Andrews,
        rho_hats: Some(rho_hats.to_vec()),
        clamped: m_value != raw,
    })
}

/// The rule-of-thumb `M = 0.75 * T^(1/3)`.
pub fn stock_watson_m(t: usize) -> Result<BandwidthChoice> {
    if t < 1 {
        return Err(Error::InvalidParameter {
            detail: "T must be at least 1".into(),
        });
    }
    let raw = 0.75 * (t as f64).cbrt();
    let max = (t - 1) as f64;
    let m_value = raw.clamp(0.0, max);
    Ok(BandwidthChoice {
        m_value,
        rule: BandwidthRule::StockWatson,
        rho_hats: None,
        clamped: m_value != raw,
    })
}
