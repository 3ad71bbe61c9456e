//! Least-squares and two-way within estimation, sandwich covariance
//! assembly, inference tables, Wald tests, and the serial-correlation
//! diagnostic for common time effects.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::panel::{within_transform, BalancedPanel};
use crate::variance::OmegaEstimate;

/// Relative condition threshold beyond which a design counts as
/// rank deficient.
const CONDITION_LIMIT: f64 = 1e12;

/// A fitted linear model on a balanced panel.
///
/// Stores the design actually regressed (including any intercept column or
/// within transformation), so score construction downstream works the same
/// for plain OLS and the fixed-effects estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    beta_hat: DVector<f64>,
    /// Residuals, row-major `i * T + t`.
    residuals: Vec<f64>,
    /// `(NT)^-1 sum X X'` over the regressed design.
    q_hat: DMatrix<f64>,
    used_fixed_effects: bool,
    n_units: usize,
    n_periods: usize,
    column_names: Vec<String>,
    /// Regressed design, row-major `(i * T + t) * k + j`.
    design: Vec<f64>,
}

impl RegressionFit {
    pub fn beta_hat(&self) -> &DVector<f64> {
        &self.beta_hat
    }

    pub fn k(&self) -> usize {
        self.column_names.len()
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn used_fixed_effects(&self) -> bool {
        self.used_fixed_effects
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn q_hat(&self) -> &DMatrix<f64> {
        &self.q_hat
    }

    #[inline]
    pub fn residual(&self, i: usize, t: usize) -> f64 {
        self.residuals[i * self.n_periods + t]
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    #[inline]
    pub fn design(&self, i: usize, t: usize, j: usize) -> f64 {
        self.design[(i * self.n_periods + t) * self.column_names.len() + j]
    }
}

/// Modified Gram-Schmidt rank screen. Returns the first column whose
/// residual norm collapses relative to its own scale, if any.
fn detect_collinear_column(z: &DMatrix<f64>) -> Option<usize> {
    let k = z.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let col = z.column(j).into_owned();
        let scale = col.norm();
        if scale == 0.0 {
            return Some(j);
        }
        let mut v = col;
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        let ratio = v.norm() / scale;
        if ratio < 1.0 / CONDITION_LIMIT {
            return Some(j);
        }
        basis.push(v.normalize());
    }
    None
}

fn solve_least_squares(
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    n_units: usize,
    n_periods: usize,
    column_names: Vec<String>,
    used_fixed_effects: bool,
) -> Result<RegressionFit> {
    let nt = n_units * n_periods;
    let k = z.ncols();
    debug_assert_eq!(z.nrows(), nt);

    if let Some(column) = detect_collinear_column(z) {
        return Err(Error::Collinear { column });
    }

    let svd = z.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > CONDITION_LIMIT {
        // the rank screen passed, so point at the worst-conditioned column
        return Err(Error::Collinear { column: k - 1 });
    }
    let beta_hat: DVector<f64> = svd
        .solve(y, 0.0)
        .map_err(|e| Error::InvalidParameter { detail: e.into() })?
        .column(0)
        .into_owned();

    let fitted = z * &beta_hat;
    let residuals: Vec<f64> = (0..nt).map(|r| y[r] - fitted[r]).collect();
    let q_hat = (z.transpose() * z) / nt as f64;

    // nalgebra stores column-major; the fit keeps observation-major order
    let mut design = vec![0.0; nt * k];
    for r in 0..nt {
        for j in 0..k {
            design[r * k + j] = z[(r, j)];
        }
    }

    Ok(RegressionFit {
        beta_hat,
        residuals,
        q_hat,
        used_fixed_effects,
        n_units,
        n_periods,
        column_names,
        design,
    })
}

/// Build the (row-major by observation) design matrix from a panel.
fn design_matrix(panel: &BalancedPanel, add_intercept: bool) -> (DMatrix<f64>, Vec<String>) {
    let (n, t, kx) = (panel.n_units(), panel.n_periods(), panel.k());
    let k = kx + usize::from(add_intercept);
    let mut z = DMatrix::zeros(n * t, k);
    let mut names = Vec::with_capacity(k);
    if add_intercept {
        names.push("const".to_string());
    }
    names.extend(panel.columns().iter().cloned());
    for i in 0..n {
        for tt in 0..t {
            let row = i * t + tt;
            if add_intercept {
                z[(row, 0)] = 1.0;
            }
            for j in 0..kx {
                z[(row, j + usize::from(add_intercept))] = panel.x(i, tt, j);
            }
        }
    }
    (z, names)
}

fn y_vector(panel: &BalancedPanel) -> DVector<f64> {
    DVector::from_column_slice(panel.y_slice())
}

/// Least squares of y on the regressors, optionally with an intercept
/// (prepended as column 0, named `const`).
pub fn ols_fit(panel: &BalancedPanel, add_intercept: bool) -> Result<RegressionFit> {
    let (z, names) = design_matrix(panel, add_intercept);
    solve_least_squares(
        &z,
        &y_vector(panel),
        panel.n_units(),
        panel.n_periods(),
        names,
        false,
    )
}

/// Two-way within estimator: OLS on the double-demeaned outcome and
/// regressors. The intercept and any additive unit/time effects are
/// absorbed, so no intercept is added. A regressor that the transform
/// annihilates is reported as collinear.
pub fn fe_fit(panel: &BalancedPanel) -> Result<RegressionFit> {
    let transformed = within_transform(panel)?;
    let tp = transformed.as_panel();
    let (z, names) = design_matrix(tp, false);

    // columns of the form a_i + b_t vanish under the transform
    for j in 0..panel.k() {
        let original: f64 = (0..panel.n_units())
            .flat_map(|i| (0..panel.n_periods()).map(move |t| (i, t)))
            .map(|(i, t)| panel.x(i, t, j).powi(2))
            .sum();
        let transformed_norm = z.column(j).norm_squared();
        if transformed_norm <= 1e-20 * original.max(f64::MIN_POSITIVE) {
            return Err(Error::Collinear { column: j });
        }
    }

    solve_least_squares(
        &z,
        &y_vector(tp),
        tp.n_units(),
        tp.n_periods(),
        names,
        true,
    )
}

/// Sandwich covariance with standard errors and negative-variance flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceResult {
    #[serde(with = "crate::serde_matrix")]
    pub v_hat: DMatrix<f64>,
    pub omega: OmegaEstimate,
    pub std_errors: Vec<f64>,
    pub negative_variance_flags: Vec<bool>,
    pub dof_adjustment: f64,
}

/// Assemble `V = dof * Q^-1 Omega Q^-1`. Q is inverted once via its
/// Cholesky factor. A negative diagonal in V (possible for uncorrected
/// estimators) yields a zero standard error and a flag instead of an error.
pub fn sandwich(
    fit: &RegressionFit,
    omega: OmegaEstimate,
    dof_adjustment: f64,
) -> Result<CovarianceResult> {
    let k = fit.k();
    if omega.k() != k {
        return Err(Error::DimensionMismatch {
            detail: format!("omega is {}x{} but the fit has k={k}", omega.k(), omega.k()),
        });
    }
    if !(dof_adjustment > 0.0) {
        return Err(Error::InvalidParameter {
            detail: format!("dof adjustment must be positive, got {dof_adjustment}"),
        });
    }
    let chol = fit
        .q_hat
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter {
            detail: "Q is not positive definite".into(),
        })?;
    let q_inv = chol.inverse();
    let v = &q_inv * &omega.matrix * &q_inv * dof_adjustment;
    let v_hat = (&v + v.transpose()) * 0.5;

    let mut std_errors = Vec::with_capacity(k);
    let mut flags = Vec::with_capacity(k);
    for j in 0..k {
        let var = v_hat[(j, j)];
        flags.push(var < 0.0);
        std_errors.push(var.max(0.0).sqrt());
    }
    Ok(CovarianceResult {
        v_hat,
        omega,
        std_errors,
        negative_variance_flags: flags,
        dof_adjustment,
    })
}

/// One coefficient's inference summary. `t_stat` and `p_value` are absent
/// when the standard error is zero (flagged negative variance or an exact
/// fit); the interval then degenerates to the point estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub level: f64,
}

/// Asymptotic normal inference: `t = beta_j / se_j`, two-sided p-values,
/// and `beta_j +- z * se_j` intervals.
pub fn inference_table(
    fit: &RegressionFit,
    cov: &CovarianceResult,
    level: f64,
) -> Result<Vec<InferenceRow>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter {
            detail: format!("confidence level must be in (0,1), got {level}"),
        });
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let z = normal.inverse_cdf(0.5 + level / 2.0);
    let mut rows = Vec::with_capacity(fit.k());
    for j in 0..fit.k() {
        let estimate = fit.beta_hat[j];
        let se = cov.std_errors[j];
        let (t_stat, p_value, lo, hi) = if se > 0.0 {
            let t = estimate / se;
            let p = 2.0 * (1.0 - normal.cdf(t.abs()));
            (Some(t), Some(p), estimate - z * se, estimate + z * se)
        } else {
            (None, None, estimate, estimate)
        };
        rows.push(InferenceRow {
            name: fit.column_names[j].clone(),
            estimate,
            std_error: se,
            t_stat,
            p_value,
            ci_lower: lo,
            ci_upper: hi,
            level,
        });
    }
    Ok(rows)
}

/// Result of a Wald test of `R'beta = r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Wald statistic `(R'b - r)' (R'VR)^-1 (R'b - r)` with a chi-square
/// reference distribution on `m` degrees of freedom.
pub fn wald_test(
    fit: &RegressionFit,
    cov: &CovarianceResult,
    restriction: &DMatrix<f64>,
    target: &DVector<f64>,
) -> Result<WaldTest> {
    let k = fit.k();
    let m = restriction.ncols();
    if restriction.nrows() != k || target.len() != m || m == 0 || m > k {
        return Err(Error::DimensionMismatch {
            detail: format!(
                "restriction must be {k}x m (1 <= m <= {k}) with a matching target, got {}x{} and len {}",
                restriction.nrows(),
                m,
                target.len()
            ),
        });
    }
    let d = restriction.transpose() * &fit.beta_hat - target;
    let a = restriction.transpose() * &cov.v_hat * restriction;
    let chol = a.cholesky().ok_or(Error::SingularRestriction)?;
    let solved = chol.solve(&d);
    let statistic = d.dot(&solved);
    let chi = ChiSquared::new(m as f64).expect("positive df");
    let p_value = 1.0 - chi.cdf(statistic);
    Ok(WaldTest {
        statistic,
        df: m,
        p_value,
    })
}

/// Which panel column a diagnostic runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRef {
    Outcome,
    Regressor(usize),
}

/// Estimated common time effects and their first-order autocorrelation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeEffectDiagnostics {
    /// Cross-sectional means of the unit-demeaned column, one per period
    /// (the time effects up to a location shift).
    pub gamma_hat: Vec<f64>,
    /// No-intercept AR(1) slope of the `gamma_hat` series.
    pub rho_hat: f64,
}

/// Extract time effects from a column by unit-demeaning and averaging over
/// the cross section, then fit a first-order autoregression to the series.
pub fn time_effect_diagnostics(
    panel: &BalancedPanel,
    column: ColumnRef,
) -> Result<TimeEffectDiagnostics> {
    let (n, t) = (panel.n_units(), panel.n_periods());
    if n < 2 {
        return Err(Error::DegeneratePanel {
            dimension: "units",
            required: 2,
            found: n,
        });
    }
    if t < 3 {
        return Err(Error::DegeneratePanel {
            dimension: "periods",
            required: 3,
            found: t,
        });
    }
    let value = |i: usize, tt: usize| match column {
        ColumnRef::Outcome => panel.y(i, tt),
        ColumnRef::Regressor(j) => panel.x(i, tt, j),
    };
    if let ColumnRef::Regressor(j) = column {
        if j >= panel.k() {
            return Err(Error::DimensionMismatch {
                detail: format!("regressor index {j} out of range for k={}", panel.k()),
            });
        }
    }

    let mut gamma_hat = vec![0.0; t];
    for i in 0..n {
        let unit_mean: f64 = (0..t).map(|tt| value(i, tt)).sum::<f64>() / t as f64;
        for (tt, g) in gamma_hat.iter_mut().enumerate() {
            *g += value(i, tt) - unit_mean;
        }
    }
    for g in gamma_hat.iter_mut() {
        *g /= n as f64;
    }

    let mut num = 0.0;
    let mut den = 0.0;
    for tt in 1..t {
        num += gamma_hat[tt - 1] * gamma_hat[tt];
        den += gamma_hat[tt - 1] * gamma_hat[tt - 1];
    }
    let rho_hat = if den == 0.0 { 0.0 } else { num / den };
    Ok(TimeEffectDiagnostics { gamma_hat, rho_hat })
}
