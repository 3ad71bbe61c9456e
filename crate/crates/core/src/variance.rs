//! Score construction, cluster sums, and the family of score-covariance
//! estimators: EHW, one-way cluster (unit or time), CGM two-way, Thompson
//! lagged two-way, and the kernel-weighted serial-correlation-robust
//! estimator with eigenvalue correction.
//!
//! All estimators are quadratic forms in the per-cell scores
//! `s_it = x_it * u_hat_it` and carry the `(NT)^-2` normalization; the
//! sandwich applies no further scaling.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::RegressionFit;

/// Per-cell score vectors, `s[(i, t)][j] = x_itj * u_hat_it`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    n_units: usize,
    n_periods: usize,
    k: usize,
    /// Row-major: index `(i * T + t) * k + j`.
    s: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_parts(n_units: usize, n_periods: usize, k: usize, s: Vec<f64>) -> Result<Self> {
        if s.len() != n_units * n_periods * k {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "score vector has length {}, expected {}",
                    s.len(),
                    n_units * n_periods * k
                ),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                detail: "score matrix contains non-finite entries".into(),
            });
        }
        Ok(Self {
            n_units,
            n_periods,
            k,
            s,
        })
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn at(&self, i: usize, t: usize, j: usize) -> f64 {
        self.s[(i * self.n_periods + t) * self.k + j]
    }

    /// Score vector for one cell.
    pub fn cell(&self, i: usize, t: usize) -> DVector<f64> {
        let base = (i * self.n_periods + t) * self.k;
        DVector::from_column_slice(&self.s[base..base + self.k])
    }
}

/// Build the score matrix from a fit: the elementwise product of the design
/// actually regressed and its residuals.
pub fn scores(fit: &RegressionFit) -> ScoreMatrix {
    let (n, t, k) = (fit.n_units(), fit.n_periods(), fit.k());
    let mut s = vec![0.0; n * t * k];
    for i in 0..n {
        for tt in 0..t {
            let u = fit.residual(i, tt);
            for j in 0..k {
                s[(i * t + tt) * k + j] = fit.design(i, tt, j) * u;
            }
        }
    }
    ScoreMatrix {
        n_units: n,
        n_periods: t,
        k,
        s,
    }
}

/// Per-unit sums `R_i = sum_t s_it` and per-period sums `S_t = sum_i s_it`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSums {
    /// `r[i]` is the k-vector R_i.
    pub unit_sums: Vec<DVector<f64>>,
    /// `s[t]` is the k-vector S_t.
    pub time_sums: Vec<DVector<f64>>,
}

pub fn cluster_sums(sc: &ScoreMatrix) -> ClusterSums {
    let (n, t, k) = (sc.n_units, sc.n_periods, sc.k);
    let mut unit_sums = vec![DVector::zeros(k); n];
    let mut time_sums = vec![DVector::zeros(k); t];
    for i in 0..n {
        for tt in 0..t {
            for j in 0..k {
                let v = sc.at(i, tt, j);
                unit_sums[i][j] += v;
                time_sums[tt][j] += v;
            }
        }
    }
    ClusterSums {
        unit_sums,
        time_sums,
    }
}

/// Lagged cross-sums at lag `m`:
/// `G_m = sum_{t=1}^{T-m} S_t S_{t+m}'` over time sums, and
/// `H_m = sum_{t=1}^{T-m} sum_i s_it s_{i,t+m}'` within units.
/// Both are generally asymmetric.
pub fn lag_cross_sums(
    sc: &ScoreMatrix,
    sums: &ClusterSums,
    m: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let t = sc.n_periods;
    if m == 0 || m > t - 1 {
        return Err(Error::LagOutOfRange { m, max: t - 1 });
    }
    let k = sc.k;
    let mut g = DMatrix::zeros(k, k);
    let mut h = DMatrix::zeros(k, k);
    for tt in 0..t - m {
        g += &sums.time_sums[tt] * sums.time_sums[tt + m].transpose();
        for i in 0..sc.n_units {
            h += sc.cell(i, tt) * sc.cell(i, tt + m).transpose();
        }
    }
    Ok((g, h))
}

/// Kernel choice for lag weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Newey-West weights `1 - m/(M+1)`.
    Triangular,
    /// Truncated weights, identically 1 inside the window.
    Uniform,
}

/// Weight for lag `m` under truncation `M` (need not be an integer).
pub fn kernel_weight(m: usize, big_m: f64, kind: WeightKind) -> Result<f64> {
    if m == 0 || (m as f64) > big_m.floor() {
        return Err(Error::OutOfWindow {
            m,
            window: big_m.floor() as usize,
        });
    }
    Ok(match kind {
        WeightKind::Triangular => 1.0 - m as f64 / (big_m + 1.0),
        WeightKind::Uniform => 1.0,
    })
}

/// Which score-covariance estimator produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaKind {
    Ehw,
    CrUnit,
    CrTime,
    Cgm,
    Thompson,
    Chs,
}

impl std::fmt::Display for OmegaKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OmegaKind::Ehw => "ehw",
            OmegaKind::CrUnit => "cr_i",
            OmegaKind::CrTime => "cr_t",
            OmegaKind::Cgm => "cgm",
            OmegaKind::Thompson => "thompson",
            OmegaKind::Chs => "chs",
        };
        f.write_str(s)
    }
}

/// A symmetric k x k score-covariance estimate plus estimator metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    pub kind: OmegaKind,
    #[serde(with = "crate::serde_matrix")]
    pub matrix: DMatrix<f64>,
    /// Lag truncation actually used (CHS/Thompson only).
    pub lag_truncation: Option<f64>,
    pub weight_kind: Option<WeightKind>,
    pub evc_applied: bool,
    /// Number of negative eigenvalues zeroed by the correction.
    pub clipped_eigenvalues: usize,
    /// Smallest eigenvalue before the correction (set when EVC ran).
    pub pre_evc_min_eigenvalue: Option<f64>,
    /// True if the requested lag truncation exceeded T-1 and was clamped.
    pub lag_clamped: bool,
}

impl OmegaEstimate {
    fn bare(kind: OmegaKind, matrix: DMatrix<f64>) -> Self {
        Self {
            kind,
            matrix,
            lag_truncation: None,
            weight_kind: None,
            evc_applied: false,
            clipped_eigenvalues: 0,
            pre_evc_min_eigenvalue: None,
            lag_clamped: false,
        }
    }

    pub fn k(&self) -> usize {
        self.matrix.nrows()
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn nt_scale(sc: &ScoreMatrix) -> f64 {
    let nt = (sc.n_units * sc.n_periods) as f64;
    1.0 / (nt * nt)
}

/// Unclustered heteroskedasticity-robust estimator:
/// `(NT)^-2 sum_{it} s_it s_it'`.
pub fn omega_ehw(sc: &ScoreMatrix) -> OmegaEstimate {
    let k = sc.k;
    let mut m = DMatrix::zeros(k, k);
    for i in 0..sc.n_units {
        for tt in 0..sc.n_periods {
            let s = sc.cell(i, tt);
            m += &s * s.transpose();
        }
    }
    m *= nt_scale(sc);
    OmegaEstimate::bare(OmegaKind::Ehw, symmetrize(&m))
}

/// Clustering axis for the one-way estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterAxis {
    Unit,
    Time,
}

/// One-way cluster estimator: `(NT)^-2 sum_i R_i R_i'` (unit axis) or
/// `(NT)^-2 sum_t S_t S_t'` (time axis).
pub fn omega_cluster(sc: &ScoreMatrix, axis: ClusterAxis) -> OmegaEstimate {
    let sums = cluster_sums(sc);
    omega_cluster_with(sc, &sums, axis)
}

fn omega_cluster_with(sc: &ScoreMatrix, sums: &ClusterSums, axis: ClusterAxis) -> OmegaEstimate {
    let k = sc.k;
    let mut m = DMatrix::zeros(k, k);
    let (vectors, kind) = match axis {
        ClusterAxis::Unit => (&sums.unit_sums, OmegaKind::CrUnit),
        ClusterAxis::Time => (&sums.time_sums, OmegaKind::CrTime),
    };
    for v in vectors {
        m += v * v.transpose();
    }
    m *= nt_scale(sc);
    OmegaEstimate::bare(kind, symmetrize(&m))
}

fn cgm_matrix(sc: &ScoreMatrix, sums: &ClusterSums) -> DMatrix<f64> {
    let cr_i = omega_cluster_with(sc, sums, ClusterAxis::Unit).matrix;
    let cr_t = omega_cluster_with(sc, sums, ClusterAxis::Time).matrix;
    let ehw = omega_ehw(sc).matrix;
    cr_i + cr_t - ehw
}

/// Two-way cluster estimator: cluster-by-unit plus cluster-by-time minus the
/// double-count correction.
pub fn omega_cgm(sc: &ScoreMatrix) -> OmegaEstimate {
    let sums = cluster_sums(sc);
    OmegaEstimate::bare(OmegaKind::Cgm, cgm_matrix(sc, &sums))
}

/// Sum of `w(m) * (G_m + G_m' - H_m - H_m')` over lags `1..=window`,
/// scaled by `(NT)^-2`. Lags are summed in ascending order so results are
/// deterministic.
fn lag_term(
    sc: &ScoreMatrix,
    sums: &ClusterSums,
    window: usize,
    weight: impl Fn(usize) -> f64,
) -> Result<DMatrix<f64>> {
    let k = sc.k;
    let mut acc = DMatrix::zeros(k, k);
    for m in 1..=window {
        let (g, h) = lag_cross_sums(sc, sums, m)?;
        let term = &g + g.transpose() - &h - h.transpose();
        acc += term * weight(m);
    }
    Ok(acc * nt_scale(sc))
}

/// Two-way cluster estimator with unweighted lag terms up to `m_lags`.
pub fn omega_thompson(sc: &ScoreMatrix, m_lags: usize) -> Result<OmegaEstimate> {
    if m_lags > sc.n_periods - 1 {
        return Err(Error::LagOutOfRange {
            m: m_lags,
            max: sc.n_periods - 1,
        });
    }
    let sums = cluster_sums(sc);
    let mut matrix = cgm_matrix(sc, &sums);
    if m_lags > 0 {
        matrix += lag_term(sc, &sums, m_lags, |_| 1.0)?;
    }
    let mut est = OmegaEstimate::bare(OmegaKind::Thompson, matrix);
    est.lag_truncation = Some(m_lags as f64);
    est.weight_kind = Some(WeightKind::Uniform);
    Ok(est)
}

/// Serial-correlation-robust two-way estimator: CGM plus kernel-weighted lag
/// terms over `m = 1..=floor(M)`, optionally projected onto the PSD cone.
///
/// `M` need not be an integer. If `floor(M)` exceeds `T-1` the truncation is
/// clamped to `T-1` and flagged in the metadata; data-driven bandwidths can
/// exceed the sample in small panels.
pub fn omega_chs(
    sc: &ScoreMatrix,
    big_m: f64,
    kind: WeightKind,
    apply_evc: bool,
) -> Result<OmegaEstimate> {
    if !big_m.is_finite() || big_m < 0.0 {
        return Err(Error::InvalidParameter {
            detail: format!("lag truncation must be finite and nonnegative, got {big_m}"),
        });
    }
    let max_window = sc.n_periods - 1;
    let lag_clamped = big_m.floor() as usize > max_window;
    let effective_m = if lag_clamped { max_window as f64 } else { big_m };
    let window = effective_m.floor() as usize;

    let sums = cluster_sums(sc);
    let mut matrix = cgm_matrix(sc, &sums);
    if window > 0 {
        matrix += lag_term(sc, &sums, window, |m| {
            kernel_weight(m, effective_m, kind).expect("lag inside window")
        })?;
    }

    let mut est = OmegaEstimate::bare(OmegaKind::Chs, matrix);
    est.lag_truncation = Some(effective_m);
    est.weight_kind = Some(kind);
    est.lag_clamped = lag_clamped;
    if apply_evc {
        let outcome = evc(&est.matrix)?;
        est.matrix = outcome.corrected;
        est.evc_applied = true;
        est.clipped_eigenvalues = outcome.clipped;
        est.pre_evc_min_eigenvalue = Some(outcome.min_eig_before);
    }
    Ok(est)
}

/// Result of projecting a symmetric matrix onto the PSD cone.
#[derive(Debug, Clone)]
pub struct EvcOutcome {
    pub corrected: DMatrix<f64>,
    pub clipped: usize,
    pub min_eig_before: f64,
}

/// Eigenvalue correction: symmetrize, eigendecompose, zero the negative
/// eigenvalues, and recompose. This is the Frobenius-nearest PSD matrix.
pub fn evc(matrix: &DMatrix<f64>) -> Result<EvcOutcome> {
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            detail: "eigenvalue correction input contains non-finite entries".into(),
        });
    }
    let sym = symmetrize(matrix);
    let eig = sym.symmetric_eigen();
    let min_eig_before = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let clipped = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    let clamped = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&v| v.max(0.0)),
    );
    let corrected =
        &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
    Ok(EvcOutcome {
        corrected: symmetrize(&corrected),
        clipped,
        min_eig_before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Simple deterministic pseudo-random scores for tests.
    pub(crate) fn test_scores(n: usize, t: usize, k: usize, seed: u64) -> ScoreMatrix {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = || {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            let bits = state.wrapping_mul(0x2545F4914F6CDD1D);
            (bits >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let s: Vec<f64> = (0..n * t * k).map(|_| next()).collect();
        ScoreMatrix::from_parts(n, t, k, s).unwrap()
    }

    #[test]
    fn cluster_sums_identity() {
        let sc = test_scores(4, 5, 2, 3);
        let sums = cluster_sums(&sc);
        let total_r: DVector<f64> = sums.unit_sums.iter().sum();
        let total_s: DVector<f64> = sums.time_sums.iter().sum();
        assert_relative_eq!(total_r, total_s, max_relative = 1e-12);
    }

    #[test]
    fn cluster_sums_degenerate_axes() {
        let sc = test_scores(1, 4, 1, 7);
        let sums = cluster_sums(&sc);
        for tt in 0..4 {
            assert_eq!(sums.time_sums[tt][0], sc.at(0, tt, 0));
        }
        let sc = test_scores(3, 1, 1, 8);
        let sums = cluster_sums(&sc);
        for i in 0..3 {
            assert_eq!(sums.unit_sums[i][0], sc.at(i, 0, 0));
        }
    }

    #[test]
    fn lag_cross_sums_single_term_at_max_lag() {
        let sc = test_scores(3, 4, 2, 1);
        let sums = cluster_sums(&sc);
        let (g, h) = lag_cross_sums(&sc, &sums, 3).unwrap();
        let expected_g = &sums.time_sums[0] * sums.time_sums[3].transpose();
        assert_relative_eq!(g, expected_g, max_relative = 1e-12);
        let mut expected_h = DMatrix::zeros(2, 2);
        for i in 0..3 {
            expected_h += sc.cell(i, 0) * sc.cell(i, 3).transpose();
        }
        assert_relative_eq!(h, expected_h, max_relative = 1e-12);
    }

    #[test]
    fn lag_cross_sums_match_quadruple_loop_oracle() {
        let sc = test_scores(3, 6, 2, 5);
        let sums = cluster_sums(&sc);
        for m in 1..=5 {
            let (g, h) = lag_cross_sums(&sc, &sums, m).unwrap();
            // brute-force: G_m over all unit pairs, H_m over same-unit pairs
            let mut g_oracle = DMatrix::zeros(2, 2);
            let mut h_oracle = DMatrix::zeros(2, 2);
            for tt in 0..6 - m {
                for i in 0..3 {
                    for jj in 0..3 {
                        g_oracle += sc.cell(i, tt) * sc.cell(jj, tt + m).transpose();
                    }
                    h_oracle += sc.cell(i, tt) * sc.cell(i, tt + m).transpose();
                }
            }
            assert_relative_eq!(g, g_oracle, max_relative = 1e-12);
            assert_relative_eq!(h, h_oracle, max_relative = 1e-12);
        }
    }

    #[test]
    fn lag_out_of_range() {
        let sc = test_scores(2, 4, 1, 2);
        let sums = cluster_sums(&sc);
        assert!(matches!(
            lag_cross_sums(&sc, &sums, 4),
            Err(Error::LagOutOfRange { m: 4, max: 3 })
        ));
    }

    #[test]
    fn n_equals_one_makes_g_equal_h() {
        let sc = test_scores(1, 5, 2, 9);
        let sums = cluster_sums(&sc);
        for m in 1..=4 {
            let (g, h) = lag_cross_sums(&sc, &sums, m).unwrap();
            assert_relative_eq!(g, h, max_relative = 1e-12);
        }
    }

    #[test]
    fn kernel_weight_values() {
        assert_eq!(kernel_weight(1, 1.0, WeightKind::Triangular).unwrap(), 0.5);
        assert_eq!(kernel_weight(1, 5.0, WeightKind::Uniform).unwrap(), 1.0);
        assert_eq!(kernel_weight(3, 5.0, WeightKind::Uniform).unwrap(), 1.0);
        assert_relative_eq!(
            kernel_weight(2, 3.5, WeightKind::Triangular).unwrap(),
            1.0 - 2.0 / 4.5,
            max_relative = 1e-15
        );
        assert!(matches!(
            kernel_weight(4, 3.5, WeightKind::Triangular),
            Err(Error::OutOfWindow { m: 4, window: 3 })
        ));
    }

    #[test]
    fn ehw_single_cell() {
        let sc = ScoreMatrix::from_parts(1, 1, 1, vec![3.0]).unwrap();
        let est = omega_ehw(&sc);
        assert_eq!(est.matrix[(0, 0)], 9.0);
    }

    #[test]
    fn ehw_zero_scores() {
        let sc = ScoreMatrix::from_parts(2, 3, 2, vec![0.0; 12]).unwrap();
        let est = omega_ehw(&sc);
        assert!(est.matrix.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_way_collapses_to_ehw_on_degenerate_axis() {
        let sc = test_scores(5, 1, 2, 4);
        assert_relative_eq!(
            omega_cluster(&sc, ClusterAxis::Unit).matrix,
            omega_ehw(&sc).matrix,
            max_relative = 1e-12
        );
        let sc = test_scores(1, 5, 2, 4);
        assert_relative_eq!(
            omega_cluster(&sc, ClusterAxis::Time).matrix,
            omega_ehw(&sc).matrix,
            max_relative = 1e-12
        );
    }

    #[test]
    fn cgm_is_cri_plus_crt_minus_ehw() {
        let sc = test_scores(3, 4, 2, 6);
        let expected = omega_cluster(&sc, ClusterAxis::Unit).matrix
            + omega_cluster(&sc, ClusterAxis::Time).matrix
            - omega_ehw(&sc).matrix;
        assert_relative_eq!(omega_cgm(&sc).matrix, expected, max_relative = 1e-14);
    }

    #[test]
    fn cgm_single_cell() {
        let sc = ScoreMatrix::from_parts(1, 1, 1, vec![3.0]).unwrap();
        assert_eq!(omega_cgm(&sc).matrix[(0, 0)], 9.0);
    }

    #[test]
    fn thompson_zero_lags_is_cgm() {
        let sc = test_scores(3, 5, 2, 11);
        assert_relative_eq!(
            omega_thompson(&sc, 0).unwrap().matrix,
            omega_cgm(&sc).matrix,
            max_relative = 1e-14
        );
    }

    #[test]
    fn thompson_collapses_for_single_unit() {
        let sc = test_scores(1, 6, 2, 12);
        for m in 0..=3 {
            assert_relative_eq!(
                omega_thompson(&sc, m).unwrap().matrix,
                omega_cgm(&sc).matrix,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn chs_zero_window_is_cgm() {
        let sc = test_scores(3, 5, 2, 13);
        let est = omega_chs(&sc, 0.0, WeightKind::Triangular, false).unwrap();
        assert_relative_eq!(est.matrix, omega_cgm(&sc).matrix, max_relative = 1e-14);
        // any M < 1 keeps the window empty
        let est = omega_chs(&sc, 0.9, WeightKind::Triangular, false).unwrap();
        assert_relative_eq!(est.matrix, omega_cgm(&sc).matrix, max_relative = 1e-14);
    }

    #[test]
    fn chs_uniform_no_evc_is_thompson() {
        let sc = test_scores(3, 7, 2, 14);
        let chs = omega_chs(&sc, 2.0, WeightKind::Uniform, false).unwrap();
        let th = omega_thompson(&sc, 2).unwrap();
        assert_relative_eq!(chs.matrix, th.matrix, max_relative = 1e-14);
    }

    #[test]
    fn chs_scalar_hand_formula() {
        // N=2, T=4, k=1, M=1 triangular: CGM + 0.5 * 2 * (G1 - H1) / (NT)^2
        let sc = test_scores(2, 4, 1, 15);
        let sums = cluster_sums(&sc);
        let (g1, h1) = lag_cross_sums(&sc, &sums, 1).unwrap();
        let nt2 = 64.0;
        let expected = omega_cgm(&sc).matrix[(0, 0)] + 0.5 * 2.0 * (g1[(0, 0)] - h1[(0, 0)]) / nt2;
        let est = omega_chs(&sc, 1.0, WeightKind::Triangular, false).unwrap();
        assert_relative_eq!(est.matrix[(0, 0)], expected, max_relative = 1e-12);
    }

    #[test]
    fn chs_clamps_oversized_window() {
        let sc = test_scores(2, 4, 1, 16);
        let est = omega_chs(&sc, 10.0, WeightKind::Triangular, false).unwrap();
        assert!(est.lag_clamped);
        assert_eq!(est.lag_truncation, Some(3.0));
    }

    #[test]
    fn evc_leaves_psd_input_alone() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let out = evc(&m).unwrap();
        assert_relative_eq!(out.corrected, m, max_relative = 1e-12);
        assert_eq!(out.clipped, 0);
    }

    #[test]
    fn evc_clips_negative_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
        let out = evc(&m).unwrap();
        assert_relative_eq!(
            out.corrected,
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            epsilon = 1e-12
        );
        assert_eq!(out.clipped, 1);
        assert_relative_eq!(out.min_eig_before, -2.0, max_relative = 1e-12);
    }

    #[test]
    fn residual_scale_quadratic_equivariance() {
        let sc = test_scores(3, 4, 2, 17);
        let c = 3.0;
        let scaled =
            ScoreMatrix::from_parts(3, 4, 2, sc.s.iter().map(|v| v * c).collect()).unwrap();
        for (a, b) in [
            (omega_ehw(&sc).matrix, omega_ehw(&scaled).matrix),
            (omega_cgm(&sc).matrix, omega_cgm(&scaled).matrix),
            (
                omega_chs(&sc, 2.0, WeightKind::Triangular, true)
                    .unwrap()
                    .matrix,
                omega_chs(&scaled, 2.0, WeightKind::Triangular, true)
                    .unwrap()
                    .matrix,
            ),
        ] {
            assert_relative_eq!(a * c * c, b, max_relative = 1e-12);
        }
    }
}
