//! Panel data model: long-format ingestion, balance validation, and the
//! two-way within transformation.
//!
//! Panels are stored dense and row-major (unit-major): cell `(i, t)` of an
//! `N x T` panel lives at index `i * T + t`. All types are immutable after
//! construction.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column schema for long-format CSV ingestion.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub unit_col: String,
    pub time_col: String,
    pub y_col: String,
    pub x_cols: Vec<String>,
}

/// One observation in long format.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRow {
    pub unit: String,
    pub time: String,
    pub y: f64,
    pub x: Vec<f64>,
}

/// Long-format panel: one row per (unit, time) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct LongPanel {
    rows: Vec<LongRow>,
    columns: Vec<String>,
}

impl LongPanel {
    /// Build from rows, validating regressor width, finiteness, and
    /// (unit, time) uniqueness.
    pub fn new(rows: Vec<LongRow>, columns: Vec<String>) -> Result<Self> {
        let k = columns.len();
        let mut seen: HashSet<(String, String)> = HashSet::with_capacity(rows.len());
        for (idx, row) in rows.iter().enumerate() {
            if row.x.len() != k {
                return Err(Error::DimensionMismatch {
                    detail: format!(
                        "row {idx} has {} regressors, schema has {k}",
                        row.x.len()
                    ),
                });
            }
            if !row.y.is_finite() || row.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    detail: format!("row {idx} (unit `{}`, time `{}`)", row.unit, row.time),
                });
            }
            if !seen.insert((row.unit.clone(), row.time.clone())) {
                return Err(Error::DuplicatePair {
                    unit: row.unit.clone(),
                    time: row.time.clone(),
                });
            }
        }
        Ok(Self { rows, columns })
    }

    pub fn rows(&self) -> &[LongRow] {
        &self.rows
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }
}

/// Parse a long-format CSV stream into a [`LongPanel`].
///
/// The header must contain every schema column; regressor order follows
/// `schema.x_cols`. Comma separator, `.` decimal point, optional quoting.
pub fn load_long_csv<R: Read>(source: R, schema: &CsvSchema) -> Result<LongPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
            })
    };
    let unit_idx = find(&schema.unit_col)?;
    let time_idx = find(&schema.time_col)?;
    let y_idx = find(&schema.y_col)?;
    let x_idx: Vec<usize> = schema
        .x_cols
        .iter()
        .map(|c| find(c))
        .collect::<Result<_>>()?;

    let parse_cell = |row: usize, col: &str, raw: &str| -> Result<f64> {
        let v: f64 = raw.parse().map_err(|_| Error::Parse {
            row,
            detail: format!("column `{col}`: cannot parse `{raw}` as a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                row,
                detail: format!("column `{col}`: non-finite value `{raw}`"),
            });
        }
        Ok(v)
    };

    let mut rows = Vec::new();
    for (rec_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row_num = rec_idx + 2; // 1-based, after the header line
        let get = |idx: usize| record.get(idx).unwrap_or("");
        let y = parse_cell(row_num, &schema.y_col, get(y_idx))?;
        let x = x_idx
            .iter()
            .zip(&schema.x_cols)
            .map(|(&idx, col)| parse_cell(row_num, col, get(idx)))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(LongRow {
            unit: get(unit_idx).to_string(),
            time: get(time_idx).to_string(),
            y,
            x,
        });
    }
    LongPanel::new(rows, schema.x_cols.clone())
}

/// Sort labels numerically when every label parses as a number, otherwise
/// lexicographically. Returns the sorted labels and whether the fallback
/// lexicographic order was used.
fn sort_labels(labels: &BTreeSet<String>) -> (Vec<String>, bool) {
    let parsed: Option<Vec<(f64, &String)>> = labels
        .iter()
        .map(|l| l.parse::<f64>().ok().map(|v| (v, l)))
        .collect();
    match parsed {
        Some(mut pairs) => {
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(b.1)));
            (pairs.into_iter().map(|(_, l)| l.clone()).collect(), false)
        }
        None => (labels.iter().cloned().collect(), true),
    }
}

/// Fully populated N x T panel with k regressor columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedPanel {
    n_units: usize,
    n_periods: usize,
    columns: Vec<String>,
    unit_labels: Vec<String>,
    time_labels: Vec<String>,
    /// Outcome, row-major: index `i * T + t`.
    y: Vec<f64>,
    /// Regressors, row-major: index `(i * T + t) * k + j`.
    x: Vec<f64>,
    /// True when time labels were ordered lexicographically because they do
    /// not all parse as numbers. Lag-based estimators depend on time order,
    /// so callers should surface this to the user.
    #[serde(default)]
    lexicographic_time_order: bool,
}

impl BalancedPanel {
    pub fn from_parts(
        columns: Vec<String>,
        unit_labels: Vec<String>,
        time_labels: Vec<String>,
        y: Vec<f64>,
        x: Vec<f64>,
    ) -> Result<Self> {
        let n = unit_labels.len();
        let t = time_labels.len();
        let k = columns.len();
        if n == 0 || t == 0 || k == 0 {
            return Err(Error::InvalidParameter {
                detail: "panel dimensions must be positive".into(),
            });
        }
        if y.len() != n * t || x.len() != n * t * k {
            return Err(Error::DimensionMismatch {
                detail: format!(
                    "expected y len {} and x len {}, got {} and {}",
                    n * t,
                    n * t * k,
                    y.len(),
                    x.len()
                ),
            });
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                detail: "panel contains non-finite values".into(),
            });
        }
        Ok(Self {
            n_units: n,
            n_periods: t,
            columns,
            unit_labels,
            time_labels,
            y,
            x,
            lexicographic_time_order: false,
        })
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn unit_labels(&self) -> &[String] {
        &self.unit_labels
    }

    pub fn time_labels(&self) -> &[String] {
        &self.time_labels
    }

    pub fn lexicographic_time_order(&self) -> bool {
        self.lexicographic_time_order
    }

    #[inline]
    pub fn y(&self, i: usize, t: usize) -> f64 {
        self.y[i * self.n_periods + t]
    }

    #[inline]
    pub fn x(&self, i: usize, t: usize, j: usize) -> f64 {
        self.x[(i * self.n_periods + t) * self.columns.len() + j]
    }

    pub fn y_slice(&self) -> &[f64] {
        &self.y
    }

    pub fn x_slice(&self) -> &[f64] {
        &self.x
    }

    /// Convert back to long format (inverse of [`to_balanced`]).
    pub fn flatten(&self) -> LongPanel {
        let k = self.k();
        let mut rows = Vec::with_capacity(self.n_units * self.n_periods);
        for i in 0..self.n_units {
            for t in 0..self.n_periods {
                rows.push(LongRow {
                    unit: self.unit_labels[i].clone(),
                    time: self.time_labels[t].clone(),
                    y: self.y(i, t),
                    x: (0..k).map(|j| self.x(i, t, j)).collect(),
                });
            }
        }
        LongPanel {
            rows,
            columns: self.columns.clone(),
        }
    }
}

/// Arrange a long panel onto the full unit x time grid.
///
/// Unit and time labels are sorted (numerically when possible). Any missing
/// (unit, time) combination is a hard error listing up to 10 missing cells.
pub fn to_balanced(panel: &LongPanel) -> Result<BalancedPanel> {
    let units: BTreeSet<String> = panel.rows.iter().map(|r| r.unit.clone()).collect();
    let times: BTreeSet<String> = panel.rows.iter().map(|r| r.time.clone()).collect();
    let (unit_labels, _) = sort_labels(&units);
    let (time_labels, lexicographic_time_order) = sort_labels(&times);

    let n = unit_labels.len();
    let t = time_labels.len();
    let k = panel.k();

    let unit_index: HashMap<&str, usize> = unit_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let time_index: HashMap<&str, usize> = time_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    let mut y = vec![f64::NAN; n * t];
    let mut x = vec![f64::NAN; n * t * k];
    let mut filled = vec![false; n * t];
    for row in &panel.rows {
        let i = unit_index[row.unit.as_str()];
        let s = time_index[row.time.as_str()];
        let cell = i * t + s;
        filled[cell] = true;
        y[cell] = row.y;
        x[cell * k..(cell + 1) * k].copy_from_slice(&row.x);
    }

    let missing: Vec<(String, String)> = (0..n * t)
        .filter(|&cell| !filled[cell])
        .map(|cell| (unit_labels[cell / t].clone(), time_labels[cell % t].clone()))
        .collect();
    if !missing.is_empty() {
        let count = missing.len();
        return Err(Error::Unbalanced {
            missing_count: count,
            examples: missing.into_iter().take(10).collect(),
        });
    }

    let mut out = BalancedPanel::from_parts(
        panel.columns.clone(),
        unit_labels,
        time_labels,
        y,
        x,
    )?;
    out.lexicographic_time_order = lexicographic_time_order;
    Ok(out)
}

/// A panel holding double-demeaned values. Same shape as the source panel;
/// every column has zero mean along both the unit and time dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPanel {
    panel: BalancedPanel,
}

impl TransformedPanel {
    pub fn as_panel(&self) -> &BalancedPanel {
        &self.panel
    }
}

fn double_demean(values: &[f64], n: usize, t: usize) -> Vec<f64> {
    let mut row_mean = vec![0.0; n]; // mean over t for each unit
    let mut col_mean = vec![0.0; t]; // mean over i for each period
    let mut grand = 0.0;
    for i in 0..n {
        for s in 0..t {
            let v = values[i * t + s];
            row_mean[i] += v;
            col_mean[s] += v;
            grand += v;
        }
    }
    for m in row_mean.iter_mut() {
        *m /= t as f64;
    }
    for m in col_mean.iter_mut() {
        *m /= n as f64;
    }
    grand /= (n * t) as f64;

    let mut out = Vec::with_capacity(n * t);
    for i in 0..n {
        for s in 0..t {
            out.push(values[i * t + s] - row_mean[i] - col_mean[s] + grand);
        }
    }
    out
}

/// Two-way within transformation: subtract unit means and time means, add
/// back the grand mean, for the outcome and every regressor column.
pub fn within_transform(panel: &BalancedPanel) -> Result<TransformedPanel> {
    let n = panel.n_units();
    let t = panel.n_periods();
    if n < 2 {
        return Err(Error::DegeneratePanel {
            dimension: "units",
            required: 2,
            found: n,
        });
    }
    if t < 2 {
        return Err(Error::DegeneratePanel {
            dimension: "periods",
            required: 2,
            found: t,
        });
    }
    let k = panel.k();

    let y = double_demean(panel.y_slice(), n, t);

    // Demean each regressor column separately.
    let mut x = vec![0.0; n * t * k];
    let mut col = vec![0.0; n * t];
    for j in 0..k {
        for cell in 0..n * t {
            col[cell] = panel.x_slice()[cell * k + j];
        }
        let demeaned = double_demean(&col, n, t);
        for cell in 0..n * t {
            x[cell * k + j] = demeaned[cell];
        }
    }

    let mut inner = BalancedPanel::from_parts(
        panel.columns().to_vec(),
        panel.unit_labels().to_vec(),
        panel.time_labels().to_vec(),
        y,
        x,
    )?;
    inner.lexicographic_time_order = panel.lexicographic_time_order();
    Ok(TransformedPanel { panel: inner })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema_xy() -> CsvSchema {
        CsvSchema {
            unit_col: "id".into(),
            time_col: "t".into(),
            y_col: "y".into(),
            x_cols: vec!["x".into()],
        }
    }

    fn panel_from_grid(n: usize, t: usize, y: Vec<f64>, x: Vec<f64>) -> BalancedPanel {
        BalancedPanel::from_parts(
            vec!["x".into()],
            (0..n).map(|i| format!("u{i}")).collect(),
            (0..t).map(|s| format!("{s}")).collect(),
            y,
            x,
        )
        .unwrap()
    }

    #[test]
    fn load_four_row_csv() {
        let csv = "id,t,y,x\nA,1,1.0,0.5\nA,2,2.0,1.5\nB,1,3.0,2.5\nB,2,4.0,3.5\n";
        let panel = load_long_csv(csv.as_bytes(), &schema_xy()).unwrap();
        assert_eq!(panel.rows().len(), 4);
        assert_eq!(panel.k(), 1);
    }

    #[test]
    fn missing_column_names_it() {
        let csv = "id,t,y\nA,1,1.0\n";
        let err = load_long_csv(csv.as_bytes(), &schema_xy()).unwrap_err();
        match err {
            Error::MissingColumn { column } => assert_eq!(column, "x"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_pair_cites_cell() {
        let csv = "id,t,y,x\nA,1,1.0,0.5\nA,1,2.0,1.5\n";
        let err = load_long_csv(csv.as_bytes(), &schema_xy()).unwrap_err();
        match err {
            Error::DuplicatePair { unit, time } => {
                assert_eq!(unit, "A");
                assert_eq!(time, "1");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_row() {
        let csv = "id,t,y,x\nA,1,1.0,0.5\nA,2,oops,1.5\n";
        let err = load_long_csv(csv.as_bytes(), &schema_xy()).unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn to_balanced_two_by_two() {
        let csv = "id,t,y,x\nB,2,4.0,3.5\nA,1,1.0,0.5\nA,2,2.0,1.5\nB,1,3.0,2.5\n";
        let long = load_long_csv(csv.as_bytes(), &schema_xy()).unwrap();
        let panel = to_balanced(&long).unwrap();
        assert_eq!(panel.n_units(), 2);
        assert_eq!(panel.n_periods(), 2);
        assert_eq!(panel.y(0, 0), 1.0);
        assert_eq!(panel.y(1, 1), 4.0);
        assert_eq!(panel.x(1, 0, 0), 2.5);
    }

    #[test]
    fn missing_cell_is_imbalance_error() {
        let csv = "id,t,y,x\nA,1,1.0,0.5\nA,2,2.0,1.5\nB,1,3.0,2.5\n";
        let long = load_long_csv(csv.as_bytes(), &schema_xy()).unwrap();
        let err = to_balanced(&long).unwrap_err();
        match err {
            Error::Unbalanced {
                missing_count,
                examples,
            } => {
                assert_eq!(missing_count, 1);
                assert_eq!(examples, vec![("B".to_string(), "2".to_string())]);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn single_unit_three_periods_is_balanced() {
        let csv = "id,t,y,x\nA,1,1.0,0.5\nA,2,2.0,1.5\nA,3,3.0,2.5\n";
        let long = load_long_csv(csv.as_bytes(), &schema_xy()).unwrap();
        let panel = to_balanced(&long).unwrap();
        assert_eq!(panel.n_units(), 1);
        assert_eq!(panel.n_periods(), 3);
    }

    #[test]
    fn numeric_time_labels_sort_numerically() {
        let csv = "id,t,y,x\nA,10,1.0,0.0\nA,2,2.0,0.0\nA,1,3.0,0.0\n";
        let long = load_long_csv(csv.as_bytes(), &schema_xy()).unwrap();
        let panel = to_balanced(&long).unwrap();
        assert_eq!(panel.time_labels(), &["1", "2", "10"]);
        assert!(!panel.lexicographic_time_order());
    }

    #[test]
    fn string_time_labels_fall_back_to_lexicographic() {
        let csv = "id,t,y,x\nA,q1,1.0,0.0\nA,q2,2.0,0.0\n";
        let long = load_long_csv(csv.as_bytes(), &schema_xy()).unwrap();
        let panel = to_balanced(&long).unwrap();
        assert!(panel.lexicographic_time_order());
    }

    #[test]
    fn within_annihilates_additive_panel() {
        // {1,2;3,4} = a_i + b_t exactly
        let panel = panel_from_grid(2, 2, vec![1.0, 2.0, 3.0, 4.0], vec![0.0; 4]);
        let tr = within_transform(&panel).unwrap();
        for v in tr.as_panel().y_slice() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn within_corner_value() {
        // {0,0;0,c} -> {c/4, -c/4; -c/4, c/4}, hand-applied four-term formula
        let c = 8.0;
        let panel = panel_from_grid(2, 2, vec![0.0, 0.0, 0.0, c], vec![0.0; 4]);
        let tr = within_transform(&panel).unwrap();
        let y = tr.as_panel().y_slice();
        assert_eq!(y, &[c / 4.0, -c / 4.0, -c / 4.0, c / 4.0]);
    }

    #[test]
    fn degenerate_panel_rejected() {
        let panel = panel_from_grid(1, 3, vec![1.0, 2.0, 3.0], vec![0.0; 3]);
        assert!(matches!(
            within_transform(&panel),
            Err(Error::DegeneratePanel { .. })
        ));
    }

    #[test]
    fn flatten_round_trips() {
        let panel = panel_from_grid(2, 3, (0..6).map(f64::from).collect(), vec![1.0; 6]);
        let back = to_balanced(&panel.flatten()).unwrap();
        assert_eq!(back, panel);
    }

    #[test]
    fn json_round_trip() {
        let panel = panel_from_grid(2, 2, vec![1.0, 2.0, 3.0, 4.0], vec![0.5; 4]);
        let json = serde_json::to_string(&panel).unwrap();
        let back: BalancedPanel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, panel);
    }
}
