//! Column-by-column comparison of two stored runs.
//!
//! Columns with a `<name>_stderr` partner (and report estimates with a
//! stderr entry) are checked against `STDERR_BOUND` combined standard
//! errors, row by row. Other columns are reported but not judged.

use serde::Serialize;

use crate::store::StoredRun;
use crate::table::Table;

pub const STDERR_BOUND: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnDiff {
    pub table: String,
    pub column: String,
    pub max_abs: f64,
    pub max_rel: f64,
    /// Largest `|a - b| / sqrt(se_a^2 + se_b^2)`, if the column has errors.
    pub max_z: Option<f64>,
    pub within: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub left: String,
    pub right: String,
    pub diffs: Vec<ColumnDiff>,
    /// Every column with standard errors is within the bound.
    pub consistent: bool,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SchemaMismatch {
    #[error("runs use different presets: {0} vs {1}")]
    Preset(String, String),
    #[error("table `{0}` is missing from one run")]
    MissingTable(String),
    #[error("table `{table}` has different columns: {left:?} vs {right:?}")]
    Columns { table: String, left: Vec<String>, right: Vec<String> },
    #[error("table `{table}` has {left} rows vs {right}")]
    Rows { table: String, left: usize, right: usize },
}

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

fn column_diff(table: &str, column: &str, a: &[f64], b: &[f64], errs: Option<(&[f64], &[f64])>) -> ColumnDiff {
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    for i in 0..a.len() {
        let d = (a[i] - b[i]).abs();
        max_abs = max_abs.max(d);
        max_rel = max_rel.max(rel(a[i], b[i]));
        if let Some((sa, sb)) = errs {
            let se = sa[i].hypot(sb[i]);
            let z = if d == 0.0 { 0.0 } else if se > 0.0 { d / se } else { f64::INFINITY };
            max_z = max_z.max(z);
        }
    }
    let max_z = errs.map(|_| max_z);
    ColumnDiff {
        table: table.into(),
        column: column.into(),
        max_abs,
        max_rel,
        max_z,
        within: max_z.map(|z| z <= STDERR_BOUND),
    }
}

fn table_diffs(name: &str, a: &Table, b: &Table) -> Result<Vec<ColumnDiff>, SchemaMismatch> {
    if a.columns != b.columns {
        return Err(SchemaMismatch::Columns { table: name.into(), left: a.columns.clone(), right: b.columns.clone() });
    }
    if a.rows.len() != b.rows.len() {
        return Err(SchemaMismatch::Rows { table: name.into(), left: a.rows.len(), right: b.rows.len() });
    }
    let mut out = Vec::new();
    for c in &a.columns {
        if c.ends_with("_stderr") {
            continue;
        }
        let (ca, cb) = (a.column(c).expect("present"), b.column(c).expect("present"));
        let partner = format!("{c}_stderr");
        let errs = a.column(&partner).zip(b.column(&partner));
        out.push(column_diff(name, c, &ca, &cb, errs.as_ref().map(|(x, y)| (x.as_slice(), y.as_slice()))));
    }
    Ok(out)
}

pub fn compare(a: &StoredRun, b: &StoredRun) -> Result<Comparison, SchemaMismatch> {
    if a.report.op != b.report.op {
        return Err(SchemaMismatch::Preset(a.report.op.to_string(), b.report.op.to_string()));
    }
    let mut diffs = Vec::new();
    for (name, ta) in &a.tables {
        let tb = b.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t).ok_or_else(|| SchemaMismatch::MissingTable(name.clone()))?;
        diffs.extend(table_diffs(name, ta, tb)?);
    }
    if let Some((name, _)) = b.tables.iter().find(|(n, _)| !a.tables.iter().any(|(m, _)| m == n)) {
        return Err(SchemaMismatch::MissingTable(name.clone()));
    }
    for (k, va) in &a.report.estimates {
        let Some(vb) = b.report.estimates.get(k) else { continue };
        let errs = a.report.stderr.get(k).zip(b.report.stderr.get(k)).map(|(x, y)| (vec![*x], vec![*y]));
        diffs.push(column_diff("estimates", k, &[*va], &[*vb], errs.as_ref().map(|(x, y)| (x.as_slice(), y.as_slice()))));
    }
    let consistent = diffs.iter().all(|d| d.within != Some(false));
    Ok(Comparison { left: a.record.run_id.clone(), right: b.record.run_id.clone(), diffs, consistent })
}
