use std::fs::File;
use std::path::Path;

use hdinfer::GroupHypothesis;
use nalgebra::DMatrix;
use serde::Deserialize;

/// Malformed input; reported with exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Numeric CSV table, rows are observations. A single header row is skipped
/// if any of its fields does not parse as a number.
pub fn read_matrix(path: &Path) -> anyhow::Result<DMatrix<f64>> {
    let file = File::open(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
            bad(format!("{}: line {line}: {e}", path.display()))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        if i == 0 && parsed.iter().any(Option::is_none) {
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (col, (v, raw)) in parsed.iter().zip(record.iter()).enumerate() {
            match v {
                Some(v) if v.is_finite() => row.push(*v),
                _ => {
                    return Err(bad(format!(
                        "{}: line {line}, column {}: expected a finite number, got {raw:?}",
                        path.display(),
                        col + 1
                    )))
                }
            }
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(bad(format!(
                    "{}: line {line}: expected {w} fields, found {}",
                    path.display(),
                    row.len()
                )))
            }
            _ => {}
        }
        rows.push(row);
    }
    let Some(p) = width else {
        return Err(bad(format!("{}: no data rows", path.display())));
    };
    Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
}

pub fn read_response(path: &Path) -> anyhow::Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(bad(format!(
            "{}: response must have one column, found {}",
            path.display(),
            m.ncols()
        )));
    }
    Ok(m.iter().copied().collect())
}

#[derive(Deserialize)]
struct GroupSpec {
    label: String,
    indices: Vec<usize>,
}

/// `[{"label": ..., "indices": [1-based, ...]}]`, converted to 0-based.
pub fn read_groups(path: &Path, p: usize) -> anyhow::Result<Vec<GroupHypothesis>> {
    let file = File::open(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let specs: Vec<GroupSpec> = serde_json::from_reader(file)
        .map_err(|e| bad(format!("{}: invalid groups file: {e}", path.display())))?;
    specs
        .into_iter()
        .map(|g| {
            if let Some(&bad_index) = g.indices.iter().find(|&&j| j == 0 || j > p) {
                return Err(bad(format!(
                    "group {:?}: index {bad_index} outside 1..={p}",
                    g.label
                )));
            }
            let zero_based = g.indices.iter().map(|j| j - 1).collect();
            GroupHypothesis::new(g.label, zero_based, p).map_err(|e| bad(e.to_string()))
        })
        .collect()
}
