//! Column-wise comparison of two CSV outputs.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use squeezenm::output::{read_table, Table};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnDiff {
    pub column: String,
    pub max_abs: f64,
    pub row: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub columns: Vec<ColumnDiff>,
    pub tol: f64,
}

impl CompareReport {
    pub fn max_abs(&self) -> f64 {
        self.columns.iter().map(|c| c.max_abs).fold(0.0, f64::max)
    }

    pub fn within_tolerance(&self) -> bool {
        self.columns.iter().all(|c| c.max_abs <= self.tol)
    }
}

fn load(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    read_table(BufReader::new(file)).map_err(|e| CliError::from(e).in_file(path))
}

/// Maximum absolute difference per column. Both files must share the
/// header and the row count.
pub fn compare_files(a: &Path, b: &Path, tol: f64) -> Result<CompareReport> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::Invalid(format!("--tol must be finite and >= 0, got {tol}")));
    }
    let (ta, tb) = (load(a)?, load(b)?);
    compare_tables(&ta, &tb, tol)
}

pub fn compare_tables(a: &Table, b: &Table, tol: f64) -> Result<CompareReport> {
    if a.header != b.header {
        return Err(CliError::Invalid(format!("headers differ: {:?} vs {:?}", a.header, b.header)));
    }
    if a.rows.len() != b.rows.len() {
        return Err(CliError::Invalid(format!("row counts differ: {} vs {}", a.rows.len(), b.rows.len())));
    }
    let columns = a
        .header
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (row, max_abs) = a
                .rows
                .iter()
                .zip(&b.rows)
                .map(|(ra, rb)| (ra[j] - rb[j]).abs())
                .enumerate()
                .fold((0, 0.0), |acc, (i, d)| if d > acc.1 || d.is_nan() { (i, d) } else { acc });
            ColumnDiff { column: name.clone(), max_abs, row }
        })
        .collect();
    Ok(CompareReport { columns, tol })
}
