//! CSV emission and parsing. Every file has a one-line header followed by
//! rows in scientific notation with 12 significant digits; lines starting
//! with `#` are metadata comments and are skipped by the reader.

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};
use crate::kernel::KernelTable;
use crate::meanfield::MeanFieldTrace;
use crate::moments::VarianceTrace;
use crate::volterra::GreenPair;

pub const TRACE_HEADER: &[&str] =
    &["t", "var_x", "var_y", "var_theta", "re_bb", "im_bb", "nb", "commutator_residual"];
pub const MEANFIELD_HEADER: &[&str] = &["t", "re_beta", "im_beta", "delta_c", "re_drive", "im_drive"];
pub const GREEN_HEADER: &[&str] = &["t", "re_m", "im_m", "re_l", "im_l"];
pub const KERNEL_HEADER: &[&str] = &["t", "im_f", "im_cavity"];
pub const DETECTION_HEADER: &[&str] = &["t", "var_out"];

fn write_rows<W: Write>(out: &mut W, header: &[&str], comments: &[String], rows: impl Iterator<Item = Vec<f64>>) -> io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.11e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_trace<W: Write>(out: &mut W, trace: &VarianceTrace, comments: &[String]) -> io::Result<()> {
    let rows = (0..trace.len()).map(|i| {
        vec![
            trace.times[i],
            trace.var_x[i],
            trace.var_y[i],
            trace.var_theta[i],
            trace.moment_bb[i].re,
            trace.moment_bb[i].im,
            trace.moment_nb[i],
            trace.commutator_residual[i],
        ]
    });
    write_rows(out, TRACE_HEADER, comments, rows)
}

pub fn write_meanfield<W: Write>(out: &mut W, mf: &MeanFieldTrace) -> io::Result<()> {
    let rows = (0..mf.len()).map(|i| {
        vec![mf.times[i], mf.beta[i].re, mf.beta[i].im, mf.delta_c[i], mf.drive[i].re, mf.drive[i].im]
    });
    write_rows(out, MEANFIELD_HEADER, &[], rows)
}

/// M and L at the output points of their grid.
pub fn write_green<W: Write>(out: &mut W, green: &GreenPair) -> io::Result<()> {
    let g = green.grid;
    let rows = g
        .output_indices()
        .map(|n| vec![g.time(n), green.m[n].re, green.m[n].im, green.l[n].re, green.l[n].im]);
    write_rows(out, GREEN_HEADER, &[], rows)
}

/// Kernel samples every `stride` lags.
pub fn write_kernel<W: Write>(out: &mut W, table: &KernelTable, stride: usize) -> io::Result<()> {
    let rows = (0..table.len())
        .step_by(stride.max(1))
        .map(|j| vec![j as f64 * table.dt, table.bath_part[j].im, table.cavity_part[j].im]);
    write_rows(out, KERNEL_HEADER, &[], rows)
}

pub fn write_detection<W: Write>(out: &mut W, times: &[f64], var_out: &[f64]) -> io::Result<()> {
    let rows = times.iter().zip(var_out).map(|(t, v)| vec![*t, *v]);
    write_rows(out, DETECTION_HEADER, &[], rows)
}

/// A parsed CSV: header names and numeric rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Domain(format!("missing column {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_table<R: BufRead>(input: R) -> Result<Table> {
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Domain(format!("read error: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match &header {
            None => header = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
            Some(h) => {
                let row = line
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Domain(format!("line {}: {e}", lineno + 1)))?;
                if row.len() != h.len() {
                    return Err(Error::Domain(format!(
                        "line {}: {} fields, header has {}",
                        lineno + 1,
                        row.len(),
                        h.len()
                    )));
                }
                rows.push(row);
            }
        }
    }
    let header = header.ok_or_else(|| Error::Domain("empty CSV".into()))?;
    Ok(Table { header, rows })
}
