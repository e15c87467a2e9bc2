//! Diagnostics time series as CSV, plus a generated plotting script.

use std::io::Write;
use std::path::Path;

use crate::diagnostics::EnergyReport;
use crate::error::{Error, Result};

/// Column names for Sobolev index `s`.
pub fn series_columns(s: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..=s + 1).map(|k| format!("Q_L2_k{k}")));
    cols.extend((0..=s).map(|k| format!("u_L2_k{k}")));
    for c in ["Q_max", "u_max", "E", "D", "N", "Mw", "Hq", "trace_res", "div_res", "mean_u_1", "mean_u_2", "mean_u_3"] {
        cols.push(c.to_string());
    }
    cols
}

/// One row in [`series_columns`] order.
pub fn series_row(r: &EnergyReport, sup: (f64, f64)) -> Vec<f64> {
    let mut row = vec![r.t];
    row.extend(&r.q_l2);
    row.extend(&r.u_l2);
    row.extend([sup.0, sup.1, r.e, r.d, r.n, r.mw, r.hq, r.trace_res, r.div_res]);
    row.extend(r.mean_u);
    row
}

/// `%.17g`-equivalent formatting: 17 significant digits, exact f64 round trip.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Streaming CSV sink with a fixed header.
pub struct SeriesWriter<W: Write> {
    out: W,
    ncols: usize,
}

impl<W: Write> SeriesWriter<W> {
    pub fn new(mut out: W, columns: &[String]) -> Result<Self> {
        writeln!(out, "{}", columns.join(","))?;
        Ok(Self { out, ncols: columns.len() })
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: format!("{} columns", self.ncols), got: row.len().to_string() });
        }
        let line: Vec<String> = row.iter().map(|&v| fmt_real(v)).collect();
        writeln!(self.out, "{}", line.join(","))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Header and numeric rows of a series file.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Csv(format!("no column `{name}` (have {})", self.columns.join(", "))))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn parse_series(reader: impl std::io::Read) -> Result<Series> {
    let mut rdr = csv::Reader::from_reader(reader);
    let columns: Vec<String> = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Csv(format!("row {}: `{f}`: {e}", i + 1))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Series { columns, rows })
}

pub fn read_series(path: &Path) -> Result<Series> {
    parse_series(std::fs::File::open(path)?)
}

/// Python/matplotlib script rendering log-log norm decay and semi-log
/// energy plots from `csv_name` (resolved next to the script).
pub fn plot_script(csv_name: &str, columns: &[String]) -> String {
    let quote = |v: Vec<&String>| v.iter().map(|c| format!("\"{c}\"")).collect::<Vec<_>>().join(", ");
    let norms = quote(columns.iter().filter(|c| c.contains("_L2_k")).collect());
    let energies = quote(columns.iter().filter(|c| ["E", "D", "N", "Mw", "Hq"].contains(&c.as_str())).collect());
    format!(
        r#"#!/usr/bin/env python3
"""Decay plots for {csv_name}."""
import csv
import math
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
PATH = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "{csv_name}")
NORMS = [{norms}]
ENERGIES = [{energies}]

with open(PATH, newline="") as f:
    rows = list(csv.DictReader(f))
t = [float(r["t"]) for r in rows]


def positive(name):
    pts = [(ti, float(r[name])) for ti, r in zip(t, rows)]
    return [(ti, y) for ti, y in pts if y > 0 and math.isfinite(y)]


fig, ax = plt.subplots(1, 2, figsize=(11, 4))
for name in NORMS:
    pts = positive(name)
    if pts:
        ax[0].loglog([1 + p[0] for p in pts], [p[1] for p in pts], label=name)
ax[0].set_xlabel("1 + t")
ax[0].set_title("L2 norms")
ax[0].legend(fontsize=7)
for name in ENERGIES:
    pts = positive(name)
    if pts:
        ax[1].semilogy([p[0] for p in pts], [p[1] for p in pts], label=name)
ax[1].set_xlabel("t")
ax[1].set_title("functionals")
ax[1].legend(fontsize=7)
fig.tight_layout()
out = os.path.splitext(PATH)[0] + ".png"
fig.savefig(out, dpi=120)
print(out)
"#
    )
}
