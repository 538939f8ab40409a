use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::hydro::{mixture_pressure, GridState};
use crate::thermo::ThermoParams;

pub const CSV_HEADER: &str = "x,rho,rho1,rho2,u,p1,p2,mu1,mu2,alpha1,alpha2,p_mix";
pub const CSV_DIGITS: usize = 12;

/// One row of a snapshot file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRecord {
    pub x: f64,
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub u: f64,
    pub p1: f64,
    pub p2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub p_mix: f64,
}

impl SnapshotRecord {
    pub fn values(&self) -> [f64; 12] {
        [
            self.x,
            self.rho,
            self.rho1,
            self.rho2,
            self.u,
            self.p1,
            self.p2,
            self.mu1,
            self.mu2,
            self.alpha1,
            self.alpha2,
            self.p_mix,
        ]
    }
}

pub fn snapshot_records(grid: &GridState, params: &ThermoParams) -> Result<Vec<SnapshotRecord>> {
    grid.cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let row = || -> Result<SnapshotRecord> {
                let q1 = params.potentials(cell.rho1)?;
                let q2 = params.potentials(cell.rho2)?;
                let (alpha1, alpha2) = cell.fractions();
                Ok(SnapshotRecord {
                    x: grid.cell_center(i),
                    rho: cell.rho,
                    rho1: cell.rho1,
                    rho2: cell.rho2,
                    u: cell.velocity(),
                    p1: q1.pressure,
                    p2: q2.pressure,
                    mu1: q1.chemical_potential,
                    mu2: q2.chemical_potential,
                    alpha1,
                    alpha2,
                    p_mix: mixture_pressure(cell, params)?,
                })
            };
            row().map_err(|e| e.in_cell(i))
        })
        .collect()
}

/// `x` with `digits` significant digits, fixed notation when the decimal
/// exponent is in `[-5, digits)` and scientific otherwise; trailing zeros
/// are dropped.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV with [`CSV_HEADER`], one row per record, LF line endings.
pub fn write_snapshot(records: &[SnapshotRecord], path: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Validation("snapshot has no records".into()));
    }
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    write_csv(records, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv<W: Write>(records: &[SnapshotRecord], out: &mut W) -> Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in records {
        let line: Vec<String> = r
            .values()
            .iter()
            .map(|v| format_significant(*v, CSV_DIGITS))
            .collect();
        out.write_all(line.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Parses a file written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<SnapshotRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "missing snapshot header".into(),
            })
        }
    }
    lines
        .map(|(i, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if v.len() != 12 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 12 columns, got {}", v.len()),
                });
            }
            Ok(SnapshotRecord {
                x: v[0],
                rho: v[1],
                rho1: v[2],
                rho2: v[3],
                u: v[4],
                p1: v[5],
                p2: v[6],
                mu1: v[7],
                mu2: v[8],
                alpha1: v[9],
                alpha2: v[10],
                p_mix: v[11],
            })
        })
        .collect()
}

pub fn snapshot_path(prefix: &str, time: f64) -> PathBuf {
    PathBuf::from(format!("{prefix}_t{time:.6}.csv"))
}

pub fn plot_script_path(prefix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}_plot"))
}

/// Matplotlib script drawing every snapshot on a 4 x 3 panel grid:
/// densities, chemical potentials, pressures, then fractions and velocity.
pub fn plot_script(csv_files: &[PathBuf]) -> String {
    let files: Vec<String> = csv_files
        .iter()
        .map(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            format!("    \"{name}\",")
        })
        .collect();
    format!(
        r#"#!/usr/bin/env python3
import csv
import os
import sys

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
FILES = [
{files}
]
PANELS = [
    ("rho", "rho"), ("rho1", "rho1"), ("rho2", "rho2"),
    ("mu1 - mu2", None), ("mu1", "mu1"), ("mu2", "mu2"),
    ("p_mix", "p_mix"), ("p1", "p1"), ("p2", "p2"),
    ("alpha1", "alpha1"), ("alpha2", "alpha2"), ("u", "u"),
]


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {{k: [float(r[k]) for r in rows] for k in rows[0]}}


def main():
    fig, axes = plt.subplots(4, 3, figsize=(13, 11), sharex=True)
    for name in FILES:
        data = load(os.path.join(HERE, name))
        data["mu1 - mu2"] = [a - b for a, b in zip(data["mu1"], data["mu2"])]
        for ax, (title, key) in zip(axes.flat, PANELS):
            ax.plot(data["x"], data[key or title], label=name, lw=0.8)
            ax.set_title(title)
    axes.flat[0].legend(fontsize=6)
    fig.tight_layout()
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "snapshots.png")
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main()
"#,
        files = files.join("\n")
    )
}
