//! Artifact writers: CSV, the binary snapshot format, JSON reports and plot data.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::HarnessError;
use crate::interior::{EnergyLog, GridField, SpaceGrid};
use crate::trace_cascade::TraceField;

/// Magic bytes of the binary snapshot format.
pub const SNAPSHOT_MAGIC: &[u8; 8] = b"CFSNAP1\0";

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(e.to_string()))
}

fn component_header(prefix: &[&str], ncomp: usize) -> Vec<String> {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    h.extend((0..ncomp).map(|n| format!("re_u{}", n + 1)));
    h.extend((0..ncomp).map(|n| format!("im_u{}", n + 1)));
    h
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Columns `t, x, y, Re u_1..N, Im u_1..N`.
pub fn write_snapshots_csv(path: &Path, grid: &SpaceGrid, snaps: &[GridField]) -> Result<(), HarnessError> {
    let ncomp = snaps.first().map_or(1, |s| s.ncomp);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(component_header(&["t", "x", "y"], ncomp)).map_err(csv_err)?;
    let y = grid.y.nodes();
    for s in snaps {
        for (i, &x) in grid.x.iter().enumerate() {
            for (j, &yy) in y.iter().enumerate() {
                let mut rec = vec![num(s.t), num(x), num(yy)];
                rec.extend((0..ncomp).map(|n| num(s.at(i, j, n).re)));
                rec.extend((0..ncomp).map(|n| num(s.at(i, j, n).im)));
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Little-endian: magic, `nx ny ncomp nsnap` as `u64`, `x`, `y`, `t` as `f64`,
/// then per snapshot the `(re, im)` pairs in field layout.
pub fn write_snapshots_bin(path: &Path, grid: &SpaceGrid, snaps: &[GridField]) -> Result<(), HarnessError> {
    let ncomp = snaps.first().map_or(1, |s| s.ncomp);
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    for v in [grid.nx(), grid.ny(), ncomp, snaps.len()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for v in grid.x.iter().chain(grid.y.nodes().iter()).chain(snaps.iter().map(|s| &s.t)) {
        w.write_all(&v.to_le_bytes())?;
    }
    for s in snaps {
        for c in &s.values {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Decoded binary snapshot file.
#[derive(Debug, Clone)]
pub struct SnapshotFile {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub ncomp: usize,
    /// Per snapshot, field layout.
    pub values: Vec<Vec<num_complex::Complex64>>,
}

pub fn read_snapshots_bin(path: &Path) -> Result<SnapshotFile, HarnessError> {
    let bytes = fs::read(path)?;
    let bad = || HarnessError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, "malformed snapshot file"));
    if bytes.len() < 40 || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(bad());
    }
    let mut pos = 8;
    let mut next = || -> Result<[u8; 8], HarnessError> {
        let b: [u8; 8] = bytes.get(pos..pos + 8).ok_or_else(bad)?.try_into().expect("eight bytes");
        pos += 8;
        Ok(b)
    };
    let mut dims = [0usize; 4];
    for d in &mut dims {
        *d = u64::from_le_bytes(next()?) as usize;
    }
    let [nx, ny, ncomp, ns] = dims;
    let mut read_f64 = |n: usize| -> Result<Vec<f64>, HarnessError> { (0..n).map(|_| Ok(f64::from_le_bytes(next()?))).collect() };
    let x = read_f64(nx)?;
    let y = read_f64(ny)?;
    let t = read_f64(ns)?;
    let mut values = Vec::with_capacity(ns);
    for _ in 0..ns {
        let flat = read_f64(2 * nx * ny * ncomp)?;
        values.push(flat.chunks(2).map(|c| num_complex::Complex64::new(c[0], c[1])).collect());
    }
    Ok(SnapshotFile { x, y, t, ncomp, values })
}

/// Columns `t, u_norm, f_norm`.
pub fn write_energy_csv(path: &Path, e: &EnergyLog) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "u_norm", "f_norm"]).map_err(csv_err)?;
    for k in 0..e.t.len() {
        w.write_record([num(e.t[k]), num(e.u_norm[k]), num(e.f_norm[k])]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// File-name-safe label of a pair.
pub fn pair_file_stem(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| match c {
            '0'..='9' | 'a'..='z' | 'A'..='Z' | '.' => c,
            '-' => 'm',
            '+' => 'p',
            _ => '_',
        })
        .collect();
    format!("trace{}", s.trim_end_matches('_'))
}

/// Columns `t, y, Re, Im` per trace.
pub fn write_trace_csv(path: &Path, y: &[f64], tr: &TraceField) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(component_header(&["t", "y"], tr.ncomp)).map_err(csv_err)?;
    for (s, &t) in tr.t.iter().enumerate() {
        let sl = tr.slice(s);
        for (j, &yy) in y.iter().enumerate() {
            let mut rec = vec![num(t), num(yy)];
            rec.extend((0..tr.ncomp).map(|n| num(sl[j * tr.ncomp + n].re)));
            rec.extend((0..tr.ncomp).map(|n| num(sl[j * tr.ncomp + n].im)));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_traces(dir: &Path, y: &[f64], traces: &[TraceField]) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    for tr in traces {
        write_trace_csv(&dir.join(format!("{}.csv", pair_file_stem(&tr.pair.label()))), y, tr)?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let s = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    fs::write(path, s + "\n")?;
    Ok(())
}

/// Whitespace-separated columns with a `#` header line.
pub fn write_columns(path: &Path, names: &[&str], cols: &[Vec<f64>]) -> Result<(), HarnessError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {}", names.join(" "))?;
    let rows = cols.iter().map(Vec::len).min().unwrap_or(0);
    for r in 0..rows {
        let line: Vec<String> = cols.iter().map(|c| num(c[r])).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

const PLOT_STUB: &str = r##"#!/usr/bin/env python3
"""Plots every columnar file in this directory against its first column."""
import glob
import os

import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "*.dat"))):
    with open(path) as fh:
        names = fh.readline().lstrip("#").split()
    data = np.atleast_2d(np.loadtxt(path))
    fig, ax = plt.subplots()
    for k in range(1, data.shape[1]):
        ax.semilogy(data[:, 0], np.abs(data[:, k]), label=names[k])
    ax.set_xlabel(names[0])
    ax.legend()
    fig.savefig(path[:-4] + ".png", dpi=120)
"##;

pub fn write_plot_stub(dir: &Path) -> Result<(), HarnessError> {
    fs::write(dir.join("plot.py"), PLOT_STUB)?;
    Ok(())
}
