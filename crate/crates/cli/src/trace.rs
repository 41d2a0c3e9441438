//! Trace files: a versioned CSV with an optional JSON mirror, and staged
//! writes so a failed run leaves no partial output behind.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ppcg::ConvergenceTrace;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

pub const TRACE_HEADER: &str = "# ppcg-trace v1";
pub const TRACE_COLUMNS: [&str; 6] = ["iter", "trace_value", "rel_resid", "n_locked", "n_matvec", "wall_ms"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub trace_value: f64,
    pub rel_resid: f64,
    pub n_locked: usize,
    pub n_matvec: usize,
    pub wall_ms: f64,
}

pub fn rows_from(trace: &ConvergenceTrace, wall_clock: bool) -> Vec<TraceRow> {
    trace
        .iter()
        .map(|r| TraceRow {
            iter: r.iter,
            trace_value: r.trace_value,
            rel_resid: r.rel_resid,
            n_locked: r.n_locked,
            n_matvec: r.n_matvec,
            wall_ms: if wall_clock { r.wall_ms } else { 0.0 },
        })
        .collect()
}

pub fn to_csv(rows: &[TraceRow]) -> anyhow::Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "{TRACE_HEADER}")?;
    let mut w = csv::Writer::from_writer(&mut out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    drop(w);
    Ok(out)
}

pub fn parse_csv<R: Read>(input: R) -> anyhow::Result<Vec<TraceRow>> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    if input.read_line(&mut first)? == 0 {
        bail!("trace is empty");
    }
    if first.trim_end() != TRACE_HEADER {
        bail!("not a trace file: expected `{TRACE_HEADER}`, found `{}`", first.trim_end());
    }
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(TRACE_COLUMNS) {
        bail!("trace columns {:?} do not match {:?}", headers.iter().collect::<Vec<_>>(), TRACE_COLUMNS);
    }
    let rows = r.deserialize().collect::<Result<Vec<TraceRow>, _>>()?;
    if rows.is_empty() {
        bail!("trace has no rows");
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> anyhow::Result<Vec<TraceRow>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_csv(file).with_context(|| format!("reading {}", path.display()))
}

/// Everything about one run that the JSON mirror records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: u32,
    pub solver: String,
    pub problem: String,
    pub n: usize,
    pub k: usize,
    pub status: String,
    pub converged: bool,
    pub iterations: usize,
    pub matvecs: usize,
    pub rr_solves: usize,
    pub breakdowns: usize,
    pub final_residual: f64,
    pub wall_ms: f64,
    pub values: Vec<f64>,
    pub rows: Vec<TraceRow>,
}

/// Output files held in temporaries until every one of them is ready.
#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn add(&mut self, path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = NamedTempFile::new_in(dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
        tmp.write_all(bytes)?;
        tmp.flush()?;
        self.files.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub fn commit(self) -> anyhow::Result<()> {
        for (tmp, path) in self.files {
            tmp.persist(&path).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// `trace.csv` -> `trace.json`.
pub fn json_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}
