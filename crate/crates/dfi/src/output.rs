//! CSV and JSON writers for sweep results.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`. Missing values are empty CSV fields and JSON nulls; JSON also writes
//! non-finite numbers as null.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{DfiError, Result};
use crate::run::{NgonRun, NoiseBudget, OptimizeResult, SagnacComparison, SensitivitySample};

pub const SAMPLE_COLUMNS: [&str; 10] = [
    "f_hz", "sigma", "qfi", "fi", "f_min", "f_max", "f_dfs", "eta", "eta_gain", "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> DfiError {
    DfiError::Parameter(format!("output: {e}"))
}

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| DfiError::Parameter(format!("bad number '{s}': {e}")))
}

fn write_table<W: Write>(w: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(io_err)?;
    for r in rows {
        out.write_record(r).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn sample_fields(s: &SensitivitySample) -> Vec<String> {
    vec![
        fmt_num(s.f_hz),
        fmt_opt(s.sigma),
        fmt_opt(s.qfi),
        fmt_opt(s.fi),
        fmt_opt(s.f_min),
        fmt_opt(s.f_max),
        fmt_opt(s.f_dfs),
        fmt_opt(s.eta),
        fmt_opt(s.eta_gain),
        s.status.clone(),
    ]
}

fn sample_header() -> Vec<String> {
    SAMPLE_COLUMNS.iter().map(|s| s.to_string()).collect()
}

pub fn write_samples_csv<W: Write>(w: W, samples: &[SensitivitySample]) -> Result<()> {
    let rows: Vec<Vec<String>> = samples.iter().map(sample_fields).collect();
    write_table(w, &sample_header(), &rows)
}

pub fn read_samples_csv<R: Read>(r: R) -> Result<Vec<SensitivitySample>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(io_err)?.clone();
    if header.iter().collect::<Vec<_>>() != SAMPLE_COLUMNS {
        return Err(DfiError::Parameter(format!("unexpected header {:?}", header)));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(io_err)?;
        let n = |i: usize| parse_opt(&rec[i]);
        out.push(SensitivitySample {
            f_hz: n(0)?.ok_or_else(|| DfiError::Parameter("missing f_hz".into()))?,
            sigma: n(1)?,
            qfi: n(2)?,
            fi: n(3)?,
            f_min: n(4)?,
            f_max: n(5)?,
            f_dfs: n(6)?,
            eta: n(7)?,
            eta_gain: n(8)?,
            status: rec[9].to_string(),
            dominant_polarization: None,
        });
    }
    Ok(out)
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(io_err)?;
    writeln!(w).map_err(io_err)
}

pub fn write_samples<W: Write>(w: W, samples: &[SensitivitySample], format: Format) -> Result<()> {
    match format {
        Format::Csv => write_samples_csv(w, samples),
        Format::Json => write_json(w, samples),
    }
}

/// One column per noise source: `sigma_<label>`.
pub fn write_budget<W: Write>(w: W, budget: &NoiseBudget, format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(w, budget),
        Format::Csv => {
            let mut header = vec!["f_hz".to_string()];
            header.extend(budget.labels.iter().map(|l| format!("sigma_{l}")));
            let rows: Vec<Vec<String>> = budget
                .frequencies
                .iter()
                .zip(&budget.sigma)
                .map(|(&f, row)| std::iter::once(fmt_num(f)).chain(row.iter().map(|&s| fmt_opt(s))).collect())
                .collect();
            write_table(w, &header, &rows)
        }
    }
}

/// The full objective surface, one row per grid point: `t_0 .. t_{n-1}, objective`.
pub fn write_optimize<W: Write>(w: W, result: &OptimizeResult, format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(w, result),
        Format::Csv => {
            let n = result.best.transmissivities.len();
            let mut header: Vec<String> = (0..n).map(|i| format!("t_{i}")).collect();
            header.push("objective".into());
            let rows: Vec<Vec<String>> = result
                .surface
                .iter()
                .map(|p| {
                    p.transmissivities
                        .iter()
                        .map(|&t| fmt_num(t))
                        .chain(std::iter::once(fmt_num(p.objective)))
                        .collect()
                })
                .collect();
            write_table(w, &header, &rows)
        }
    }
}

/// Long format: the sample columns prefixed by the polygon size.
pub fn write_ngons<W: Write>(w: W, runs: &[NgonRun], format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(w, runs),
        Format::Csv => {
            let mut header = vec!["n".to_string()];
            header.extend(sample_header());
            let rows: Vec<Vec<String>> = runs
                .iter()
                .flat_map(|r| {
                    r.samples.iter().map(move |s| {
                        let mut row = vec![r.n.to_string()];
                        row.extend(sample_fields(s));
                        row
                    })
                })
                .collect();
            write_table(w, &header, &rows)
        }
    }
}

pub fn write_sagnac<W: Write>(w: W, cmp: &SagnacComparison, format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(w, cmp),
        Format::Csv => {
            let header: Vec<String> = ["f_hz", "sigma_sagnac", "sigma_dfi"].iter().map(|s| s.to_string()).collect();
            let rows: Vec<Vec<String>> = cmp
                .frequencies
                .iter()
                .zip(cmp.sagnac.iter().zip(&cmp.dfi))
                .map(|(&f, (s, d))| vec![fmt_num(f), fmt_opt(s.sigma), fmt_opt(d.sigma)])
                .collect();
            write_table(w, &header, &rows)
        }
    }
}
