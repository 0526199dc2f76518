//! CSV and JSON layouts of experiment artifacts.
//!
//! Floating-point cells are written with 17 significant digits so that a
//! value read back compares equal to the one written, and identical runs
//! produce identical bytes.

use std::io::{Read, Write};

use crate::classical::RegionEstimate;
use crate::error::{Error, Result};
use crate::geometry::Theorem2Check;
use crate::quantum::CorrelationSeries;
use crate::transition::FitResult;

pub const REGION_HEADER: [&str; 6] = ["lambda", "mu_A", "mu_E", "n_samples", "threshold", "ci_halfwidth"];
pub const SERIES_HEADER: [&str; 3] = ["t", "c_q", "cesaro"];
pub const DISTRIBUTION_HEADER: [&str; 2] = ["k", "p"];
pub const SPECTRUM_HEADER: [&str; 2] = ["k", "phi_k"];
pub const THEOREM2_HEADER: [&str; 4] = ["N", "mu", "d2", "residual"];

/// Round-trip exact decimal form, e.g. `5.9197766016124390e-2`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn write_table<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_region_estimates<W: Write>(out: W, estimates: &[RegionEstimate]) -> Result<()> {
    write_table(
        out,
        &REGION_HEADER,
        estimates.iter().map(|e| {
            vec![
                fmt_f64(e.lambda),
                fmt_f64(e.mu_a),
                fmt_f64(e.mu_e),
                e.n_samples.to_string(),
                fmt_f64(e.threshold),
                fmt_f64(e.ci_halfwidth),
            ]
        }),
    )
}

fn parse_cell<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = record.get(idx).ok_or_else(|| Error::Io(format!("row {line}: missing column {idx}")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Io(format!("row {line}: cannot parse `{raw}` in column {idx}")))
}

/// Reads a sweep written by [`write_region_estimates`]. Columns are located by
/// header name.
pub fn read_region_estimates<R: Read>(input: R) -> Result<Vec<RegionEstimate>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(io_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Io(format!("missing column `{name}`")))
    };
    let idx: Vec<usize> = REGION_HEADER.iter().map(|h| col(h)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(io_err)?;
        let line = line + 2;
        out.push(RegionEstimate {
            lambda: parse_cell(&rec, idx[0], line)?,
            mu_a: parse_cell(&rec, idx[1], line)?,
            mu_e: parse_cell(&rec, idx[2], line)?,
            n_samples: parse_cell(&rec, idx[3], line)?,
            threshold: parse_cell(&rec, idx[4], line)?,
            ci_halfwidth: parse_cell(&rec, idx[5], line)?,
        });
    }
    Ok(out)
}

pub fn write_correlation_series<W: Write>(out: W, series: &CorrelationSeries) -> Result<()> {
    write_table(
        out,
        &SERIES_HEADER,
        series
            .times
            .iter()
            .zip(&series.c_q)
            .zip(&series.cesaro)
            .map(|((t, c), m)| vec![t.to_string(), fmt_f64(*c), fmt_f64(*m)]),
    )
}

pub fn write_momentum_distribution<W: Write>(out: W, distribution: &[(i64, f64)]) -> Result<()> {
    write_table(
        out,
        &DISTRIBUTION_HEADER,
        distribution.iter().map(|(k, p)| vec![k.to_string(), fmt_f64(*p)]),
    )
}

/// One row per eigen-index `k` with its quasi-energy.
pub fn write_spectrum<W: Write>(out: W, quasi_energies: &[f64]) -> Result<()> {
    write_table(
        out,
        &SPECTRUM_HEADER,
        quasi_energies.iter().enumerate().map(|(k, phi)| vec![k.to_string(), fmt_f64(*phi)]),
    )
}

pub fn write_theorem2_sweep<W: Write>(out: W, checks: &[Theorem2Check]) -> Result<()> {
    write_table(
        out,
        &THEOREM2_HEADER,
        checks.iter().map(|c| {
            vec![
                c.dim.to_string(),
                c.mu_rank.to_string(),
                fmt_f64(c.d2),
                fmt_f64(c.residual),
            ]
        }),
    )
}

/// `{lambda_c, mu_c, rss, n_points, fit_window:[lo,hi]}`.
pub fn fit_result_json(fit: &FitResult) -> Result<String> {
    serde_json::to_string_pretty(fit).map_err(io_err)
}

pub fn parse_fit_result(json: &str) -> Result<FitResult> {
    serde_json::from_str(json).map_err(io_err)
}
