//! Report and table writers for NDJSON, CSV and plain text.

use std::io::Write;

use serde::Serialize;
use ybe_core::converge::ConvergeStudy;
use ybe_core::report::ResidualReport;

use crate::config::Format;

/// Column order of CSV report output.
pub const REPORT_HEADER: [&str; 7] = ["suite", "params", "residual", "tolerance", "pass", "truncation", "wall_ms"];

type Out<'a> = &'a mut dyn Write;

fn json_line<T: Serialize>(out: Out<'_>, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)
}

/// Writes one record per report.
pub fn write_reports(out: Out<'_>, reports: &[ResidualReport], format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => {
            for r in reports {
                json_line(out, r)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(REPORT_HEADER)?;
            for r in reports {
                w.write_record([
                    r.suite.clone(),
                    serde_json::to_string(&r.params)?,
                    format!("{:e}", r.residual),
                    format!("{:e}", r.tolerance),
                    r.pass.to_string(),
                    serde_json::to_string(&r.truncation)?,
                    r.wall_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => {
            for r in reports {
                let check = r.params.get("check").map(serde_json::to_string).transpose()?.unwrap_or_default();
                writeln!(
                    out,
                    "{} {:<10} {:<20} residual={:.3e} tolerance={:.1e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.suite,
                    check.trim_matches('"'),
                    r.residual,
                    r.tolerance
                )?;
            }
            let failed = reports.iter().filter(|r| !r.pass).count();
            writeln!(out, "{} reports, {} failed", reports.len(), failed)?;
        }
    }
    Ok(())
}

/// One row of the face-weight table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightRow {
    pub l: i64,
    pub lp: i64,
    pub m: i64,
    pub mp: i64,
    pub z_re: f64,
    pub z_im: f64,
    /// Dynamical parameter `w0 q^l` at which the IRF matrix is read.
    pub w_shift_re: f64,
    pub w_shift_im: f64,
    pub re: Option<f64>,
    pub im: Option<f64>,
    /// Evaluation failure, such as a pole.
    pub error: Option<String>,
}

/// Writes the face-weight table.
pub fn write_weights(out: Out<'_>, rows: &[WeightRow], format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => {
            for r in rows {
                json_line(out, r)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Text => {
            for r in rows {
                match (&r.error, r.re, r.im) {
                    (None, Some(a), Some(b)) => {
                        writeln!(out, "W({:>3},{:>3},{:>3},{:>3}) = {:+.15e} {:+.15e}i", r.l, r.lp, r.m, r.mp, a, b)?
                    }
                    (e, _, _) => writeln!(
                        out,
                        "W({:>3},{:>3},{:>3},{:>3}) flagged: {}",
                        r.l,
                        r.lp,
                        r.m,
                        r.mp,
                        e.as_deref().unwrap_or("not finite")
                    )?,
                }
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ConvergeCsvRow<'a> {
    target: &'a str,
    n: usize,
    residual: f64,
    monotone: bool,
    rate: Option<f64>,
}

/// Writes a convergence study: a single JSON object, CSV rows carrying the
/// summary columns, or a text table.
pub fn write_study(out: Out<'_>, study: &ConvergeStudy, format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => json_line(out, study)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in &study.rows {
                w.serialize(ConvergeCsvRow {
                    target: study.target.name(),
                    n: r.n,
                    residual: r.residual,
                    monotone: study.monotone,
                    rate: study.rate,
                })?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "target {}", study.target)?;
            for r in &study.rows {
                writeln!(out, "{:>5}  {:.6e}", r.n, r.residual)?;
            }
            writeln!(out, "monotone {}", study.monotone)?;
            match study.rate {
                Some(rate) => writeln!(out, "fitted rate {rate:.6}")?,
                None => writeln!(out, "fitted rate n/a")?,
            }
        }
    }
    Ok(())
}
