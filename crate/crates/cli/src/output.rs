use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hdinfer::report::{DesignDiagnostics, TestReport};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Coefficient table, then (if any) a blank line and the group table.
pub fn write_test_csv(out: &mut dyn Write, report: &TestReport) -> anyhow::Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record([
            "index",
            "beta_corr",
            "beta_corr_std",
            "statistic",
            "delta",
            "pvalue",
            "adjusted_pvalue",
            "holm_pvalue",
            "reject",
            "testable",
        ])?;
        for c in &report.coefficients {
            w.write_record([
                c.index.to_string(),
                c.beta_corr.to_string(),
                c.beta_corr_std.to_string(),
                c.statistic.to_string(),
                c.delta.to_string(),
                c.pvalue.to_string(),
                c.adjusted_pvalue.to_string(),
                c.holm_pvalue.to_string(),
                c.reject.to_string(),
                c.testable.to_string(),
            ])?;
        }
        w.flush()?;
    }
    if !report.groups.is_empty() {
        writeln!(out)?;
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(["label", "size", "statistic", "pvalue", "adjusted_pvalue", "reject"])?;
        for g in &report.groups {
            w.write_record([
                g.label.clone(),
                g.size.to_string(),
                g.statistic.to_string(),
                g.pvalue.to_string(),
                g.adjusted_pvalue.to_string(),
                g.reject.to_string(),
            ])?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_diag_csv(out: &mut dyn Write, diag: &DesignDiagnostics) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record([
        "index",
        "projection_diag",
        "max_offdiag",
        "kappa",
        "omega",
        "detection_single",
        "detection_multiple",
    ])?;
    for c in &diag.coefficients {
        w.write_record([
            c.index.to_string(),
            c.projection_diag.to_string(),
            c.max_offdiag.to_string(),
            c.kappa.to_string(),
            c.omega.to_string(),
            c.detection_single.to_string(),
            c.detection_multiple.to_string(),
        ])?;
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(())
}
