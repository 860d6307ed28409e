use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::convergence::ConvergenceReport;
use crate::elliptic::DirichletPenalty;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Console,
    Csv,
}

/// `2.42e-02`: three significant digits, signed two-digit exponent.
pub fn sci(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.2e}");
    }
    let s = format!("{x:.2e}");
    let (mant, exp) = s.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

fn eoc_cell(e: Option<f64>) -> String {
    e.map(|v| format!("{v:.2}")).unwrap_or_default()
}

pub fn format_console(report: &ConvergenceReport) -> String {
    let ncomp = report.levels.first().map_or(report.dim, |l| l.err_q.len());
    let mut out = String::new();
    let _ = write!(out, "setup {}, p = {}, solver = {}", report.setup_id, report.degree, report.solver);
    if report.penalty != DirichletPenalty::Stabilizing {
        let _ = write!(out, ", {} Dirichlet penalty", report.penalty);
    }
    let _ = writeln!(out);
    let _ = write!(out, "{:>5} | {:>9} {:>5}", "N", "Error phi", "EOC");
    for c in 0..ncomp {
        let name = if ncomp == 1 { "Error q".to_string() } else { format!("Error q{}", c + 1) };
        let _ = write!(out, " | {name:>9} {:>5}", "EOC");
    }
    let _ = writeln!(out, " | {:>6} {:>9}", "iters", "residual");
    for l in &report.levels {
        let _ = write!(out, "{:>5} | {:>9} {:>5}", l.n, sci(l.err_phi), eoc_cell(l.eoc_phi));
        for c in 0..ncomp {
            let _ = write!(out, " | {:>9} {:>5}", sci(l.err_q[c]), eoc_cell(l.eoc_q[c]));
        }
        let _ = writeln!(out, " | {:>6} {:>9}", l.solve.iterations, sci(l.solve.final_residual));
    }
    out
}

pub fn write_csv<W: Write>(report: &ConvergenceReport, writer: W) -> Result<()> {
    let ncomp = report.levels.first().map_or(report.dim, |l| l.err_q.len());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["setup".to_string(), "degree".into(), "N".into(), "err_phi".into(), "eoc_phi".into()];
    for c in 1..=ncomp {
        header.push(format!("err_q{c}"));
        header.push(format!("eoc_q{c}"));
    }
    header.extend(["solver".into(), "iterations".into(), "final_residual".into()]);
    w.write_record(&header)?;
    for l in &report.levels {
        let opt = |e: Option<f64>| e.map(|v| format!("{v:e}")).unwrap_or_default();
        let mut row = vec![
            report.setup_id.to_string(),
            report.degree.to_string(),
            l.n.to_string(),
            format!("{:e}", l.err_phi),
            opt(l.eoc_phi),
        ];
        for c in 0..ncomp {
            row.push(format!("{:e}", l.err_q[c]));
            row.push(opt(l.eoc_q[c]));
        }
        row.push(l.solve.method.to_string());
        row.push(l.solve.iterations.to_string());
        row.push(format!("{:e}", l.solve.final_residual));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the report to `path`, or to stdout when no path is given.
pub fn emit_report(report: &ConvergenceReport, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        ReportFormat::Console => {
            let mut sink = sink;
            sink.write_all(format_console(report).as_bytes())?;
            sink.flush()?;
        }
        ReportFormat::Csv => write_csv(report, sink)?,
    }
    Ok(())
}
