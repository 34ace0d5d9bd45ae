//! CSV tables and the run manifest.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use helmfield_core::causality::{FrontReport, COMPONENTS};
use helmfield_core::greens::LemmaReport;
use helmfield_core::maxwell::ResidualReport;

use crate::CliError;

pub const NEVER: &str = "never";

/// Shortest round-trip text of `v`, in exponent form outside `[1e-4, 1e6)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// A lemma result with the bound it was held to.
#[derive(Debug, Clone)]
pub struct LemmaRow {
    pub report: LemmaReport,
    pub tolerance: f64,
}

impl LemmaRow {
    pub fn pass(&self) -> bool {
        self.report.residual_rel <= self.tolerance
    }
}

pub fn write_lemma_csv(path: &Path, rows: &[LemmaRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "kernel",
        "seed",
        "nx",
        "ny",
        "nz",
        "nt",
        "residual_rel",
        "norm_project_after",
        "norm_project_before",
        "tolerance",
        "pass",
    ])?;
    for row in rows {
        let r = &row.report;
        w.write_record([
            r.kernel.name().to_string(),
            r.seed.map_or_else(String::new, |s| s.to_string()),
            r.dims[0].to_string(),
            r.dims[1].to_string(),
            r.dims[2].to_string(),
            r.nt.to_string(),
            num(r.residual_rel),
            num(r.norm_project_after),
            num(r.norm_project_before),
            num(row.tolerance),
            row.pass().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_residuals_csv(path: &Path, report: &ResidualReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["check_id", "time_index", "residual"])?;
    for (id, n, v) in report.rows() {
        w.write_record([id.to_string(), n.to_string(), num(v)])?;
    }
    w.flush()?;
    Ok(())
}

fn time_cell(t: Option<f64>) -> String {
    t.map_or_else(|| NEVER.to_string(), num)
}

pub fn write_fronts_csv(path: &Path, report: &FrontReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["component", "radius", "arrival_time"])?;
    for (name, arr) in COMPONENTS.iter().zip(&report.arrivals) {
        for (r, t) in report.shell_radii.iter().zip(&arr.times) {
            w.write_record([name.to_string(), num(*r), time_cell(*t)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_cone_csv(path: &Path, report: &FrontReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "outside_par", "outside_perp", "outside_sum", "outside_total", "ratio"])?;
    for row in &report.outside {
        w.write_record([row.t, row.par, row.perp, row.sum, row.total, row.ratio].map(num))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `manifest.txt`. Everything except the `created_unix` line depends only on the inputs.
pub fn write_manifest(path: &Path, command: &str, config: &str, results: &[(String, String)]) -> Result<(), CliError> {
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut f = File::create(path)?;
    writeln!(f, "command = {command}")?;
    writeln!(f, "created_unix = {created}")?;
    writeln!(f, "[config]")?;
    f.write_all(config.as_bytes())?;
    writeln!(f, "[results]")?;
    for (k, v) in results {
        writeln!(f, "{k} = {v}")?;
    }
    Ok(())
}
