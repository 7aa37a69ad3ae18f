use super::{ResultRow, RunConfig};
use crate::error::{Error, Result};
use crate::solver::RunLog;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Column order of the results CSV.
pub const CSV_COLUMNS: [&str; 28] = [
    "kind",
    "name",
    "dim",
    "p",
    "q",
    "coarse_cells",
    "n_global_refinements",
    "strategy",
    "preconditioner",
    "material",
    "load",
    "load_scale",
    "seed",
    "threads",
    "n_elements",
    "n_dofs",
    "mv_time",
    "mv_time_per_dof",
    "flops_per_apply",
    "flops_per_dof",
    "storage_bytes",
    "storage_bytes_per_dof",
    "newton_iterations",
    "mean_cg_iterations",
    "cg_time",
    "solver_time_per_dof",
    "total_time",
    "timings",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// `.json` selects JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

/// Round-trip exact float text.
fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_record(row: &ResultRow) -> Vec<String> {
    let c: &RunConfig = &row.config;
    let m = &row.metrics;
    vec![
        row.kind.as_str().to_string(),
        c.name.clone(),
        c.dim.to_string(),
        c.p.to_string(),
        c.n_q().to_string(),
        c.coarse_cells.to_string(),
        c.n_global_refinements.to_string(),
        c.strategy.as_str().to_string(),
        c.preconditioner.as_str().to_string(),
        c.material.as_str().to_string(),
        c.load.as_str().to_string(),
        float(c.load_scale),
        c.seed.to_string(),
        c.threads.to_string(),
        m.n_elements.to_string(),
        m.n_dofs.to_string(),
        float(m.mv_time),
        float(m.mv_time_per_dof),
        m.flops_per_apply.to_string(),
        float(m.flops_per_dof),
        m.storage_bytes.to_string(),
        float(m.storage_bytes_per_dof),
        m.newton_iterations.to_string(),
        float(m.mean_cg_iterations),
        float(m.cg_time),
        float(m.solver_time_per_dof),
        float(m.total_time),
        c.timings.to_string(),
    ]
}

/// Write `rows` in `format`. An empty slice gives a header-only CSV or `[]`.
pub fn write_results<W: Write>(rows: &[ResultRow], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for row in rows {
                w.write_record(csv_record(row))?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Write `rows` to `path`, picking the format from the extension.
pub fn emit_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = File::create(path)?;
    write_results(rows, OutputFormat::from_path(path), BufWriter::new(file))
}

/// Inverse of the JSON output.
pub fn parse_results_json(text: &str) -> Result<Vec<ResultRow>> {
    let rows: Vec<ResultRow> = serde_json::from_str(text)?;
    for row in &rows {
        row.config.validate()?;
    }
    Ok(rows)
}

/// One CSV line per Newton iteration.
pub fn write_run_log<W: Write>(log: &RunLog, timings: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "load_step",
        "load_fraction",
        "iteration",
        "residual_norm",
        "update_norm",
        "decrement",
        "cg_iterations",
        "cg_time",
        "setup_time",
    ])?;
    let t = |v: f64| float(if timings { v } else { 0.0 });
    for r in &log.iterations {
        w.write_record([
            r.load_step.to_string(),
            float(r.load_fraction),
            r.iteration.to_string(),
            float(r.residual_norm),
            float(r.update_norm),
            float(r.decrement),
            r.cg_iterations.to_string(),
            t(r.cg_time),
            t(r.setup_time),
        ])?;
    }
    w.flush().map_err(Error::from)
}
