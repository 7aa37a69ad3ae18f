//! Benchmark configuration, drivers and result output.

mod config;
mod output;
mod run;

pub use config::{LoadPreset, MaterialPreset, RunConfig};
pub use output::{emit_results, parse_results_json, write_results, write_run_log, OutputFormat, CSV_COLUMNS};
pub use run::{
    representative_state, run_mv_benchmark, run_solver_benchmark, MetricsRecord, ResultRow, RunKind, MV_REPETITIONS,
};
