use clap::{Args, Parser, Subcommand};
use hyperfree::bench::{
    emit_results, run_mv_benchmark, run_solver_benchmark, write_results, write_run_log, OutputFormat, ResultRow,
    RunConfig, RunKind,
};
use hyperfree::solver::RunLog;
use hyperfree::verify::run_verification;
use hyperfree::{Error, Result};
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Matrix-free finite-strain hyperelasticity benchmarks.
///
/// Exit codes: 0 ok, 2 configuration, 3 solver or failed check, 4 I/O.
#[derive(Parser)]
#[command(name = "hyperfree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time and count one tangent application.
    BenchMv(RunArgs),
    /// Full load-stepped Newton solve.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Per-iteration CSV log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run the invariant suite and print one CSV row per check.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset used as the base instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    allow_underintegration: bool,
    #[arg(long)]
    coarse_cells: Option<usize>,
    #[arg(long)]
    refinements: Option<usize>,
    /// scalar, tensor2, tensor4 or matrix_based
    #[arg(long)]
    strategy: Option<String>,
    /// gmg, diag or none
    #[arg(long)]
    preconditioner: Option<String>,
    /// benchmark or homogeneous
    #[arg(long)]
    material: Option<String>,
    /// benchmark, uniaxial or zero
    #[arg(long)]
    load: Option<String>,
    /// Multiplier on the load preset.
    #[arg(long)]
    load_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write 0 in every timing column.
    #[arg(long)]
    no_timings: bool,
    /// Results file; `.json` selects JSON, anything else CSV. Default stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_json_str(&text)?
            }
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => RunConfig::default(),
        };
        if let Some(v) = self.dim {
            c.dim = v;
        }
        if let Some(v) = self.p {
            c.p = v;
        }
        if self.q.is_some() {
            c.q = self.q;
        }
        c.allow_underintegration |= self.allow_underintegration;
        if let Some(v) = self.coarse_cells {
            c.coarse_cells = v;
        }
        if let Some(v) = self.refinements {
            c.n_global_refinements = v;
        }
        if let Some(v) = &self.strategy {
            c.strategy = v.parse()?;
        }
        if let Some(v) = &self.preconditioner {
            c.preconditioner = v.parse()?;
        }
        if let Some(v) = &self.material {
            c.material = v.parse()?;
        }
        if let Some(v) = &self.load {
            c.load = v.parse()?;
        }
        if let Some(v) = self.load_scale {
            c.load_scale = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        if self.no_timings {
            c.timings = false;
        }
        if self.out.is_some() {
            c.output = self.out.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(rows: &[ResultRow], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => emit_results(rows, p),
        None => write_results(rows, OutputFormat::Csv, io::stdout().lock()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BenchMv(args) => {
            let config = args.resolve()?;
            let metrics = run_mv_benchmark(&config)?;
            let path = config.output.clone();
            emit(
                &[ResultRow {
                    kind: RunKind::Mv,
                    config,
                    metrics,
                }],
                path.as_deref(),
            )
        }
        Command::Solve { run, log } => {
            let config = run.resolve()?;
            let mut run_log = RunLog::default();
            let outcome = run_solver_benchmark(&config, &mut run_log);
            // the log is most useful when the solve failed
            if let Some(path) = &log {
                write_run_log(&run_log, config.timings, BufWriter::new(File::create(path)?))?;
            }
            let metrics = outcome?;
            let path = config.output.clone();
            emit(
                &[ResultRow {
                    kind: RunKind::Solve,
                    config,
                    metrics,
                }],
                path.as_deref(),
            )
        }
        Command::Verify { out } => {
            let report = run_verification();
            match &out {
                Some(p) => report.write_csv(BufWriter::new(File::create(p)?))?,
                None => report.write_csv(io::stdout().lock())?,
            }
            let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Error::Verification(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
