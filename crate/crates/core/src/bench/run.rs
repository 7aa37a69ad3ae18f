use super::RunConfig;
use crate::error::{Error, Result};
use crate::flops::FlopTally;
use crate::linalg::LinearOperator;
use crate::mesh::{build_benchmark_mesh, MeshHierarchy};
use crate::multigrid::{GmgOptions, GmgPreconditioner, MultigridHierarchy};
use crate::operators::{compute_residual, Execution, Strategy, TangentOperator};
use crate::solver::{apply_load_fraction, cg, newton_solve, NewtonSettings, Problem, RunLog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

/// Matrix-vector products averaged per timing.
pub const MV_REPETITIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Mv,
    Solve,
}

impl RunKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RunKind::Mv => "mv",
            RunKind::Solve => "solve",
        }
    }
}

/// Measured quantities of one run; entries a run does not measure are 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub n_elements: usize,
    pub n_dofs: usize,
    /// Mean wall time of one tangent application (s).
    pub mv_time: f64,
    pub mv_time_per_dof: f64,
    pub flops_per_apply: u64,
    pub flops_per_dof: f64,
    /// Quadrature-point cache and geometry (matrix-free) or CSR arrays (matrix-based).
    pub storage_bytes: usize,
    pub storage_bytes_per_dof: f64,
    pub newton_iterations: usize,
    pub mean_cg_iterations: f64,
    /// Total CG wall time over the Newton history (s).
    pub cg_time: f64,
    pub solver_time_per_dof: f64,
    /// Whole run including setup (s).
    pub total_time: f64,
}

impl MetricsRecord {
    /// Zero every wall-clock field.
    pub fn without_timings(mut self) -> Self {
        self.mv_time = 0.0;
        self.mv_time_per_dof = 0.0;
        self.cg_time = 0.0;
        self.solver_time_per_dof = 0.0;
        self.total_time = 0.0;
        self
    }
}

/// Config and metrics of one run, the unit of CSV/JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub kind: RunKind,
    pub config: RunConfig,
    pub metrics: MetricsRecord,
}

fn problem(config: &RunConfig) -> Result<Problem> {
    config.validate()?;
    let mesh = build_benchmark_mesh(config.dim, config.coarse_cells, &config.material.inclusions(config.dim))?;
    let mut meshes = MeshHierarchy::new(mesh);
    meshes.refine_globally(config.n_global_refinements);
    let hierarchy = MultigridHierarchy::with_quadrature(&meshes, config.p, config.q)?;
    Ok(Problem {
        hierarchy: Arc::new(hierarchy),
        materials: config.material.materials(),
        traction: config.traction(),
        strategy: config.strategy,
        preconditioner: config.preconditioner,
        gmg: GmgOptions {
            seed: config.seed,
            execution: execution(config),
            ..GmgOptions::default()
        },
    })
}

fn execution(config: &RunConfig) -> Execution {
    if config.threads > 1 {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

/// Run `f` on a pool with the configured worker count.
fn pinned<T: Send>(config: &RunConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if config.threads <= 1 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// First Newton iterate of load step 1: one GMG-preconditioned solve of
/// `K(0) Δu = −F(0)`. Uses the tensor2 operator whatever the configured
/// strategy, since the state does not depend on it.
pub fn representative_state(problem: &Problem) -> Result<Vec<f64>> {
    let settings = NewtonSettings::default();
    let space = problem.hierarchy.finest();
    let n = space.n_dofs();
    let zero = vec![0.0; n];
    let traction = apply_load_fraction(1, settings.n_load_steps, &problem.traction);
    let f = compute_residual(space, &problem.materials, &zero, &traction)?;
    let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
    let gmg = GmgPreconditioner::build(problem.hierarchy.clone(), &problem.materials, &zero, Strategy::Tensor2, problem.gmg)?;
    let mut du = vec![0.0; n];
    let report = cg(gmg.finest_operator(), &rhs, &mut du, settings.linear_relative_tolerance, Some(&gmg), None)?;
    if !report.converged {
        return Err(Error::LinearSolver {
            iterations: report.iterations,
            residual: report.relative_residual,
        });
    }
    Ok(du)
}

/// Time [`MV_REPETITIONS`] tangent applications at the representative
/// state and count FLOPs and storage.
pub fn run_mv_benchmark(config: &RunConfig) -> Result<MetricsRecord> {
    pinned(config, || {
        let start = Instant::now();
        let problem = problem(config)?;
        let space = problem.hierarchy.finest().clone();
        let n = space.n_dofs();
        let u = representative_state(&problem)?;
        let op = TangentOperator::build(space.clone(), &problem.materials, &u, config.strategy, execution(config))?;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let mut y = vec![0.0; n];
        let mut tally = FlopTally::new();
        op.apply_counted(&x, &mut y, &mut tally);
        let t = Instant::now();
        for _ in 0..MV_REPETITIONS {
            op.apply(&x, &mut y);
        }
        let mv_time = t.elapsed().as_secs_f64() / MV_REPETITIONS as f64;

        let storage = op.memory_bytes();
        let record = MetricsRecord {
            n_elements: space.mesh().n_elements(),
            n_dofs: n,
            mv_time,
            mv_time_per_dof: mv_time / n as f64,
            flops_per_apply: tally.get(),
            flops_per_dof: tally.get() as f64 / n as f64,
            storage_bytes: storage,
            storage_bytes_per_dof: storage as f64 / n as f64,
            total_time: start.elapsed().as_secs_f64(),
            ..MetricsRecord::default()
        };
        Ok(if config.timings { record } else { record.without_timings() })
    })
}

/// Full load-stepped Newton solve. `log` holds the iteration history,
/// including the iterations before a failure.
pub fn run_solver_benchmark(config: &RunConfig, log: &mut RunLog) -> Result<MetricsRecord> {
    pinned(config, || {
        let start = Instant::now();
        let problem = problem(config)?;
        let space = problem.hierarchy.finest().clone();
        let n = space.n_dofs();
        newton_solve(&problem, &NewtonSettings::default(), log)?;
        let cg_time = log.total_cg_time();
        let record = MetricsRecord {
            n_elements: space.mesh().n_elements(),
            n_dofs: n,
            newton_iterations: log.iterations.len(),
            mean_cg_iterations: log.mean_cg_iterations(),
            cg_time,
            solver_time_per_dof: cg_time / n as f64,
            total_time: start.elapsed().as_secs_f64(),
            ..MetricsRecord::default()
        };
        Ok(if config.timings { record } else { record.without_timings() })
    })
}
