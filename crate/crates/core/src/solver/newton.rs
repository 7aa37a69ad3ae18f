use super::cg::cg;
use crate::error::{Error, Result};
use crate::linalg::{norm, LinearOperator};
use crate::material::MaterialSet;
use crate::multigrid::{GmgOptions, GmgPreconditioner, MultigridHierarchy};
use crate::operators::{compute_residual, Strategy, TangentOperator, Traction};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    pub n_load_steps: usize,
    /// `‖Δu‖₂` bound (mm).
    pub update_tolerance: f64,
    pub residual_relative_tolerance: f64,
    /// `‖F‖₂` bound (N).
    pub residual_absolute_tolerance: f64,
    pub linear_relative_tolerance: f64,
    pub max_iterations: usize,
    /// How often a load increment may be halved after an element inversion.
    pub max_bisections: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            n_load_steps: 5,
            update_tolerance: 1e-5,
            residual_relative_tolerance: 1e-8,
            residual_absolute_tolerance: 1e-8,
            linear_relative_tolerance: 1e-6,
            max_iterations: 30,
            max_bisections: 1,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.update_tolerance,
            self.residual_relative_tolerance,
            self.residual_absolute_tolerance,
            self.linear_relative_tolerance,
        ];
        if positive.iter().any(|t| !(*t > 0.0)) || self.n_load_steps == 0 || self.max_iterations == 0 {
            return Err(Error::Config("Newton tolerances, load steps and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerKind {
    Gmg,
    Diag,
    None,
}

impl PreconditionerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PreconditionerKind::Gmg => "gmg",
            PreconditionerKind::Diag => "diag",
            PreconditionerKind::None => "none",
        }
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PreconditionerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gmg" => Ok(PreconditionerKind::Gmg),
            "diag" | "jacobi" => Ok(PreconditionerKind::Diag),
            "none" => Ok(PreconditionerKind::None),
            other => Err(Error::Config(format!("unknown preconditioner '{other}'"))),
        }
    }
}

/// Jacobi preconditioner `z = D⁻¹ r`.
#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(diagonal: &[f64]) -> Self {
        Jacobi {
            inv_diag: diagonal.iter().map(|d| 1.0 / d).collect(),
        }
    }
}

impl LinearOperator for Jacobi {
    fn n(&self) -> usize {
        self.inv_diag.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((y, x), d) in y.iter_mut().zip(x).zip(&self.inv_diag) {
            *y = x * d;
        }
    }
}

/// Everything that defines the nonlinear problem and how its linearizations
/// are solved.
#[derive(Debug, Clone)]
pub struct Problem {
    pub hierarchy: Arc<MultigridHierarchy>,
    pub materials: MaterialSet,
    /// Full load; step `s` of `n` applies `s/n` of it.
    pub traction: Traction,
    pub strategy: Strategy,
    pub preconditioner: PreconditionerKind,
    pub gmg: GmgOptions,
}

/// One Newton iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub load_step: usize,
    pub load_fraction: f64,
    pub iteration: usize,
    /// `‖F‖₂` after the update.
    pub residual_norm: f64,
    pub update_norm: f64,
    /// Newton decrement `sqrt(Δu·(−F))`, the energy norm of the update.
    pub decrement: f64,
    pub cg_iterations: usize,
    pub cg_time: f64,
    /// Time to build the tangent and preconditioner.
    pub setup_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub load_step: usize,
    pub load_fraction: f64,
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    /// Set when this increment was reached after halving a failed one.
    pub bisected: bool,
}

/// Structured record of a solve; kept by the caller so it survives a
/// failed solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub iterations: Vec<IterationRecord>,
    pub steps: Vec<StepSummary>,
}

impl RunLog {
    pub fn mean_cg_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            return 0.0;
        }
        self.iterations.iter().map(|r| r.cg_iterations as f64).sum::<f64>() / self.iterations.len() as f64
    }

    pub fn total_cg_time(&self) -> f64 {
        self.iterations.iter().map(|r| r.cg_time).sum()
    }

    /// Update norms of one load step, in order.
    pub fn update_norms(&self, load_step: usize) -> Vec<f64> {
        self.iterations
            .iter()
            .filter(|r| r.load_step == load_step)
            .map(|r| r.update_norm)
            .collect()
    }

    pub fn decrements(&self, load_step: usize) -> Vec<f64> {
        self.iterations
            .iter()
            .filter(|r| r.load_step == load_step)
            .map(|r| r.decrement)
            .collect()
    }
}

/// `magnitude · step/total · unit(direction)`.
pub fn apply_load_fraction(step: usize, total: usize, full: &Traction) -> Traction {
    assert!(total > 0 && step <= total, "load step {step} of {total}");
    full.scaled(step as f64 / total as f64)
}

/// Estimated order of convergence from the last three entries of a
/// decreasing error sequence: `ln(e₃/e₂) / ln(e₂/e₁)`.
pub fn convergence_order(errors: &[f64]) -> Option<f64> {
    let n = errors.len();
    if n < 3 {
        return None;
    }
    let (e1, e2, e3) = (errors[n - 3], errors[n - 2], errors[n - 1]);
    if !(e1 > 0.0 && e2 > 0.0 && e3 > 0.0) || e2 >= e1 {
        return None;
    }
    Some((e3 / e2).ln() / (e2 / e1).ln())
}

/// Solve the load-stepped problem from `u = 0`, appending to `log`.
pub fn newton_solve(problem: &Problem, settings: &NewtonSettings, log: &mut RunLog) -> Result<Vec<f64>> {
    settings.validate()?;
    let n = problem.hierarchy.finest().n_dofs();
    let mut u = vec![0.0; n];
    let total = settings.n_load_steps;
    for step in 1..=total {
        let from = (step - 1) as f64 / total as f64;
        let to = step as f64 / total as f64;
        solve_increment(problem, settings, &mut u, step, from, to, 0, log)?;
    }
    Ok(u)
}

#[allow(clippy::too_many_arguments)]
fn solve_increment(
    problem: &Problem,
    settings: &NewtonSettings,
    u: &mut Vec<f64>,
    step: usize,
    from: f64,
    to: f64,
    depth: usize,
    log: &mut RunLog,
) -> Result<()> {
    let mut trial = u.clone();
    match newton_at_load(problem, settings, &mut trial, step, to, depth > 0, log) {
        Ok(()) => {
            *u = trial;
            Ok(())
        }
        Err(Error::NonPositiveJacobian { .. }) if depth < settings.max_bisections => {
            let mid = 0.5 * (from + to);
            log::info!("element inversion in load step {step}; halving increment to {mid:.4}");
            solve_increment(problem, settings, u, step, from, mid, depth + 1, log)?;
            solve_increment(problem, settings, u, step, mid, to, depth + 1, log)
        }
        Err(e) => Err(e),
    }
}

fn newton_at_load(
    problem: &Problem,
    settings: &NewtonSettings,
    u: &mut [f64],
    step: usize,
    fraction: f64,
    bisected: bool,
    log: &mut RunLog,
) -> Result<()> {
    let space = problem.hierarchy.finest().clone();
    let traction = problem.traction.scaled(fraction);
    let mut f = compute_residual(&space, &problem.materials, u, &traction)?;
    let initial = norm(&f);
    let mut fnorm = initial;
    let residual_ok = |fnorm: f64| {
        fnorm <= settings.residual_absolute_tolerance || fnorm <= settings.residual_relative_tolerance * initial
    };
    let summary = |iterations: usize, fnorm: f64| StepSummary {
        load_step: step,
        load_fraction: fraction,
        iterations,
        initial_residual: initial,
        final_residual: fnorm,
        bisected,
    };
    if fnorm <= settings.residual_absolute_tolerance {
        log.steps.push(summary(0, fnorm));
        return Ok(());
    }

    let mut du = vec![0.0; u.len()];
    let mut rhs = vec![0.0; u.len()];
    for it in 1..=settings.max_iterations {
        let setup = std::time::Instant::now();
        let gmg;
        let jacobi;
        let own_op;
        let (op, pre): (&TangentOperator, Option<&dyn LinearOperator>) = match problem.preconditioner {
            PreconditionerKind::Gmg => {
                gmg = GmgPreconditioner::build(
                    problem.hierarchy.clone(),
                    &problem.materials,
                    u,
                    problem.strategy,
                    problem.gmg,
                )?;
                (gmg.finest_operator(), Some(&gmg as &dyn LinearOperator))
            }
            kind => {
                own_op = TangentOperator::build(space.clone(), &problem.materials, u, problem.strategy, problem.gmg.execution)?;
                if kind == PreconditionerKind::Diag {
                    jacobi = Jacobi::new(&own_op.diagonal());
                    (&own_op, Some(&jacobi as &dyn LinearOperator))
                } else {
                    (&own_op, None)
                }
            }
        };
        let setup_time = setup.elapsed().as_secs_f64();

        for (r, fi) in rhs.iter_mut().zip(&f) {
            *r = -fi;
        }
        du.iter_mut().for_each(|v| *v = 0.0);
        let report = cg(op, &rhs, &mut du, settings.linear_relative_tolerance, pre, None)?;
        if !report.converged {
            return Err(Error::LinearSolver {
                iterations: report.iterations,
                residual: report.relative_residual,
            });
        }
        for &d in space.constraints().dofs() {
            du[d] = 0.0;
        }
        let decrement = crate::linalg::dot(&rhs, &du).max(0.0).sqrt();
        for (ui, di) in u.iter_mut().zip(&du) {
            *ui += di;
        }
        f = compute_residual(&space, &problem.materials, u, &traction)?;
        fnorm = norm(&f);
        let unorm = norm(&du);
        log.iterations.push(IterationRecord {
            load_step: step,
            load_fraction: fraction,
            iteration: it,
            residual_norm: fnorm,
            update_norm: unorm,
            decrement,
            cg_iterations: report.iterations,
            cg_time: report.wall_time,
            setup_time,
        });
        log::debug!(
            "step {step} it {it}: |F| = {fnorm:.3e}, |du| = {unorm:.3e}, CG {} its",
            report.iterations
        );
        if unorm <= settings.update_tolerance && residual_ok(fnorm) {
            log.steps.push(summary(it, fnorm));
            return Ok(());
        }
    }
    log.steps.push(summary(settings.max_iterations, fnorm));
    Err(Error::MaxNewtonIterations {
        step,
        iterations: settings.max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_fractions() {
        let full = Traction::benchmark(2);
        assert_eq!(apply_load_fraction(5, 5, &full).vector(), [12.5e3, 0.0, 0.0]);
        assert_eq!(apply_load_fraction(0, 5, &full).vector(), [0.0; 3]);
    }

    #[test]
    fn order_of_quadratic_sequence() {
        let e = [1e-1, 1e-2, 1e-4];
        assert!((convergence_order(&e).unwrap() - 2.0).abs() < 1e-12);
        assert!(convergence_order(&e[..2]).is_none());
    }
}
