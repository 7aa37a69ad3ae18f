//! Self-checks run by `hyperfree verify`.
//!
//! Each check reduces to one number compared against a fixed tolerance.
//! Everything runs sequentially with fixed seeds, so the report is
//! reproducible byte for byte.

use crate::bench::{run_solver_benchmark, RunConfig};
use crate::error::Result;
use crate::fespace::{gauss_legendre, Basis1D, FeSpace, Scratch, SumFactorization};
use crate::flops::FlopTally;
use crate::linalg::{dot, LinearOperator};
use crate::material::{kinematics_from_deformation_gradient, MaterialSet, NeoHookeanParams};
use crate::mesh::{build_benchmark_mesh, MeshHierarchy, DOMAIN_SIDE};
use crate::multigrid::{GmgOptions, GmgPreconditioner, MultigridHierarchy};
use crate::operators::{assemble_matrix, compute_residual, energy, Execution, Strategy, TangentOperator, Traction};
use crate::solver::RunLog;
use crate::tensor::{self, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            relation: Relation::AtMost,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            relation: Relation::AtLeast,
        }
    }

    /// NaN never passes.
    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.value <= self.tolerance,
            Relation::AtLeast => self.value >= self.tolerance,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "value", "relation", "tolerance", "pass"])?;
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                format!("{:.16e}", c.value),
                match c.relation {
                    Relation::AtMost => "<=".into(),
                    Relation::AtLeast => ">=".into(),
                },
                format!("{:.16e}", c.tolerance),
                c.passed().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run every check. Failures inside a check (say an inverted element) turn
/// into a NaN value rather than aborting the suite.
pub fn run_verification() -> VerifyReport {
    let mut checks = Vec::new();
    for (dim, n, p) in [(2, 4, 1), (2, 4, 2), (2, 4, 3), (3, 2, 1), (3, 2, 2)] {
        checks.push(Check::at_most(
            format!("strategies_match_assembled_{dim}d_p{p}"),
            or_nan(strategy_mismatch(dim, n, p)),
            1e-10,
        ));
    }
    checks.push(Check::at_least("tangent_fd_slope_2d", or_nan(tangent_fd_slope()), 1.8));
    checks.push(Check::at_most("residual_is_energy_gradient_2d", or_nan(energy_gradient_mismatch()), 1e-6));
    checks.push(Check::at_most("kirchhoff_is_push_forward", kirchhoff_mismatch(), 1e-12));
    checks.push(Check::at_most("tangent_closed_form_matches_full", tangent_mismatch(), 1e-12));
    let mut sf = 0.0f64;
    for p in 1..=8 {
        sf = sf.max(sum_factorization_mismatch(2, p));
    }
    for p in 1..=4 {
        sf = sf.max(sum_factorization_mismatch(3, p));
    }
    checks.push(Check::at_most("sum_factorization_matches_dense", sf, 1e-13));
    for p in 1..=3 {
        let (transpose, reproduction) = or_nan2(transfer_errors(p));
        checks.push(Check::at_most(format!("transfer_transpose_p{p}"), transpose, 1e-12));
        checks.push(Check::at_most(format!("prolongation_reproduces_q1_p{p}"), reproduction, 1e-12));
    }
    let counts: Vec<usize> = [Strategy::Scalar, Strategy::Tensor2, Strategy::Tensor4]
        .iter()
        .map(|s| s.payload_per_qpoint(3))
        .collect();
    let count_error = counts.iter().zip([1usize, 8, 27]).map(|(a, b)| a.abs_diff(b)).sum::<usize>();
    checks.push(Check::at_most("payload_counts_3d", count_error as f64, 0.0));
    checks.push(Check::at_most("storage_order_violations_2d_p2", or_nan(storage_violations()), 0.0));
    checks.push(Check::at_most("dof_count_mismatch", or_nan(dof_count_mismatch()), 0.0));
    checks.push(Check::at_most("flop_count_spread", or_nan(flop_spread()), 0.0));
    checks.push(Check::at_most("v_cycle_asymmetry", or_nan(v_cycle_asymmetry()), 1e-8));
    let (steps, worst) = or_nan2(smoke_solve());
    checks.push(Check::at_least("smoke_solve_steps", steps, 5.0));
    checks.push(Check::at_most("smoke_solve_max_iterations", worst, 30.0));
    VerifyReport { checks }
}

fn or_nan(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

fn or_nan2(r: Result<(f64, f64)>) -> (f64, f64) {
    r.unwrap_or((f64::NAN, f64::NAN))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.gen::<f64>() - 0.5).collect()
}

fn benchmark_space(dim: usize, n: usize, p: usize) -> Result<Arc<FeSpace>> {
    let mesh = build_benchmark_mesh(dim, n, &crate::mesh::benchmark_inclusions(dim))?;
    Ok(Arc::new(FeSpace::new(Arc::new(mesh), p, None)?))
}

/// Smooth non-polynomial displacement with gradient of order `strain`,
/// zero on the clamped face.
fn smooth_displacement(space: &FeSpace, strain: f64) -> Vec<f64> {
    let dim = space.dim();
    let mut u = space.dofs().interpolate(|x| {
        let s = x[0] / DOMAIN_SIDE;
        let t = x[1] / DOMAIN_SIDE;
        (0..dim)
            .map(|c| {
                let w = 1.0 + 0.3 * c as f64;
                strain * DOMAIN_SIDE * t * (0.5 * w + 0.4 * (3.0 * s + w).sin() * (2.0 * t).cos())
            })
            .collect()
    });
    space.constraints().apply_to(&mut u);
    u
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    num / dot(b, b).sqrt().max(f64::MIN_POSITIVE)
}

fn applied(op: &dyn LinearOperator, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    op.apply(x, &mut y);
    y
}

fn strategy_mismatch(dim: usize, n: usize, p: usize) -> Result<f64> {
    let space = benchmark_space(dim, n, p)?;
    let mats = MaterialSet::benchmark();
    let u = smooth_displacement(&space, 0.1);
    let reference = assemble_matrix(&space, &mats, &u)?;
    let ops = [Strategy::Scalar, Strategy::Tensor2, Strategy::Tensor4]
        .into_iter()
        .map(|s| TangentOperator::build(space.clone(), &mats, &u, s, Execution::Sequential))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for k in 0..3 {
        let x = random_vector(space.n_dofs(), 100 + k);
        let y = applied(&reference, &x);
        for op in &ops {
            worst = worst.max(rel_err(&applied(op, &x), &y));
        }
    }
    Ok(worst)
}

fn shifted(u: &[f64], v: &[f64], e: f64) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| a + e * b).collect()
}

/// Observed order of the central-difference error of `F` against `K v`.
fn tangent_fd_slope() -> Result<f64> {
    let space = benchmark_space(2, 4, 2)?;
    let mats = MaterialSet::benchmark();
    let t = Traction::zero();
    let u = smooth_displacement(&space, 0.4);
    let mut v = random_vector(space.n_dofs(), 7);
    space.constraints().apply_to(&mut v);
    let op = TangentOperator::build(space.clone(), &mats, &u, Strategy::Tensor2, Execution::Sequential)?;
    let kv = applied(&op, &v);
    let scale = dot(&u, &u).sqrt() / dot(&v, &v).sqrt();
    let mut errs = Vec::new();
    for eps in [1e-3, 1e-4] {
        let e = eps * scale;
        let rp = compute_residual(&space, &mats, &shifted(&u, &v, e), &t)?;
        let rm = compute_residual(&space, &mats, &shifted(&u, &v, -e), &t)?;
        let d: Vec<f64> = rp.iter().zip(&rm).zip(&kv).map(|((a, b), c)| (a - b) / (2.0 * e) - c).collect();
        errs.push(dot(&d, &d).sqrt());
    }
    Ok((errs[0] / errs[1]).log10())
}

fn energy_gradient_mismatch() -> Result<f64> {
    let space = benchmark_space(2, 4, 2)?;
    let mats = MaterialSet::benchmark();
    let t = Traction::benchmark(2);
    let u = smooth_displacement(&space, 0.05);
    let mut v = random_vector(space.n_dofs(), 8);
    space.constraints().apply_to(&mut v);
    let r = compute_residual(&space, &mats, &u, &t)?;
    let e = 1e-4 * dot(&u, &u).sqrt() / dot(&v, &v).sqrt();
    let fd = (energy(&space, &mats, &shifted(&u, &v, e), &t)? - energy(&space, &mats, &shifted(&u, &v, -e), &t)?) / (2.0 * e);
    let exact = dot(&r, &v);
    Ok((fd - exact).abs() / exact.abs())
}

fn random_f(r: &mut ChaCha8Rng) -> Mat<3> {
    loop {
        let mut f = tensor::identity::<3>();
        for row in f.iter_mut() {
            for x in row.iter_mut() {
                *x += r.gen_range(-0.3..0.3);
            }
        }
        let j = tensor::det(&f);
        if (0.6..=1.6).contains(&j) {
            return f;
        }
    }
}

fn frobenius(m: &Mat<3>) -> f64 {
    tensor::ddot(m, m).sqrt()
}

fn kirchhoff_mismatch() -> f64 {
    let params = MaterialSet::benchmark().matrix;
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f = random_f(&mut r);
        let Ok(kin) = kinematics_from_deformation_gradient(&f) else {
            return f64::NAN;
        };
        let tau = params.kirchhoff_stress(&kin);
        let s = params.second_pk_stress(&tensor::mul_at(&f, &f));
        let pushed = tensor::mul_bt(&tensor::mul(&f, &s), &f);
        let diff = tensor::add(&tau, &tensor::scale(&pushed, -1.0));
        worst = worst.max(frobenius(&diff) / frobenius(&pushed));
    }
    worst
}

fn tangent_mismatch() -> f64 {
    let mut r = rng(10);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let Ok(params) = NeoHookeanParams::new(r.gen_range(0.1..2.0), r.gen_range(0.1..2.0)) else {
            return f64::NAN;
        };
        let j = r.gen_range(0.6..1.6);
        let mut g = tensor::zero::<3>();
        for a in 0..3 {
            for b in a..3 {
                g[a][b] = r.gen_range(-1.0..1.0);
                g[b][a] = g[a][b];
            }
        }
        let closed = params.tangent_action(&g, j);
        let full = params.material_tangent_full(3, j).contract(&g);
        let diff = tensor::add(&closed, &tensor::scale(&full, -1.0));
        worst = worst.max(frobenius(&diff) / frobenius(&full));
    }
    worst
}

/// Factorized kernels against dense tensor-product tables built from the
/// 1D basis.
fn sum_factorization_mismatch(dim: usize, p: usize) -> f64 {
    let Ok(quad) = gauss_legendre(p + 1) else {
        return f64::NAN;
    };
    let basis = Basis1D::new(p, quad);
    let sf = SumFactorization::new(&basis, dim);
    let (n, nq) = (p + 1, basis.n_q_1d());
    let (nd, nqd) = (sf.n_dofs(), sf.n_q());
    let digit = |k: usize, m: usize, d: usize| (k / m.pow(d as u32)) % m;
    // dense[g][q * nd + a]: g = 0 value, g = 1.. derivative along g - 1
    let mut dense = vec![vec![1.0; nqd * nd]; dim + 1];
    for q in 0..nqd {
        for a in 0..nd {
            for d in 0..dim {
                let (qi, ai) = (digit(q, nq, d), digit(a, n, d));
                let v = basis.values()[qi * n + ai];
                let dv = basis.derivatives()[qi * n + ai];
                for (g, table) in dense.iter_mut().enumerate() {
                    table[q * nd + a] *= if g == d + 1 { dv } else { v };
                }
            }
        }
    }
    let mut scratch = Scratch::new(&basis, dim);
    let mut tally = FlopTally::new();
    let u = random_vector(nd, 20 + p as u64);
    let mut vals = vec![0.0; nqd];
    let mut grads = vec![0.0; dim * nqd];
    sf.evaluate(&u, Some(&mut vals), Some(&mut grads), &mut scratch, &mut tally);
    let eval = |t: &[f64]| -> Vec<f64> { (0..nqd).map(|q| (0..nd).map(|a| t[q * nd + a] * u[a]).sum()).collect() };
    let mut worst = rel_err(&vals, &eval(&dense[0]));
    for d in 0..dim {
        worst = worst.max(rel_err(&grads[d * nqd..(d + 1) * nqd], &eval(&dense[d + 1])));
    }
    let wv = random_vector(nqd, 30 + p as u64);
    let wg = random_vector(dim * nqd, 40 + p as u64);
    let mut out = vec![0.0; nd];
    sf.integrate(Some(&wv), Some(&wg), &mut out, &mut scratch, &mut tally);
    let expected: Vec<f64> = (0..nd)
        .map(|a| {
            (0..nqd)
                .map(|q| dense[0][q * nd + a] * wv[q] + (0..dim).map(|d| dense[d + 1][q * nd + a] * wg[d * nqd + q]).sum::<f64>())
                .sum()
        })
        .collect();
    worst.max(rel_err(&out, &expected))
}

/// Worst transpose-identity defect and worst reproduction error of
/// `u = y (1 + x)` over the transfers of a three-level 2D hierarchy.
fn transfer_errors(p: usize) -> Result<(f64, f64)> {
    let mut meshes = MeshHierarchy::new(build_benchmark_mesh(2, 2, &[])?);
    meshes.refine_globally(2);
    let h = MultigridHierarchy::new(&meshes, p)?;
    let field = |x: &[f64; 3]| {
        let (s, t) = (x[0] / DOMAIN_SIDE, x[1] / DOMAIN_SIDE);
        vec![t * (1.0 + s), 2.0 * t * (1.0 - s)]
    };
    let (mut transpose, mut reproduction) = (0.0f64, 0.0f64);
    for level in 1..h.n_levels() {
        let tr = h.transfer(level);
        let coarse = h.space(level - 1);
        let fine = h.space(level);
        for k in 0..5 {
            let mut xc = random_vector(tr.n_coarse(), 50 + k);
            coarse.constraints().apply_to(&mut xc);
            let mut yf = random_vector(tr.n_fine(), 60 + k);
            fine.constraints().apply_to(&mut yf);
            let mut pxc = vec![0.0; tr.n_fine()];
            tr.prolongate(&xc, &mut pxc);
            let mut ryf = vec![0.0; tr.n_coarse()];
            tr.restrict(&yf, &mut ryf);
            let (a, b) = (dot(&pxc, &yf), dot(&xc, &ryf));
            transpose = transpose.max((a - b).abs() / a.abs().max(b.abs()));
        }
        let uc = coarse.dofs().interpolate(field);
        let uf = fine.dofs().interpolate(field);
        let mut pu = vec![0.0; tr.n_fine()];
        tr.prolongate(&uc, &mut pu);
        reproduction = reproduction.max(rel_err(&pu, &uf));
    }
    Ok((transpose, reproduction))
}

fn storage_violations() -> Result<f64> {
    let space = benchmark_space(2, 4, 2)?;
    let mats = MaterialSet::benchmark();
    let u = smooth_displacement(&space, 0.05);
    let bytes = [Strategy::Scalar, Strategy::Tensor2, Strategy::Tensor4, Strategy::MatrixBased]
        .into_iter()
        .map(|s| TangentOperator::build(space.clone(), &mats, &u, s, Execution::Sequential).map(|op| op.memory_bytes()))
        .collect::<Result<Vec<_>>>()?;
    Ok(bytes.windows(2).filter(|w| w[0] >= w[1]).count() as f64)
}

fn dof_count_mismatch() -> Result<f64> {
    let mut worst = 0usize;
    for (dim, m, p) in [(2, 4, 1), (2, 4, 3), (2, 8, 2), (3, 2, 2), (3, 4, 1)] {
        let n = benchmark_space(dim, m, p)?.n_dofs();
        worst = worst.max(n.abs_diff((m * p + 1).pow(dim as u32) * dim));
    }
    Ok(worst as f64)
}

/// Spread of the counted FLOPs of one apply over repeated and parallel runs.
fn flop_spread() -> Result<f64> {
    let space = benchmark_space(2, 4, 3)?;
    let mats = MaterialSet::benchmark();
    let u = smooth_displacement(&space, 0.05);
    let x = random_vector(space.n_dofs(), 70);
    let mut y = vec![0.0; x.len()];
    let mut counts = Vec::new();
    for exec in [Execution::Sequential, Execution::Sequential, Execution::Parallel] {
        for s in [Strategy::Scalar, Strategy::Tensor2, Strategy::Tensor4] {
            let op = TangentOperator::build(space.clone(), &mats, &u, s, exec)?;
            let mut tally = FlopTally::new();
            op.apply_counted(&x, &mut y, &mut tally);
            counts.push((s, tally.get()));
        }
    }
    let mut spread = 0u64;
    for (s, c) in &counts {
        for (s2, c2) in &counts {
            if s == s2 {
                spread = spread.max(c.abs_diff(*c2));
            }
        }
    }
    Ok(spread as f64)
}

fn v_cycle_asymmetry() -> Result<f64> {
    let mut meshes = MeshHierarchy::new(build_benchmark_mesh(2, 2, &crate::mesh::benchmark_inclusions(2))?);
    meshes.refine_globally(2);
    let h = Arc::new(MultigridHierarchy::new(&meshes, 2)?);
    let u = smooth_displacement(h.finest(), 0.05);
    let gmg = GmgPreconditioner::build(h.clone(), &MaterialSet::benchmark(), &u, Strategy::Tensor2, GmgOptions::default())?;
    let mut x = random_vector(h.finest().n_dofs(), 80);
    let mut y = random_vector(h.finest().n_dofs(), 81);
    h.finest().constraints().apply_to(&mut x);
    h.finest().constraints().apply_to(&mut y);
    let (bx, by) = (applied(&gmg, &x), applied(&gmg, &y));
    let (a, b) = (dot(&y, &bx), dot(&x, &by));
    Ok((a - b).abs() / a.abs().max(b.abs()))
}

/// Load steps completed and the most Newton iterations any step needed.
fn smoke_solve() -> Result<(f64, f64)> {
    let config = RunConfig {
        timings: false,
        ..RunConfig::preset("smoke")?
    };
    let mut log = RunLog::default();
    run_solver_benchmark(&config, &mut log)?;
    let worst = log.steps.iter().map(|s| s.iterations).max().unwrap_or(0);
    Ok((log.steps.len() as f64, worst as f64))
}
