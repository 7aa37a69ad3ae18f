//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always print, and exits
//! non-zero if any criterion fails.

mod common;

use hyperfree::bench::{run_mv_benchmark, run_solver_benchmark, RunConfig};
use hyperfree::fespace::FeSpace;
use hyperfree::linalg::{dot, LinearOperator};
use hyperfree::material::{kinematics_from_deformation_gradient, MaterialSet, NeoHookeanParams};
use hyperfree::mesh::{benchmark_inclusions, build_benchmark_mesh, MeshHierarchy, DOMAIN_SIDE};
use hyperfree::multigrid::MultigridHierarchy;
use hyperfree::operators::{compute_residual, energy, Execution, Strategy, TangentOperator, Traction};
use hyperfree::solver::{convergence_order, PreconditionerKind, RunLog};
use hyperfree::tensor::{self, Mat};
use rand::Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn apply(op: &dyn LinearOperator, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    op.apply(x, &mut y);
    y
}

fn benchmark_space(dim: usize, n: usize, p: usize) -> Arc<FeSpace> {
    common::space(build_benchmark_mesh(dim, n, &benchmark_inclusions(dim)).unwrap(), p)
}

fn constrained_random(space: &FeSpace, seed: u64) -> Vec<f64> {
    let mut v = common::random_vector(space.n_dofs(), seed);
    space.constraints().apply_to(&mut v);
    v
}

/// All matrix-free strategies and the assembled matrix agree.
fn criterion_1() -> Outcome {
    let mats = MaterialSet::benchmark();
    let mut worst = 0.0f64;
    let mut j_range = (f64::INFINITY, f64::NEG_INFINITY);
    for (dim, n, p) in [(2, 4, 1), (2, 4, 2), (2, 4, 3), (3, 2, 1), (3, 2, 2)] {
        let space = benchmark_space(dim, n, p);
        let u = common::random_displacement(&space, 0.07, 40 + p as u64);
        let (lo, hi) = common::oracle::jacobian_range(&space, &u);
        j_range = (j_range.0.min(lo), j_range.1.max(hi));
        let reference = TangentOperator::build(space.clone(), &mats, &u, Strategy::MatrixBased, Execution::Sequential).unwrap();
        let ops: Vec<TangentOperator> = [Strategy::Scalar, Strategy::Tensor2, Strategy::Tensor4]
            .into_iter()
            .map(|s| TangentOperator::build(space.clone(), &mats, &u, s, Execution::Sequential).unwrap())
            .collect();
        for k in 0..10 {
            let x = common::random_vector(space.n_dofs(), 1000 + k);
            let y = apply(&reference, &x);
            for op in &ops {
                worst = worst.max(common::rel_err(&apply(op, &x), &y));
            }
        }
    }
    let valid = j_range.0 >= 0.8 && j_range.1 <= 1.3;
    outcome(
        worst <= 1e-10 && valid,
        format!("max rel err {worst:.2e} (tol 1e-10), J in [{:.3}, {:.3}]", j_range.0, j_range.1),
    )
}

/// Central differences of the residual converge to the tangent at O(ε²).
fn criterion_2() -> Outcome {
    let mats = MaterialSet::benchmark();
    let space = benchmark_space(2, 4, 2);
    let t = Traction::zero();
    // the O(ε²) term must dominate round-off at ε = 1e-5
    let u = common::random_displacement(&space, 0.4, 5);
    let v = constrained_random(&space, 6);
    let op = TangentOperator::build(space.clone(), &mats, &u, Strategy::Tensor2, Execution::Sequential).unwrap();
    let kv = apply(&op, &v);
    let scale = dot(&u, &u).sqrt() / dot(&v, &v).sqrt();
    let mut errs = Vec::new();
    for eps in [1e-3, 1e-4, 1e-5] {
        let e = eps * scale;
        let shift = |s: f64| -> Vec<f64> { u.iter().zip(&v).map(|(a, b)| a + s * e * b).collect() };
        let rp = compute_residual(&space, &mats, &shift(1.0), &t).unwrap();
        let rm = compute_residual(&space, &mats, &shift(-1.0), &t).unwrap();
        let d: Vec<f64> = rp.iter().zip(&rm).zip(&kv).map(|((a, b), c)| (a - b) / (2.0 * e) - c).collect();
        errs.push(dot(&d, &d).sqrt() / dot(&kv, &kv).sqrt());
    }
    let slope = (errs[0] / errs[2]).log10() / 2.0;
    outcome(
        slope >= 1.8,
        format!("slope {slope:.3} (min 1.8), relative errors {:.2e} {:.2e} {:.2e}", errs[0], errs[1], errs[2]),
    )
}

/// The residual is the gradient of the energy.
fn criterion_3() -> Outcome {
    let mats = MaterialSet::benchmark();
    let mut worst = 0.0f64;
    for (dim, n, p) in [(2, 4, 2), (3, 2, 1)] {
        let space = benchmark_space(dim, n, p);
        let t = Traction::benchmark(dim);
        let u = common::random_displacement(&space, 0.05, 8);
        let v = constrained_random(&space, 9);
        let r = compute_residual(&space, &mats, &u, &t).unwrap();
        let e = 1e-4 * dot(&u, &u).sqrt() / dot(&v, &v).sqrt();
        let shift = |s: f64| -> Vec<f64> { u.iter().zip(&v).map(|(a, b)| a + s * e * b).collect() };
        let fd = (energy(&space, &mats, &shift(1.0), &t).unwrap() - energy(&space, &mats, &shift(-1.0), &t).unwrap()) / (2.0 * e);
        let exact = dot(&r, &v);
        worst = worst.max((fd - exact).abs() / exact.abs());
    }
    outcome(worst <= 1e-6, format!("max rel err {worst:.2e} (tol 1e-6)"))
}

fn rel_mat<const D: usize>(a: &Mat<D>, b: &Mat<D>) -> f64 {
    let d = tensor::add(a, &tensor::scale(b, -1.0));
    (tensor::ddot(&d, &d) / tensor::ddot(b, b).max(f64::MIN_POSITIVE)).sqrt()
}

fn random_f(r: &mut rand_chacha::ChaCha8Rng) -> Mat<3> {
    loop {
        let mut f = tensor::identity::<3>();
        for row in f.iter_mut() {
            for x in row.iter_mut() {
                *x += r.gen_range(-0.4..0.4);
            }
        }
        if (0.5..=2.0).contains(&tensor::det(&f)) {
            return f;
        }
    }
}

fn random_sym(r: &mut rand_chacha::ChaCha8Rng) -> Mat<3> {
    let mut g = tensor::zero::<3>();
    for i in 0..3 {
        for j in i..3 {
            g[i][j] = r.gen_range(-1.0..1.0);
            g[j][i] = g[i][j];
        }
    }
    g
}

/// Constitutive identities.
fn criterion_4() -> Outcome {
    let mut r = common::rng(11);
    let (mut push, mut closed, mut dpsi, mut ds, mut asym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0usize);
    for _ in 0..50 {
        let p = NeoHookeanParams::new(r.gen_range(0.1..3.0), r.gen_range(0.1..3.0)).unwrap();
        let f = random_f(&mut r);
        let g = random_sym(&mut r);
        let kin = kinematics_from_deformation_gradient(&f).unwrap();
        let c = kin.c;
        let s = p.second_pk_stress(&c);
        let tau = p.kirchhoff_stress(&kin);
        push = push.max(rel_mat(&tau, &tensor::mul_bt(&tensor::mul(&f, &s), &f)));
        let action = p.tangent_action(&g, kin.j);
        closed = closed.max(rel_mat(&action, &p.material_tangent_full(3, kin.j).contract(&g)));
        asym += usize::from(tau != tensor::transpose(&tau)) + usize::from(action != tensor::transpose(&action));

        // dψ/dC : G = ½ S : G
        let h = 1e-6;
        let cp = tensor::add(&c, &tensor::scale(&g, h));
        let cm = tensor::add(&c, &tensor::scale(&g, -h));
        let fd = (p.strain_energy(&cp) - p.strain_energy(&cm)) / (2.0 * h);
        let exact = 0.5 * tensor::ddot(&s, &g);
        dpsi = dpsi.max((fd - exact).abs() / exact.abs().max(tensor::ddot(&s, &s).sqrt()));

        // F (dS/dC : Fᵀ g F) Fᵀ, doubled, is the spatial tangent action
        let pulled = tensor::mul(&tensor::mul_at(&f, &g), &f);
        let sp = p.second_pk_stress(&tensor::add(&c, &tensor::scale(&pulled, h)));
        let sm = p.second_pk_stress(&tensor::add(&c, &tensor::scale(&pulled, -h)));
        let dsc = tensor::scale(&tensor::add(&sp, &tensor::scale(&sm, -1.0)), 1.0 / h);
        ds = ds.max(rel_mat(&tensor::mul_bt(&tensor::mul(&f, &dsc), &f), &action));
    }
    let p = NeoHookeanParams::new(0.7, 1.3).unwrap();
    let i3 = tensor::identity::<3>();
    let zero_state = p.strain_energy(&i3) == 0.0 && p.second_pk_stress(&i3) == tensor::zero();
    let lin = p.material_tangent_full(3, 1.0);
    let mut lin_err = 0.0f64;
    for a in 0..6 {
        for b in 0..6 {
            let mut e = if a < 3 && b < 3 { 2.0 * p.lambda } else { 0.0 };
            if a == b {
                e += if a < 3 { 2.0 * p.mu } else { p.mu };
            }
            lin_err = lin_err.max((lin.voigt(a, b) - e).abs());
        }
    }
    let pass = push <= 1e-12 && closed <= 1e-12 && dpsi <= 1e-7 && ds <= 1e-6 && asym == 0 && zero_state && lin_err <= 1e-14;
    outcome(
        pass,
        format!(
            "tau=FSF^T {push:.1e}, closed vs full {closed:.1e} (tol 1e-12); dpsi/dC {dpsi:.1e} (1e-7); dS/dC {ds:.1e} (1e-6); asymmetric outputs {asym}; zero state {zero_state}"
        ),
    )
}

/// Sum factorization against dense loops, and FLOP growth.
fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    for p in 1..=8 {
        worst = worst.max(common::sum_factorization_error(2, p, p + 1, 10 * p as u64));
    }
    for p in 1..=4 {
        worst = worst.max(common::sum_factorization_error(3, p, p + 1, 100 + p as u64));
    }
    let mut slopes = Vec::new();
    for (dim, ps) in [(2, vec![1usize, 2, 4, 6, 8]), (3, vec![1, 2, 3, 4])] {
        let n: Vec<f64> = ps.iter().map(|p| (p + 1) as f64).collect();
        let f: Vec<f64> = ps.iter().map(|&p| common::evaluate_flops(dim, p) as f64).collect();
        slopes.push((dim, common::loglog_slope(&n, &f)));
    }
    let counting = cfg!(feature = "flop-count");
    let slopes_ok = slopes.iter().all(|&(d, s)| (s - (d + 1) as f64).abs() <= 0.3);
    outcome(
        worst <= 1e-13 && counting && slopes_ok,
        format!("max rel err {worst:.1e} (tol 1e-13); FLOP exponents {slopes:.3?} (d+1 +- 0.3)"),
    )
}

/// Transfer operators: transpose identity and polynomial reproduction.
fn criterion_6() -> Outcome {
    let (mut transpose, mut reproduction) = (0.0f64, 0.0f64);
    for p in 1..=3 {
        let mut distorted = MeshHierarchy::new(common::distorted_mesh(2, 2, 3));
        distorted.refine_globally(2);
        let h = MultigridHierarchy::new(&distorted, p).unwrap();
        for level in 1..h.n_levels() {
            let tr = h.transfer(level);
            for k in 0..20 {
                let x = constrained_random(h.space(level - 1), 200 + k);
                let y = constrained_random(h.space(level), 300 + k);
                let mut px = vec![0.0; tr.n_fine()];
                tr.prolongate(&x, &mut px);
                let mut ry = vec![0.0; tr.n_coarse()];
                tr.restrict(&y, &mut ry);
                let (a, b) = (dot(&px, &y), dot(&x, &ry));
                transpose = transpose.max((a - b).abs() / a.abs().max(b.abs()));
            }
        }
        // exact reproduction needs affine elements
        let mut straight = MeshHierarchy::new(build_benchmark_mesh(2, 2, &[]).unwrap());
        straight.refine_globally(2);
        let h = MultigridHierarchy::new(&straight, p).unwrap();
        for level in 1..h.n_levels() {
            let pm = h.transfer(level).prolongation_matrix();
            let xc = h.space(level - 1).dofs().node_coords();
            let xf = h.space(level).dofs().node_coords();
            for a in 0..=p {
                for b in 0..=p {
                    let mono = |x: &[f64; 3]| (x[0] / DOMAIN_SIDE).powi(a as i32) * (x[1] / DOMAIN_SIDE).powi(b as i32);
                    let coarse: Vec<f64> = xc.iter().map(mono).collect();
                    let fine: Vec<f64> = xf.iter().map(mono).collect();
                    let mut pc = vec![0.0; fine.len()];
                    pm.mul_vec(&coarse, &mut pc);
                    reproduction = reproduction.max(common::rel_err(&pc, &fine));
                }
            }
        }
    }
    outcome(
        transpose <= 1e-12 && reproduction <= 1e-12,
        format!("transpose defect {transpose:.1e}, reproduction error {reproduction:.1e} (tol 1e-12)"),
    )
}

fn desk_config(refinements: usize, preconditioner: PreconditionerKind) -> RunConfig {
    RunConfig {
        dim: 2,
        p: 2,
        coarse_cells: 4,
        n_global_refinements: refinements,
        preconditioner,
        timings: false,
        ..RunConfig::default()
    }
}

/// GMG iteration counts: level-independent and below Jacobi.
fn criterion_7() -> Outcome {
    let mut rows = Vec::new();
    for refs in 1..=3 {
        let mut log = RunLog::default();
        let gmg = run_solver_benchmark(&desk_config(refs, PreconditionerKind::Gmg), &mut log).unwrap();
        let mut log = RunLog::default();
        let diag = run_solver_benchmark(&desk_config(refs, PreconditionerKind::Diag), &mut log).unwrap();
        rows.push((gmg.n_dofs, gmg.mean_cg_iterations, diag.mean_cg_iterations));
    }
    let max = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let fewer = rows.iter().all(|r| r.1 < r.2);
    let detail: Vec<String> = rows.iter().map(|(n, g, d)| format!("{n} DoFs: gmg {g:.1} vs diag {d:.1}")).collect();
    outcome(
        max <= 1.5 * min && fewer,
        format!("{}; spread {:.2} (max 1.5)", detail.join(", "), max / min),
    )
}

/// Every load step converges; quadratic rate measured in the energy norm.
fn criterion_8() -> Outcome {
    let mut log = RunLog::default();
    let result = run_solver_benchmark(&desk_config(2, PreconditionerKind::Gmg), &mut log);
    let steps_ok = result.is_ok() && log.steps.len() == 5 && log.steps.iter().all(|s| s.iterations <= 30 && !s.bisected);
    let iterations: Vec<usize> = log.steps.iter().map(|s| s.iterations).collect();
    let best = |f: &dyn Fn(usize) -> Vec<f64>| {
        (1..=5)
            .filter_map(|s| convergence_order(&f(s)))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let energy_order = best(&|s| log.decrements(s));
    let l2_order = best(&|s| log.update_norms(s));
    outcome(
        steps_ok && energy_order >= 1.7,
        format!(
            "iterations per step {iterations:?} (max 30); best order of Newton decrement {energy_order:.2} (min 1.7); l2 update order {l2_order:.2} for reference"
        ),
    )
}

/// Storage ordering and exact per-point accounting.
fn criterion_9() -> Outcome {
    let mut ordered = true;
    let mut accounting = true;
    let mut report = Vec::new();
    for p in [2, 3, 4] {
        let mut bytes = Vec::new();
        for s in [Strategy::Scalar, Strategy::Tensor2, Strategy::Tensor4, Strategy::MatrixBased] {
            let config = RunConfig {
                strategy: s,
                ..desk_config(1, PreconditionerKind::Gmg)
            };
            let config = RunConfig { p, ..config };
            let m = run_mv_benchmark(&config).unwrap();
            if s.is_matrix_free() {
                // payload + J_geo⁻¹ (F̄⁻¹ folded in) + JxW per point, plus ū for scalar
                let n_qp = m.n_elements * (p + 1).pow(2);
                let mut expected = n_qp * (s.payload_per_qpoint(2) + 4 + 1);
                if s == Strategy::Scalar {
                    expected += m.n_dofs;
                }
                accounting &= m.storage_bytes == expected * 8;
            }
            bytes.push(m.storage_bytes);
        }
        ordered &= bytes.windows(2).all(|w| w[0] < w[1]);
        report.push(format!("p{p} {bytes:?}"));
    }
    let counts: Vec<usize> = [Strategy::Scalar, Strategy::Tensor2, Strategy::Tensor4]
        .iter()
        .map(|s| s.payload_per_qpoint(3))
        .collect();
    outcome(
        ordered && accounting && counts == [1, 8, 27],
        format!(
            "bytes scalar<tensor2<tensor4<matrix: {}; exact accounting {accounting}; 3D payload {counts:?}",
            report.join(", ")
        ),
    )
}

/// The binary reproduces its CSV output byte for byte.
fn criterion_10() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_hyperfree");
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| -> (Vec<u8>, Vec<u8>, Vec<u8>, bool) {
        let verify = dir.path().join(format!("verify-{tag}.csv"));
        let solve = dir.path().join(format!("solve-{tag}.csv"));
        let log = dir.path().join(format!("log-{tag}.csv"));
        let a = Command::new(exe).args(["verify", "--out"]).arg(&verify).status().unwrap();
        let b = Command::new(exe)
            .args(["solve", "--preset", "smoke", "--seed", "7", "--threads", "1", "--no-timings", "--out"])
            .arg(&solve)
            .arg("--log")
            .arg(&log)
            .status()
            .unwrap();
        let read = |p: &std::path::Path| std::fs::read(p).unwrap_or_default();
        (read(&verify), read(&solve), read(&log), a.success() && b.success())
    };
    let first = run("a");
    let second = run("b");
    let identical = first.0 == second.0 && first.1 == second.1 && first.2 == second.2;
    let nonempty = !first.0.is_empty() && !first.1.is_empty() && !first.2.is_empty();
    outcome(
        identical && nonempty && first.3 && second.3,
        format!(
            "verify {} B, solve {} B, log {} B; identical {identical}; exit status ok {}",
            first.0.len(),
            first.1.len(),
            first.2.len(),
            first.3 && second.3
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Option<f64>, fn() -> Outcome); 10] = [
        ("operator strategy equivalence", Some(30.0), criterion_1),
        ("tangent consistency", Some(10.0), criterion_2),
        ("energy-residual consistency", Some(10.0), criterion_3),
        ("constitutive unit suite", Some(1.0), criterion_4),
        ("sum-factorization oracle", Some(60.0), criterion_5),
        ("transfer properties", None, criterion_6),
        ("GMG effectiveness", Some(600.0), criterion_7),
        ("Newton behavior", None, criterion_8),
        ("memory accounting", None, criterion_9),
        ("determinism", None, criterion_10),
    ];
    let mut failures = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.map_or(true, |l| secs < l);
        let pass = result.pass && in_time;
        failures += usize::from(!pass);
        let budget = limit.map_or(String::new(), |l| format!(" of {l:.0} s"));
        println!(
            "criterion {:>2} {} {name}: {} [{secs:.2} s{budget}]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
