mod common;

use hyperfree::linalg::{DenseMatrix, FnOperator, LinearOperator};
use hyperfree::material::MaterialSet;
use hyperfree::mesh::{benchmark_inclusions, build_benchmark_mesh, MeshHierarchy, Mesh};
use hyperfree::multigrid::{GmgOptions, MultigridHierarchy};
use hyperfree::operators::{Strategy, Traction};
use hyperfree::solver::*;
use std::sync::Arc;

fn problem(mesh: Mesh, refinements: usize, p: usize, traction: Traction, pre: PreconditionerKind) -> Problem {
    let mut meshes = MeshHierarchy::new(mesh);
    meshes.refine_globally(refinements);
    Problem {
        hierarchy: Arc::new(MultigridHierarchy::new(&meshes, p).unwrap()),
        materials: MaterialSet::benchmark(),
        traction,
        strategy: Strategy::Tensor2,
        preconditioner: pre,
        gmg: GmgOptions::default(),
    }
}

#[test]
fn cg_on_distinct_eigenvalues_terminates_early() {
    // 40 unknowns, 4 distinct eigenvalues
    let eig = [1.0, 3.0, 7.0, 20.0];
    let diag: Vec<f64> = (0..40).map(|i| eig[i % 4]).collect();
    let op = FnOperator::new(40, |x: &[f64], y: &mut [f64]| {
        for i in 0..40 {
            y[i] = diag[i] * x[i];
        }
    });
    let b = common::random_vector(40, 3);
    let mut x = vec![0.0; 40];
    let report = cg(&op, &b, &mut x, 1e-10, None, None).unwrap();
    assert!(report.converged);
    assert!(report.iterations <= 4, "{} iterations", report.iterations);
    for i in 0..40 {
        assert!((x[i] - b[i] / diag[i]).abs() < 1e-10);
    }
}

#[test]
fn cg_preconditioned_norm_decreases_over_windows() {
    let n = 60;
    let a = DenseMatrix::from_fn(n, |i, j| {
        if i == j {
            2.0 + i as f64 * 0.1
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    });
    let jac = Jacobi::new(&a.diagonal());
    let b = common::random_vector(n, 9);
    let mut x = vec![0.0; n];
    let report = cg(&a, &b, &mut x, 1e-12, Some(&jac), None).unwrap();
    assert!(report.converged);
    let h = &report.preconditioned_norms;
    for w in h.windows(6) {
        assert!(w[5] < w[0], "{:?}", w);
    }
    let mut ax = vec![0.0; n];
    a.apply(&x, &mut ax);
    assert!(common::rel_err(&ax, &b) <= 1e-12 * 1.0001);
}

#[test]
fn zero_traction_needs_no_iterations() {
    let mesh = build_benchmark_mesh(2, 2, &benchmark_inclusions(2)).unwrap();
    let prob = problem(mesh, 0, 1, Traction::zero(), PreconditionerKind::Gmg);
    let mut log = RunLog::default();
    let u = newton_solve(&prob, &NewtonSettings::default(), &mut log).unwrap();
    assert!(u.iter().all(|v| *v == 0.0));
    assert!(log.steps.iter().all(|s| s.iterations <= 1));
}

#[test]
fn single_element_uniaxial_converges_quadratically() {
    let prob = problem(
        common::single_element(2),
        0,
        1,
        Traction::new(1.0e5, [0.0, 1.0, 0.0]),
        PreconditionerKind::None,
    );
    let settings = NewtonSettings {
        linear_relative_tolerance: 1e-12,
        ..NewtonSettings::default()
    };
    let mut log = RunLog::default();
    newton_solve(&prob, &settings, &mut log).unwrap();
    let mut best = f64::NEG_INFINITY;
    for s in 1..=5 {
        let du = log.update_norms(s);
        if let Some(order) = convergence_order(&du) {
            best = best.max(order);
        }
    }
    assert!(best >= 1.7, "best order {best}: {:?}", log.iterations);
}

#[test]
fn benchmark_steps_converge_and_respect_constraints() {
    let mesh = build_benchmark_mesh(2, 2, &benchmark_inclusions(2)).unwrap();
    for pre in [PreconditionerKind::Gmg, PreconditionerKind::Diag, PreconditionerKind::None] {
        let prob = problem(mesh.clone(), 1, 2, Traction::benchmark(2), pre);
        let mut log = RunLog::default();
        let u = newton_solve(&prob, &NewtonSettings::default(), &mut log).unwrap();
        assert_eq!(log.steps.len(), 5);
        assert!(log.steps.iter().all(|s| s.iterations >= 1 && s.iterations <= 10));
        for &d in prob.hierarchy.finest().constraints().dofs() {
            assert_eq!(u[d], 0.0);
        }
        // pulled along +x at the top
        let coords = prob.hierarchy.finest().dofs().node_coords();
        let top = coords.iter().position(|x| x[1] == hyperfree::mesh::DOMAIN_SIDE).unwrap();
        assert!(u[top * 2] > 0.0);
    }
}

#[test]
fn solves_are_deterministic() {
    let mesh = build_benchmark_mesh(2, 2, &benchmark_inclusions(2)).unwrap();
    let run = || {
        let prob = problem(mesh.clone(), 1, 2, Traction::benchmark(2), PreconditionerKind::Gmg);
        let mut log = RunLog::default();
        let u = newton_solve(&prob, &NewtonSettings::default(), &mut log).unwrap();
        (u, log)
    };
    let (u1, l1) = run();
    let (u2, l2) = run();
    assert_eq!(u1, u2);
    let strip = |l: &RunLog| l.iterations.iter().map(|r| (r.cg_iterations, r.update_norm, r.residual_norm)).collect::<Vec<_>>();
    assert_eq!(strip(&l1), strip(&l2));
}

#[test]
fn inversion_halves_the_increment() {
    let stretch = || {
        let mesh = build_benchmark_mesh(2, 2, &[]).unwrap();
        problem(mesh, 0, 1, Traction::new(2.842e6, [0.0, 1.0, 0.0]), PreconditionerKind::None)
    };
    let one_step = NewtonSettings {
        n_load_steps: 1,
        ..NewtonSettings::default()
    };
    // a single halving is not enough for this load
    let mut log = RunLog::default();
    assert!(newton_solve(&stretch(), &one_step, &mut log).is_err());
    assert!(log.steps.iter().any(|s| s.bisected));

    let deeper = NewtonSettings {
        max_bisections: 3,
        ..one_step
    };
    let mut log = RunLog::default();
    newton_solve(&stretch(), &deeper, &mut log).unwrap();
    let fractions: Vec<f64> = log.steps.iter().map(|s| s.load_fraction).collect();
    assert!(log.steps.iter().all(|s| s.bisected));
    assert_eq!(*fractions.last().unwrap(), 1.0);
    assert!(fractions.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn settings_validation() {
    let bad = NewtonSettings {
        update_tolerance: 0.0,
        ..NewtonSettings::default()
    };
    assert!(bad.validate().is_err());
    assert!(NewtonSettings::default().validate().is_ok());
    assert_eq!("jacobi".parse::<PreconditionerKind>().unwrap(), PreconditionerKind::Diag);
    assert!("amg".parse::<PreconditionerKind>().is_err());
}

#[test]
fn load_fraction_3d_components() {
    let t = apply_load_fraction(5, 5, &Traction::benchmark(3)).vector();
    assert!((t[0] - 12.5e3).abs() < 1e-9 && (t[1] - 12.5e3).abs() < 1e-9 && t[2] == 0.0);
    let half = apply_load_fraction(2, 5, &Traction::benchmark(2)).vector();
    assert!((half[0] - 5.0e3).abs() < 1e-12);
}
