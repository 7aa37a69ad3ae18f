mod common;

use hyperfree::fespace::*;
use hyperfree::flops::FlopTally;
use hyperfree::mesh::DOMAIN_SIDE;

#[test]
fn sum_factorization_matches_naive_loops() {
    for p in 1..=8 {
        let err = common::sum_factorization_error(2, p, p + 1, 10 * p as u64);
        assert!(err <= 1e-13, "2D p = {p}: {err:e}");
    }
    for p in 1..=4 {
        let err = common::sum_factorization_error(3, p, p + 1, 100 + p as u64);
        assert!(err <= 1e-13, "3D p = {p}: {err:e}");
    }
    // over- and under-integration
    assert!(common::sum_factorization_error(2, 3, 6, 7) <= 1e-13);
    assert!(common::sum_factorization_error(3, 2, 2, 8) <= 1e-13);
}

#[test]
fn integration_is_adjoint_of_evaluation() {
    for (dim, p) in [(2, 3), (3, 2)] {
        let basis = Basis1D::new(p, gauss_legendre(p + 1).unwrap());
        let sf = SumFactorization::new(&basis, dim);
        let mut s = Scratch::new(&basis, dim);
        let mut t = FlopTally::new();
        let x = common::random_vector(sf.n_dofs(), 1);
        let yv = common::random_vector(sf.n_q(), 2);
        let yg = common::random_vector(dim * sf.n_q(), 3);
        let mut v = vec![0.0; sf.n_q()];
        let mut g = vec![0.0; dim * sf.n_q()];
        sf.evaluate(&x, Some(&mut v), Some(&mut g), &mut s, &mut t);
        let mut out = vec![0.0; sf.n_dofs()];
        sf.integrate(Some(&yv), Some(&yg), &mut out, &mut s, &mut t);
        let lhs: f64 = v.iter().zip(&yv).map(|(a, b)| a * b).sum::<f64>() + g.iter().zip(&yg).map(|(a, b)| a * b).sum::<f64>();
        let rhs: f64 = x.iter().zip(&out).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
}

#[cfg(feature = "flop-count")]
#[test]
fn counted_flops_scale_as_n_to_the_dim_plus_one() {
    for (dim, ps) in [(2, vec![1, 2, 4, 6, 8]), (3, vec![1, 2, 3, 4])] {
        let n: Vec<f64> = ps.iter().map(|p| (p + 1) as f64).collect();
        let f: Vec<f64> = ps.iter().map(|&p| common::evaluate_flops(dim, p) as f64).collect();
        let slope = common::loglog_slope(&n, &f);
        assert!((slope - (dim + 1) as f64).abs() <= 0.3, "dim {dim}: slope {slope}");
        // deterministic
        assert_eq!(common::evaluate_flops(dim, ps[1]), common::evaluate_flops(dim, ps[1]));
    }
}

#[test]
fn unit_integrand_sums_to_domain_measure() {
    for (dim, p) in [(2, 2), (2, 4), (3, 2)] {
        let space = common::space(common::distorted_mesh(dim, 3, 5), p);
        let sf = SumFactorization::new(space.basis(), dim);
        let mut s = Scratch::new(space.basis(), dim);
        let mut t = FlopTally::new();
        let mut local = vec![0.0; sf.n_dofs()];
        let mut total = 0.0;
        for e in 0..space.mesh().n_elements() {
            sf.integrate(Some(space.geometry().jxw_element(e)), None, &mut local, &mut s, &mut t);
            total += local.iter().sum::<f64>();
        }
        let measure = DOMAIN_SIDE.powi(dim as i32);
        assert!((total - measure).abs() <= 1e-13 * measure, "{total} vs {measure}");
    }
}

#[test]
fn structured_dof_counts() {
    use hyperfree::mesh::build_benchmark_mesh;
    for (dim, m, p) in [(2, 2, 1), (2, 4, 2), (3, 2, 1), (2, 3, 5), (3, 2, 3)] {
        let space = common::space(build_benchmark_mesh(dim, m, &[]).unwrap(), p);
        assert_eq!(space.n_dofs(), (m * p + 1).pow(dim as u32) * dim);
    }
}

#[test]
fn gauss_rules() {
    let q1 = gauss_legendre(1).unwrap();
    assert_eq!(q1.points(), &[0.5]);
    assert_eq!(q1.weights(), &[1.0]);
    let q2 = gauss_legendre(2).unwrap();
    let off = 0.5 / 3f64.sqrt();
    assert!((q2.points()[0] - (0.5 - off)).abs() < 1e-15);
    assert!((q2.points()[1] - (0.5 + off)).abs() < 1e-15);
    assert!((q2.integrate(|x| x * x * x) - 0.25).abs() < 1e-15);
    assert!(gauss_legendre(0).is_err());
    assert!(gauss_legendre(17).is_err());
}
