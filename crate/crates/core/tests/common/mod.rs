#![allow(dead_code)]

pub mod oracle;

use hyperfree::fespace::{gauss_legendre, Basis1D, FeSpace, Scratch, SumFactorization};
use hyperfree::flops::FlopTally;
use oracle::Naive;
use hyperfree::mesh::{build_benchmark_mesh, BoundaryFace, BoundaryId, Inclusion, MaterialId, Mesh, DOMAIN_SIDE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn central_inclusion(dim: usize) -> Vec<Inclusion> {
    let c = 0.5 * DOMAIN_SIDE;
    vec![Inclusion {
        center: vec![c; dim],
        radius: 0.25 * DOMAIN_SIDE,
    }]
}

/// Structured mesh with interior vertices jiggled so elements are not affine.
pub fn distorted_mesh(dim: usize, n: usize, seed: u64) -> Mesh {
    if n == 1 {
        return single_element(dim);
    }
    let mut mesh = build_benchmark_mesh(dim, n, &central_inclusion(dim)).unwrap();
    let h = DOMAIN_SIDE / n as f64;
    let mut r = rng(seed);
    for v in mesh.vertices_mut() {
        for x in v.iter_mut().take(dim) {
            let interior = *x > 1e-12 && *x < DOMAIN_SIDE - 1e-12;
            if interior {
                *x += 0.15 * h * (r.gen::<f64>() - 0.5);
            }
        }
    }
    mesh
}

pub fn space(mesh: Mesh, p: usize) -> Arc<FeSpace> {
    Arc::new(FeSpace::new(Arc::new(mesh), p, None).unwrap())
}

pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect()
}

/// Smooth-ish random displacement with `|Grad u|` of order `strain`,
/// satisfying the bottom constraints.
pub fn random_displacement(space: &FeSpace, strain: f64, seed: u64) -> Vec<f64> {
    let dim = space.dim();
    let mut r = rng(seed);
    let a: Vec<f64> = (0..dim * dim).map(|_| r.gen::<f64>() - 0.5).collect();
    let b: Vec<f64> = (0..dim).map(|_| r.gen::<f64>() - 0.5).collect();
    let phase = r.gen::<f64>() * 6.0;
    let coords = space.dofs().node_coords().to_vec();
    let mut u = vec![0.0; space.n_dofs()];
    for (k, x) in coords.iter().enumerate() {
        for c in 0..dim {
            let mut v = 0.0;
            for d in 0..dim {
                v += a[c * dim + d] * x[d];
            }
            // smooth oscillation keeps the field non-polynomial
            v += 0.3 * b[c] * x[1] * (1.0 + (7.0 * x[0] / DOMAIN_SIDE + phase).sin() * (5.0 * x[1] / DOMAIN_SIDE).cos());
            u[k * dim + c] = strain * v;
        }
    }
    space.constraints().apply_to(&mut u);
    u
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// One square/cube element of side `DOMAIN_SIDE`, bottom (`y = 0`) and top
/// faces tagged.
pub fn single_element(dim: usize) -> Mesh {
    let nv = 1 << dim;
    let verts: Vec<[f64; 3]> = (0..nv)
        .map(|c| {
            let mut x = [0.0; 3];
            for (d, xd) in x.iter_mut().enumerate().take(dim) {
                *xd = ((c >> d) & 1) as f64 * DOMAIN_SIDE;
            }
            x
        })
        .collect();
    let boundary = vec![
        BoundaryFace { element: 0, face: 2, id: BoundaryId::Bottom },
        BoundaryFace { element: 0, face: 3, id: BoundaryId::Top },
    ];
    Mesh::new(dim, verts, (0..nv).collect(), vec![MaterialId::Matrix], boundary).unwrap()
}

/// Worst relative error of factorized evaluate/integrate against the dense
/// oracle on random data.
pub fn sum_factorization_error(dim: usize, p: usize, nq: usize, seed: u64) -> f64 {
    let quad = gauss_legendre(nq).unwrap();
    let basis = Basis1D::new(p, quad.clone());
    let sf = SumFactorization::new(&basis, dim);
    let naive = Naive::new(p, &quad, dim);
    let mut scratch = Scratch::new(&basis, dim);
    let mut tally = FlopTally::new();
    let u = random_vector(sf.n_dofs(), seed);

    let mut vals = vec![0.0; sf.n_q()];
    let mut grads = vec![0.0; dim * sf.n_q()];
    sf.evaluate(&u, Some(&mut vals), Some(&mut grads), &mut scratch, &mut tally);
    let mut worst = rel_err(&vals, &naive.eval(&naive.value, &u));
    for d in 0..dim {
        let g = &grads[d * sf.n_q()..(d + 1) * sf.n_q()];
        worst = worst.max(rel_err(g, &naive.eval(&naive.grad[d], &u)));
    }

    let v = random_vector(sf.n_q(), seed + 1);
    let g = random_vector(dim * sf.n_q(), seed + 2);
    let mut out = vec![0.0; sf.n_dofs()];
    sf.integrate(Some(&v), Some(&g), &mut out, &mut scratch, &mut tally);
    worst = worst.max(rel_err(&out, &naive.integrate(&v, &g)));
    sf.integrate(Some(&v), None, &mut out, &mut scratch, &mut tally);
    worst = worst.max(rel_err(&out, &naive.integrate(&v, &vec![0.0; g.len()])));
    sf.integrate(None, Some(&g), &mut out, &mut scratch, &mut tally);
    worst.max(rel_err(&out, &naive.integrate(&vec![0.0; v.len()], &g)))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Counted FLOPs of one value-and-gradient evaluation on one element.
pub fn evaluate_flops(dim: usize, p: usize) -> u64 {
    let basis = Basis1D::new(p, gauss_legendre(p + 1).unwrap());
    let sf = SumFactorization::new(&basis, dim);
    let mut s = Scratch::new(&basis, dim);
    let mut t = FlopTally::new();
    let u = vec![1.0; sf.n_dofs()];
    let mut v = vec![0.0; sf.n_q()];
    let mut g = vec![0.0; dim * sf.n_q()];
    sf.evaluate(&u, Some(&mut v), Some(&mut g), &mut s, &mut t);
    t.get()
}

