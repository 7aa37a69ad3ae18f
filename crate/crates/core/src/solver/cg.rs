use crate::error::{Error, Result};
use crate::linalg::{dot, norm, LinearOperator};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` of the recursively updated residual.
    pub relative_residual: f64,
    pub converged: bool,
    pub wall_time: f64,
    /// `√(rᵀ M⁻¹ r)` at the start and after every iteration.
    pub preconditioned_norms: Vec<f64>,
}

/// Preconditioned conjugate gradients for `A x = b`, starting from the
/// given `x`.
///
/// Stops when `‖r‖ ≤ rel_tol ‖b‖` or after `max_iterations` (default
/// `10 n`). Non-convergence is reported in the returned [`CgReport`];
/// a non-positive curvature `pᵀ A p` aborts with
/// [`Error::IndefiniteOperator`].
pub fn cg(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    preconditioner: Option<&dyn LinearOperator>,
    max_iterations: Option<usize>,
) -> Result<CgReport> {
    let start = Instant::now();
    let n = op.n();
    let max_it = max_iterations.unwrap_or(10 * n);
    let bnorm = norm(b);
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    let precondition = |r: &[f64], z: &mut [f64]| match preconditioner {
        Some(m) => m.apply(r, z),
        None => z.copy_from_slice(r),
    };
    let target = rel_tol * bnorm;
    let mut rnorm = norm(&r);
    let mut history = Vec::new();
    if rnorm <= target || bnorm == 0.0 {
        if bnorm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            rnorm = 0.0;
        }
        return Ok(CgReport {
            iterations: 0,
            relative_residual: if bnorm > 0.0 { rnorm / bnorm } else { 0.0 },
            converged: true,
            wall_time: start.elapsed().as_secs_f64(),
            preconditioned_norms: history,
        });
    }
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    history.push(rz.max(0.0).sqrt());
    let mut ap = vec![0.0; n];
    let mut it = 0;
    while it < max_it {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::IndefiniteOperator(pap));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        rnorm = norm(&r);
        if rnorm <= target {
            precondition(&r, &mut z);
            history.push(dot(&r, &z).max(0.0).sqrt());
            break;
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        history.push(rz_new.max(0.0).sqrt());
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(CgReport {
        iterations: it,
        relative_residual: rnorm / bnorm,
        converged: rnorm <= target,
        wall_time: start.elapsed().as_secs_f64(),
        preconditioned_norms: history,
    })
}
