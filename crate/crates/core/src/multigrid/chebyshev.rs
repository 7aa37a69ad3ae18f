use crate::linalg::{dot, LinearOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Extreme Ritz values of the (optionally Jacobi-preconditioned) operator
/// from the Lanczos tridiagonal implied by conjugate-gradient coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenEstimate {
    pub min: f64,
    pub max: f64,
    /// CG iterations that contributed to the tridiagonal.
    pub iterations: usize,
}

/// Run `iterations` steps of (Jacobi-)preconditioned CG on `A x = r₀` with a
/// seeded random `r₀` and return the extreme Ritz values.
///
/// Entries listed in `skip` are zeroed in `r₀` so that identity rows of
/// constrained DoFs do not enter the estimate. On breakdown (zero residual)
/// the values of the last complete tridiagonal are returned.
pub fn estimate_eigenvalues(
    op: &dyn LinearOperator,
    inv_diag: Option<&[f64]>,
    skip: &[usize],
    iterations: usize,
    seed: u64,
) -> EigenEstimate {
    let n = op.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    for &d in skip {
        r[d] = 0.0;
    }
    let precondition = |r: &[f64], z: &mut [f64]| match inv_diag {
        Some(dinv) => z.iter_mut().zip(r).zip(dinv).for_each(|((z, r), d)| *z = r * d),
        None => z.copy_from_slice(r),
    };
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut alphas = Vec::with_capacity(iterations);
    let mut betas = Vec::with_capacity(iterations);
    let scale = rz.abs().max(f64::MIN_POSITIVE);
    for _ in 0..iterations {
        if !(rz.abs() > 1e-30 * scale) {
            break;
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        alphas.push(alpha);
        for i in 0..n {
            r[i] -= alpha * ap[i];
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        if !(rz.abs() > 1e-30 * scale) {
            break;
        }
        betas.push(beta);
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let k = alphas.len();
    if k == 0 {
        return EigenEstimate {
            min: 1.0,
            max: 1.0,
            iterations: 0,
        };
    }
    let mut diag = vec![0.0; k];
    let mut off = vec![0.0; k.saturating_sub(1)];
    for i in 0..k {
        diag[i] = 1.0 / alphas[i] + if i > 0 { betas[i - 1] / alphas[i - 1] } else { 0.0 };
        if i + 1 < k {
            off[i] = betas[i].sqrt() / alphas[i];
        }
    }
    let (min, max) = tridiagonal_extreme_eigenvalues(&diag, &off);
    EigenEstimate {
        min,
        max,
        iterations: k,
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(diag, off)` below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let o2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        q = diag[i] - x - if i > 0 { o2 / q } else { 0.0 };
        if q == 0.0 {
            q = f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalue by bisection on Sturm counts.
pub(crate) fn tridiagonal_extreme_eigenvalues(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let bisect = |k: usize| {
        // smallest x with at least k + 1 eigenvalues below it
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if sturm_count(diag, off, m) > k {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };
    (bisect(0), bisect(n - 1))
}

/// Chebyshev semi-iteration with Jacobi preconditioning, targeting the
/// eigenvalue interval `[lower, upper]` of `D⁻¹ A`.
#[derive(Debug, Clone)]
pub struct ChebyshevSmoother {
    degree: usize,
    lower: f64,
    upper: f64,
    inv_diag: Vec<f64>,
}

impl ChebyshevSmoother {
    pub fn new(degree: usize, lower: f64, upper: f64, inv_diag: Vec<f64>) -> Self {
        assert!(degree >= 1 && upper > lower && lower > 0.0, "invalid Chebyshev parameters");
        ChebyshevSmoother {
            degree,
            lower,
            upper,
            inv_diag,
        }
    }

    /// Smoother on `[0.6 λ_max, 1.2 λ_max]` from an estimate of `λ_max`.
    pub fn from_lambda_max(degree: usize, lambda_max: f64, inv_diag: Vec<f64>) -> Self {
        Self::new(degree, 0.6 * lambda_max, 1.2 * lambda_max, inv_diag)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    /// `steps` passes of the degree-`degree` polynomial, updating `x` in
    /// place. `x_is_zero` saves the initial residual evaluation.
    pub fn smooth(&self, op: &dyn LinearOperator, b: &[f64], x: &mut [f64], steps: usize, mut x_is_zero: bool) {
        let n = b.len();
        let theta = 0.5 * (self.upper + self.lower);
        let delta = 0.5 * (self.upper - self.lower);
        let sigma = theta / delta;
        let mut r = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut ax = vec![0.0; n];
        for _ in 0..steps {
            if x_is_zero {
                r.copy_from_slice(b);
            } else {
                op.apply(x, &mut ax);
                for i in 0..n {
                    r[i] = b[i] - ax[i];
                }
            }
            for i in 0..n {
                d[i] = self.inv_diag[i] * r[i] / theta;
            }
            let mut rho = 1.0 / sigma;
            for _ in 1..self.degree {
                for i in 0..n {
                    x[i] += d[i];
                }
                op.apply(x, &mut ax);
                let rho_new = 1.0 / (2.0 * sigma - rho);
                let c1 = rho_new * rho;
                let c2 = 2.0 * rho_new / delta;
                for i in 0..n {
                    d[i] = c1 * d[i] + c2 * self.inv_diag[i] * (b[i] - ax[i]);
                }
                rho = rho_new;
            }
            for i in 0..n {
                x[i] += d[i];
            }
            x_is_zero = false;
        }
    }
}

/// Residual reduction bound `1 / T_k(σ)` of a degree-`k` Chebyshev
/// polynomial on `[lower, upper]`.
pub fn chebyshev_bound(degree: usize, lower: f64, upper: f64) -> f64 {
    let sigma = (upper + lower) / (upper - lower);
    1.0 / (degree as f64 * sigma.acosh()).cosh()
}

/// Smallest degree whose Chebyshev bound on `[lower, upper]` is below `tol`.
pub fn chebyshev_degree_for(tol: f64, lower: f64, upper: f64) -> usize {
    let sigma = (upper + lower) / (upper - lower);
    ((1.0 / tol).acosh() / sigma.acosh()).ceil().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_eigenvalues_of_laplacian() {
        // tridiag(-1, 2, -1) of size n: 2 - 2 cos(k π / (n + 1))
        let n = 12;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let (lo, hi) = tridiagonal_extreme_eigenvalues(&diag, &off);
        let pi = std::f64::consts::PI;
        assert!((lo - (2.0 - 2.0 * (pi / 13.0).cos())).abs() < 1e-12);
        assert!((hi - (2.0 - 2.0 * (12.0 * pi / 13.0).cos())).abs() < 1e-12);
    }

    #[test]
    fn degree_formula_meets_bound() {
        let k = chebyshev_degree_for(1e-3, 1.0, 100.0);
        assert!(chebyshev_bound(k, 1.0, 100.0) <= 1e-3);
        assert!(chebyshev_bound(k - 1, 1.0, 100.0) > 1e-3);
    }
}
