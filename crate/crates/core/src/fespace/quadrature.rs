use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature1D {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature1D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `q`-point Gauss–Legendre rule mapped to `[0, 1]`, points ascending.
pub fn gauss_legendre(q: usize) -> Result<Quadrature1D> {
    if !(1..=16).contains(&q) {
        return Err(Error::QuadratureOrder(q));
    }
    let mut points = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let m = (q + 1) / 2;
    for i in 0..m {
        // Newton iteration on P_q from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(q, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root on [-1, 1]
        points[q - 1 - i] = 0.5 * (1.0 + x);
        points[i] = 0.5 * (1.0 - x);
        weights[q - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    Ok(Quadrature1D { points, weights })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
