use super::Quadrature1D;

/// Lagrange polynomials of degree `p` on equispaced nodes `i/p` together
/// with their values and derivatives tabulated at a 1D quadrature rule.
#[derive(Debug, Clone)]
pub struct Basis1D {
    degree: usize,
    nodes: Vec<f64>,
    quadrature: Quadrature1D,
    /// `values[q * n + i] = N_i(ξ_q)`
    values: Vec<f64>,
    /// `derivatives[q * n + i] = N_i'(ξ_q)`
    derivatives: Vec<f64>,
    values_t: Vec<f64>,
    derivatives_t: Vec<f64>,
}

impl Basis1D {
    pub fn new(degree: usize, quadrature: Quadrature1D) -> Self {
        assert!(degree >= 1, "polynomial degree must be at least 1");
        let n = degree + 1;
        let nodes: Vec<f64> = (0..n).map(|i| i as f64 / degree as f64).collect();
        let nq = quadrature.len();
        let mut basis = Basis1D {
            degree,
            nodes,
            values: vec![0.0; nq * n],
            derivatives: vec![0.0; nq * n],
            values_t: vec![0.0; nq * n],
            derivatives_t: vec![0.0; nq * n],
            quadrature,
        };
        for q in 0..nq {
            let x = basis.quadrature.points()[q];
            for i in 0..n {
                let v = basis.value(i, x);
                let d = basis.derivative(i, x);
                basis.values[q * n + i] = v;
                basis.derivatives[q * n + i] = d;
                basis.values_t[i * nq + q] = v;
                basis.derivatives_t[i * nq + q] = d;
            }
        }
        basis
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of 1D basis functions, `p + 1`.
    pub fn n_dofs_1d(&self) -> usize {
        self.degree + 1
    }

    pub fn n_q_1d(&self) -> usize {
        self.quadrature.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quadrature(&self) -> &Quadrature1D {
        &self.quadrature
    }

    /// Row-major `n_q × n` table of values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.derivatives
    }

    /// Row-major `n × n_q` transpose of [`values`](Self::values).
    pub fn values_t(&self) -> &[f64] {
        &self.values_t
    }

    pub fn derivatives_t(&self) -> &[f64] {
        &self.derivatives_t
    }

    /// `N_i(x)`
    pub fn value(&self, i: usize, x: f64) -> f64 {
        let xi = self.nodes[i];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != i)
            .map(|(_, &xm)| (x - xm) / (xi - xm))
            .product()
    }

    /// `N_i'(x)`
    pub fn derivative(&self, i: usize, x: f64) -> f64 {
        let xi = self.nodes[i];
        let mut sum = 0.0;
        for (m, &xm) in self.nodes.iter().enumerate() {
            if m == i {
                continue;
            }
            let mut prod = 1.0 / (xi - xm);
            for (k, &xk) in self.nodes.iter().enumerate() {
                if k != i && k != m {
                    prod *= (x - xk) / (xi - xk);
                }
            }
            sum += prod;
        }
        sum
    }
}
