use super::{chebyshev_degree_for, estimate_eigenvalues, ChebyshevSmoother, TransferOperator};
use crate::error::Result;
use crate::fespace::FeSpace;
use crate::linalg::{norm, LinearOperator};
use crate::material::MaterialSet;
use crate::mesh::MeshHierarchy;
use crate::operators::{Execution, Strategy, TangentOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmgOptions {
    pub smoother_degree: usize,
    /// Smoother passes before and after the coarse-grid correction.
    pub smoothing_steps: usize,
    /// CG iterations behind the `λ_max` estimate on smoothed levels.
    pub eigen_iterations: usize,
    pub lower_factor: f64,
    pub upper_factor: f64,
    /// Relative residual reduction targeted by the coarse solve.
    pub coarse_tolerance: f64,
    /// Degree cap of the coarse Chebyshev polynomial.
    pub coarse_max_degree: usize,
    /// CG iterations behind the coarse-level spectrum estimate.
    pub coarse_eigen_iterations: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for GmgOptions {
    fn default() -> Self {
        GmgOptions {
            smoother_degree: 4,
            smoothing_steps: 2,
            eigen_iterations: 30,
            lower_factor: 0.6,
            upper_factor: 1.2,
            coarse_tolerance: 1e-3,
            coarse_max_degree: 400,
            coarse_eigen_iterations: 100,
            seed: 0x5eed,
            execution: Execution::Sequential,
        }
    }
}

/// Function spaces and transfers of all levels; independent of the
/// linearization point, so it is built once per run.
#[derive(Debug, Clone)]
pub struct MultigridHierarchy {
    spaces: Vec<Arc<FeSpace>>,
    /// `transfers[l - 1]` connects level `l - 1` (coarse) and `l`.
    transfers: Vec<TransferOperator>,
}

impl MultigridHierarchy {
    pub fn new(meshes: &MeshHierarchy, degree: usize) -> Result<Self> {
        Self::with_quadrature(meshes, degree, None)
    }

    /// Same, with `n_q` Gauss points per direction on every level.
    pub fn with_quadrature(meshes: &MeshHierarchy, degree: usize, n_q: Option<usize>) -> Result<Self> {
        let mut spaces = Vec::with_capacity(meshes.n_levels());
        for (l, mesh) in meshes.levels().iter().enumerate() {
            let space = FeSpace::new(Arc::new(mesh.clone()), degree, n_q).map_err(|e| e.on_level(l))?;
            spaces.push(Arc::new(space));
        }
        let transfers = (1..spaces.len())
            .map(|l| TransferOperator::new(&spaces[l - 1], &spaces[l], meshes.parent_links(l)))
            .collect();
        Ok(MultigridHierarchy { spaces, transfers })
    }

    pub fn n_levels(&self) -> usize {
        self.spaces.len()
    }

    pub fn space(&self, level: usize) -> &Arc<FeSpace> {
        &self.spaces[level]
    }

    pub fn finest(&self) -> &Arc<FeSpace> {
        self.spaces.last().expect("at least one level")
    }

    /// Transfer between `level - 1` and `level`.
    pub fn transfer(&self, level: usize) -> &TransferOperator {
        &self.transfers[level - 1]
    }

    /// Displacement on every level by nodal injection, coarsest first; the
    /// last entry is `u` itself.
    pub fn restrict_solution(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n_levels();
        let mut out = vec![Vec::new(); n];
        out[n - 1] = u.to_vec();
        for l in (1..n).rev() {
            let mut coarse = vec![0.0; self.spaces[l - 1].n_dofs()];
            self.transfers[l - 1].inject(&out[l], &mut coarse);
            out[l - 1] = coarse;
        }
        out
    }
}

/// Tangent, diagonal and smoother of one level.
#[derive(Debug, Clone)]
pub struct LevelOperator {
    pub operator: TangentOperator,
    pub diagonal: Vec<f64>,
    pub lambda_max: f64,
    pub smoother: ChebyshevSmoother,
}

/// Tangent operators at the injected displacement on every level, with
/// diagonals and `λ_max` estimates of `D⁻¹A`.
pub fn build_level_operators(
    hierarchy: &MultigridHierarchy,
    materials: &MaterialSet,
    u: &[f64],
    strategy: Strategy,
    options: &GmgOptions,
) -> Result<Vec<LevelOperator>> {
    let fields = hierarchy.restrict_solution(u);
    let mut levels = Vec::with_capacity(fields.len());
    for (l, ul) in fields.iter().enumerate() {
        let space = hierarchy.space(l).clone();
        let operator = TangentOperator::build(space.clone(), materials, ul, strategy, options.execution)
            .map_err(|e| e.on_level(l))?;
        let diagonal = operator.diagonal();
        let inv_diag: Vec<f64> = diagonal.iter().map(|d| 1.0 / d).collect();
        let est = estimate_eigenvalues(
            &operator,
            Some(&inv_diag),
            space.constraints().dofs(),
            options.eigen_iterations,
            options.seed.wrapping_add(l as u64),
        );
        let smoother = ChebyshevSmoother::new(
            options.smoother_degree,
            options.lower_factor * est.max,
            options.upper_factor * est.max,
            inv_diag,
        );
        levels.push(LevelOperator {
            operator,
            diagonal,
            lambda_max: est.max,
            smoother,
        });
    }
    Ok(levels)
}

/// Fixed Chebyshev polynomial on the coarsest level, its degree chosen at
/// build time so that a random right-hand side is reduced by the target
/// factor. Being a fixed polynomial it is linear and symmetric in `b`, which
/// the outer CG requires.
#[derive(Debug, Clone)]
pub struct CoarseSolver {
    polynomial: ChebyshevSmoother,
    /// Relative residual reached on the calibration right-hand side.
    pub calibration_residual: f64,
}

impl CoarseSolver {
    pub fn new(level: &LevelOperator, skip: &[usize], options: &GmgOptions) -> Self {
        let op = &level.operator;
        let inv_diag: Vec<f64> = level.diagonal.iter().map(|d| 1.0 / d).collect();
        let est = estimate_eigenvalues(
            op,
            Some(&inv_diag),
            skip,
            options.coarse_eigen_iterations,
            options.seed ^ 0xc0a5e,
        );
        let lower = 0.9 * est.min;
        let upper = options.upper_factor * est.max;
        let mut degree = chebyshev_degree_for(options.coarse_tolerance, lower, upper).min(options.coarse_max_degree);

        let n = op.n();
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0xb);
        let mut b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        for &d in skip {
            b[d] = 0.0;
        }
        let bnorm = norm(&b);
        let mut x = vec![0.0; n];
        let mut ax = vec![0.0; n];
        loop {
            let poly = ChebyshevSmoother::new(degree, lower, upper, inv_diag.clone());
            x.iter_mut().for_each(|v| *v = 0.0);
            poly.smooth(op, &b, &mut x, 1, true);
            op.apply(&x, &mut ax);
            let res: Vec<f64> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
            let rel = if bnorm > 0.0 { norm(&res) / bnorm } else { 0.0 };
            if rel <= options.coarse_tolerance || degree >= options.coarse_max_degree {
                if rel > options.coarse_tolerance {
                    log::warn!(
                        "coarse Chebyshev reaches only {rel:.2e} relative residual at the degree cap {degree}"
                    );
                }
                return CoarseSolver {
                    polynomial: poly,
                    calibration_residual: rel,
                };
            }
            degree = ((degree as f64 * 1.25).ceil() as usize).min(options.coarse_max_degree);
        }
    }

    pub fn degree(&self) -> usize {
        self.polynomial.degree()
    }

    /// `x = p(D⁻¹A) D⁻¹ b`
    pub fn solve(&self, op: &dyn LinearOperator, b: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        self.polynomial.smooth(op, b, x, 1, true);
    }
}

/// One V-cycle per application.
#[derive(Debug, Clone)]
pub struct GmgPreconditioner {
    hierarchy: Arc<MultigridHierarchy>,
    levels: Vec<LevelOperator>,
    coarse: CoarseSolver,
    options: GmgOptions,
}

impl GmgPreconditioner {
    pub fn build(
        hierarchy: Arc<MultigridHierarchy>,
        materials: &MaterialSet,
        u: &[f64],
        strategy: Strategy,
        options: GmgOptions,
    ) -> Result<Self> {
        let levels = build_level_operators(&hierarchy, materials, u, strategy, &options)?;
        let coarse = CoarseSolver::new(&levels[0], hierarchy.space(0).constraints().dofs(), &options);
        Ok(GmgPreconditioner {
            hierarchy,
            levels,
            coarse,
            options,
        })
    }

    pub fn levels(&self) -> &[LevelOperator] {
        &self.levels
    }

    pub fn coarse(&self) -> &CoarseSolver {
        &self.coarse
    }

    /// The finest-level tangent, i.e. the operator being preconditioned.
    pub fn finest_operator(&self) -> &TangentOperator {
        &self.levels.last().expect("at least one level").operator
    }

    /// `z = V(b)`
    pub fn v_cycle(&self, b: &[f64], z: &mut [f64]) {
        self.cycle(self.levels.len() - 1, b, z);
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let level = &self.levels[l];
        if l == 0 {
            self.coarse.solve(&level.operator, b, x);
            return;
        }
        let steps = self.options.smoothing_steps;
        x.iter_mut().for_each(|v| *v = 0.0);
        level.smoother.smooth(&level.operator, b, x, steps, true);

        let mut r = vec![0.0; b.len()];
        level.operator.apply(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let transfer = self.hierarchy.transfer(l);
        let mut rc = vec![0.0; transfer.n_coarse()];
        transfer.restrict(&r, &mut rc);
        let mut xc = vec![0.0; rc.len()];
        self.cycle(l - 1, &rc, &mut xc);
        transfer.prolongate_add(&xc, x);

        level.smoother.smooth(&level.operator, b, x, steps, false);
    }
}

impl LinearOperator for GmgPreconditioner {
    fn n(&self) -> usize {
        self.hierarchy.finest().n_dofs()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.v_cycle(x, y)
    }
}
