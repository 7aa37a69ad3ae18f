//! Compressible Neo-Hookean hyperelasticity.
//!
//! Strain energy per unit reference volume
//! `ψ(C) = μ/2 [tr C − tr I − 2 ln J] + λ ln² J` with `J = √det C`.
//! Two-dimensional problems are plane strain: the out-of-plane stretch is 1,
//! so every formula is evaluated with the in-plane `2 × 2` tensors.

use crate::error::{Error, Result};
use crate::mesh::MaterialId;
use crate::tensor::{self, sym_len, sym_pairs, Mat};
use serde::{Deserialize, Serialize};

/// `det F ≤ 0`: the deformation inverts the material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvertedDeformation {
    pub det: f64,
}

/// Shear modulus and Lamé parameter in N/mm².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeoHookeanParams {
    pub mu: f64,
    pub lambda: f64,
}

impl NeoHookeanParams {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0) || !(lambda > 0.0) {
            return Err(Error::Config(format!(
                "Neo-Hookean parameters must be positive (mu = {mu}, lambda = {lambda})"
            )));
        }
        Ok(NeoHookeanParams { mu, lambda })
    }

    /// `λ = 2μν / (1 − 2ν)`
    pub fn from_shear_and_poisson(mu: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 0.5) {
            return Err(Error::Config(format!("Poisson's ratio {nu} outside (0, 0.5)")));
        }
        Self::new(mu, 2.0 * mu * nu / (1.0 - 2.0 * nu))
    }

    /// Both moduli multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        NeoHookeanParams {
            mu: self.mu * factor,
            lambda: self.lambda * factor,
        }
    }

    pub fn strain_energy<const D: usize>(&self, c: &Mat<D>) -> f64 {
        let ln_j = 0.5 * tensor::det(c).ln();
        0.5 * self.mu * (tensor::trace(c) - D as f64 - 2.0 * ln_j) + self.lambda * ln_j * ln_j
    }

    /// `S = 2 ∂ψ/∂C = μ (I − C⁻¹) + 2λ ln J C⁻¹`
    pub fn second_pk_stress<const D: usize>(&self, c: &Mat<D>) -> Mat<D> {
        let ln_j = 0.5 * tensor::det(c).ln();
        let c_inv = tensor::inverse(c);
        let mut s = tensor::scale(&c_inv, 2.0 * self.lambda * ln_j - self.mu);
        for (i, row) in s.iter_mut().enumerate() {
            row[i] += self.mu;
        }
        s
    }

    /// `τ = μ b − (μ − 2λ ln J) I`, evaluated as `μ (b − I) + 2λ ln J I` so
    /// that small strains do not cancel.
    pub fn kirchhoff_stress<const D: usize>(&self, kin: &Kinematics<D>) -> Mat<D> {
        let mut tau = tensor::scale(&kin.b_minus_i, self.mu);
        for (i, row) in tau.iter_mut().enumerate() {
            row[i] += 2.0 * self.lambda * kin.ln_j;
        }
        tau
    }

    /// `μ − 2λ ln J`
    #[inline]
    pub fn scalar_coefficient(&self, j: f64) -> f64 {
        self.scalar_coefficient_from_log(j.ln())
    }

    #[inline]
    pub fn scalar_coefficient_from_log(&self, ln_j: f64) -> f64 {
        self.mu - 2.0 * self.lambda * ln_j
    }

    /// `(2[μ − 2λ ln J], 2λ)` so that `J𝒞 : g = c1 g + c2 tr(g) I`.
    #[inline]
    pub fn tangent_coefficients(&self, j: f64) -> (f64, f64) {
        (2.0 * self.scalar_coefficient(j), 2.0 * self.lambda)
    }

    /// `J𝒞 : g_s = 2[μ − 2λ ln J] g_s + 2λ tr(g_s) I` for symmetric `g_s`.
    pub fn tangent_action<const D: usize>(&self, g_s: &Mat<D>, j: f64) -> Mat<D> {
        let (c1, c2) = self.tangent_coefficients(j);
        let tr = tensor::trace(g_s);
        let mut r = tensor::scale(g_s, c1);
        for (i, row) in r.iter_mut().enumerate() {
            row[i] += c2 * tr;
        }
        r
    }

    /// `J𝒞 = 2[μ − 2λ ln J] 𝒮 + 2λ I ⊗ I`
    pub fn material_tangent_full(&self, dim: usize, j: f64) -> MaterialTangent {
        let (c1, c2) = self.tangent_coefficients(j);
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        MaterialTangent::from_fn(dim, |i, jj, k, l| {
            c1 * 0.5 * (d(i, k) * d(jj, l) + d(i, l) * d(jj, k)) + c2 * d(i, jj) * d(k, l)
        })
    }
}

/// Constitutive interface used by the operator paths that do not rely on the
/// closed-form Neo-Hookean tangent action.
pub trait Hyperelastic {
    fn kirchhoff<const D: usize>(&self, kin: &Kinematics<D>) -> Mat<D>;
    fn spatial_tangent<const D: usize>(&self, kin: &Kinematics<D>) -> MaterialTangent;
    fn energy<const D: usize>(&self, kin: &Kinematics<D>) -> f64;
}

impl Hyperelastic for NeoHookeanParams {
    fn kirchhoff<const D: usize>(&self, kin: &Kinematics<D>) -> Mat<D> {
        self.kirchhoff_stress(kin)
    }

    fn spatial_tangent<const D: usize>(&self, kin: &Kinematics<D>) -> MaterialTangent {
        self.material_tangent_full(D, kin.ln_j.exp())
    }

    /// Same as [`strain_energy`](NeoHookeanParams::strain_energy) with
    /// `tr C − tr I = tr(b − I)`.
    fn energy<const D: usize>(&self, kin: &Kinematics<D>) -> f64 {
        0.5 * self.mu * (tensor::trace(&kin.b_minus_i) - 2.0 * kin.ln_j) + self.lambda * kin.ln_j * kin.ln_j
    }
}

/// Parameters of the two phases of the heterogeneous benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSet {
    pub matrix: NeoHookeanParams,
    pub inclusion: NeoHookeanParams,
}

impl MaterialSet {
    /// Matrix with `μ = 0.4225e6 N/mm²`, `ν = 0.3`; inclusions 100 times stiffer.
    pub fn benchmark() -> Self {
        let matrix = NeoHookeanParams::from_shear_and_poisson(0.4225e6, 0.3)
            .expect("benchmark parameters are valid");
        MaterialSet {
            matrix,
            inclusion: matrix.scaled(100.0),
        }
    }

    pub fn homogeneous(params: NeoHookeanParams) -> Self {
        MaterialSet {
            matrix: params,
            inclusion: params,
        }
    }

    #[inline]
    pub fn get(&self, id: MaterialId) -> &NeoHookeanParams {
        match id {
            MaterialId::Matrix => &self.matrix,
            MaterialId::Inclusion => &self.inclusion,
        }
    }
}

/// Kinematic quantities derived from `F = I + H`, `H = Grad u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics<const D: usize> {
    pub f: Mat<D>,
    pub j: f64,
    /// `ln J`, computed as `ln(1 + (det F − 1))` from `H` directly.
    pub ln_j: f64,
    /// Left Cauchy-Green tensor `F Fᵀ`.
    pub b: Mat<D>,
    /// `b − I = H + Hᵀ + H Hᵀ`
    pub b_minus_i: Mat<D>,
    /// Right Cauchy-Green tensor `Fᵀ F`.
    pub c: Mat<D>,
    /// Green-Lagrange strain `½ (C − I)`.
    pub e: Mat<D>,
    pub f_inv: Mat<D>,
}

pub fn kinematics_from_displacement_gradient<const D: usize>(
    grad_u: &Mat<D>,
) -> std::result::Result<Kinematics<D>, InvertedDeformation> {
    let mut f = *grad_u;
    for (i, row) in f.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    kinematics(&f, grad_u)
}

pub fn kinematics_from_deformation_gradient<const D: usize>(
    f: &Mat<D>,
) -> std::result::Result<Kinematics<D>, InvertedDeformation> {
    let mut h = *f;
    for (i, row) in h.iter_mut().enumerate() {
        row[i] -= 1.0;
    }
    kinematics(f, &h)
}

/// `det(I + H) − 1` without forming `I + H`.
fn det_minus_one<const D: usize>(h: &Mat<D>) -> f64 {
    let tr = tensor::trace(h);
    if D == 2 {
        tr + tensor::det(h)
    } else {
        let minors = h[0][0] * h[1][1] - h[0][1] * h[1][0] + h[0][0] * h[2][2] - h[0][2] * h[2][0]
            + h[1][1] * h[2][2] - h[1][2] * h[2][1];
        tr + minors + tensor::det(h)
    }
}

fn kinematics<const D: usize>(f: &Mat<D>, h: &Mat<D>) -> std::result::Result<Kinematics<D>, InvertedDeformation> {
    let dm = det_minus_one(h);
    let j = 1.0 + dm;
    if !(j > 0.0) {
        return Err(InvertedDeformation { det: j });
    }
    let hht = tensor::mul_bt(h, h);
    let mut b_minus_i = hht;
    let mut e = tensor::mul_at(h, h);
    for a in 0..D {
        for b in 0..D {
            // pair first so the result is bitwise symmetric
            let twice_sym = h[a][b] + h[b][a];
            b_minus_i[a][b] += twice_sym;
            e[a][b] = 0.5 * (e[a][b] + twice_sym);
        }
    }
    let mut b = b_minus_i;
    let mut c = tensor::scale(&e, 2.0);
    for i in 0..D {
        b[i][i] += 1.0;
        c[i][i] += 1.0;
    }
    Ok(Kinematics {
        f: *f,
        j,
        ln_j: dm.ln_1p(),
        b,
        b_minus_i,
        c,
        e,
        f_inv: tensor::inverse(f),
    })
}

/// Fourth-order tensor with minor and major symmetries in Voigt notation.
///
/// Slot order is `11, 22, 33, 23, 13, 12` in 3D and `11, 22, 12` in 2D. Entry
/// `(I, J)` holds `C_ijkl` for the index pairs of `I` and `J`; strain-like
/// inputs carry a factor 2 on their shear slots, so `σ_I = Σ_J C_IJ ε_J`
/// equals `σ = 𝒞 : g` for symmetric `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialTangent {
    dim: usize,
    voigt: [[f64; 6]; 6],
}

impl MaterialTangent {
    pub fn from_fn(dim: usize, c: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let pairs = sym_pairs(dim);
        let mut voigt = [[0.0; 6]; 6];
        for (a, &(i, j)) in pairs.iter().enumerate() {
            for (b, &(k, l)) in pairs.iter().enumerate() {
                voigt[a][b] = c(i, j, k, l);
            }
        }
        MaterialTangent { dim, voigt }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of Voigt slots, `dim (dim + 1) / 2`.
    pub fn n(&self) -> usize {
        sym_len(self.dim)
    }

    pub fn voigt(&self, a: usize, b: usize) -> f64 {
        self.voigt[a][b]
    }

    /// Entries stored when packing the upper triangle: 21 in 3D, 6 in 2D.
    pub const fn packed_len(dim: usize) -> usize {
        let n = sym_len(dim);
        n * (n + 1) / 2
    }

    pub fn pack(&self, out: &mut [f64]) {
        let n = self.n();
        let mut k = 0;
        for a in 0..n {
            for b in a..n {
                out[k] = self.voigt[a][b];
                k += 1;
            }
        }
    }

    pub fn unpack(dim: usize, packed: &[f64]) -> Self {
        let n = sym_len(dim);
        let mut voigt = [[0.0; 6]; 6];
        let mut k = 0;
        for a in 0..n {
            for b in a..n {
                voigt[a][b] = packed[k];
                voigt[b][a] = packed[k];
                k += 1;
            }
        }
        MaterialTangent { dim, voigt }
    }

    pub fn is_major_symmetric(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|a| (0..n).all(|b| (self.voigt[a][b] - self.voigt[b][a]).abs() <= tol))
    }

    /// `𝒞 : g` for symmetric `g`.
    #[inline]
    pub fn contract<const D: usize>(&self, g: &Mat<D>) -> Mat<D> {
        let mut eps = [0.0; 6];
        strain_voigt(g, &mut eps);
        contract_voigt_packed::<D>(&self.voigt, &eps)
    }
}

/// Voigt strain of a symmetric tensor (shear slots doubled).
#[inline]
pub fn strain_voigt<const D: usize>(g: &Mat<D>, eps: &mut [f64; 6]) {
    for (a, &(i, j)) in sym_pairs(D).iter().enumerate() {
        eps[a] = if i == j { g[i][j] } else { 2.0 * g[i][j] };
    }
}

#[inline]
fn contract_voigt_packed<const D: usize>(voigt: &[[f64; 6]; 6], eps: &[f64; 6]) -> Mat<D> {
    let pairs = sym_pairs(D);
    let mut s = tensor::zero::<D>();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        let mut v = 0.0;
        for (b, e) in eps.iter().enumerate().take(pairs.len()) {
            v += voigt[a][b] * e;
        }
        s[i][j] = v;
        s[j][i] = v;
    }
    s
}

/// `𝒞 : g` with `𝒞` given as a packed upper triangle (see
/// [`MaterialTangent::pack`]).
#[inline]
pub fn contract_packed<const D: usize>(packed: &[f64], g: &Mat<D>) -> Mat<D> {
    let pairs = sym_pairs(D);
    let n = pairs.len();
    let mut eps = [0.0; 6];
    strain_voigt(g, &mut eps);
    let mut sig = [0.0; 6];
    let mut k = 0;
    for a in 0..n {
        sig[a] += packed[k] * eps[a];
        k += 1;
        for b in a + 1..n {
            let c = packed[k];
            sig[a] += c * eps[b];
            sig[b] += c * eps[a];
            k += 1;
        }
    }
    let mut s = tensor::zero::<D>();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        s[i][j] = sig[a];
        s[j][i] = sig[a];
    }
    s
}
