//! First Lyapunov coefficient by the standard projection formula for
//! functional differential equations.
//!
//! With `Δ(λ) = λI - A - K(λτ)B`, right null vector `q` and left null vector
//! `p` scaled so that `pᵀΔ'(iω)q = 1`,
//!
//! `c₁ = ½ pᵀ[C(q,q,q̄) + 2B(q,h₁₁) + B(q̄,h₂₀)]`,
//! `h₂₀ = Δ(2iω)⁻¹B(q,q)`, `h₁₁ = Δ(0)⁻¹B(q,q̄)`,
//!
//! where `B` and `C` are the second and third derivatives of the nonlinear
//! part evaluated on exponential histories. `c₁` is the coefficient of
//! `z|z|²` in the Poincaré normal form for the coordinate `X ≈ zq + z̄q̄`,
//! so it is directly comparable with `C₁(0)` for the same `q`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{complexify, dot, identity, mat_axpy, mat_vec, max_norm, ComplexMat4, ComplexVec4};
use super::{bifurcation_quantities_from_c1, BifurcationQuantities, EigenPair};
use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::kernels::{kernel_q, mean_kernel};
use crate::model::{linear_matrices, ModelParams};
use crate::normalform::solve_complex_4x4;
use crate::stability::HopfPoint;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceNormalForm {
    /// Left null vector with `pᵀΔ'(iω₀)q = 1`.
    pub p: ComplexVec4,
    pub h20: ComplexVec4,
    pub h11: ComplexVec4,
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
    pub c1: Complex64,
    pub quantities: BifurcationQuantities,
}

/// `Δ(λ) = λI - A - K(λτ)B`.
pub fn char_matrix(params: &ModelParams, eq: &Equilibrium, lambda: Complex64, tau: f64) -> ComplexMat4 {
    let lp = linear_matrices(params, eq);
    let a = complexify(&lp.a);
    let b = complexify(&lp.b);
    let lam_i = identity().map(|row| row.map(|x| x * lambda));
    let m = mat_axpy(&lam_i, -Complex64::new(1.0, 0.0), &a);
    mat_axpy(&m, -mean_kernel(lambda * tau), &b)
}

/// `Δ'(λ) = I + τQ(λτ)B`, using `K'(z) = -Q(z)`.
pub fn char_matrix_dlambda(params: &ModelParams, eq: &Equilibrium, lambda: Complex64, tau: f64) -> ComplexMat4 {
    let lp = linear_matrices(params, eq);
    mat_axpy(&identity(), tau * kernel_q(lambda * tau), &complexify(&lp.b))
}

/// Second derivative of the nonlinearity on `x e^{μxθ}` and `y e^{μyθ}`.
fn bilinear(
    params: &ModelParams,
    eq: &Equilibrium,
    tau: f64,
    x: &ComplexVec4,
    mx: Complex64,
    y: &ComplexVec4,
    my: Complex64,
) -> ComplexVec4 {
    let a12 = params.a12;
    let cross = -a12 * (x[3] * y[1] + x[1] * y[3]);
    let mix = params.alpha + (1.0 - params.alpha) * mean_kernel((mx + my) * tau);
    [ZERO, cross, eq.rho2 * x[1] * y[1] * mix, cross]
}

/// Third derivative; only the Hill term contributes.
fn trilinear(params: &ModelParams, eq: &Equilibrium, tau: f64, v: &ComplexVec4, lambda: Complex64) -> ComplexVec4 {
    // C(q, q, q̄): exponents λ + λ - λ̄ = λ on the imaginary axis
    let mix = params.alpha + (1.0 - params.alpha) * mean_kernel((2.0 * lambda + lambda.conj()) * tau);
    [ZERO, ZERO, eq.rho3 * v[1] * v[1] * v[1].conj() * mix, ZERO]
}

/// Computes `c₁` for the right eigenvector and the unnormalized adjoint
/// components carried by `pair`, at the pair's `(ω₀, τ₀)`.
pub fn reference_normal_form(
    params: &ModelParams,
    eq: &Equilibrium,
    hopf: &HopfPoint,
    pair: &EigenPair,
) -> Result<ReferenceNormalForm> {
    let tau = pair.tau0;
    let l = pair.lambda1;
    let q = pair.v;
    let d = pair.d;
    // dᵀΔ(λ₁) = 0 for the closed-form adjoint components
    let dp = char_matrix_dlambda(params, eq, l, tau);
    let norm = dot(&d, &mat_vec(&dp, &q));
    if !(norm.norm() > 1e-12) {
        return Err(Error::DegenerateEigenvector(norm.norm()));
    }
    let p = d.map(|x| x / norm);

    let qb = q.map(|x| x.conj());
    let zero = ZERO;
    let b20 = bilinear(params, eq, tau, &q, l, &q, l);
    let b11 = bilinear(params, eq, tau, &q, l, &qb, l.conj());
    let b02 = bilinear(params, eq, tau, &qb, l.conj(), &qb, l.conj());
    let h20 = solve_complex_4x4(&char_matrix(params, eq, 2.0 * l, tau), &b20)?;
    let h11 = solve_complex_4x4(&char_matrix(params, eq, zero, tau), &b11)?;

    let c = trilinear(params, eq, tau, &q, l);
    let t1 = bilinear(params, eq, tau, &q, l, &h11, zero);
    let t2 = bilinear(params, eq, tau, &qb, l.conj(), &h20, 2.0 * l);
    let sum: ComplexVec4 = std::array::from_fn(|i| c[i] + 2.0 * t1[i] + t2[i]);
    if !max_norm(&sum).is_finite() {
        return Err(Error::Domain("non-finite cubic term".into()));
    }
    let c1 = 0.5 * dot(&p, &sum);
    // standard sign convention: the frequency drift is Im λ'(τ₀)
    let quantities = bifurcation_quantities_from_c1(c1, hopf.lambda_prime.re, hopf.lambda_prime.im, hopf.omega0)?;
    Ok(ReferenceNormalForm {
        p,
        h20,
        h11,
        g20: dot(&p, &b20),
        g11: dot(&p, &b11),
        g02: dot(&p, &b02),
        c1,
        quantities,
    })
}
