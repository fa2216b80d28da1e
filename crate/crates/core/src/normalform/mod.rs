//! Center-manifold reduction at a Hopf point and the quantities that fix
//! the direction, stability and period trend of the bifurcating orbit.
//!
//! Every exponential integral is written through the kernels of
//! [`crate::kernels`]; for example
//! `(1/τ₀)∫₀^τ₀ e^{-2λ₁s} ds = K(2λ₁τ₀)` with `K(z) = (1 - e^{-z})/z`.
//! Quadrature is used only by the tests.
//!
//! Two formula variants exist. [`FormulaVariant::Printed`] follows the
//! published expressions literally: `w₂₀⁴(0)` carries `conj(g₂₀)` and the
//! cubic Hill term of `F³₂₁` carries `v₂² conj(v₂)²`.
//! [`FormulaVariant::PatternConsistent`] uses `conj(g₀₂)` and
//! `v₂² conj(v₂)`, matching the surrounding formulas.

pub mod linalg;
pub mod reference;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::kernels::{kernel_p, kernel_q, kernel_tail, mean_kernel};
use crate::model::{linear_matrices, Mat4, ModelParams};
use crate::stability::{HopfPoint, SIMPLE_TOL};

pub use linalg::{solve_complex_4x4, ComplexMat4, ComplexVec4};
pub use reference::{reference_normal_form, ReferenceNormalForm};
use linalg::{complexify, conj, dot, identity, mat_axpy, mat_vec, max_norm, scale};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaVariant {
    #[default]
    Printed,
    PatternConsistent,
}

impl FormulaVariant {
    pub const ALL: [FormulaVariant; 2] = [FormulaVariant::Printed, FormulaVariant::PatternConsistent];
}

/// Right eigenvector `v` of the generator at `λ₁ = iω₀` and the normalized
/// adjoint vector `w = d / conj(η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda1: Complex64,
    pub tau0: f64,
    pub v: ComplexVec4,
    /// Adjoint components before normalization, `d₁ = 1`.
    pub d: ComplexVec4,
    pub eta: Complex64,
    pub w: ComplexVec4,
}

pub fn eigenpair(params: &ModelParams, eq: &Equilibrium, hopf: &HopfPoint) -> Result<EigenPair> {
    eigenpair_scaled(params, eq, hopf, ONE)
}

/// As [`eigenpair`], with `v` replaced by `ζ v` before `η` and `w` are formed.
pub fn eigenpair_scaled(
    params: &ModelParams,
    eq: &Equilibrium,
    hopf: &HopfPoint,
    zeta: Complex64,
) -> Result<EigenPair> {
    let p = params;
    let l1 = hopf.lambda1();
    let tau = hopf.tau0;
    let (y10, y20) = (eq.y10, eq.y20);
    let s1 = l1 + p.a1 + p.a12 * y20;
    let s2 = l1 + p.a2 + p.a12 * y10;
    let v = scale(
        &[
            ZERO,
            Complex64::new(p.a12 * y10, 0.0),
            p.a12 * p.a12 * y10 * y20 - s1 * s2,
            -s1,
        ],
        zeta,
    );
    let d2 = p.b1 + l1;
    let d4 = -p.a12 * y10 * (p.b1 + l1) / s2;
    let d3 = d4 / (p.b2 + l1);
    let d = [ONE, d2, d3, d4];
    let z = l1 * tau;
    let eta = v[1] * d2.conj() + v[2] * d3.conj() + v[3] * d4.conj()
        - d3.conj() * v[1] * (1.0 - p.alpha) * eq.rho1 * tau * tau * kernel_p(z);
    if !(eta.norm() >= 1e-12) {
        return Err(Error::DegenerateEigenvector(eta.norm()));
    }
    let w = scale(&d, ONE / eta.conj());
    Ok(EigenPair { lambda1: l1, tau0: tau, v, d, eta, w })
}

impl EigenPair {
    /// `‖(A + K(λ₁τ₀) B) v - λ₁ v‖∞`.
    pub fn eigen_residual(&self, params: &ModelParams, eq: &Equilibrium) -> f64 {
        let lp = linear_matrices(params, eq);
        let op = mat_axpy(&complexify(&lp.a), mean_kernel(self.lambda1 * self.tau0), &complexify(&lp.b));
        let av = mat_vec(&op, &self.v);
        max_norm(&std::array::from_fn(|i| av[i] - self.lambda1 * self.v[i]))
    }

    pub fn pairing_psi_phi(&self, b: &Mat4) -> Complex64 {
        bilinear_pairing(&self.w, self.lambda1, &self.v, self.lambda1, b, self.tau0)
    }

    pub fn pairing_psi_phibar(&self, b: &Mat4) -> Complex64 {
        bilinear_pairing(&self.w, self.lambda1, &conj(&self.v), self.lambda1.conj(), b, self.tau0)
    }

    pub fn pairing_psibar_phibar(&self, b: &Mat4) -> Complex64 {
        bilinear_pairing(
            &conj(&self.w),
            self.lambda1.conj(),
            &conj(&self.v),
            self.lambda1.conj(),
            b,
            self.tau0,
        )
    }
}

/// `⟨Ψ, Φ⟩` for `Ψ(s) = w e^{λψ s}` and `Φ(θ) = v e^{λφ θ}`:
///
/// ```text
/// conj(Ψ(0))·Φ(0) - ∫_{-τ}^0 ∫_{ξ=0}^θ conj(Ψ(ξ-θ)) B (1/τ)∫_0^ξ Φ(ξ')dξ' dξ dθ
/// ```
///
/// in closed form. Requires `λφ ≠ 0`.
pub fn bilinear_pairing(
    w: &ComplexVec4,
    lambda_psi: Complex64,
    v: &ComplexVec4,
    lambda_phi: Complex64,
    b: &Mat4,
    tau: f64,
) -> Complex64 {
    let wb = conj(w);
    let direct = dot(&wb, v);
    let bv = mat_vec(&complexify(b), v);
    let coupling = dot(&wb, &bv);
    let p = lambda_psi.conj();
    let q = lambda_phi;
    let pt = p * tau;
    let st = (p + q) * tau;
    // φ₁(x) = (e^x - 1)/x = K(-x); its divided difference between pτ and -qτ
    let divided = if st.norm() < 1e-6 {
        kernel_q(-(pt - 0.5 * st))
    } else {
        (mean_kernel(-pt) - mean_kernel(q * tau)) / st
    };
    let double = tau * tau / q * (kernel_tail(-pt) - divided);
    direct - coupling / tau * double
}

/// Second-order Taylor vectors and the quadratic coefficients of
/// `g(z, z̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub f20: ComplexVec4,
    pub f11: ComplexVec4,
    pub f02: ComplexVec4,
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
}

pub fn g_quadratic(pair: &EigenPair, params: &ModelParams, eq: &Equilibrium) -> Quadratic {
    let (al, a12, rho2) = (params.alpha, params.a12, eq.rho2);
    let be = 1.0 - al;
    let (v2, v4) = (pair.v[1], pair.v[3]);
    let z = pair.lambda1 * pair.tau0;
    let zb = z.conj();

    let f20_2 = -2.0 * a12 * v2 * v4;
    let f11_2 = -a12 * (v2 * v4.conj() + v2.conj() * v4);
    let f02_2 = -2.0 * a12 * v2.conj() * v4.conj();
    let f20_3 = rho2 * v2 * v2 * (al * al + 2.0 * al * be * mean_kernel(z) + be * be * mean_kernel(2.0 * z));
    let f11_3 = rho2
        * v2.norm_sqr()
        * (al * al + be * be + al * be * (mean_kernel(z) + mean_kernel(zb)));
    let f02_3 = rho2
        * v2.conj()
        * v2.conj()
        * (al * al + 2.0 * al * be * mean_kernel(zb) + be * be * mean_kernel(2.0 * zb));

    let f20 = [ZERO, f20_2, f20_3, f20_2];
    let f11 = [ZERO, f11_2, f11_3, f11_2];
    let f02 = [ZERO, f02_2, f02_3, f02_2];
    let wb = conj(&pair.w);
    Quadratic { f20, f11, f02, g20: dot(&f20, &wb), g11: dot(&f11, &wb), g02: dot(&f02, &wb) }
}

/// Center-manifold data entering `g₂₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterTerms {
    pub e1: ComplexVec4,
    pub e2: ComplexVec4,
    /// `w₂₀(0)` and `w₁₁(0)`, all four components.
    pub w20_0: ComplexVec4,
    pub w11_0: ComplexVec4,
    pub k1: Complex64,
    pub k2: Complex64,
    pub k3: Complex64,
    pub k4: Complex64,
    lambda1: Complex64,
    v: ComplexVec4,
    g20: Complex64,
    g11: Complex64,
    g02: Complex64,
}

impl CenterTerms {
    /// `w₂₀²(-s)`.
    pub fn w20_2(&self, s: f64) -> Complex64 {
        let l1 = self.lambda1;
        let v2 = self.v[1];
        -self.g20 / l1 * v2 * (-l1 * s).exp() - self.g02.conj() / (3.0 * l1) * v2.conj() * (l1 * s).exp()
            + self.e2[1] * (-2.0 * l1 * s).exp()
    }

    /// `w₁₁²(-s)`.
    pub fn w11_2(&self, s: f64) -> Complex64 {
        let l1 = self.lambda1;
        let v2 = self.v[1];
        self.g11 / l1 * v2 * (-l1 * s).exp() - self.g11.conj() / l1 * v2.conj() * (l1 * s).exp() + self.e1[1]
    }
}

pub fn center_terms(
    pair: &EigenPair,
    quad: &Quadratic,
    params: &ModelParams,
    eq: &Equilibrium,
    variant: FormulaVariant,
) -> Result<CenterTerms> {
    let lp = linear_matrices(params, eq);
    let (a, b) = (complexify(&lp.a), complexify(&lp.b));
    let l1 = pair.lambda1;
    let tau = pair.tau0;
    let z = l1 * tau;

    let m2 = mat_axpy(&mat_axpy(&a, mean_kernel(2.0 * z), &b), -2.0 * l1, &identity());
    let e2 = scale(&solve_complex_4x4(&m2, &quad.f20)?, -ONE);
    let m1 = mat_axpy(&a, ONE, &b);
    let e1 = scale(&solve_complex_4x4(&m1, &quad.f11)?, -ONE);

    let (g20, g11, g02) = (quad.g20, quad.g11, quad.g02);
    let v = pair.v;
    let vb = conj(&v);
    let w20_0: ComplexVec4 = std::array::from_fn(|i| {
        let second = match (variant, i) {
            (FormulaVariant::Printed, 3) => g20.conj(),
            _ => g02.conj(),
        };
        -g20 / l1 * v[i] - second / (3.0 * l1) * vb[i] + e2[i]
    });
    let w11_0: ComplexVec4 =
        std::array::from_fn(|i| g11 / l1 * v[i] - g11.conj() / l1 * vb[i] + e1[i]);

    let (v2, v2b) = (v[1], vb[1]);
    let kz = mean_kernel(z);
    let kzb = mean_kernel(z.conj());
    let k2z = mean_kernel(2.0 * z);
    let k2zb = mean_kernel(2.0 * z.conj());
    let k1 = g11 * v2 / l1 * tau * kz - g11.conj() * v2b / l1 * tau * kzb + e1[1] * tau;
    let k2 = g11 * v2 / l1 * tau * k2z - g11.conj() * v2b / l1 * tau + e1[1] * tau * kz;
    let k3 = -g20 * v2 / l1 * tau * kz - g02.conj() * v2b / (3.0 * l1) * tau * kzb + e2[1] * tau * k2z;
    let k4 = -g20 * v2 / l1 * tau - g02.conj() * v2b / (3.0 * l1) * tau * k2zb + e2[1] * tau * kz;

    Ok(CenterTerms { e1, e2, w20_0, w11_0, k1, k2, k3, k4, lambda1: l1, v, g20, g11, g02 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cubic {
    pub f21_2: Complex64,
    pub f21_3: Complex64,
    pub g21: Complex64,
}

pub fn g21_coeff(
    pair: &EigenPair,
    center: &CenterTerms,
    params: &ModelParams,
    eq: &Equilibrium,
    variant: FormulaVariant,
) -> Cubic {
    let (al, a12, rho2, rho3) = (params.alpha, params.a12, eq.rho2, eq.rho3);
    let be = 1.0 - al;
    let tau = pair.tau0;
    let z = pair.lambda1 * tau;
    let (v2, v4) = (pair.v[1], pair.v[3]);
    let (w20_2, w20_4) = (center.w20_0[1], center.w20_0[3]);
    let (w11_2, w11_4) = (center.w11_0[1], center.w11_0[3]);

    let f21_2 = -a12 * v2.conj() * w20_4 - 2.0 * a12 * v2 * w11_4 - a12 * v4.conj() * w20_2
        - 2.0 * a12 * v4 * w11_2;

    let kz = mean_kernel(z);
    let block_v2 = al * al * tau * w11_2 + al * be * center.k1 + al * be * w11_2 * tau * kz + be * be * center.k2;
    let block_v2b = al * al * tau * w20_2 - al * be * w20_2 * tau * kz + al * be * center.k3 + be * be * center.k4;
    let cubic_factor = match variant {
        FormulaVariant::Printed => v2 * v2 * v2.conj() * v2.conj(),
        FormulaVariant::PatternConsistent => v2 * v2 * v2.conj(),
    };
    let mix = al.powi(3)
        + be * be * al * mean_kernel(2.0 * z)
        + be * al * al * mean_kernel(z.conj())
        + be.powi(3);
    let f21_3 = rho2 / tau * (2.0 * v2 * block_v2 + 2.0 * v2.conj() * block_v2b) + rho3 * cubic_factor * mix;

    let wb = conj(&pair.w);
    let g21 = f21_2 * wb[1] + f21_3 * wb[2] + f21_2 * wb[3];
    Cubic { f21_2, f21_3, g21 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Supercritical,
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitStability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodTrend {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationQuantities {
    pub c1: Complex64,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub direction: Direction,
    pub orbit_stability: OrbitStability,
    pub period_trend: PeriodTrend,
}

pub fn bifurcation_quantities(
    g20: Complex64,
    g11: Complex64,
    g02: Complex64,
    g21: Complex64,
    m: f64,
    n: f64,
    omega0: f64,
) -> Result<BifurcationQuantities> {
    if !(omega0 > 0.0) {
        return Err(Error::Domain(format!("omega0 must be > 0, got {omega0}")));
    }
    let i = Complex64::new(0.0, 1.0);
    let c1 = i / (2.0 * omega0) * (g20 * g11 - 2.0 * g11.norm_sqr() - g02.norm_sqr() / 3.0) + g21 / 2.0;
    bifurcation_quantities_from_c1(c1, m, n, omega0)
}

/// `μ₂ = -Re C₁/M`, `β₂ = 2 Re C₁`, `T₂ = -(Im C₁ + μ₂N)/ω₀`.
pub fn bifurcation_quantities_from_c1(c1: Complex64, m: f64, n: f64, omega0: f64) -> Result<BifurcationQuantities> {
    if !(m.abs() > SIMPLE_TOL) {
        return Err(Error::TransversalityZero);
    }
    if !(omega0 > 0.0) {
        return Err(Error::Domain(format!("omega0 must be > 0, got {omega0}")));
    }
    let mu2 = -c1.re / m;
    let beta2 = 2.0 * c1.re;
    let t2 = -(c1.im + mu2 * n) / omega0;
    Ok(BifurcationQuantities {
        c1,
        mu2,
        beta2,
        t2,
        direction: if mu2 > 0.0 { Direction::Supercritical } else { Direction::Subcritical },
        orbit_stability: if beta2 < 0.0 { OrbitStability::Stable } else { OrbitStability::Unstable },
        period_trend: if t2 > 0.0 { PeriodTrend::Increasing } else { PeriodTrend::Decreasing },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub variant: FormulaVariant,
    pub omega0: f64,
    pub tau0: f64,
    pub m: f64,
    pub n: f64,
    pub pair: EigenPair,
    pub quadratic: Quadratic,
    pub center: CenterTerms,
    pub cubic: Cubic,
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
    pub g21: Complex64,
    pub quantities: BifurcationQuantities,
}

pub fn normal_form(
    params: &ModelParams,
    eq: &Equilibrium,
    hopf: &HopfPoint,
    variant: FormulaVariant,
) -> Result<NormalForm> {
    let pair = eigenpair(params, eq, hopf)?;
    normal_form_from_pair(params, eq, hopf, &pair, variant)
}

pub fn normal_form_from_pair(
    params: &ModelParams,
    eq: &Equilibrium,
    hopf: &HopfPoint,
    pair: &EigenPair,
    variant: FormulaVariant,
) -> Result<NormalForm> {
    let quadratic = g_quadratic(pair, params, eq);
    let center = center_terms(pair, &quadratic, params, eq, variant)?;
    let cubic = g21_coeff(pair, &center, params, eq, variant);
    let quantities = bifurcation_quantities(
        quadratic.g20,
        quadratic.g11,
        quadratic.g02,
        cubic.g21,
        hopf.m,
        hopf.n,
        hopf.omega0,
    )?;
    Ok(NormalForm {
        variant,
        omega0: hopf.omega0,
        tau0: hopf.tau0,
        m: hopf.m,
        n: hopf.n,
        pair: *pair,
        quadratic,
        center,
        cubic,
        g20: quadratic.g20,
        g11: quadratic.g11,
        g02: quadratic.g02,
        g21: cubic.g21,
        quantities,
    })
}

impl NormalForm {
    /// Right-hand side of `ż = λ₁z + g₂₀z²/2 + g₁₁zz̄ + g₀₂z̄²/2 + g₂₁z²z̄/2`.
    pub fn reduced_rhs(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        self.pair.lambda1 * z
            + self.g20 * z * z / 2.0
            + self.g11 * z * zb
            + self.g02 * zb * zb / 2.0
            + self.g21 * z * z * zb / 2.0
    }

    /// `zΦ(0) + z̄Φ̄(0) + w₂₀(0)z²/2 + w₁₁(0)zz̄ + w₀₂(0)z̄²/2`, the offset
    /// from the equilibrium on the center manifold, before discarding the
    /// (vanishing) imaginary part.
    pub fn manifold_offset_complex(&self, z: Complex64) -> ComplexVec4 {
        let v = self.pair.v;
        let zb = z.conj();
        std::array::from_fn(|i| {
            let w20 = self.center.w20_0[i];
            let w11 = self.center.w11_0[i];
            z * v[i] + zb * v[i].conj() + w20 * z * z / 2.0 + w11 * z * zb + w20.conj() * zb * zb / 2.0
        })
    }

    pub fn manifold_offset(&self, z: Complex64) -> [f64; 4] {
        self.manifold_offset_complex(z).map(|c| c.re)
    }
}
