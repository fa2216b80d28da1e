//! Model parameters, the Hill nonlinearity and the linearization about an
//! equilibrium.
//!
//! State ordering everywhere is `(x1, y1, x2, y2)`: mRNA and protein of p53,
//! then mRNA and protein of mdm2.

use serde::{Deserialize, Serialize};

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};

pub type Mat4 = [[f64; 4]; 4];

/// Rate constants, Hill parameters, delay-mix weight and delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub a1: f64,
    pub a2: f64,
    pub a12: f64,
    pub b1: f64,
    pub b2: f64,
    /// Hill half-saturation constant.
    pub a: f64,
    /// Hill exponent.
    pub n: u32,
    /// Weight of the instantaneous Hill term in the delayed feedback.
    pub alpha: f64,
    pub tau: f64,
}

impl Default for ModelParams {
    /// The published numerical example, with `a12 = 0.06` and the printed
    /// critical delay as `tau`.
    fn default() -> Self {
        Self {
            a1: 0.13,
            a2: 0.13,
            a12: 0.06,
            b1: 0.2,
            b2: 0.4,
            a: 4.0,
            n: 3,
            alpha: 0.2,
            tau: 0.100_165_126_3,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("a1", self.a1),
            ("a2", self.a2),
            ("a12", self.a12),
            ("b1", self.b1),
            ("b2", self.b2),
        ];
        for (field, value) in rates {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must lie in (0, 1], got {value}"),
                });
            }
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "a",
                reason: format!("must be positive and finite, got {}", self.a),
            });
        }
        if self.n < 1 {
            return Err(Error::InvalidParameter {
                field: "n",
                reason: "must be an integer >= 1".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter {
                field: "alpha",
                reason: format!("must lie in [0, 1], got {}", self.alpha),
            });
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "tau",
                reason: format!("must be finite and >= 0, got {}", self.tau),
            });
        }
        Ok(())
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Hill function `f` of these parameters.
    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        hill_unchecked(x, self.a, self.n)
    }
}

/// Concentrations of the four species.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl State {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `xⁿ / (a + xⁿ)`.
pub fn hill(x: f64, a: f64, n: u32) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("hill: x must be >= 0, got {x}")));
    }
    Ok(hill_unchecked(x, a, n))
}

#[inline]
pub(crate) fn hill_unchecked(x: f64, a: f64, n: u32) -> f64 {
    let u = x.powi(n as i32);
    u / (a + u)
}

/// First three derivatives of the Hill function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillDerivs {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

/// Closed-form `f'`, `f''`, `f'''` of the Hill function.
///
/// Writing `f = 1 - a/(a + u)` with `u = xⁿ`:
/// `f' = a u'/(a+u)²`, `f'' = a (u''/(a+u)² - 2u'²/(a+u)³)`,
/// `f''' = a (u'''/(a+u)² - 6u'u''/(a+u)³ + 6u'³/(a+u)⁴)`.
pub fn hill_derivs(x: f64, a: f64, n: u32) -> Result<HillDerivs> {
    if x < 0.0 || x.is_nan() || (x == 0.0 && n < 3) {
        return Err(Error::Domain(format!(
            "hill_derivs: need x > 0 (or x = 0 with n >= 3), got x = {x}, n = {n}"
        )));
    }
    let nf = n as f64;
    // k-th derivative of xⁿ; terms whose falling-factorial coefficient vanishes are exactly zero
    let power_deriv = |k: u32| -> f64 {
        if k > n {
            return 0.0;
        }
        let coeff: f64 = (0..k).map(|j| nf - j as f64).product();
        coeff * x.powi((n - k) as i32)
    };
    let u = x.powi(n as i32);
    let (u1, u2, u3) = (power_deriv(1), power_deriv(2), power_deriv(3));
    let s = a + u;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    Ok(HillDerivs {
        rho1: a * u1 / s2,
        rho2: a * (u2 / s2 - 2.0 * u1 * u1 / s3),
        rho3: a * (u3 / s2 - 6.0 * u1 * u2 / s3 + 6.0 * u1 * u1 * u1 / s4),
    })
}

/// Right-hand side of the model given the caller-evaluated delayed feedback
/// `(1/τ)∫₀^τ (α f(y₁(t)) + (1-α) f(y₁(t-s))) ds`.
pub fn rhs(state: &State, delayed_term: f64, params: &ModelParams) -> Result<State> {
    if !state.is_finite() || !delayed_term.is_finite() {
        return Err(Error::Domain("rhs: non-finite input".into()));
    }
    Ok(rhs_unchecked(state, delayed_term, params))
}

#[inline]
pub(crate) fn rhs_unchecked(s: &State, delayed_term: f64, p: &ModelParams) -> State {
    State {
        x1: 1.0 - p.b1 * s.x1,
        y1: s.x1 - (p.a1 + p.a12 * s.y2) * s.y1,
        x2: delayed_term - p.b2 * s.x2,
        y2: s.x2 - (p.a2 + p.a12 * s.y1) * s.y2,
    }
}

/// Matrices of the linearization `U' = A U(t) + (1/τ) B ∫₀^τ U(t-s) ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPair {
    pub a: Mat4,
    pub b: Mat4,
}

pub fn linear_matrices(params: &ModelParams, eq: &Equilibrium) -> LinearPair {
    let p = params;
    let rho1 = eq.rho1;
    let a = [
        [-p.b1, 0.0, 0.0, 0.0],
        [1.0, -(p.a1 + p.a12 * eq.y20), 0.0, -p.a12 * eq.y10],
        [0.0, p.alpha * rho1, -p.b2, 0.0],
        [0.0, -p.a12 * eq.y20, 1.0, -(p.a2 + p.a12 * eq.y10)],
    ];
    let mut b = [[0.0; 4]; 4];
    b[2][1] = (1.0 - p.alpha) * rho1;
    LinearPair { a, b }
}
