//! The positive equilibrium, obtained from a scalar equation in `y1`.
//!
//! At a steady state `x1 = 1/b1`, and eliminating `y2`, `x2` leaves
//! `f(y1) = b2 g(y1)` with
//! `g(x) = (a2 + a12 x)(1 - a1 b1 x) / (b1 a12 x)`, which equals `x2` at the
//! equilibrium. `g` is strictly decreasing on `(0, 1/(a1 b1))`
//! (`g'(x) = -a2/(b1 a12 x²) - a1`), so `f - b2 g` is strictly increasing
//! there and has exactly one root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hill_derivs, ModelParams, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x10: f64,
    pub y10: f64,
    pub x20: f64,
    pub y20: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    /// Max-norm of the steady-state equations at the point.
    pub residual: f64,
}

impl Equilibrium {
    pub fn state(&self) -> State {
        State::new(self.x10, self.y10, self.x20, self.y20)
    }
}

/// Right end of the bracket, where `y20` would vanish.
pub fn bracket_end(params: &ModelParams) -> f64 {
    1.0 / (params.a1 * params.b1)
}

pub fn g_of(x: f64, params: &ModelParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("g_of: x must be > 0, got {x}")));
    }
    let p = params;
    Ok((p.a2 + p.a12 * x) * (1.0 - p.a1 * p.b1 * x) / (p.b1 * p.a12 * x))
}

fn g_prime(x: f64, p: &ModelParams) -> f64 {
    -p.a2 / (p.b1 * p.a12 * x * x) - p.a1
}

/// `f(x) - b2 g(x)`, whose root on the bracket is `y10`.
pub fn equilibrium_residual(x: f64, params: &ModelParams) -> Result<f64> {
    let hi = bracket_end(params);
    if !(x > 0.0 && x <= hi) {
        return Err(Error::Domain(format!(
            "equilibrium_residual: x = {x} outside (0, {hi}]"
        )));
    }
    Ok(params.f(x) - params.b2 * g_of(x, params)?)
}

const MAX_ITER: usize = 200;

pub fn find_equilibrium(params: &ModelParams, tol: f64) -> Result<Equilibrium> {
    params.validate()?;
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(Error::Domain(format!(
            "find_equilibrium: tol must lie in [1e-14, 1e-6], got {tol}"
        )));
    }
    let end = bracket_end(params);
    let eps = 1e-12 * end;
    let (mut lo, mut hi) = (eps, end - eps);
    let (r_lo, r_hi) = (
        equilibrium_residual(lo, params)?,
        equilibrium_residual(hi, params)?,
    );
    if !(r_lo < 0.0 && r_hi > 0.0) {
        return Err(Error::BracketFailure { lo, hi });
    }

    let mut iterations = 0;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if equilibrium_residual(mid, params)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations >= MAX_ITER {
            return Err(Error::NoConvergence { what: "equilibrium bisection", iterations });
        }
    }

    // Newton polish, kept inside the bracket
    let mut x = 0.5 * (lo + hi);
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        let r = equilibrium_residual(x, params)?;
        if r == 0.0 {
            converged = true;
            break;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = hill_derivs(x, params.a, params.n)?.rho1 - params.b2 * g_prime(x, params);
        let mut next = x - r / slope;
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        if r.abs() < tol && step <= 4.0 * f64::EPSILON * x {
            converged = true;
            break;
        }
        x = next;
    }
    if !converged {
        return Err(Error::NoConvergence { what: "equilibrium Newton polish", iterations });
    }
    let final_r = equilibrium_residual(x, params)?;
    if final_r.abs() >= tol {
        return Err(Error::NoConvergence { what: "equilibrium Newton polish", iterations });
    }
    assemble(params, x)
}

fn assemble(p: &ModelParams, y10: f64) -> Result<Equilibrium> {
    let x10 = 1.0 / p.b1;
    let y20 = (1.0 - p.a1 * p.b1 * y10) / (p.b1 * p.a12 * y10);
    let x20 = (p.a2 + p.a12 * y10) * y20;
    let d = hill_derivs(y10, p.a, p.n)?;
    let mut eq = Equilibrium {
        x10,
        y10,
        x20,
        y20,
        rho1: d.rho1,
        rho2: d.rho2,
        rho3: d.rho3,
        residual: 0.0,
    };
    eq.residual = steady_state_residual(p, &eq.state());
    Ok(eq)
}

/// Max-norm of the four steady-state equations with the delayed feedback at
/// its stationary value `f(y1)`.
pub fn steady_state_residual(p: &ModelParams, s: &State) -> f64 {
    let r = crate::model::rhs_unchecked(s, p.f(s.y1), p);
    r.max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rhs;

    fn published() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn g_vanishes_at_bracket_end() {
        for p in [published(), ModelParams { a1: 0.5, b1: 0.7, ..published() }] {
            assert!(g_of(bracket_end(&p), &p).unwrap().abs() < 1e-12);
        }
        assert!(g_of(0.0, &published()).is_err());
    }

    #[test]
    fn g_matches_published_x20() {
        let g = g_of(21.034_171_91, &published()).unwrap();
        assert!((g - 2.498_925_919).abs() < 1e-6);
    }

    #[test]
    fn g_is_decreasing_on_bracket() {
        let p = published();
        let end = bracket_end(&p);
        let xs: Vec<f64> = (1..=1000).map(|k| end * k as f64 / 1001.0).collect();
        for w in xs.windows(2) {
            assert!(g_of(w[1], &p).unwrap() < g_of(w[0], &p).unwrap());
        }
    }

    #[test]
    fn residual_at_published_root() {
        let p = published();
        let r = equilibrium_residual(21.034_171_91, &p).unwrap();
        assert!(r.abs() < 1e-6);
        // third steady-state line with the published values
        assert!((p.f(21.034_171_91) - p.b2 * 2.498_925_919).abs() < 1e-6);
    }

    #[test]
    fn residual_signs_at_ends() {
        let p = published();
        let end = bracket_end(&p);
        assert!(equilibrium_residual(1e-9, &p).unwrap() < -1e3);
        let r_end = equilibrium_residual(end, &p).unwrap();
        assert!((r_end - p.f(end)).abs() < 1e-12 && r_end > 0.0);
        assert!(equilibrium_residual(end * 1.01, &p).is_err());
        assert!(equilibrium_residual(0.0, &p).is_err());
    }

    #[test]
    fn published_equilibrium() {
        let eq = find_equilibrium(&published(), 1e-12).unwrap();
        assert!((eq.x10 - 5.0).abs() < 1e-12);
        assert!((eq.y10 - 21.034_171_91).abs() < 1e-6);
        assert!((eq.x20 - 2.498_925_919).abs() < 1e-6);
        assert!((eq.y20 - 1.795_140_515).abs() < 1e-6);
        assert!(eq.residual < 1e-9);
        let p = published();
        let identity = (1.0 - p.a1 * p.b1 * eq.y10) / (p.b1 * p.a12 * eq.y10);
        assert!((eq.y20 - identity).abs() < 1e-10);
    }

    #[test]
    fn rhs_vanishes_at_equilibrium() {
        let p = published();
        let eq = find_equilibrium(&p, 1e-12).unwrap();
        let r = rhs(&eq.state(), p.f(eq.y10), &p).unwrap();
        assert!(r.max_abs() < 1e-9);
        let r = rhs(&eq.state(), p.b2 * eq.x20, &p).unwrap();
        assert!(r.max_abs() < 1e-9);
    }

    #[test]
    fn a12_variant_and_b2_scaling() {
        let p = ModelParams { a12: 0.02, ..published() };
        let eq = find_equilibrium(&p, 1e-12).unwrap();
        assert!(eq.residual < 1e-9);
        let base = find_equilibrium(&published(), 1e-12).unwrap();
        assert!((eq.y10 - base.y10).abs() > 1e-3);

        let doubled = ModelParams { b2: 0.8, ..published() };
        let eq2 = find_equilibrium(&doubled, 1e-12).unwrap();
        assert_eq!(eq2.x10, base.x10);
        assert!((eq2.y10 - base.y10).abs() > 1e-6);
    }

    #[test]
    fn tolerance_bounds_are_checked() {
        assert!(find_equilibrium(&published(), 1e-3).is_err());
        assert!(find_equilibrium(&published(), 1e-16).is_err());
    }

    #[test]
    fn residual_increasing_on_grid_for_several_sets() {
        let sets = [
            published(),
            ModelParams { a12: 0.02, ..published() },
            ModelParams { a1: 0.1, a2: 0.2, a12: 1.0, b1: 1.0, b2: 0.5, a: 100.0, n: 8, ..published() },
            ModelParams { a1: 1.0, a2: 1.0, a12: 1.0, b1: 1.0, b2: 1.0, a: 0.1, n: 1, ..published() },
        ];
        for p in sets {
            let end = bracket_end(&p);
            let mut prev = f64::NEG_INFINITY;
            for k in 1..2000 {
                let r = equilibrium_residual(end * k as f64 / 2000.0, &p).unwrap();
                assert!(r > prev);
                prev = r;
            }
            let eq = find_equilibrium(&p, 1e-12).unwrap();
            assert!(eq.residual < 1e-9, "{p:?} -> {}", eq.residual);
            assert!(eq.y10 > 0.0 && eq.y10 < end && eq.y20 > 0.0);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]
            #[test]
            fn equilibrium_satisfies_steady_state(
                a1 in 0.01f64..1.0, a2 in 0.01f64..1.0, a12 in 0.01f64..1.0,
                b1 in 0.01f64..1.0, b2 in 0.01f64..1.0, a in 0.01f64..100.0,
                n in 1u32..10, alpha in 0.0f64..1.0,
            ) {
                let p = ModelParams { a1, a2, a12, b1, b2, a, n, alpha, tau: 1.0 };
                let eq = find_equilibrium(&p, 1e-12).unwrap();
                prop_assert!(eq.residual < 1e-9);
                prop_assert_eq!(eq.x10, 1.0 / b1);
            }
        }
    }
}
