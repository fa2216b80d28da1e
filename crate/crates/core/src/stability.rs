//! Characteristic function of the linearized delay system, zero-delay
//! stability, and location of delay-induced Hopf points.
//!
//! With `b1 > 0` the factor `λ + b1` never vanishes in the right half-plane,
//! so everything here works with the reduced function
//!
//! ```text
//! Δ(λ, τ) = λ³ + bλ² + cλ + d + h (1 - e^{-λτ}) / (λτ)
//! ```
//!
//! Purely imaginary roots `λ = iω` satisfy
//! `sin(ωτ) = τω(bω² - d)/h`, `cos(ωτ) = 1 - τω²(c - ω²)/h`, which forces
//! `τ = g₁(ω) = 2h(c - ω²) / ((bω² - d)² + ω²(c - ω²)²)`.

use std::f64::consts::TAU as TWO_PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::kernels::{kernel_q, mean_kernel};
use crate::model::ModelParams;

pub const REFINE_TOL: f64 = 1e-10;
pub const CERTIFICATE_TOL: f64 = 1e-8;
pub const SIMPLE_TOL: f64 = 1e-12;
pub const COARSE_TOL: f64 = 1e-2;
const MAX_NEWTON: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharCoeffs {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub h: f64,
}

pub fn char_coeffs(params: &ModelParams, eq: &Equilibrium) -> CharCoeffs {
    let p = params;
    let (y10, y20, rho1) = (eq.y10, eq.y20, eq.rho1);
    CharCoeffs {
        b: p.a1 + p.a2 + p.b2 + p.a12 * (y20 + y10),
        c: p.b2 * (p.a1 + p.a2)
            + p.b2 * p.a12 * (y20 + y10)
            + p.a1 * p.a2
            + p.a12 * (p.a1 * y10 + p.a2 * y20),
        d: p.b2 * p.a1 * p.a2
            + p.a12 * p.b2 * (y20 * p.a2 + p.a1 * y10)
            + p.alpha * p.a12 * y10 * rho1,
        h: (1.0 - p.alpha) * p.a12 * y10 * rho1,
    }
}

impl CharCoeffs {
    fn cubic(&self, l: Complex64) -> Complex64 {
        ((l + self.b) * l + self.c) * l + self.d
    }
}

/// `Δ(λ, τ)`; at `λ = 0` or `τ = 0` the kernel mean takes its limit 1.
pub fn char_delta(lambda: Complex64, tau: f64, k: &CharCoeffs) -> Complex64 {
    k.cubic(lambda) + k.h * mean_kernel(lambda * tau)
}

/// `∂Δ/∂λ = 3λ² + 2bλ + c - hτ Q(λτ)` with `Q(z) = (1 - (1+z)e^{-z})/z²`.
pub fn char_delta_dlambda(lambda: Complex64, tau: f64, k: &CharCoeffs) -> Complex64 {
    3.0 * lambda * lambda + 2.0 * k.b * lambda + k.c - k.h * tau * kernel_q(lambda * tau)
}

/// `∂Δ/∂τ = -hλ Q(λτ)`.
pub fn char_delta_dtau(lambda: Complex64, tau: f64, k: &CharCoeffs) -> Complex64 {
    -k.h * lambda * kernel_q(lambda * tau)
}

/// Routh–Hurwitz for `λ³ + bλ² + cλ + d + h` with positive coefficients.
pub fn zero_delay_stable(k: &CharCoeffs) -> bool {
    k.c * k.b > k.d + k.h
}

/// Roots of `λ³ + bλ² + cλ + e`: a bracketed real root, then the deflated
/// quadratic.
pub fn cubic_roots(b: f64, c: f64, e: f64) -> [Complex64; 3] {
    let p = |x: f64| ((x + b) * x + c) * x + e;
    let dp = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    let bound = 1.0 + b.abs().max(c.abs()).max(e.abs());
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * bound {
            break;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..3 {
        let s = dp(r);
        if s != 0.0 {
            r -= p(r) / s;
        }
    }
    // λ² + (b + r)λ + (c + r(b + r))
    let qb = b + r;
    let qc = c + r * qb;
    let disc = qb * qb - 4.0 * qc;
    let (z1, z2) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let t = -0.5 * (qb + qb.signum() * sq);
        let z1 = if t != 0.0 { t } else { -0.5 * qb };
        let z2 = if t != 0.0 { qc / t } else { -0.5 * qb };
        (Complex64::new(z1, 0.0), Complex64::new(z2, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(-0.5 * qb, im), Complex64::new(-0.5 * qb, -im))
    };
    [Complex64::new(r, 0.0), z1, z2]
}

pub fn zero_delay_roots(k: &CharCoeffs) -> [Complex64; 3] {
    cubic_roots(k.b, k.c, k.d + k.h)
}

/// `τ = g₁(ω)`; meaningful only for `h > 0`.
pub fn g1(omega: f64, k: &CharCoeffs) -> f64 {
    let w2 = omega * omega;
    let p = k.b * w2 - k.d;
    let q = k.c - w2;
    2.0 * k.h * q / (p * p + w2 * q * q)
}

/// Residuals of the split real/imaginary conditions for `λ = iω`.
pub fn eq16_residuals(omega: f64, tau: f64, k: &CharCoeffs) -> (f64, f64) {
    let w2 = omega * omega;
    let theta = omega * tau;
    let rs = theta.sin() - tau * omega * (k.b * w2 - k.d) / k.h;
    let rc = theta.cos() - 1.0 + tau * w2 * (k.c - w2) / k.h;
    (rs, rc)
}

/// Transversality pair and its ingredients at `(ω, τ)`.
///
/// `m1 + i m2 = ∂Δ/∂λ` and `n1 + i n2 = ∂Δ/∂τ` at `λ = iω`, both in the
/// closed forms that follow from the split conditions. `m` is
/// `Re dλ/dτ`; `n` is `(m1 n2 - m2 n1)/(m1² + m2²)`, which equals
/// `-Im dλ/dτ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transversality {
    pub m1: f64,
    pub m2: f64,
    pub n1: f64,
    pub n2: f64,
    pub m: f64,
    pub n: f64,
}

pub fn transversality_terms(omega: f64, tau: f64, k: &CharCoeffs) -> Transversality {
    let w = omega;
    let w2 = w * w;
    let p = k.b * w2 - k.d;
    let q = k.c - w2;
    let m1 = -4.0 * w2 + 2.0 * k.c - tau * p;
    let m2 = (3.0 * k.b * w2 - k.d - k.h) / w + tau * w * q;
    let n1 = (k.h - p - tau * w2 * q) / tau;
    let n2 = (w * q - tau * w * p) / tau;
    let den = m1 * m1 + m2 * m2;
    Transversality {
        m1,
        m2,
        n1,
        n2,
        m: -(m1 * n1 + m2 * n2) / den,
        n: (m1 * n2 - m2 * n1) / den,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub omega0: f64,
    pub tau0: f64,
    pub residual_sin: f64,
    pub residual_cos: f64,
    /// `|Δ(iω₀, τ₀)|`.
    pub delta_residual: f64,
    pub m1: f64,
    pub m2: f64,
    pub m: f64,
    pub n: f64,
    /// `dλ/dτ = -Δ_τ/Δ_λ` by direct complex division.
    pub lambda_prime: Complex64,
    pub simple: bool,
    pub transversal: bool,
}

impl HopfPoint {
    /// Evaluates residuals and transversality data at an arbitrary pair,
    /// without certifying it.
    pub fn at(omega: f64, tau: f64, k: &CharCoeffs) -> Self {
        let (rs, rc) = eq16_residuals(omega, tau, k);
        let l = Complex64::new(0.0, omega);
        let t = transversality_terms(omega, tau, k);
        let lambda_prime = -char_delta_dtau(l, tau, k) / char_delta_dlambda(l, tau, k);
        HopfPoint {
            omega0: omega,
            tau0: tau,
            residual_sin: rs,
            residual_cos: rc,
            delta_residual: char_delta(l, tau, k).norm(),
            m1: t.m1,
            m2: t.m2,
            m: t.m,
            n: t.n,
            lambda_prime,
            simple: t.m1 * t.m1 + t.m2 * t.m2 > SIMPLE_TOL,
            transversal: t.m.abs() > SIMPLE_TOL,
        }
    }

    pub fn residual_sum(&self) -> f64 {
        self.residual_sin.abs() + self.residual_cos.abs()
    }

    pub fn lambda1(&self) -> Complex64 {
        Complex64::new(0.0, self.omega0)
    }
}

/// Grid scan of `τ = g₁(ω)` over `ω ∈ (0, √c]`, keeping points whose split
/// residuals are below the coarse threshold. Output is ordered by `τ`.
pub fn hopf_scan(k: &CharCoeffs, grid_size: usize) -> Result<Vec<HopfPoint>> {
    if grid_size < 100 {
        return Err(Error::Domain(format!("hopf_scan: grid_size must be >= 100, got {grid_size}")));
    }
    if !(k.h > 0.0) {
        return Err(Error::EmptyResult("delay coefficient h = 0".into()));
    }
    if !(k.c > 0.0) {
        return Err(Error::EmptyResult(format!("c = {} leaves no frequency range", k.c)));
    }
    let top = k.c.sqrt();
    let mut hits: Vec<(usize, HopfPoint)> = (1..=grid_size)
        .into_par_iter()
        .filter_map(|i| {
            let omega = top * i as f64 / grid_size as f64;
            let tau = g1(omega, k);
            let theta = omega * tau;
            if !(tau > 0.0) || !(0.0..=TWO_PI).contains(&theta) {
                return None;
            }
            let (rs, rc) = eq16_residuals(omega, tau, k);
            (rs.abs() + rc.abs() < COARSE_TOL).then(|| (i, HopfPoint::at(omega, tau, k)))
        })
        .collect();
    hits.sort_by(|a, b| a.1.tau0.total_cmp(&b.1.tau0).then(a.0.cmp(&b.0)));
    if hits.is_empty() {
        return Err(Error::EmptyResult("no grid point passes the coarse residual test".into()));
    }
    Ok(hits.into_iter().map(|(_, p)| p).collect())
}

/// Newton refinement of the split residual system in `(ω, τ)`, followed by
/// a direct certificate `|Δ(iω₀, τ₀)| < 1e-8`.
pub fn hopf_refine(candidate: &HopfPoint, k: &CharCoeffs) -> Result<HopfPoint> {
    let (mut w, mut t) = (candidate.omega0, candidate.tau0);
    let norm = |w: f64, t: f64| {
        let (a, b) = eq16_residuals(w, t, k);
        (a * a + b * b).sqrt()
    };
    let mut r = norm(w, t);
    let mut iterations = 0;
    loop {
        if r < 1e-15 {
            break;
        }
        if iterations >= MAX_NEWTON {
            return Err(Error::NoConvergence { what: "Hopf refinement", iterations });
        }
        iterations += 1;
        let (rs, rc) = eq16_residuals(w, t, k);
        let th = w * t;
        let (s, c) = th.sin_cos();
        let j11 = t * c - t * (3.0 * k.b * w * w - k.d) / k.h;
        let j12 = w * c - w * (k.b * w * w - k.d) / k.h;
        let j21 = -t * s + t * (2.0 * k.c * w - 4.0 * w * w * w) / k.h;
        let j22 = -w * s + w * w * (k.c - w * w) / k.h;
        let det = j11 * j22 - j12 * j21;
        let scale = (j11.abs() + j12.abs()) * (j21.abs() + j22.abs());
        if !(det.abs() > 1e-14 * scale) || !det.is_finite() {
            return Err(Error::SingularJacobian { omega: w, tau: t });
        }
        let dw = (rs * j22 - rc * j12) / det;
        let dt = (j11 * rc - j21 * rs) / det;
        // backtracking keeps ω, τ positive and the residual decreasing
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (nw, nt) = (w - step * dw, t - step * dt);
            if nw > 0.0 && nt > 0.0 {
                let nr = norm(nw, nt);
                if nr < r || nr < 1e-15 {
                    w = nw;
                    t = nt;
                    r = nr;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        if (dw.abs() * step) <= 1e-16 * w && (dt.abs() * step) <= 1e-16 * t {
            break;
        }
    }
    let point = HopfPoint::at(w, t, k);
    if point.residual_sum() >= REFINE_TOL {
        return Err(Error::NoConvergence { what: "Hopf refinement", iterations });
    }
    if !(point.delta_residual < CERTIFICATE_TOL) || !(0.0..=TWO_PI).contains(&(w * t)) {
        return Err(Error::CertificateFailed { omega: w, tau: t, residual: point.delta_residual });
    }
    Ok(point)
}

/// Checks simplicity and returns `(M, N, M1, M2)`.
pub fn transversality(hopf: &HopfPoint, k: &CharCoeffs) -> Result<Transversality> {
    let t = transversality_terms(hopf.omega0, hopf.tau0, k);
    let den = t.m1 * t.m1 + t.m2 * t.m2;
    if !(den > SIMPLE_TOL) {
        return Err(Error::DegenerateRoot(den));
    }
    Ok(t)
}

/// Lower bound on `|Δ(iω, τ)|` valid for every `ω` and `τ`.
///
/// `|(1 - e^{-iθ})/(iθ)| ≤ 1` for real `θ`, so `Δ(iω, τ)` cannot vanish
/// while `|p(iω)| > h`, where `p` is the cubic part. `|p(iω)|²` is a cubic
/// in `s = ω²` whose minimum on `s ≥ 0` is found exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryAxisBound {
    pub min_cubic_modulus: f64,
    pub omega_at_min: f64,
    pub h: f64,
    /// True when no purely imaginary root exists for any delay.
    pub excludes_hopf: bool,
}

pub fn imaginary_axis_bound(k: &CharCoeffs) -> ImaginaryAxisBound {
    // q(s) = s³ + (b² - 2c)s² + (c² - 2bd)s + d²
    let c2 = k.b * k.b - 2.0 * k.c;
    let c1 = k.c * k.c - 2.0 * k.b * k.d;
    let c0 = k.d * k.d;
    let q = |s: f64| ((s + c2) * s + c1) * s + c0;
    let mut best = (q(0.0), 0.0);
    // q'(s) = 3s² + 2 c2 s + c1
    let disc = 4.0 * c2 * c2 - 12.0 * c1;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        for s in [(-2.0 * c2 + sq) / 6.0, (-2.0 * c2 - sq) / 6.0] {
            if s > 0.0 && q(s) < best.0 {
                best = (q(s), s);
            }
        }
    }
    let min_mod = best.0.max(0.0).sqrt();
    ImaginaryAxisBound {
        min_cubic_modulus: min_mod,
        omega_at_min: best.1.sqrt(),
        h: k.h,
        excludes_hopf: min_mod > k.h.abs(),
    }
}

/// Scan, refine one representative per contiguous run of candidates, and
/// keep the certified points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfSearch {
    pub candidates: usize,
    pub refined: Vec<HopfPoint>,
    pub rejected: Vec<RejectedCandidate>,
    pub bound: ImaginaryAxisBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedCandidate {
    pub omega: f64,
    pub tau: f64,
    pub reason: String,
}

impl HopfSearch {
    /// Smallest certified critical delay.
    pub fn first(&self) -> Option<&HopfPoint> {
        self.refined.first()
    }
}

pub fn locate_hopf_points(k: &CharCoeffs, grid_size: usize) -> Result<HopfSearch> {
    let bound = imaginary_axis_bound(k);
    let candidates = match hopf_scan(k, grid_size) {
        Ok(c) => c,
        Err(Error::EmptyResult(_)) => {
            return Ok(HopfSearch { candidates: 0, refined: vec![], rejected: vec![], bound })
        }
        Err(e) => return Err(e),
    };
    // contiguous runs in ω-grid order
    let step = k.c.sqrt() / grid_size as f64;
    let mut by_omega = candidates.clone();
    by_omega.sort_by(|a, b| a.omega0.total_cmp(&b.omega0));
    let mut reps: Vec<HopfPoint> = Vec::new();
    let mut run_best: Option<HopfPoint> = None;
    let mut last_omega = f64::NEG_INFINITY;
    for c in by_omega {
        if c.omega0 - last_omega > 1.5 * step {
            if let Some(best) = run_best.take() {
                reps.push(best);
            }
        }
        last_omega = c.omega0;
        run_best = match run_best {
            Some(b) if b.residual_sum() <= c.residual_sum() => Some(b),
            _ => Some(c),
        };
    }
    reps.extend(run_best);

    let outcomes: Vec<(HopfPoint, Result<HopfPoint>)> =
        reps.into_par_iter().map(|c| (c, hopf_refine(&c, k))).collect();
    let mut refined: Vec<HopfPoint> = Vec::new();
    let mut rejected = Vec::new();
    for (cand, outcome) in outcomes {
        match outcome {
            Ok(p) => {
                let dup = refined.iter().any(|q| {
                    (q.omega0 - p.omega0).abs() < 1e-8 && (q.tau0 - p.tau0).abs() < 1e-8
                });
                if !dup {
                    refined.push(p);
                }
            }
            Err(e) => rejected.push(RejectedCandidate {
                omega: cand.omega0,
                tau: cand.tau0,
                reason: e.to_string(),
            }),
        }
    }
    refined.sort_by(|a, b| a.tau0.total_cmp(&b.tau0));
    Ok(HopfSearch { candidates: candidates.len(), refined, rejected, bound })
}
