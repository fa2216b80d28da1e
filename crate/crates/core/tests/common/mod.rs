#![allow(dead_code)]

use hopfdde::equilibrium::{find_equilibrium, Equilibrium};
use hopfdde::model::{hill, ModelParams, State};
use hopfdde::simulate::{integrate_with, HistorySpec, IntegrateOptions, Quadrature, QuadratureRule, Trajectory};
use hopfdde::stability::{char_coeffs, locate_hopf_points, HopfPoint};
use num_complex::Complex64;

/// Adaptive Simpson on `[a, b]`; `a > b` gives the oriented integral.
pub fn simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn step<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `∫_a^b ∫_{c(x)}^{d(x)} f(x, y) dy dx` by nested adaptive Simpson.
pub fn simpson_2d<F, C, D>(f: &F, a: f64, b: f64, c: &C, d: &D, tol: f64) -> Complex64
where
    F: Fn(f64, f64) -> Complex64,
    C: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let inner = |x: f64| simpson(&|y| f(x, y), c(x), d(x), tol * 0.1);
    simpson(&inner, a, b, tol)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Parameter set with a certified delay-induced Hopf point.
pub fn demo_params() -> ModelParams {
    ModelParams { a1: 0.1, a2: 0.2, a12: 1.0, b1: 1.0, b2: 0.5, a: 100.0, n: 8, alpha: 0.2, tau: 1.0 }
}

pub fn published_params() -> ModelParams {
    ModelParams::default()
}

pub fn demo_hopf() -> (ModelParams, Equilibrium, HopfPoint) {
    let p = demo_params();
    let eq = find_equilibrium(&p, 1e-13).unwrap();
    let k = char_coeffs(&p, &eq);
    let h = *locate_hopf_points(&k, 4000).unwrap().first().unwrap();
    (p.with_tau(h.tau0), eq, h)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// `⟨Ψ, Φ⟩` for `Ψ(s) = w e^{-λ_w s}`, `Φ(θ) = v e^{λ_v θ}`: the direct term
/// minus `∫_{-τ}^0 ∫_0^θ conj(Ψ(ξ-θ)) B (1/τ)∫_0^ξ Φ(s) ds dξ dθ`, the outer
/// two integrals by quadrature.
pub fn pairing_by_quadrature(
    w: &[Complex64; 4],
    lw: Complex64,
    v: &[Complex64; 4],
    lv: Complex64,
    b: &[[f64; 4]; 4],
    tau: f64,
) -> Complex64 {
    let wb: Vec<Complex64> = w.iter().map(|x| x.conj()).collect();
    let direct: Complex64 = (0..4).map(|i| wb[i] * v[i]).sum();
    let wbv: Complex64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| wb[i] * b[i][j] * v[j]).sum();
    let integrand = |theta: f64, xi: f64| {
        let psi_bar = (lw * (xi - theta)).exp().conj();
        let inner = if lv.norm() == 0.0 { Complex64::new(xi, 0.0) } else { ((lv * xi).exp() - 1.0) / lv };
        wbv * psi_bar * inner / tau
    };
    let double = simpson_2d(&integrand, -tau, 0.0, &|_| 0.0, &|theta| theta, 1e-13);
    direct - double
}

pub fn simpson_opts(subdivisions: usize) -> IntegrateOptions {
    IntegrateOptions { quadrature: Quadrature { rule: QuadratureRule::Simpson, subdivisions }, record_every: 1 }
}

pub fn state_at(traj: &Trajectory, t: f64) -> State {
    let i = traj.times.iter().position(|&s| (s - t).abs() < 1e-9).expect("grid time");
    traj.states[i]
}

pub fn max_diff(a: &State, b: &State) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

/// Plain RK4 on the delay-free system obtained at `α = 1`.
pub fn ode_rk4(p: &ModelParams, x0: State, t_end: f64, dt: f64) -> Vec<State> {
    let f = |s: &State| -> State {
        let h = hill(s.y1, p.a, p.n).unwrap();
        State::new(
            1.0 - p.b1 * s.x1,
            s.x1 - (p.a1 + p.a12 * s.y2) * s.y1,
            h - p.b2 * s.x2,
            s.x2 - (p.a2 + p.a12 * s.y1) * s.y2,
        )
    };
    let add = |s: &State, h: f64, k: &State| State::new(s.x1 + h * k.x1, s.y1 + h * k.y1, s.x2 + h * k.x2, s.y2 + h * k.y2);
    let steps = (t_end / dt + 1e-9).floor() as usize;
    let mut out = vec![x0];
    let mut s = x0;
    for _ in 0..steps {
        let k1 = f(&s);
        let k2 = f(&add(&s, dt / 2.0, &k1));
        let k3 = f(&add(&s, dt / 2.0, &k2));
        let k4 = f(&add(&s, dt, &k3));
        s = State::new(
            s.x1 + dt / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
            s.y1 + dt / 6.0 * (k1.y1 + 2.0 * k2.y1 + 2.0 * k3.y1 + k4.y1),
            s.x2 + dt / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
            s.y2 + dt / 6.0 * (k1.y2 + 2.0 * k2.y2 + 2.0 * k3.y2 + k4.y2),
        );
        out.push(s);
    }
    out
}

/// Error ratio `e(0.4)/e(0.2)` at `t = 12` against a `dt = 0.0125` run.
pub fn order_factor(opts: &IntegrateOptions) -> f64 {
    let p = published_params().with_tau(1.6);
    let eq = find_equilibrium(&p, 1e-13).unwrap();
    let hist = HistorySpec::perturbed(&eq, 0.3);
    let t_end = 12.0;
    let run = |dt: f64| state_at(&integrate_with(&p, &hist, t_end, dt, opts).unwrap(), t_end);
    let reference = run(0.4 / 32.0);
    let e1 = max_diff(&run(0.4), &reference);
    let e2 = max_diff(&run(0.2), &reference);
    e1 / e2
}
