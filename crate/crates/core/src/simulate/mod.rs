//! Fixed-step integration of the distributed-delay system, the reduced
//! waveform on the center manifold, and long-term behaviour classification.

pub mod history;
pub mod waveform;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::model::{rhs_unchecked, ModelParams, State};

pub use history::{History, Quadrature, QuadratureRule};
pub use waveform::{analytic_waveform, integrate_normal_form, ZPath};

/// Initial history of `y1` on `[-τ, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi1 {
    Constant(f64),
    /// Equally spaced samples over `[-τ, 0]`, first sample at `-τ`.
    Sampled(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistorySpec {
    pub x1_0: f64,
    pub x2_0: f64,
    pub y2_0: f64,
    pub phi1: Phi1,
}

impl HistorySpec {
    /// Constant history at `state`.
    pub fn constant(state: State) -> Self {
        HistorySpec { x1_0: state.x1, x2_0: state.x2, y2_0: state.y2, phi1: Phi1::Constant(state.y1) }
    }

    /// The equilibrium with `y1` (and its whole history) scaled by `1 + rel`.
    pub fn perturbed(eq: &Equilibrium, rel: f64) -> Self {
        let mut s = eq.state();
        s.y1 *= 1.0 + rel;
        HistorySpec::constant(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("x1_0", self.x1_0), ("x2_0", self.x2_0), ("y2_0", self.y2_0)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { field, reason: format!("must be finite and >= 0, got {v}") });
            }
        }
        match &self.phi1 {
            Phi1::Constant(v) if !(*v >= 0.0 && v.is_finite()) => {
                Err(Error::InvalidParameter { field: "phi1", reason: format!("must be finite and >= 0, got {v}") })
            }
            Phi1::Sampled(v) if v.len() < 2 => {
                Err(Error::InvalidParameter { field: "phi1", reason: "needs at least two samples".into() })
            }
            Phi1::Sampled(v) if v.iter().any(|x| !(*x >= 0.0 && x.is_finite())) => {
                Err(Error::InvalidParameter { field: "phi1", reason: "samples must be finite and >= 0".into() })
            }
            _ => Ok(()),
        }
    }

    /// `(φ₁(θ), φ₁'(θ))` by linear resampling.
    pub fn phi1_at(&self, theta: f64, tau: f64) -> (f64, f64) {
        match &self.phi1 {
            Phi1::Constant(v) => (*v, 0.0),
            Phi1::Sampled(v) => {
                if tau == 0.0 {
                    return (*v.last().unwrap_or(&0.0), 0.0);
                }
                let cells = (v.len() - 1) as f64;
                let h = tau / cells;
                let x = ((theta + tau) / h).clamp(0.0, cells);
                let k = (x.floor() as usize).min(v.len() - 2);
                let s = x - k as f64;
                (v[k] + s * (v[k + 1] - v[k]), (v[k + 1] - v[k]) / h)
            }
        }
    }

    pub fn initial_state(&self, tau: f64) -> State {
        State::new(self.x1_0, self.phi1_at(0.0, tau).0, self.x2_0, self.y2_0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateOptions {
    #[serde(default)]
    pub quadrature: Quadrature,
    /// Keep every `record_every`-th step.
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { quadrature: Quadrature::default(), record_every: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub dt: f64,
    pub tau: f64,
    pub record_every: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    /// CSV with header `t,x1,y1,x2,y2`, keeping every `decimation`-th row.
    pub fn write_csv<W: Write>(&self, mut out: W, decimation: usize) -> std::io::Result<()> {
        writeln!(out, "t,x1,y1,x2,y2")?;
        for (t, s) in self.times.iter().zip(&self.states).step_by(decimation.max(1)) {
            writeln!(out, "{t},{},{},{},{}", s.x1, s.y1, s.x2, s.y2)?;
        }
        Ok(())
    }
}

fn y1_slope(s: &State, p: &ModelParams) -> f64 {
    s.x1 - (p.a1 + p.a12 * s.y2) * s.y1
}

fn axpy(s: &State, h: f64, k: &State) -> State {
    State::new(s.x1 + h * k.x1, s.y1 + h * k.y1, s.x2 + h * k.x2, s.y2 + h * k.y2)
}

pub fn integrate(params: &ModelParams, history: &HistorySpec, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_with(params, history, t_end, dt, &IntegrateOptions::default())
}

/// Classical RK4. Each stage evaluates the delay term against the dense
/// `y1` record; the piece of the integral inside the current step uses the
/// Hermite segment through the last node and the stage value.
pub fn integrate_with(
    params: &ModelParams,
    history: &HistorySpec,
    t_end: f64,
    dt: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    params.validate()?;
    history.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be > 0, got {t_end}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
    }
    let tau = params.tau;
    if tau > 0.0 && dt > tau / 4.0 {
        return Err(Error::StepTooLarge { dt, limit: tau / 4.0 });
    }
    if opts.quadrature.subdivisions == 0 {
        return Err(Error::Domain("quadrature subdivisions must be >= 1".into()));
    }
    let record_every = opts.record_every.max(1);
    let p = params;
    let mut hist = History::for_model(p, dt, opts.quadrature);
    let lag_nodes = if tau > 0.0 { (tau / dt).ceil() as i64 + 1 } else { 1 };
    for i in -lag_nodes..0 {
        let theta = (i as f64 * dt).max(-tau);
        let (y, m) = history.phi1_at(theta, tau);
        hist.push_node(i, y, m, m);
    }
    let mut state = history.initial_state(tau);
    let left = history.phi1_at(0.0, tau).1;
    hist.push_node(0, state.y1, left, y1_slope(&state, p));

    let steps = (t_end / dt + 1e-9).floor() as usize;
    let cap = steps / record_every + 1;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    times.push(0.0);
    states.push(state);

    let stage = |hist: &History, t: f64, s: &State| -> Result<State> {
        let d = hist.stage_term(t, s.y1, y1_slope(s, p), p)?;
        Ok(rhs_unchecked(s, d, p))
    };

    for n in 0..steps {
        let t = n as f64 * dt;
        let k1 = rhs_unchecked(&state, hist.distributed_term(t, p)?, p);
        let s2 = axpy(&state, 0.5 * dt, &k1);
        let k2 = stage(&hist, t + 0.5 * dt, &s2)?;
        let s3 = axpy(&state, 0.5 * dt, &k2);
        let k3 = stage(&hist, t + 0.5 * dt, &s3)?;
        let s4 = axpy(&state, dt, &k3);
        let k4 = stage(&hist, t + dt, &s4)?;
        let h6 = dt / 6.0;
        state = State::new(
            state.x1 + h6 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
            state.y1 + h6 * (k1.y1 + 2.0 * k2.y1 + 2.0 * k3.y1 + k4.y1),
            state.x2 + h6 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
            state.y2 + h6 * (k1.y2 + 2.0 * k2.y2 + 2.0 * k3.y2 + k4.y2),
        );
        let t_next = (n + 1) as f64 * dt;
        if !state.is_finite() {
            return Err(Error::NonFiniteState(t_next));
        }
        let slope = y1_slope(&state, p);
        hist.push_node(n as i64 + 1, state.y1, slope, slope);
        if (n + 1) % record_every == 0 {
            times.push(t_next);
            states.push(state);
        }
    }
    Ok(Trajectory { times, states, dt, tau, record_every })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LongTerm {
    Decay,
    SustainedOscillation,
    Growth,
    Inconclusive,
}

impl LongTerm {
    pub fn as_str(&self) -> &'static str {
        match self {
            LongTerm::Decay => "decay",
            LongTerm::SustainedOscillation => "sustained_oscillation",
            LongTerm::Growth => "growth",
            LongTerm::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongTermReport {
    pub class: LongTerm,
    /// Max-norm deviation from the equilibrium over the middle third.
    pub middle_amplitude: f64,
    /// Same over the last third.
    pub final_amplitude: f64,
    pub ratio: f64,
}

/// Deviations below `NOISE_FLOOR·(1 + ‖X₀‖∞)` are indistinguishable from
/// the rounding level of the equilibrium itself.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Compares the deviation envelope of the last third of the run with the
/// middle third: below 0.5 is decay, `[0.8, 1.25]` sustained oscillation,
/// above 2 growth. A last-third envelope under the noise floor counts as
/// decay.
pub fn classify_longterm(traj: &Trajectory, eq: &Equilibrium) -> LongTermReport {
    let e = eq.state();
    let floor = NOISE_FLOOR * (1.0 + e.max_abs());
    let dev = |s: &State| {
        (s.x1 - e.x1).abs().max((s.y1 - e.y1).abs()).max((s.x2 - e.x2).abs()).max((s.y2 - e.y2).abs())
    };
    let n = traj.states.len();
    let envelope = |lo: usize, hi: usize| traj.states[lo..hi].iter().map(dev).fold(0.0, f64::max);
    let (a, b) = (n / 3, 2 * n / 3);
    let middle = if b > a { envelope(a, b) } else { 0.0 };
    let last = if n > b { envelope(b, n) } else { 0.0 };
    let (class, ratio) = if last <= floor {
        (LongTerm::Decay, if middle > 0.0 { last / middle } else { 0.0 })
    } else if middle == 0.0 {
        (LongTerm::Growth, f64::INFINITY)
    } else {
        let r = last / middle;
        let c = if r < 0.5 {
            LongTerm::Decay
        } else if (0.8..=1.25).contains(&r) {
            LongTerm::SustainedOscillation
        } else if r > 2.0 {
            LongTerm::Growth
        } else {
            LongTerm::Inconclusive
        };
        (c, r)
    };
    LongTermReport { class, middle_amplitude: middle, final_amplitude: last, ratio }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::find_equilibrium;

    fn synthetic(f: impl Fn(f64) -> f64, eq: &Equilibrium) -> Trajectory {
        let times: Vec<f64> = (0..3000).map(|i| i as f64 * 0.1).collect();
        let states = times
            .iter()
            .map(|&t| {
                let mut s = eq.state();
                s.y1 += f(t);
                s
            })
            .collect();
        Trajectory { times, states, dt: 0.1, tau: 1.0, record_every: 1 }
    }

    #[test]
    fn classification_of_synthetic_inputs() {
        let eq = find_equilibrium(&ModelParams::default(), 1e-12).unwrap();
        assert_eq!(classify_longterm(&synthetic(|_| 0.0, &eq), &eq).class, LongTerm::Decay);
        assert_eq!(classify_longterm(&synthetic(|_| 1e-10, &eq), &eq).class, LongTerm::Decay);
        assert_eq!(classify_longterm(&synthetic(|t| (-0.05 * t).exp(), &eq), &eq).class, LongTerm::Decay);
        assert_eq!(
            classify_longterm(&synthetic(|t| 0.1 * (2.0 * t).sin(), &eq), &eq).class,
            LongTerm::SustainedOscillation
        );
        assert_eq!(
            classify_longterm(&synthetic(|t| 1e-3 * (0.01 * t).exp() * t.sin(), &eq), &eq).class,
            LongTerm::Growth
        );
        let r = classify_longterm(&synthetic(|t| (-0.004 * t).exp() * t.sin(), &eq), &eq);
        assert_eq!(r.class, LongTerm::Inconclusive, "{r:?}");
    }

    #[test]
    fn sampled_history_resampling() {
        let h = HistorySpec { x1_0: 1.0, x2_0: 1.0, y2_0: 1.0, phi1: Phi1::Sampled(vec![0.0, 1.0, 4.0]) };
        assert_eq!(h.phi1_at(-2.0, 2.0), (0.0, 1.0));
        assert_eq!(h.phi1_at(-0.5, 2.0), (2.5, 3.0));
        assert_eq!(h.phi1_at(0.0, 2.0).0, 4.0);
        assert!(HistorySpec { phi1: Phi1::Sampled(vec![1.0]), ..h.clone() }.validate().is_err());
        assert!(HistorySpec { phi1: Phi1::Constant(-1.0), ..h }.validate().is_err());
    }

    #[test]
    fn step_precondition() {
        let p = ModelParams { tau: 0.1, ..ModelParams::default() };
        let h = HistorySpec::constant(State::new(1.0, 1.0, 1.0, 1.0));
        assert!(matches!(integrate(&p, &h, 1.0, 0.03), Err(Error::StepTooLarge { .. })));
        assert!(integrate(&p, &h, 1.0, 0.025).is_ok());
        assert!(integrate(&p.with_tau(0.0), &h, 1.0, 0.5).is_ok());
    }

    #[test]
    fn row_count_contract() {
        let p = ModelParams { tau: 0.5, ..ModelParams::default() };
        let h = HistorySpec::constant(State::new(1.0, 1.0, 1.0, 1.0));
        let tr = integrate(&p, &h, 3.0, 0.01).unwrap();
        assert_eq!(tr.len(), 301);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf, 7).unwrap();
        let rows = String::from_utf8(buf).unwrap().lines().count() - 1;
        assert_eq!(rows, 300 / 7 + 1);
        let opts = IntegrateOptions { record_every: 10, ..Default::default() };
        let tr = integrate_with(&p, &h, 3.0, 0.01, &opts).unwrap();
        assert_eq!(tr.len(), 31);
        assert!((tr.times[30] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let p = ModelParams::default();
        let eq = find_equilibrium(&p, 1e-12).unwrap();
        let tr = integrate(&p, &HistorySpec::constant(eq.state()), 100.0, 1e-2).unwrap();
        let worst = tr.states.iter().map(|s| {
            let e = eq.state();
            State::new(s.x1 - e.x1, s.y1 - e.y1, s.x2 - e.x2, s.y2 - e.y2).max_abs()
        });
        assert!(worst.fold(0.0, f64::max) < 1e-9);
    }

    #[test]
    fn deterministic_runs() {
        let p = ModelParams { tau: 1.0, ..ModelParams::default() };
        let eq = find_equilibrium(&p, 1e-12).unwrap();
        let h = HistorySpec::perturbed(&eq, 0.05);
        let a = integrate(&p, &h, 20.0, 0.01).unwrap();
        let b = integrate(&p, &h, 20.0, 0.01).unwrap();
        assert_eq!(a, b);
    }
}
