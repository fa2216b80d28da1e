//! Reduced dynamics on the center manifold and the waveform it induces.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::model::State;
use crate::normalform::NormalForm;
use crate::simulate::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZPath {
    pub times: Vec<f64>,
    pub z: Vec<Complex64>,
    pub dt: f64,
}

/// RK4 for `ż = λ₁z + g(z, z̄)` truncated at third order.
pub fn integrate_normal_form(nf: &NormalForm, z0: Complex64, t_end: f64, dt: f64) -> Result<ZPath> {
    if !(t_end > 0.0 && dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("need t_end > 0 and dt > 0, got {t_end}, {dt}")));
    }
    let steps = (t_end / dt + 1e-9).floor() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut z = Vec::with_capacity(steps + 1);
    let mut cur = z0;
    times.push(0.0);
    z.push(cur);
    for n in 0..steps {
        let k1 = nf.reduced_rhs(cur);
        let k2 = nf.reduced_rhs(cur + 0.5 * dt * k1);
        let k3 = nf.reduced_rhs(cur + 0.5 * dt * k2);
        let k4 = nf.reduced_rhs(cur + dt * k3);
        cur += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t = (n + 1) as f64 * dt;
        if !(cur.re.is_finite() && cur.im.is_finite()) {
            return Err(Error::NonFiniteState(t));
        }
        times.push(t);
        z.push(cur);
    }
    Ok(ZPath { times, z, dt })
}

/// `X(t) = zΦ(0) + z̄Φ̄(0) + w₂₀(0)z²/2 + w₁₁(0)zz̄ + w₀₂(0)z̄²/2 + X₀` along
/// a reduced path.
pub fn analytic_waveform(nf: &NormalForm, eq: &Equilibrium, path: &ZPath) -> Trajectory {
    let x0 = eq.state().to_array();
    let states = path
        .z
        .iter()
        .map(|&z| {
            let off = nf.manifold_offset(z);
            State::from_array(std::array::from_fn(|i| x0[i] + off[i]))
        })
        .collect();
    Trajectory { times: path.times.clone(), states, dt: path.dt, tau: nf.tau0, record_every: 1 }
}
