mod common;

use common::*;
use hopfdde::normalform::{normal_form, FormulaVariant};
use hopfdde::simulate::{analytic_waveform, integrate_normal_form};
use num_complex::Complex64;

/// Mean spacing of upward crossings of the mean, by linear interpolation.
fn period(times: &[f64], ys: &[f64]) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut crossings = Vec::new();
    for i in 1..ys.len() {
        if ys[i - 1] < mean && ys[i] >= mean {
            let f = (mean - ys[i - 1]) / (ys[i] - ys[i - 1]);
            crossings.push(times[i - 1] + f * (times[i] - times[i - 1]));
        }
    }
    assert!(crossings.len() >= 3, "too few crossings");
    (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64
}

#[test]
fn waveform_is_real() {
    let (p, eq, h) = demo_hopf();
    for variant in FormulaVariant::ALL {
        let nf = normal_form(&p, &eq, &h, variant).unwrap();
        let path = integrate_normal_form(&nf, Complex64::new(1e-2, 0.0), 50.0, 1e-2).unwrap();
        let worst = path
            .z
            .iter()
            .flat_map(|&z| nf.manifold_offset_complex(z))
            .map(|c| c.im.abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "imaginary part {worst:e}");
    }
}

#[test]
fn waveform_frequency_near_omega0() {
    let (p, eq, h) = demo_hopf();
    let nf = normal_form(&p, &eq, &h, FormulaVariant::Printed).unwrap();
    let path = integrate_normal_form(&nf, Complex64::new(1e-3, 0.0), 200.0, 1e-2).unwrap();
    let traj = analytic_waveform(&nf, &eq, &path);
    let y1: Vec<f64> = traj.states.iter().map(|s| s.y1).collect();
    let omega = 2.0 * std::f64::consts::PI / period(&traj.times, &y1);
    assert!(rel(omega, h.omega0) < 0.02, "omega {omega} vs {}", h.omega0);
}

#[test]
fn waveform_centered_on_equilibrium() {
    let (p, eq, h) = demo_hopf();
    let nf = normal_form(&p, &eq, &h, FormulaVariant::Printed).unwrap();
    let path = integrate_normal_form(&nf, Complex64::new(0.0, 0.0), 1.0, 1e-2).unwrap();
    let traj = analytic_waveform(&nf, &eq, &path);
    for s in &traj.states {
        assert_eq!(s.to_array(), eq.state().to_array());
    }
}
