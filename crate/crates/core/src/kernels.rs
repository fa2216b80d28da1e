//! Exponential integrals of the uniform delay kernel.
//!
//! All three functions have removable singularities at `z = 0` and lose
//! digits to cancellation near it, so small arguments go through their
//! power series.

use num_complex::Complex64;

const SERIES_RADIUS: f64 = 0.5;
const SERIES_TERMS: usize = 30;

/// `(1 - e^{-z}) / z = (1/τ)∫₀^τ e^{-λs} ds` at `z = λτ`.
pub fn mean_kernel(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        // Σ (-z)^k / (k+1)!
        series(z, |k| 1.0 / factorial(k + 1))
    } else {
        (1.0 - (-z).exp()) / z
    }
}

/// `(1 - (1 + z) e^{-z}) / z²`, the kernel part of `∂Δ/∂λ` and `∂Δ/∂τ`.
pub fn kernel_q(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        // Σ (-z)^k (k+1)/(k+2)!
        series(z, |k| (k + 1) as f64 / factorial(k + 2))
    } else {
        (1.0 - (1.0 + z) * (-z).exp()) / (z * z)
    }
}

/// `(z - 2 + 2e^{-z} + z e^{-z}) / z³`, the double integral of the pairing.
pub fn kernel_p(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        // Σ (-z)^k (k+1)/(k+3)!
        series(z, |k| (k + 1) as f64 / factorial(k + 3))
    } else {
        let e = (-z).exp();
        (z - 2.0 + 2.0 * e + z * e) / (z * z * z)
    }
}

/// `(e^{-z} - 1 + z) / z²`.
pub fn kernel_tail(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        // Σ (-z)^k / (k+2)!
        series(z, |k| 1.0 / factorial(k + 2))
    } else {
        ((-z).exp() - 1.0 + z) / (z * z)
    }
}

fn series(z: Complex64, coeff: impl Fn(usize) -> f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for k in 0..SERIES_TERMS {
        sum += power * coeff(k);
        power *= -z;
    }
    sum
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn limits_at_zero() {
        let zero = c(0.0, 0.0);
        assert_eq!(mean_kernel(zero), c(1.0, 0.0));
        assert_eq!(kernel_q(zero), c(0.5, 0.0));
        assert!((kernel_p(zero) - c(1.0 / 6.0, 0.0)).norm() < 1e-16);
        assert_eq!(kernel_tail(zero), c(0.5, 0.0));
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        // just outside the series radius the closed forms are well conditioned
        for &z in &[c(0.5, 0.0), c(0.0, 0.5), c(0.3, -0.4), c(-0.35, 0.35)] {
            let dir = z * 1.000_001;
            let inner = z * 0.999_999;
            assert!((mean_kernel(dir) - mean_kernel(inner)).norm() < 1e-6);
            assert!((kernel_q(dir) - kernel_q(inner)).norm() < 1e-6);
            assert!((kernel_p(dir) - kernel_p(inner)).norm() < 1e-6);
            assert!((kernel_tail(dir) - kernel_tail(inner)).norm() < 1e-6);
        }
    }

    #[test]
    fn series_matches_closed_form_inside_radius() {
        for &z in &[c(0.45, 0.1), c(0.0, 0.4), c(-0.2, 0.3)] {
            let e = (-z).exp();
            assert!((mean_kernel(z) - (1.0 - e) / z).norm() < 1e-14);
            assert!((kernel_q(z) - (1.0 - (1.0 + z) * e) / (z * z)).norm() < 1e-12);
            assert!((kernel_p(z) - (z - 2.0 + 2.0 * e + z * e) / (z * z * z)).norm() < 1e-10);
            assert!((kernel_tail(z) - (e - 1.0 + z) / (z * z)).norm() < 1e-12);
        }
    }

    #[test]
    fn tiny_argument_matches_taylor() {
        let z = c(3e-9, -7e-9);
        let taylor = 1.0 - z / 2.0 + z * z / 6.0;
        assert!((mean_kernel(z) - taylor).norm() < 1e-15);
    }
}
