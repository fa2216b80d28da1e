//! Fixed-size complex vectors and matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Mat4;

pub type ComplexVec4 = [Complex64; 4];
pub type ComplexMat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn complexify(m: &Mat4) -> ComplexMat4 {
    let mut out = [[ZERO; 4]; 4];
    for (row, src) in out.iter_mut().zip(m) {
        for (o, &x) in row.iter_mut().zip(src) {
            *o = Complex64::new(x, 0.0);
        }
    }
    out
}

pub fn identity() -> ComplexMat4 {
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    out
}

/// `a + s·b`.
pub fn mat_axpy(a: &ComplexMat4, s: Complex64, b: &ComplexMat4) -> ComplexMat4 {
    let mut out = *a;
    for (row, brow) in out.iter_mut().zip(b) {
        for (o, &x) in row.iter_mut().zip(brow) {
            *o += s * x;
        }
    }
    out
}

pub fn mat_vec(m: &ComplexMat4, x: &ComplexVec4) -> ComplexVec4 {
    let mut out = [ZERO; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
    out
}

pub fn conj(x: &ComplexVec4) -> ComplexVec4 {
    x.map(|c| c.conj())
}

pub fn scale(x: &ComplexVec4, s: Complex64) -> ComplexVec4 {
    x.map(|c| c * s)
}

/// Bilinear (unconjugated) product `Σ aᵢ bᵢ`.
pub fn dot(a: &ComplexVec4, b: &ComplexVec4) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_norm(x: &ComplexVec4) -> f64 {
    x.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting.
///
/// A pivot smaller than `1e-13` times the largest entry of its original row
/// is reported as singular.
pub fn solve_complex_4x4(m: &ComplexMat4, rhs: &ComplexVec4) -> Result<ComplexVec4> {
    let mut a = *m;
    let mut b = *rhs;
    let mut row_scale = [0.0f64; 4];
    for (s, row) in row_scale.iter_mut().zip(m) {
        *s = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
    }
    for col in 0..4 {
        let p = (col..4)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap_or(col);
        let pivot = a[p][col].norm();
        if !(pivot > 1e-13 * row_scale[p]) || !pivot.is_finite() {
            return Err(Error::SingularMatrix { column: col, pivot });
        }
        a.swap(col, p);
        b.swap(col, p);
        row_scale.swap(col, p);
        for r in col + 1..4 {
            let factor = a[r][col] / a[col][col];
            if factor == ZERO {
                continue;
            }
            #[allow(clippy::needless_range_loop)]
            for k in col..4 {
                let delta = factor * a[col][k];
                a[r][k] -= delta;
            }
            let delta = factor * b[col];
            b[r] -= delta;
        }
    }
    let mut x = [ZERO; 4];
    for r in (0..4).rev() {
        let tail: Complex64 = (r + 1..4).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Ok(x)
}
