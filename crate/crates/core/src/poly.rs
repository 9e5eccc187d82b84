//! Small helpers for real polynomials stored as coefficient vectors in
//! descending degree (`[a_n, ..., a_1, a_0]`).

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Product of two polynomials.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Sum of two polynomials, aligned on the constant term.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, &x) in a.iter().rev().enumerate() {
        out[n - 1 - i] += x;
    }
    for (i, &x) in b.iter().rev().enumerate() {
        out[n - 1 - i] += x;
    }
    out
}

pub fn scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|x| x * k).collect()
}

/// Horner evaluation at a complex point.
pub fn eval_complex(a: &[f64], s: Complex64) -> Complex64 {
    a.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

/// Drops leading zeros so the first coefficient is nonzero.
pub fn trim(a: &[f64]) -> &[f64] {
    let first = a.iter().position(|&c| c != 0.0).unwrap_or(a.len());
    &a[first..]
}

/// All complex roots, from the eigenvalues of the companion matrix.
///
/// Repeated roots come back accurate to roughly the square root of machine
/// precision times their magnitude, as usual for eigenvalue-based solvers.
pub fn roots(a: &[f64]) -> Vec<Complex64> {
    let a = trim(a);
    if a.len() < 2 {
        return Vec::new();
    }
    let n = a.len() - 1;
    let lead = a[0];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        companion[(0, j)] = -a[j + 1] / lead;
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    let mut out: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
    out.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    out
}
