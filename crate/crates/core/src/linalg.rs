//! Dense row-major helpers for the small square matrices used throughout.
//!
//! Products skip zero entries of the left operand, which keeps the common
//! case (sparse mobility matrices, point-mass beliefs) cheap without a
//! separate sparse type.

use alloc::vec;
use alloc::vec::Vec;

/// Row vector times an `n x n` matrix.
pub fn vec_mat(v: &[f64], m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    vec_mat_into(v, m, n, &mut out);
    out
}

pub fn vec_mat_into(v: &[f64], m: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(v.len(), n);
    debug_assert_eq!(m.len(), n * n);
    out.iter_mut().for_each(|x| *x = 0.0);
    for (k, &vk) in v.iter().enumerate() {
        if vk == 0.0 {
            continue;
        }
        let row = &m[k * n..(k + 1) * n];
        for (o, &mkj) in out.iter_mut().zip(row) {
            *o += vk * mkj;
        }
    }
}

/// `a * b` for `n x n` matrices.
pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * n);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        vec_mat_into(&a[i * n..(i + 1) * n], b, n, &mut out[i * n..(i + 1) * n]);
    }
    out
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| libm::fabs(x - y))
        .fold(0.0, f64::max)
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| libm::fabs(*x)).fold(0.0, f64::max)
}
