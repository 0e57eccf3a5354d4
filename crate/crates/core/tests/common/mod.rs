//! Independent numerical oracles shared by the integration tests.
//!
//! Nothing here calls the Jacobi solver: eigenvalue questions are answered by
//! Sylvester inertia counts of `a − σ` (signs of the LDLᵀ pivots) and
//! bisection.

#![allow(dead_code)]

use synlab::SymMatrix;

/// Number of eigenvalues of `a` strictly below `sigma`.
#[allow(clippy::needless_range_loop)]
pub fn count_below(a: &SymMatrix, sigma: f64) -> usize {
    let n = a.dim();
    let mut m: Vec<Vec<f64>> = a.to_rows();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= sigma;
    }
    let scale = a.max_abs().max(1.0);
    let mut negatives = 0;
    for k in 0..n {
        let mut pivot = m[k][k];
        if pivot == 0.0 {
            pivot = -f64::EPSILON * scale;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / pivot;
            for j in k + 1..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    negatives
}

fn gershgorin(a: &SymMatrix) -> (f64, f64) {
    let rows = a.to_rows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, r) in rows.iter().enumerate() {
        let radius: f64 = r
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, x)| x.abs())
            .sum();
        lo = lo.min(r[i] - radius);
        hi = hi.max(r[i] + radius);
    }
    (lo - 1.0, hi + 1.0)
}

/// The `k`-th smallest eigenvalue (0-based) by bisection on inertia counts.
pub fn kth_eigenvalue(a: &SymMatrix, k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(a, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn min_eigenvalue(a: &SymMatrix) -> f64 {
    kth_eigenvalue(a, 0)
}

pub fn max_eigenvalue(a: &SymMatrix) -> f64 {
    kth_eigenvalue(a, a.dim() - 1)
}

/// `b − a` has no eigenvalue below `−slack·max(1, ‖b − a‖)`.
pub fn loewner_leq(a: &SymMatrix, b: &SymMatrix, slack: f64) -> bool {
    let d = b.sub(a).unwrap();
    let scale = min_eigenvalue(&d)
        .abs()
        .max(max_eigenvalue(&d).abs())
        .max(1.0);
    count_below(&d, -slack * scale) == 0
}

/// Plain triple-loop product, kept apart from the crate's kernel.
pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn frobenius_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
