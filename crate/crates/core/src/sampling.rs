//! Seeded random generators for elements, projections and symmetries.
//!
//! All generators draw from a `ChaCha8Rng`, so a `(seed, stream)` pair fully
//! determines the output on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{SubspaceBasis, SymMatrix};
use crate::projection::Projection;
use crate::structure::{AlgebraSpec, Element};

/// RNG for trial `stream` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Symmetric matrix with independent standard normal entries on and above the
/// diagonal.
pub fn symmetric(rng: &mut impl Rng, n: usize) -> SymMatrix {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x = normal(rng);
            data[i * n + j] = x;
            data[j * n + i] = x;
        }
    }
    SymMatrix::from_row_major(n, data).expect("square")
}

/// Haar-like random orthonormal vectors: Gram-Schmidt on Gaussian vectors.
pub fn orthonormal(rng: &mut impl Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    loop {
        let raw: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| normal(rng)).collect())
            .collect();
        let basis = SubspaceBasis::from_vectors(n, &raw, 1e-6).expect("dimensions agree");
        if basis.dim() == k {
            return basis.columns;
        }
    }
}

/// `Q diag(values) Qᵀ` for a random orthogonal `Q`.
pub fn with_spectrum(rng: &mut impl Rng, values: &[f64]) -> SymMatrix {
    let q = orthonormal(rng, values.len(), values.len());
    let mut out = SymMatrix::zeros(values.len());
    for (v, &l) in q.iter().zip(values) {
        out = out
            .add(&SymMatrix::outer(v).scale(l))
            .expect("same dimension");
    }
    out
}

/// Positive semidefinite matrix of the given rank with eigenvalues in
/// `[0.1, 2]` on its range.
pub fn psd(rng: &mut impl Rng, n: usize, rank: usize) -> SymMatrix {
    let values: Vec<f64> = (0..n)
        .map(|i| {
            if i < rank {
                rng.random_range(0.1..2.0)
            } else {
                0.0
            }
        })
        .collect();
    with_spectrum(rng, &values)
}

/// Random projection of the given rank.
pub fn projection(rng: &mut impl Rng, n: usize, rank: usize) -> Projection {
    let columns = orthonormal(rng, n, rank);
    Projection::from_basis(&SubspaceBasis {
        ambient_dim: n,
        columns,
    })
}

/// Random element of `A`, block by block.
pub fn element(rng: &mut impl Rng, algebra: &AlgebraSpec) -> Element {
    let blocks: Vec<SymMatrix> = algebra
        .blocks()
        .iter()
        .map(|&n| symmetric(rng, n))
        .collect();
    Element::from_blocks(algebra, &blocks).expect("block sizes match")
}

/// Random traceless symmetric matrix.
pub fn traceless(rng: &mut impl Rng, n: usize) -> SymMatrix {
    let m = symmetric(rng, n);
    let t = m.trace() / n as f64;
    m.shift(-t)
}
