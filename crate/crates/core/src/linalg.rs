//! Dense symmetric linear algebra used by every other module.
//!
//! Everything here works on small dense matrices (dimension up to a few
//! dozen). The eigensolver is a cyclic Jacobi iteration with a fixed sweep
//! order, so results are bit-for-bit reproducible for a given input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative cutoff below which an eigenvalue counts as zero.
    pub eig: f64,
    /// Residual allowed on reconstruction and product identities.
    pub recon: f64,
    /// Residual allowed on orthonormality of bases.
    pub ortho: f64,
    /// Relative slack on Loewner (PSD) comparisons.
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig: 1e-9,
            recon: 1e-8,
            ortho: 1e-10,
            psd: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eig", self.eig),
            ("recon", self.recon),
            ("ortho", self.ortho),
            ("psd", self.psd),
        ] {
            if !(v > 0.0 && v < 1e-3) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} = {v} must lie in (0, 1e-3)"
                )));
            }
        }
        Ok(())
    }
}

/// A dense real symmetric matrix, stored row-major.
///
/// Every constructor symmetrizes its input, so `get(i, j) == get(j, i)`
/// holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

/// A dense square matrix with no symmetry assumption. Products of
/// symmetric matrices land here.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

fn symmetrize_in_place(dim: usize, data: &mut [f64]) {
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = 0.5 * (data[i * dim + j] + data[j * dim + i]);
            data[i * dim + j] = avg;
            data[j * dim + i] = avg;
        }
    }
}

fn square_product(dim: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

impl Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl SymMatrix {
    /// Builds from row-major entries, replacing the input by `(M + Mᵀ)/2`.
    pub fn from_row_major(dim: usize, mut data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation(
                "matrix dimension must be at least 1".into(),
            ));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: dim * dim,
                right: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        symmetrize_in_place(dim, &mut data);
        Ok(SymMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = value;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// `v vᵀ`
    pub fn outer(v: &[f64]) -> Self {
        let dim = v.len();
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = v[i] * v[j];
            }
        }
        SymMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    fn check_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> Result<SymMatrix> {
        self.check_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(SymMatrix {
            dim: self.dim,
            data,
        })
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    /// `self + value·1`
    pub fn shift(&self, value: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] += value;
        }
        out
    }

    /// Associative product, computed in the full matrix algebra.
    pub fn mul(&self, other: &SymMatrix) -> Result<Matrix> {
        self.check_dim(other)?;
        Ok(Matrix {
            dim: self.dim,
            data: square_product(self.dim, &self.data, &other.data),
        })
    }

    /// `self · other · self`, symmetrized.
    pub fn sandwich(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(other)?;
        let left = square_product(self.dim, &self.data, &other.data);
        let mut data = square_product(self.dim, &left, &self.data);
        symmetrize_in_place(self.dim, &mut data);
        Ok(SymMatrix {
            dim: self.dim,
            data,
        })
    }

    pub fn square(&self) -> SymMatrix {
        let mut data = square_product(self.dim, &self.data, &self.data);
        symmetrize_in_place(self.dim, &mut data);
        SymMatrix {
            dim: self.dim,
            data,
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| dot(&self.data[i * self.dim..(i + 1) * self.dim], v))
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(eig_sym(self, &Tolerances::default())?.max_abs_eigenvalue())
    }

    /// Frobenius distance to `other`.
    pub fn distance(&self, other: &SymMatrix) -> Result<f64> {
        Ok(self.sub(other)?.frobenius_norm())
    }

    pub fn into_matrix(self) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data,
        }
    }
}

impl Matrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(Matrix {
            dim: self.dim,
            data: square_product(self.dim, &self.data, &other.data),
        })
    }

    pub fn mul_sym(&self, other: &SymMatrix) -> Result<Matrix> {
        self.mul(&other.clone().into_matrix())
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.dim;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Matrix { dim: n, data }
    }

    /// `(M + Mᵀ)/2`
    pub fn symmetric_part(&self) -> SymMatrix {
        let mut data = self.data.clone();
        symmetrize_in_place(self.dim, &mut data);
        SymMatrix {
            dim: self.dim,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }

    /// `Q · diag(f(λ)) · Qᵀ`
    pub fn compose(&self, values: &[f64]) -> SymMatrix {
        let n = self.dim();
        let mut data = vec![0.0; n * n];
        for (v, &w) in self.eigenvectors.iter().zip(values) {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let wi = w * v[i];
                for j in 0..n {
                    data[i * n + j] += wi * v[j];
                }
            }
        }
        symmetrize_in_place(n, &mut data);
        SymMatrix { dim: n, data }
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.compose(&self.eigenvalues)
    }

    /// `‖QᵀQ − I‖_F`
    pub fn orthonormality_residual(&self) -> f64 {
        let mut acc = 0.0;
        for (i, u) in self.eigenvectors.iter().enumerate() {
            for (j, v) in self.eigenvectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = dot(u, v) - target;
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    /// Cutoff below which `|λ|` counts as zero: `tol.eig · max(1, ‖m‖₂)`.
    pub fn zero_cutoff(&self, tol: &Tolerances) -> f64 {
        tol.eig * self.max_abs_eigenvalue().max(1.0)
    }
}

const MAX_SWEEPS: usize = 100;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps visit the pairs `(p, q)`, `p < q`, in row order. Iteration stops once
/// the off-diagonal Frobenius norm drops below `1e-15·‖m‖_F`; the result is
/// then checked against the reconstruction and orthonormality tolerances.
pub fn eig_sym(m: &SymMatrix, tol: &Tolerances) -> Result<EigenSystem> {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.frobenius_norm();
    let target = 1e-15 * scale;

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = scale == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- Jᵀ A J with J the rotation in the (p, q) plane
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_norm(&a) <= target;
    }
    if !converged {
        return Err(Error::NonConvergence {
            sweeps,
            residual: off_norm(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    let sys = EigenSystem {
        eigenvalues,
        eigenvectors,
    };

    let recon = sys.reconstruct().distance(m)?;
    let ortho = sys.orthonormality_residual();
    if recon > tol.recon * scale.max(1.0) || ortho > tol.ortho {
        return Err(Error::NonConvergence {
            sweeps,
            residual: recon.max(ortho),
        });
    }
    Ok(sys)
}

/// Orthonormal vectors spanning a subspace of `ℝ^ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    pub columns: Vec<Vec<f64>>,
}

impl SubspaceBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            columns: Vec::new(),
        }
    }

    /// Orthonormalizes `vectors` by two passes of modified Gram-Schmidt,
    /// dropping vectors whose remainder falls below `drop_below`.
    pub fn from_vectors(ambient_dim: usize, vectors: &[Vec<f64>], drop_below: f64) -> Result<Self> {
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    left: ambient_dim,
                    right: v.len(),
                });
            }
            let original = norm(v);
            let mut w = v.clone();
            for _ in 0..2 {
                for c in &columns {
                    let proj = dot(c, &w);
                    for (wi, ci) in w.iter_mut().zip(c) {
                        *wi -= proj * ci;
                    }
                }
            }
            let len = norm(&w);
            if len > drop_below * original.max(1.0) {
                columns.push(w.into_iter().map(|x| x / len).collect());
            }
        }
        Ok(SubspaceBasis {
            ambient_dim,
            columns,
        })
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Orthogonal projector onto the span.
    pub fn projector(&self) -> SymMatrix {
        let n = self.ambient_dim;
        let mut data = vec![0.0; n * n];
        for c in &self.columns {
            for i in 0..n {
                for j in 0..n {
                    data[i * n + j] += c[i] * c[j];
                }
            }
        }
        symmetrize_in_place(n, &mut data);
        SymMatrix { dim: n, data }
    }

    pub fn orthonormality_residual(&self) -> f64 {
        let mut acc = 0.0;
        for (i, u) in self.columns.iter().enumerate() {
            for (j, v) in self.columns.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = dot(u, v) - target;
                acc += d * d;
            }
        }
        acc.sqrt()
    }
}

/// Basis of the span of eigenvectors whose `|λ|` exceeds the relative cutoff.
pub fn range_basis(m: &SymMatrix, tol: &Tolerances) -> Result<SubspaceBasis> {
    let sys = eig_sym(m, tol)?;
    let cutoff = sys.zero_cutoff(tol);
    let columns = sys
        .eigenvalues
        .iter()
        .zip(&sys.eigenvectors)
        .filter(|(l, _)| l.abs() > cutoff)
        .map(|(_, v)| v.clone())
        .collect();
    Ok(SubspaceBasis {
        ambient_dim: m.dim,
        columns,
    })
}

/// Number of eigenvalues counted as zero by [`range_basis`].
pub fn null_dim(m: &SymMatrix, tol: &Tolerances) -> Result<usize> {
    let sys = eig_sym(m, tol)?;
    let cutoff = sys.zero_cutoff(tol);
    Ok(sys.eigenvalues.iter().filter(|l| l.abs() <= cutoff).count())
}

/// Intersection of two spans via principal vectors.
///
/// With `M = UᵀV`, the right singular vectors `y` of `M` whose singular value
/// (the cosine of a principal angle) is at least `1 − tol.eig` give the
/// intersection directions `V·y`.
pub fn subspace_intersect(
    u: &SubspaceBasis,
    v: &SubspaceBasis,
    tol: &Tolerances,
) -> Result<SubspaceBasis> {
    if u.ambient_dim != v.ambient_dim {
        return Err(Error::DimensionMismatch {
            left: u.ambient_dim,
            right: v.ambient_dim,
        });
    }
    let n = u.ambient_dim;
    if u.is_empty() || v.is_empty() {
        return Ok(SubspaceBasis::empty(n));
    }
    // Work from the smaller basis so the Gram matrix is as small as possible.
    let (small, large) = if v.dim() <= u.dim() { (v, u) } else { (u, v) };
    let k = small.dim();
    // cross[i][j] = <large_i, small_j>
    let cross: Vec<Vec<f64>> = large
        .columns
        .iter()
        .map(|l| small.columns.iter().map(|s| dot(l, s)).collect())
        .collect();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = cross.iter().map(|row| row[i] * row[j]).sum();
        }
    }
    let gram = SymMatrix::from_row_major(k, gram)?;
    let sys = eig_sym(&gram, tol)?;
    let threshold = (1.0 - tol.eig) * (1.0 - tol.eig);
    let mut directions = Vec::new();
    for (lambda, y) in sys.eigenvalues.iter().zip(&sys.eigenvectors) {
        if *lambda >= threshold {
            let mut w = vec![0.0; n];
            for (coef, col) in y.iter().zip(&small.columns) {
                for (wi, ci) in w.iter_mut().zip(col) {
                    *wi += coef * ci;
                }
            }
            directions.push(w);
        }
    }
    SubspaceBasis::from_vectors(n, &directions, 1e-6)
}

/// `Q · diag(f(λᵢ)) · Qᵀ`. Fails with `DomainError` at the first eigenvalue
/// where `f` returns a non-finite value.
pub fn apply_spectral_fn(
    m: &SymMatrix,
    f: impl Fn(f64) -> f64,
    tol: &Tolerances,
) -> Result<SymMatrix> {
    let sys = eig_sym(m, tol)?;
    let mut values = Vec::with_capacity(sys.dim());
    for &l in &sys.eigenvalues {
        let y = f(l);
        if !y.is_finite() {
            return Err(Error::DomainError { eigenvalue: l });
        }
        values.push(y);
    }
    Ok(sys.compose(&values))
}
