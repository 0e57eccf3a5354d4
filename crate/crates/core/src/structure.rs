//! Direct sums `⊕ᵢ Mₙᵢ(ℝ)^sa`, their elements, commutants, centers and corner
//! algebras.

use std::fmt;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, range_basis, SymMatrix, Tolerances};
use crate::order::{inverse, sqrt_psd};
use crate::projection::{carrier, Projection};
use crate::spectral::spectral_resolution;

/// The block sizes `(n₁, …, n_k)` of `A = ⊕ᵢ Mₙᵢ(ℝ)^sa`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraSpec {
    blocks: Vec<usize>,
}

impl TryFrom<Vec<usize>> for AlgebraSpec {
    type Error = Error;

    fn try_from(blocks: Vec<usize>) -> Result<Self> {
        AlgebraSpec::new(blocks)
    }
}

impl From<AlgebraSpec> for Vec<usize> {
    fn from(spec: AlgebraSpec) -> Self {
        spec.blocks
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.blocks)
    }
}

impl AlgebraSpec {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Validation(
                "an algebra needs at least one block".into(),
            ));
        }
        if blocks.contains(&0) {
            return Err(Error::Validation("block sizes must be positive".into()));
        }
        Ok(AlgebraSpec { blocks })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// `Σ nᵢ(nᵢ+1)/2`, the real dimension of `A`.
    pub fn real_dim(&self) -> usize {
        self.blocks.iter().map(|n| n * (n + 1) / 2).sum()
    }

    pub fn block_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|&n| {
                let r = start..start + n;
                start += n;
                r
            })
            .collect()
    }

    fn block_of(&self, index: usize) -> usize {
        let mut start = 0;
        for (b, &n) in self.blocks.iter().enumerate() {
            if index < start + n {
                return b;
            }
            start += n;
        }
        unreachable!("index {index} outside the algebra")
    }

    pub fn unit(&self) -> Element {
        Element {
            algebra: self.clone(),
            matrix: SymMatrix::identity(self.total_dim()),
        }
    }

    pub fn zero(&self) -> Element {
        Element {
            algebra: self.clone(),
            matrix: SymMatrix::zeros(self.total_dim()),
        }
    }

    /// Orthonormal (Frobenius) basis of `A`: `E_ii` and `(E_ij + E_ji)/√2`
    /// inside each block.
    pub fn standard_basis(&self) -> Vec<Element> {
        let d = self.total_dim();
        let mut out = Vec::with_capacity(self.real_dim());
        for r in self.block_ranges() {
            for i in r.clone() {
                for j in i..r.end {
                    let mut data = vec![0.0; d * d];
                    if i == j {
                        data[i * d + i] = 1.0;
                    } else {
                        data[i * d + j] = std::f64::consts::FRAC_1_SQRT_2;
                        data[j * d + i] = std::f64::consts::FRAC_1_SQRT_2;
                    }
                    out.push(Element {
                        algebra: self.clone(),
                        matrix: SymMatrix::from_row_major(d, data).expect("square"),
                    });
                }
            }
        }
        out
    }

    pub fn is_single_block(&self) -> bool {
        self.blocks.len() == 1
    }
}

/// A block-diagonal symmetric matrix belonging to a given algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    algebra: AlgebraSpec,
    matrix: SymMatrix,
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl Element {
    /// Validates the size and block structure of `matrix`; off-block entries
    /// within `tol.recon` (relative to the largest entry) are cleared.
    pub fn new(algebra: &AlgebraSpec, matrix: SymMatrix, tol: &Tolerances) -> Result<Self> {
        let d = algebra.total_dim();
        if matrix.dim() != d {
            return Err(Error::Validation(format!(
                "matrix has dimension {} but the algebra {} has total dimension {d}",
                matrix.dim(),
                algebra
            )));
        }
        let limit = tol.recon * matrix.max_abs().max(1.0);
        let mut data = matrix.as_slice().to_vec();
        for i in 0..d {
            for j in 0..d {
                if algebra.block_of(i) != algebra.block_of(j) {
                    let x = data[i * d + j];
                    if x.abs() > limit {
                        return Err(Error::Validation(format!(
                            "entry ({i},{j}) = {x} lies outside the block structure {algebra}"
                        )));
                    }
                    data[i * d + j] = 0.0;
                }
            }
        }
        Ok(Element {
            algebra: algebra.clone(),
            matrix: SymMatrix::from_row_major(d, data)?,
        })
    }

    /// Assembles a block-diagonal element from one matrix per block.
    pub fn from_blocks(algebra: &AlgebraSpec, blocks: &[SymMatrix]) -> Result<Self> {
        if blocks.len() != algebra.blocks().len() {
            return Err(Error::DimensionMismatch {
                left: algebra.blocks().len(),
                right: blocks.len(),
            });
        }
        let d = algebra.total_dim();
        let mut data = vec![0.0; d * d];
        for (r, b) in algebra.block_ranges().into_iter().zip(blocks) {
            if b.dim() != r.len() {
                return Err(Error::DimensionMismatch {
                    left: r.len(),
                    right: b.dim(),
                });
            }
            for (bi, i) in r.clone().enumerate() {
                for (bj, j) in r.clone().enumerate() {
                    data[i * d + j] = b.get(bi, bj);
                }
            }
        }
        Ok(Element {
            algebra: algebra.clone(),
            matrix: SymMatrix::from_row_major(d, data)?,
        })
    }

    pub fn algebra(&self) -> &AlgebraSpec {
        &self.algebra
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.matrix
    }

    /// The component in block `index`.
    pub fn block(&self, index: usize) -> SymMatrix {
        let r = self.algebra.block_ranges()[index].clone();
        let n = r.len();
        let mut data = Vec::with_capacity(n * n);
        for i in r.clone() {
            for j in r.clone() {
                data.push(self.matrix.get(i, j));
            }
        }
        SymMatrix::from_row_major(n, data).expect("square block")
    }

    pub fn blocks(&self) -> Vec<SymMatrix> {
        (0..self.algebra.blocks().len())
            .map(|i| self.block(i))
            .collect()
    }

    fn same_algebra(&self, other: &Element) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.same_algebra(other)?;
        Ok(Element {
            algebra: self.algebra.clone(),
            matrix: self.matrix.add(&other.matrix)?,
        })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.same_algebra(other)?;
        Ok(Element {
            algebra: self.algebra.clone(),
            matrix: self.matrix.sub(&other.matrix)?,
        })
    }

    pub fn scale(&self, factor: f64) -> Element {
        Element {
            algebra: self.algebra.clone(),
            matrix: self.matrix.scale(factor),
        }
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &Element) -> f64 {
        crate::linalg::dot(self.matrix.as_slice(), other.matrix.as_slice())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }
}

/// A linear subspace of `A`, held as a Frobenius-orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSubspaceBasis {
    algebra: AlgebraSpec,
    basis: Vec<Element>,
}

impl LinearSubspaceBasis {
    /// The span of `elements`; dependent elements are dropped.
    pub fn span(algebra: &AlgebraSpec, elements: &[Element], tol: &Tolerances) -> Result<Self> {
        let mut basis: Vec<Element> = Vec::new();
        for e in elements {
            if e.algebra() != algebra {
                return Err(Error::AlgebraMismatch);
            }
            let scale = e.frobenius_norm().max(1.0);
            let mut w = e.clone();
            for _ in 0..2 {
                for b in &basis {
                    w = w.sub(&b.scale(w.inner(b)))?;
                }
            }
            let len = w.frobenius_norm();
            if len > tol.eig.sqrt() * scale {
                basis.push(w.scale(1.0 / len));
            }
        }
        Ok(LinearSubspaceBasis {
            algebra: algebra.clone(),
            basis,
        })
    }

    pub fn algebra(&self) -> &AlgebraSpec {
        &self.algebra
    }

    pub fn basis(&self) -> &[Element] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &SymMatrix) -> SymMatrix {
        let mut out = SymMatrix::zeros(x.dim());
        for b in &self.basis {
            let c = crate::linalg::dot(x.as_slice(), b.matrix().as_slice());
            out = out.add(&b.matrix().scale(c)).expect("same dimension");
        }
        out
    }

    /// Least-squares residual `‖x − proj(x)‖_F / max(1, ‖x‖_F)`.
    pub fn membership_residual(&self, x: &SymMatrix) -> f64 {
        let r = x.distance(&self.project(x)).unwrap_or(f64::INFINITY);
        r / x.frobenius_norm().max(1.0)
    }

    pub fn contains(&self, x: &SymMatrix, tol: &Tolerances) -> bool {
        self.membership_residual(x) <= tol.recon
    }

    /// Whether every pair of basis elements commutes.
    pub fn is_commutative(&self, tol: &Tolerances) -> Result<bool> {
        for (i, a) in self.basis.iter().enumerate() {
            for b in &self.basis[i + 1..] {
                if !crate::order::commutes(a.matrix(), b.matrix(), tol)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Σ cᵢ bᵢ`
    pub fn combination(&self, coefficients: &[f64]) -> Element {
        let mut out = self.algebra.zero();
        for (c, b) in coefficients.iter().zip(&self.basis) {
            out = out.add(&b.scale(*c)).expect("same algebra");
        }
        out
    }
}

fn common_algebra<'a>(
    m: &'a [Element],
    fallback: Option<&'a AlgebraSpec>,
) -> Result<&'a AlgebraSpec> {
    let algebra = match (m.first(), fallback) {
        (Some(e), _) => e.algebra(),
        (None, Some(a)) => a,
        (None, None) => return Err(Error::AlgebraMismatch),
    };
    if m.iter().any(|e| e.algebra() != algebra) {
        return Err(Error::AlgebraMismatch);
    }
    if let Some(a) = fallback {
        if a != algebra {
            return Err(Error::AlgebraMismatch);
        }
    }
    Ok(algebra)
}

/// `C(M) = {x ∈ A : xm = mx for all m ∈ M}`.
///
/// Solves for the null space of the commutator map on coordinates with
/// respect to the standard basis of the symmetric block-diagonal space: the
/// null vectors of `KᵀK` whose eigenvalue is below `tol.eig` relative to the
/// largest one.
pub fn commutant_in(
    algebra: &AlgebraSpec,
    m: &[Element],
    tol: &Tolerances,
) -> Result<LinearSubspaceBasis> {
    let algebra = common_algebra(m, Some(algebra))?;
    let basis = algebra.standard_basis();
    if m.is_empty() {
        return Ok(LinearSubspaceBasis {
            algebra: algebra.clone(),
            basis,
        });
    }
    let n = basis.len();
    // columns[k] = vec(B_k m − m B_k) stacked over m ∈ M
    let columns: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            let mut col = Vec::new();
            for x in m {
                let c = b
                    .matrix()
                    .mul(x.matrix())
                    .and_then(|l| l.sub(&x.matrix().mul(b.matrix())?));
                col.extend(c.expect("same dimension").to_rows().concat());
            }
            col
        })
        .collect();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let g = crate::linalg::dot(&columns[i], &columns[j]);
            gram[i * n + j] = g;
            gram[j * n + i] = g;
        }
    }
    let gram = SymMatrix::from_row_major(n, gram)?;
    let sys = eig_sym(&gram, tol)?;
    let cutoff = sys.zero_cutoff(tol);
    let solutions: Vec<Element> = sys
        .eigenvalues
        .iter()
        .zip(&sys.eigenvectors)
        .filter(|(l, _)| **l <= cutoff)
        .map(|(_, y)| {
            let mut acc = algebra.zero();
            for (c, b) in y.iter().zip(&basis) {
                acc = acc.add(&b.scale(*c)).expect("same algebra");
            }
            acc
        })
        .collect();
    LinearSubspaceBasis::span(algebra, &solutions, tol)
}

/// `C(M)` for a nonempty `M`.
pub fn commutant(m: &[Element], tol: &Tolerances) -> Result<LinearSubspaceBasis> {
    let algebra = common_algebra(m, None)?.clone();
    commutant_in(&algebra, m, tol)
}

/// `CC(M) = C(C(M))`
pub fn bicommutant_in(
    algebra: &AlgebraSpec,
    m: &[Element],
    tol: &Tolerances,
) -> Result<LinearSubspaceBasis> {
    let first = commutant_in(algebra, m, tol)?;
    commutant_in(algebra, first.basis(), tol)
}

pub fn bicommutant(m: &[Element], tol: &Tolerances) -> Result<LinearSubspaceBasis> {
    let algebra = common_algebra(m, None)?.clone();
    bicommutant_in(&algebra, m, tol)
}

/// The center `C(A)`.
pub fn center(algebra: &AlgebraSpec, tol: &Tolerances) -> Result<LinearSubspaceBasis> {
    commutant_in(algebra, &algebra.standard_basis(), tol)
}

/// Outcome of the factor test.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorVerdict {
    pub is_factor: bool,
    pub center_dim: usize,
    /// A central projection other than 0 and 1, present iff not a factor.
    pub witness: Option<Element>,
}

/// The minimal projections of a commutative subspace closed under spectral
/// projections, read off as the eigenspace projectors of a generic element.
///
/// A combination is generic when it has exactly `dim v` distinct
/// eigenvalues; a few coefficient sets are tried before giving up.
pub fn minimal_projections(v: &LinearSubspaceBasis, tol: &Tolerances) -> Result<Vec<Element>> {
    const ATTEMPTS: usize = 8;
    let n = v.algebra().total_dim();
    for attempt in 0..ATTEMPTS {
        let step = 0.618_033_988_749_894_9 + 0.1 * attempt as f64;
        let coefficients: Vec<f64> = (0..v.dim()).map(|k| 1.0 + step * k as f64).collect();
        let generic = v.combination(&coefficients);
        let res = spectral_resolution(generic.matrix(), tol)?;
        if res.jumps.len() != v.dim() {
            continue;
        }
        let mut atoms = Vec::with_capacity(v.dim());
        let mut previous = SymMatrix::zeros(n);
        for jump in &res.jumps {
            let atom = jump.projection.matrix().sub(&previous)?;
            previous = jump.projection.matrix().clone();
            atoms.push(Element::new(v.algebra(), atom, tol)?);
        }
        return Ok(atoms);
    }
    Err(Error::InvariantViolation(
        "no generic element found; subspace may not be spanned by projections".into(),
    ))
}

/// The minimal central projections.
pub fn central_atoms(algebra: &AlgebraSpec, tol: &Tolerances) -> Result<Vec<Element>> {
    minimal_projections(&center(algebra, tol)?, tol)
}

/// `A` is a factor iff its center is one-dimensional, equivalently iff its
/// only central projections are 0 and 1. Otherwise the witness is the
/// minimal central projection whose support contains the first coordinate.
pub fn is_factor(algebra: &AlgebraSpec, tol: &Tolerances) -> Result<FactorVerdict> {
    let z = center(algebra, tol)?;
    if z.dim() == 1 {
        return Ok(FactorVerdict {
            is_factor: true,
            center_dim: 1,
            witness: None,
        });
    }
    let atoms = central_atoms(algebra, tol)?;
    let witness = atoms
        .into_iter()
        .max_by(|a, b| a.matrix().get(0, 0).total_cmp(&b.matrix().get(0, 0)))
        .ok_or_else(|| Error::InvariantViolation("center has no atoms".into()))?;
    Ok(FactorVerdict {
        is_factor: false,
        center_dim: z.dim(),
        witness: Some(witness),
    })
}

/// The corner `uAu` of a projection `u`, in compressed coordinates.
///
/// Compressed coordinates use an orthonormal basis of `Ran u` assembled block
/// by block, so the corner is again a direct sum (of the nonzero block ranks).
#[derive(Debug, Clone, PartialEq)]
pub struct CornerAlgebra {
    pub parent: AlgebraSpec,
    pub unit: Projection,
    pub algebra: AlgebraSpec,
    /// Orthonormal basis of `Ran u` in parent coordinates.
    pub embedding: Vec<Vec<f64>>,
}

impl CornerAlgebra {
    pub fn dim(&self) -> usize {
        self.embedding.len()
    }

    /// `x ↦ Wᵀ x W`
    pub fn compress(&self, x: &SymMatrix) -> Result<SymMatrix> {
        if x.dim() != self.parent.total_dim() {
            return Err(Error::DimensionMismatch {
                left: self.parent.total_dim(),
                right: x.dim(),
            });
        }
        let r = self.dim();
        let images: Vec<Vec<f64>> = self.embedding.iter().map(|w| x.mul_vec(w)).collect();
        let mut data = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                data[i * r + j] = crate::linalg::dot(&self.embedding[i], &images[j]);
            }
        }
        SymMatrix::from_row_major(r, data)
    }

    /// `y ↦ W y Wᵀ`
    pub fn lift(&self, y: &SymMatrix) -> Result<SymMatrix> {
        if y.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: y.dim(),
            });
        }
        let d = self.parent.total_dim();
        let mut data = vec![0.0; d * d];
        for (i, wi) in self.embedding.iter().enumerate() {
            for (j, wj) in self.embedding.iter().enumerate() {
                let c = y.get(i, j);
                if c == 0.0 {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        data[a * d + b] += c * wi[a] * wj[b];
                    }
                }
            }
        }
        SymMatrix::from_row_major(d, data)
    }

    /// `x ↦ uxu`, staying in parent coordinates.
    pub fn compress_in_place(&self, x: &SymMatrix) -> Result<SymMatrix> {
        self.unit.matrix().sandwich(x)
    }
}

pub fn corner(algebra: &AlgebraSpec, p: &Projection, tol: &Tolerances) -> Result<CornerAlgebra> {
    if p.dim() != algebra.total_dim() {
        return Err(Error::DimensionMismatch {
            left: algebra.total_dim(),
            right: p.dim(),
        });
    }
    let element = Element::new(algebra, p.matrix().clone(), tol)
        .map_err(|e| Error::NotProjection(format!("not an element of {algebra}: {e}")))?;
    if p.is_zero() {
        return Err(Error::ZeroProjection);
    }
    let d = algebra.total_dim();
    let mut embedding = Vec::new();
    let mut blocks = Vec::new();
    for (index, r) in algebra.block_ranges().into_iter().enumerate() {
        let local = range_basis(&element.block(index), tol)?;
        if local.is_empty() {
            continue;
        }
        blocks.push(local.dim());
        for v in local.columns {
            let mut w = vec![0.0; d];
            w[r.clone()].copy_from_slice(&v);
            embedding.push(w);
        }
    }
    Ok(CornerAlgebra {
        parent: algebra.clone(),
        unit: p.clone(),
        algebra: AlgebraSpec::new(blocks)?,
        embedding,
    })
}

/// One closure property evaluated on sampled members.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureResult {
    pub pass: bool,
    pub tested: usize,
    pub max_residual: f64,
}

impl ClosureResult {
    fn new() -> Self {
        ClosureResult {
            pass: true,
            tested: 0,
            max_residual: 0.0,
        }
    }

    fn record(&mut self, residual: f64, tol: &Tolerances) {
        self.tested += 1;
        self.max_residual = self.max_residual.max(residual);
        self.pass &= residual <= tol.recon;
    }
}

/// Closure of a subspace under squares, square roots, carriers and inverses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureReport {
    pub squares: ClosureResult,
    pub square_roots: ClosureResult,
    pub carriers: ClosureResult,
    pub inverses: ClosureResult,
}

impl ClosureReport {
    pub fn all_pass(&self) -> bool {
        self.squares.pass && self.square_roots.pass && self.carriers.pass && self.inverses.pass
    }
}

/// Samples `samples` random members `x` of `v` and tests membership of `x²`,
/// `(x − L + ½)^{1/2}`, `(x − L)°` and `(x − L + ½)⁻¹`, where `L` is the least
/// eigenvalue of `x`.
pub fn closure_check(
    v: &LinearSubspaceBasis,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ClosureReport> {
    let unit = v.algebra().unit();
    if !v.contains(unit.matrix(), tol) {
        return Err(Error::UnitMissing);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ClosureReport {
        squares: ClosureResult::new(),
        square_roots: ClosureResult::new(),
        carriers: ClosureResult::new(),
        inverses: ClosureResult::new(),
    };
    for _ in 0..samples {
        let coefficients: Vec<f64> = (0..v.dim())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let x = v.combination(&coefficients).into_matrix();
        let least = eig_sym(&x, tol)?.min_eigenvalue();
        let singular = x.shift(-least);
        let positive = x.shift(-least + 0.5);

        report
            .squares
            .record(v.membership_residual(&x.square()), tol);
        report
            .square_roots
            .record(v.membership_residual(&sqrt_psd(&positive, tol)?), tol);
        report.carriers.record(
            v.membership_residual(carrier(&singular, tol)?.matrix()),
            tol,
        );
        report
            .carriers
            .record(v.membership_residual(carrier(&x, tol)?.matrix()), tol);
        report
            .inverses
            .record(v.membership_residual(&inverse(&positive, tol)?), tol);
    }
    Ok(report)
}
