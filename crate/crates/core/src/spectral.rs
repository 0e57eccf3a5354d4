//! Spectral resolutions `p_λ = ((a − λ)⁺)°^⊥`, spectra, spectral bounds and
//! the extraction of a positive multiple of a projection under a positive
//! element.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, SubspaceBasis, SymMatrix, Tolerances};
use crate::order::{is_psd, orderunit_norm, pos_part};
use crate::projection::{carrier, Projection};

/// `L = sup{λ : λ ≤ a}` and `U = inf{λ : a ≤ λ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SpectralBounds {
    /// `max(|L|, |U|)`, which equals the order-unit norm.
    pub fn norm(&self) -> f64 {
        self.lower.abs().max(self.upper.abs())
    }
}

/// One jump of the resolution: from `at` onwards the family equals
/// `projection` (until the next jump).
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub at: f64,
    pub projection: Projection,
}

/// The right-continuous step family `λ ↦ p_λ` of an element.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResolution {
    pub element: SymMatrix,
    /// Ascending jump locations. The last projection is the identity.
    pub jumps: Vec<Jump>,
}

impl SpectralResolution {
    /// `p_λ`: zero below the first jump, otherwise the projection of the last
    /// jump at or below `λ`.
    pub fn at(&self, lambda: f64) -> Projection {
        self.jumps
            .iter()
            .rev()
            .find(|j| j.at <= lambda)
            .map(|j| j.projection.clone())
            .unwrap_or_else(|| Projection::zero(self.element.dim()))
    }

    pub fn spectrum(&self) -> Vec<f64> {
        self.jumps.iter().map(|j| j.at).collect()
    }
}

/// Groups ascending eigenvalues whose neighbours are closer than
/// `2·tol.eig·max(1, ‖a‖)`; each group is represented by its mean.
fn clustered_eigenspaces(a: &SymMatrix, tol: &Tolerances) -> Result<Vec<(f64, Vec<Vec<f64>>)>> {
    let sys = eig_sym(a, tol)?;
    let gap = 2.0 * sys.zero_cutoff(tol);
    let mut groups: Vec<(Vec<f64>, Vec<Vec<f64>>)> = Vec::new();
    for (l, v) in sys.eigenvalues.iter().zip(sys.eigenvectors) {
        match groups.last_mut() {
            Some((values, vectors)) if l - values[values.len() - 1] < gap => {
                values.push(*l);
                vectors.push(v);
            }
            _ => groups.push((vec![*l], vec![v])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(values, vectors)| (values.iter().sum::<f64>() / values.len() as f64, vectors))
        .collect())
}

/// Spectral resolution built from eigenspaces: `p_λ` projects onto the
/// eigenvectors with eigenvalue `≤ λ`, jumping exactly at the distinct
/// eigenvalues.
pub fn spectral_resolution(a: &SymMatrix, tol: &Tolerances) -> Result<SpectralResolution> {
    let mut accumulated: Vec<Vec<f64>> = Vec::new();
    let mut jumps = Vec::new();
    for (value, vectors) in clustered_eigenspaces(a, tol)? {
        accumulated.extend(vectors);
        let basis = SubspaceBasis {
            ambient_dim: a.dim(),
            columns: accumulated.clone(),
        };
        jumps.push(Jump {
            at: value,
            projection: Projection::from_basis(&basis),
        });
    }
    Ok(SpectralResolution {
        element: a.clone(),
        jumps,
    })
}

/// `p_λ` evaluated directly from its defining formula `((a − λ)⁺)°^⊥`.
pub fn p_lambda(a: &SymMatrix, lambda: f64, tol: &Tolerances) -> Result<Projection> {
    Ok(crate::projection::orthocomplement(&q_lambda_unchecked(
        a, lambda, tol,
    )?))
}

fn q_lambda_unchecked(a: &SymMatrix, lambda: f64, tol: &Tolerances) -> Result<Projection> {
    carrier(&pos_part(&a.shift(-lambda), tol)?, tol)
}

/// Rejects anything other than a nonzero positive element.
pub fn require_strictly_positive(a: &SymMatrix, tol: &Tolerances) -> Result<()> {
    if !is_psd(a, tol)? {
        return Err(Error::NotStrictlyPositive("element is not positive".into()));
    }
    let sys = eig_sym(a, tol)?;
    if sys.max_eigenvalue() <= tol.eig {
        return Err(Error::NotStrictlyPositive("element is zero".into()));
    }
    Ok(())
}

/// `q_λ = 1 − p_λ = ((a − λ)⁺)°` for `a > 0`.
pub fn q_lambda(a: &SymMatrix, lambda: f64, tol: &Tolerances) -> Result<Projection> {
    require_strictly_positive(a, tol)?;
    q_lambda_unchecked(a, lambda, tol)
}

/// Distinct eigenvalues, clustered as in [`spectral_resolution`].
pub fn spectrum(a: &SymMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    Ok(clustered_eigenspaces(a, tol)?
        .into_iter()
        .map(|(v, _)| v)
        .collect())
}

pub fn spectral_bounds(a: &SymMatrix) -> Result<SpectralBounds> {
    let sys = eig_sym(a, &Tolerances::default())?;
    Ok(SpectralBounds {
        lower: sys.min_eigenvalue(),
        upper: sys.max_eigenvalue(),
    })
}

/// A positive scalar and a nonzero projection with `λp ≤ a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subprojection {
    pub lambda: f64,
    pub projection: Projection,
}

/// Takes `λ = ‖a‖/2` and `p = q_λ(a)`.
pub fn find_subprojection(a: &SymMatrix, tol: &Tolerances) -> Result<Subprojection> {
    require_strictly_positive(a, tol)?;
    let lambda = orderunit_norm(a)? / 2.0;
    let projection = q_lambda_unchecked(a, lambda, tol)?;
    if projection.is_zero() {
        return Err(Error::InvariantViolation("q_λ vanished below ‖a‖".into()));
    }
    Ok(Subprojection { lambda, projection })
}

/// Worst residuals of the `q_λ` clause suite over a set of probe values.
///
/// Order residuals are the most negative eigenvalue of the difference that
/// must be positive (0 when it is), so every field passes when `≤ slack`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct QLambdaReport {
    pub probes: usize,
    /// `‖q_λ a − a q_λ‖_F`
    pub commutation: f64,
    /// `‖q_λ − 1‖_F` for `λ < 0`
    pub negative_is_one: f64,
    /// `‖q₀ − a°‖_F`
    pub zero_is_carrier: f64,
    pub zero_nonzero: bool,
    /// Every `q_λ` with `0 < λ < ‖a‖` is nonzero.
    pub interior_nonzero: bool,
    /// `λq_λ ≤ q_λ a`
    pub lower_order: f64,
    /// `q_λ a ≤ a`
    pub upper_order: f64,
    /// `‖q_λ‖_F` for `λ ≥ ‖a‖`
    pub beyond_norm_is_zero: f64,
    /// `(1 − q_λ)(a − λ) ≤ 0`
    pub below_part: f64,
    /// `0 ≤ q_λ(a − λ)`
    pub above_part: f64,
}

impl QLambdaReport {
    pub fn pass(&self, slack: f64) -> bool {
        self.zero_nonzero
            && self.interior_nonzero
            && [
                self.commutation,
                self.negative_is_one,
                self.zero_is_carrier,
                self.lower_order,
                self.upper_order,
                self.beyond_norm_is_zero,
                self.below_part,
                self.above_part,
            ]
            .iter()
            .all(|r| *r <= slack)
    }
}

fn order_violation(m: &SymMatrix, tol: &Tolerances) -> Result<f64> {
    let scale = m.spectral_norm()?.max(1.0);
    Ok((-eig_sym(m, tol)?.min_eigenvalue() / scale).max(0.0))
}

/// Evaluates every defining clause of `q_λ` for `a > 0` at the probes
/// `interior` (fractions of `‖a‖` in `(0, 1)`) plus the fixed points
/// `λ = −1, −‖a‖/2, 0, ‖a‖, 2‖a‖` and every eigenvalue of `a` below `‖a‖`.
pub fn q_lambda_clause_check(
    a: &SymMatrix,
    interior: &[f64],
    tol: &Tolerances,
) -> Result<QLambdaReport> {
    require_strictly_positive(a, tol)?;
    let norm = orderunit_norm(a)?;
    let one = SymMatrix::identity(a.dim());
    let mut r = QLambdaReport {
        interior_nonzero: true,
        ..Default::default()
    };

    for lambda in [-1.0, -norm / 2.0] {
        let q = q_lambda_unchecked(a, lambda, tol)?;
        r.negative_is_one = r.negative_is_one.max(q.matrix().distance(&one)?);
        r.probes += 1;
    }
    let q0 = q_lambda_unchecked(a, 0.0, tol)?;
    r.zero_is_carrier = q0.matrix().distance(carrier(a, tol)?.matrix())?;
    r.zero_nonzero = !q0.is_zero();
    for lambda in [norm, 2.0 * norm] {
        let q = q_lambda_unchecked(a, lambda, tol)?;
        r.beyond_norm_is_zero = r.beyond_norm_is_zero.max(q.matrix().frobenius_norm());
        r.probes += 1;
    }
    r.probes += 1;

    let cutoff = 2.0 * tol.eig * norm.max(1.0);
    let eigen = eig_sym(a, tol)?;
    let mut lambdas: Vec<f64> = interior.iter().map(|t| t * norm).collect();
    lambdas.extend(
        eigen
            .eigenvalues
            .iter()
            .copied()
            .filter(|&l| l > 0.0 && l < norm - cutoff),
    );
    lambdas.push(0.0);

    for lambda in lambdas {
        let q = q_lambda_unchecked(a, lambda, tol)?;
        let qm = q.matrix();
        let qa = qm.mul(a)?;
        r.commutation = r.commutation.max(qa.sub(&a.mul(qm)?)?.frobenius_norm());
        let qa = qa.symmetric_part();
        if lambda > 0.0 {
            r.interior_nonzero &= !q.is_zero();
            r.lower_order = r
                .lower_order
                .max(order_violation(&qa.sub(&qm.scale(lambda))?, tol)?);
            r.upper_order = r.upper_order.max(order_violation(&a.sub(&qa)?, tol)?);
        }
        let shifted = a.shift(-lambda);
        let perp = one.sub(qm)?;
        let below = perp.mul(&shifted)?.symmetric_part();
        let above = qm.mul(&shifted)?.symmetric_part();
        r.below_part = r.below_part.max(order_violation(&below.scale(-1.0), tol)?);
        r.above_part = r.above_part.max(order_violation(&above, tol)?);
        r.probes += 1;
    }
    Ok(r)
}
