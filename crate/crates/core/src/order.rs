//! Loewner order, order-unit norm and the Jordan structure of the
//! self-adjoint part.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{apply_spectral_fn, eig_sym, SymMatrix, Tolerances};

/// Outcome of comparing two elements in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderVerdict {
    /// `a ≤ b`
    pub leq: bool,
    /// `a ≥ b`
    pub geq: bool,
    /// Most negative eigenvalue of `b − a`.
    pub slack: f64,
}

impl OrderVerdict {
    pub fn comparable(&self) -> bool {
        self.leq || self.geq
    }
}

/// Minimum eigenvalue of `m` and whether `m ≥ 0` within the relative slack.
pub fn psd_check(m: &SymMatrix, tol: &Tolerances) -> Result<(bool, f64)> {
    let sys = eig_sym(m, tol)?;
    let min = sys.min_eigenvalue();
    let scale = sys.max_abs_eigenvalue().max(1.0);
    Ok((min >= -tol.psd * scale, min))
}

pub fn is_psd(m: &SymMatrix, tol: &Tolerances) -> Result<bool> {
    Ok(psd_check(m, tol)?.0)
}

/// `a ≤ b` within tolerance.
pub fn leq(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<bool> {
    is_psd(&b.sub(a)?, tol)
}

pub fn loewner_cmp(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<OrderVerdict> {
    let diff = b.sub(a)?;
    let sys = eig_sym(&diff, tol)?;
    let scale = sys.max_abs_eigenvalue().max(1.0);
    let slack = sys.min_eigenvalue();
    Ok(OrderVerdict {
        leq: slack >= -tol.psd * scale,
        geq: sys.max_eigenvalue() <= tol.psd * scale,
        slack,
    })
}

/// `‖a‖ = inf{λ > 0 : −λ ≤ a ≤ λ}`, the largest absolute eigenvalue.
pub fn orderunit_norm(a: &SymMatrix) -> Result<f64> {
    a.spectral_norm()
}

/// `a ⊙ b = ½(ab + ba)`
pub fn jordan_product(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    Ok(a.mul(b)?.symmetric_part())
}

/// `b ↦ aba`
pub fn quadratic_map(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    a.sandwich(b)
}

/// The Jordan-only form of the quadratic map, `a ⊙ c − a² ⊙ b` with
/// `c = 2(a ⊙ b)`.
pub fn quadratic_map_jordan(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    let c = jordan_product(a, b)?.scale(2.0);
    jordan_product(a, &c)?.sub(&jordan_product(&a.square(), b)?)
}

/// The unique positive square root of a positive element.
pub fn sqrt_psd(a: &SymMatrix, tol: &Tolerances) -> Result<SymMatrix> {
    let (ok, min) = psd_check(a, tol)?;
    if !ok {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    apply_spectral_fn(a, |x| x.max(0.0).sqrt(), tol)
}

/// `|a|`, `a⁺` and `a⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parts {
    pub abs: SymMatrix,
    pub pos: SymMatrix,
    pub neg: SymMatrix,
}

/// Absolute value `|a| = (a²)^{1/2}` and the parts `a^± = ½(|a| ± a)`.
///
/// `|a|` is evaluated from one eigendecomposition of `a` (the square root of
/// `a²` has the eigenvalues `|λᵢ|` on the same eigenvectors).
pub fn abs_and_parts(a: &SymMatrix, tol: &Tolerances) -> Result<Parts> {
    let abs = apply_spectral_fn(a, f64::abs, tol)?;
    let pos = abs.add(a)?.scale(0.5);
    let neg = abs.sub(a)?.scale(0.5);
    Ok(Parts { abs, pos, neg })
}

pub fn pos_part(a: &SymMatrix, tol: &Tolerances) -> Result<SymMatrix> {
    apply_spectral_fn(a, |x| x.max(0.0), tol)
}

/// Generalized infimum `a ⊓ b = ½(a + b − |a − b|)`. Defined for every pair;
/// it is a lower bound of both arguments.
pub fn gen_infimum(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<SymMatrix> {
    let abs = apply_spectral_fn(&a.sub(b)?, f64::abs, tol)?;
    Ok(a.add(b)?.sub(&abs)?.scale(0.5))
}

/// `a⁻¹`, available iff `ε ≤ |a|` for some `ε > 0`.
pub fn inverse(a: &SymMatrix, tol: &Tolerances) -> Result<SymMatrix> {
    let sys = eig_sym(a, tol)?;
    let min_abs = sys
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if min_abs <= sys.zero_cutoff(tol) {
        return Err(Error::NotInvertible { min_abs });
    }
    let inv: Vec<f64> = sys.eigenvalues.iter().map(|x| 1.0 / x).collect();
    Ok(sys.compose(&inv))
}

/// `‖ab − ba‖_F`
pub fn commutator_norm(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    Ok(a.mul(b)?.sub(&b.mul(a)?)?.frobenius_norm())
}

/// `aCb` within the relative tolerance `tol.recon · max(1, ‖a‖₂‖b‖₂)`.
pub fn commutes(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<bool> {
    let residual = commutator_norm(a, b)?;
    let scale = (a.spectral_norm()? * b.spectral_norm()?).max(1.0);
    Ok(residual <= tol.recon * scale)
}
