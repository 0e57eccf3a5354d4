//! Infima in `A`, non-antilattice witnesses, the explicit lower bound `k`
//! below two exchanged orthogonal projections, corner descent, and the
//! antilattice/factor suite.
//!
//! For `A = ⊕ᵢ Mₙᵢ(ℝ)^sa` the infimum `c ∧_A d` exists iff the block
//! components `cᵢ, dᵢ` are comparable in every block: each block is a factor
//! with a complete projection lattice, hence an antilattice, and infima in a
//! product of posets are taken componentwise. When the decision is negative a
//! falsifier is built constructively: a lower bound of `c, d` that is not
//! below the generalized infimum `c ⊓ d`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, SymMatrix, Tolerances};
use crate::order::{commutator_norm, commutes, gen_infimum, leq, loewner_cmp, psd_check};
use crate::projection::{is_orthogonal, orthocomplement, Projection, Symmetry};
use crate::sampling;
use crate::spectral::find_subprojection;
use crate::structure::{
    bicommutant_in, corner, is_factor, minimal_projections, AlgebraSpec, Element,
    LinearSubspaceBasis,
};

/// Coefficient of `p` in `d = αp + γs + βp^⊥`.
pub const P_COEFF: f64 = -5.0 / 4.0;
/// Coefficient of `p^⊥` in `d`.
pub const P_PERP_COEFF: f64 = -3.0 / 4.0;
/// Coefficient of `s` in `d`.
pub const S_COEFF: f64 = 1.0;
/// `k = 2s − P_COEFF² = 2s − 25/16`.
pub const K_SHIFT: f64 = P_COEFF * P_COEFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InfimumStatus {
    Exists,
    NotExists,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InfimumReason {
    /// One input lies below the other.
    Comparable,
    /// Not comparable, but comparable inside every block.
    CommutingBlockwiseComparable,
    /// Two projections that fail to commute.
    NoncommutingProjections,
    /// Some block holds an incomparable pair.
    BlockIncomparable,
    BudgetExhausted,
}

/// Decision about `c ∧_A d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfimumVerdict {
    pub status: InfimumStatus,
    pub reason: InfimumReason,
    /// The infimum, when it exists.
    pub value: Option<Element>,
    /// The generalized infimum `c ⊓ d`, the candidate defeated by `falsifier`.
    pub candidate: Option<Element>,
    /// A lower bound of both inputs that is not below `candidate`.
    pub falsifier: Option<Element>,
    /// Index of the block the falsifier was built in.
    pub block: Option<usize>,
}

impl InfimumVerdict {
    fn exists(value: Element, reason: InfimumReason) -> Self {
        InfimumVerdict {
            status: InfimumStatus::Exists,
            reason,
            value: Some(value),
            candidate: None,
            falsifier: None,
            block: None,
        }
    }

    pub fn is_exists(&self) -> bool {
        self.status == InfimumStatus::Exists
    }

    /// `Exists(0)` within `tol.recon`.
    pub fn is_exists_zero(&self, tol: &Tolerances) -> bool {
        self.value
            .as_ref()
            .is_some_and(|v| self.is_exists() && v.frobenius_norm() <= tol.recon)
    }
}

fn same_algebra(c: &Element, d: &Element) -> Result<()> {
    if c.algebra() != d.algebra() {
        return Err(Error::AlgebraMismatch);
    }
    Ok(())
}

fn as_projection(e: &Element, tol: &Tolerances) -> Option<Projection> {
    Projection::new(e.matrix(), tol).ok()
}

/// Decides whether `c ∧_A d` exists and computes it.
pub fn infimum_decide(c: &Element, d: &Element, tol: &Tolerances) -> Result<InfimumVerdict> {
    same_algebra(c, d)?;
    let whole = loewner_cmp(c.matrix(), d.matrix(), tol)?;
    if whole.leq {
        return Ok(InfimumVerdict::exists(c.clone(), InfimumReason::Comparable));
    }
    if whole.geq {
        return Ok(InfimumVerdict::exists(d.clone(), InfimumReason::Comparable));
    }

    let noncommuting_projections = match (as_projection(c, tol), as_projection(d, tol)) {
        (Some(p), Some(q)) => !commutes(p.matrix(), q.matrix(), tol)?,
        _ => false,
    };

    let algebra = c.algebra();
    let mut minima = Vec::with_capacity(algebra.blocks().len());
    let mut incomparable_block = None;
    for (i, (ci, di)) in c.blocks().into_iter().zip(d.blocks()).enumerate() {
        let v = loewner_cmp(&ci, &di, tol)?;
        if v.leq {
            minima.push(ci);
        } else if v.geq {
            minima.push(di);
        } else {
            incomparable_block = Some(i);
            break;
        }
    }

    match incomparable_block {
        None if !noncommuting_projections => Ok(InfimumVerdict::exists(
            Element::from_blocks(algebra, &minima)?,
            InfimumReason::CommutingBlockwiseComparable,
        )),
        None => Err(Error::InvariantViolation(
            "noncommuting projections are blockwise comparable".into(),
        )),
        Some(block) => {
            let reason = if noncommuting_projections {
                InfimumReason::NoncommutingProjections
            } else {
                InfimumReason::BlockIncomparable
            };
            let candidate = Element::from_blocks(
                algebra,
                &c.blocks()
                    .iter()
                    .zip(d.blocks())
                    .map(|(x, y)| gen_infimum(x, &y, tol))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            let falsifier = block_falsifier(c, d, &candidate, block, tol)?;
            Ok(InfimumVerdict {
                status: InfimumStatus::NotExists,
                reason,
                value: None,
                candidate: Some(candidate),
                falsifier: Some(falsifier),
                block: Some(block),
            })
        }
    }
}

/// Builds a lower bound of `c, d` not below `candidate` from an incomparable
/// block `i`, following the non-antilattice chain: the positive parts of
/// `cᵢ − dᵢ` give orthogonal subprojections `p, q`; a symmetry moves one
/// under the other; the corner of `p + tpt` supplies `k ≤ p, q` with `k ≰ 0`.
fn block_falsifier(
    c: &Element,
    d: &Element,
    candidate: &Element,
    block: usize,
    tol: &Tolerances,
) -> Result<Element> {
    let ci = c.block(block);
    let di = d.block(block);
    let gi = candidate.block(block);
    let a = ci.sub(&gi)?;
    let b = di.sub(&gi)?;
    let sub_a = find_subprojection(&a, tol)?;
    let sub_b = find_subprojection(&b, tol)?;
    let kappa = sub_a.lambda.min(sub_b.lambda);

    let local = AlgebraSpec::new(vec![ci.dim()])?;
    let (p, q) = (sub_a.projection, sub_b.projection);
    let swap = exchange_symmetry(&p, &q, &local, tol)?;
    let descent = match swap.direction {
        ExchangeDirection::PIntoQ => corner_descent(&local, &p, &q, &swap.symmetry, tol)?,
        ExchangeDirection::QIntoP => corner_descent(&local, &q, &p, &swap.symmetry, tol)?,
    };

    let mut blocks = candidate.blocks();
    blocks[block] = gi.add(&descent.k.scale(kappa))?;
    let falsifier = Element::from_blocks(c.algebra(), &blocks)?;

    let below_c = leq(falsifier.matrix(), c.matrix(), tol)?;
    let below_d = leq(falsifier.matrix(), d.matrix(), tol)?;
    let below_candidate = leq(falsifier.matrix(), candidate.matrix(), tol)?;
    if !below_c || !below_d || below_candidate {
        return Err(Error::InvariantViolation(format!(
            "falsifier check failed (≤c: {below_c}, ≤d: {below_d}, ≤candidate: {below_candidate})"
        )));
    }
    Ok(falsifier)
}

/// Checks the lower-bound property of a falsifier against its verdict.
pub fn falsifier_holds(
    c: &Element,
    d: &Element,
    verdict: &InfimumVerdict,
    tol: &Tolerances,
) -> Result<bool> {
    match (&verdict.falsifier, &verdict.candidate) {
        (Some(f), Some(g)) => Ok(leq(f.matrix(), c.matrix(), tol)?
            && leq(f.matrix(), d.matrix(), tol)?
            && !leq(f.matrix(), g.matrix(), tol)?),
        _ => Ok(false),
    }
}

/// Residuals for "`a ∧_A b = 0` forces `ab = ba = 0`".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductZeroReport {
    pub ab_residual: f64,
    pub ba_residual: f64,
    /// Largest eigenvalue of `a ⊓ b`, which must not be positive.
    pub gen_infimum_max_eigenvalue: f64,
    pub gen_infimum_below_zero: bool,
    pub pass: bool,
}

pub fn inf_zero_implies_product_zero_check(
    a: &Element,
    b: &Element,
    tol: &Tolerances,
) -> Result<ProductZeroReport> {
    let verdict = infimum_decide(a, b, tol)?;
    if !verdict.is_exists_zero(tol) {
        return Err(Error::PreconditionUnmet("a ∧ b is not 0".into()));
    }
    let ab_residual = a.matrix().mul(b.matrix())?.frobenius_norm();
    let ba_residual = b.matrix().mul(a.matrix())?.frobenius_norm();
    let g = gen_infimum(a.matrix(), b.matrix(), tol)?;
    let (below, _) = psd_check(&g.scale(-1.0), tol)?;
    let max = eig_sym(&g, tol)?.max_eigenvalue();
    Ok(ProductZeroReport {
        ab_residual,
        ba_residual,
        gen_infimum_max_eigenvalue: max,
        gen_infimum_below_zero: below,
        pass: ab_residual <= tol.recon && ba_residual <= tol.recon && below,
    })
}

/// "If `c = a ∧_A b` exists and commutes with `a` and `b`, then `aCb`."
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutingInfimumReport {
    pub infimum: Element,
    pub commutator_residual: f64,
    pub a_commutes_b: bool,
}

pub fn commuting_infimum_corollary_check(
    a: &Element,
    b: &Element,
    tol: &Tolerances,
) -> Result<CommutingInfimumReport> {
    let verdict = infimum_decide(a, b, tol)?;
    let c = match verdict.value {
        Some(c) if verdict.is_exists() => c,
        _ => return Err(Error::PreconditionUnmet("a ∧ b does not exist".into())),
    };
    if !commutes(c.matrix(), a.matrix(), tol)? || !commutes(c.matrix(), b.matrix(), tol)? {
        return Err(Error::PreconditionUnmet(
            "a ∧ b does not commute with both inputs".into(),
        ));
    }
    Ok(CommutingInfimumReport {
        commutator_residual: commutator_norm(a.matrix(), b.matrix())?,
        a_commutes_b: commutes(a.matrix(), b.matrix(), tol)?,
        infimum: c,
    })
}

/// Infimum of `a, b` inside a commutative subspace `v` closed under spectral
/// projections: `v` is the span of its minimal projections `eⱼ`, and the
/// infimum is `Σ min(αⱼ, βⱼ) eⱼ` for `a = Σ αⱼ eⱼ`, `b = Σ βⱼ eⱼ`.
pub fn commutative_infimum(
    v: &LinearSubspaceBasis,
    a: &Element,
    b: &Element,
    tol: &Tolerances,
) -> Result<Element> {
    if !v.is_commutative(tol)? {
        return Err(Error::PreconditionUnmet(
            "subspace is not commutative".into(),
        ));
    }
    for x in [a, b] {
        if !v.contains(x.matrix(), tol) {
            return Err(Error::PreconditionUnmet(
                "element outside the subspace".into(),
            ));
        }
    }
    let mut out = SymMatrix::zeros(a.matrix().dim());
    for atom in minimal_projections(v, tol)? {
        let atom = atom.matrix();
        let trace = atom.trace();
        let coef = |x: &Element| crate::linalg::dot(x.matrix().as_slice(), atom.as_slice()) / trace;
        out = out.add(&atom.scale(coef(a).min(coef(b))))?;
    }
    Element::new(v.algebra(), out, tol)
}

/// Clauses of the commuting-pair lemma evaluated in `V = CC({p, q})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutingPairReport {
    /// `‖p ∧_V q − p ∧ q‖_F`
    pub meet_residual: f64,
    pub p1_is_projection: bool,
    pub q1_is_projection: bool,
    /// `‖p₁ ∧_V q₁‖_F`
    pub residual_infimum_norm: f64,
    /// `‖p₁q₁‖_F`
    pub p1q1_residual: f64,
    pub p_commutes_q: bool,
}

impl CommutingPairReport {
    pub fn pass(&self, tol: &Tolerances) -> bool {
        self.meet_residual <= tol.recon
            && self.p1_is_projection
            && self.q1_is_projection
            && self.residual_infimum_norm <= tol.recon
            && self.p1q1_residual <= tol.recon
            && self.p_commutes_q
    }
}

pub fn commuting_pair_check(
    p: &Element,
    q: &Element,
    tol: &Tolerances,
) -> Result<CommutingPairReport> {
    same_algebra(p, q)?;
    let (pp, qp) = match (as_projection(p, tol), as_projection(q, tol)) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(Error::PreconditionUnmet(
                "inputs must be projections".into(),
            ))
        }
    };
    if !commutes(p.matrix(), q.matrix(), tol)? {
        return Err(Error::PreconditionUnmet(
            "projections do not commute".into(),
        ));
    }
    let v = bicommutant_in(p.algebra(), &[p.clone(), q.clone()], tol)?;
    let g = commutative_infimum(&v, p, q, tol)?;
    let meet = crate::projection::proj_meet(&pp, &qp, tol)?;
    let p1 = p.sub(&g)?;
    let q1 = q.sub(&g)?;
    let r = commutative_infimum(&v, &p1, &q1, tol)?;
    Ok(CommutingPairReport {
        meet_residual: g.matrix().distance(meet.matrix())?,
        p1_is_projection: as_projection(&p1, tol).is_some(),
        q1_is_projection: as_projection(&q1, tol).is_some(),
        residual_infimum_norm: r.frobenius_norm(),
        p1q1_residual: p1.matrix().mul(q1.matrix())?.frobenius_norm(),
        p_commutes_q: commutes(p.matrix(), q.matrix(), tol)?,
    })
}

/// Output of the non-antilattice witness construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessPipeline {
    pub infimum: Element,
    /// `c − c ∧ d`
    pub a: Element,
    /// `d − c ∧ d`
    pub b: Element,
    pub lambda: f64,
    pub mu: f64,
    pub p: Element,
    pub q: Element,
    pub pq_residual: f64,
}

/// From an incomparable pair with an infimum, produces nonzero orthogonal
/// projections `p, q` with `p ∧_A q = pq = qp = 0`.
pub fn witness_pipeline(c: &Element, d: &Element, tol: &Tolerances) -> Result<WitnessPipeline> {
    same_algebra(c, d)?;
    let verdict = infimum_decide(c, d, tol)?;
    let infimum = match verdict.value {
        Some(v) if verdict.is_exists() => v,
        _ => return Err(Error::NotAWitnessPair("c ∧ d does not exist".into())),
    };
    if loewner_cmp(c.matrix(), d.matrix(), tol)?.comparable() {
        return Err(Error::NotAWitnessPair("c and d are comparable".into()));
    }
    let a = c.sub(&infimum)?;
    let b = d.sub(&infimum)?;
    let sa = find_subprojection(a.matrix(), tol)?;
    let sb = find_subprojection(b.matrix(), tol)?;
    let algebra = c.algebra();
    let p = Element::new(algebra, sa.projection.matrix().clone(), tol)?;
    let q = Element::new(algebra, sb.projection.matrix().clone(), tol)?;

    let pq_residual = p.matrix().mul(q.matrix())?.frobenius_norm();
    if pq_residual > tol.recon {
        return Err(Error::InvariantViolation(format!(
            "pq ≠ 0 (residual {pq_residual:e})"
        )));
    }
    if !infimum_decide(&p, &q, tol)?.is_exists_zero(tol) {
        return Err(Error::InvariantViolation("p ∧ q is not 0".into()));
    }
    Ok(WitnessPipeline {
        infimum,
        a,
        b,
        lambda: sa.lambda,
        mu: sb.lambda,
        p,
        q,
        pq_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExchangeDirection {
    /// `tpt ≤ q`
    PIntoQ,
    /// `tqt ≤ p`
    QIntoP,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeSymmetry {
    pub symmetry: Symmetry,
    pub direction: ExchangeDirection,
}

/// In a factor `Mₙ(ℝ)^sa`, a symmetry `t ≠ ±1` with `tpt ≤ q` or `tqt ≤ p`
/// for nonzero orthogonal `p, q`.
///
/// With `r = min(rank p, rank q)`, `t` swaps `r` orthonormal vectors of the
/// smaller range with `r` orthonormal vectors of the larger one and fixes the
/// orthogonal complement of their span.
pub fn exchange_symmetry(
    p: &Projection,
    q: &Projection,
    algebra: &AlgebraSpec,
    tol: &Tolerances,
) -> Result<ExchangeSymmetry> {
    if !algebra.is_single_block() {
        return Err(Error::NotFactor);
    }
    if p.dim() != algebra.total_dim() || q.dim() != algebra.total_dim() {
        return Err(Error::DimensionMismatch {
            left: algebra.total_dim(),
            right: if p.dim() != algebra.total_dim() {
                p.dim()
            } else {
                q.dim()
            },
        });
    }
    if p.is_zero() || q.is_zero() {
        return Err(Error::ZeroProjection);
    }
    if !is_orthogonal(p, q, tol)? {
        return Err(Error::NotOrthogonal);
    }
    let (small, large, direction) = if p.rank() <= q.rank() {
        (p, q, ExchangeDirection::PIntoQ)
    } else {
        (q, p, ExchangeDirection::QIntoP)
    };
    let u = small.range(tol)?.columns;
    let w = large.range(tol)?.columns;
    let n = algebra.total_dim();
    let mut t = SymMatrix::identity(n);
    for (ui, wi) in u.iter().zip(&w) {
        let mut swap = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                swap[a * n + b] = ui[a] * wi[b] + wi[a] * ui[b] - ui[a] * ui[b] - wi[a] * wi[b];
            }
        }
        t = t.add(&SymMatrix::from_row_major(n, swap)?)?;
    }
    let symmetry = Symmetry::new(&t, tol)?;
    if symmetry.is_trivial(tol) {
        return Err(Error::InvariantViolation("exchange symmetry is ±1".into()));
    }
    let moved = symmetry.matrix().sandwich(small.matrix())?;
    if !leq(&moved, large.matrix(), tol)? {
        return Err(Error::InvariantViolation(
            "exchanged projection is not below its target".into(),
        ));
    }
    Ok(ExchangeSymmetry {
        symmetry,
        direction,
    })
}

/// Result of the explicit construction `k = 2s − 25/16`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistsK {
    pub k: SymMatrix,
    /// `d = αp + γs + βp^⊥`
    pub d: SymMatrix,
    pub p_coeff: f64,
    pub p_perp_coeff: f64,
    pub s_coeff: f64,
    /// Least eigenvalue of `p − k`.
    pub p_minus_k_min_eigenvalue: f64,
    /// Least eigenvalue of `p^⊥ − k`.
    pub p_perp_minus_k_min_eigenvalue: f64,
    pub k_max_eigenvalue: f64,
    /// `‖d² − (p − k)‖_F`
    pub identity_residual: f64,
    /// `α² − β² = 1`, `(α + β)γ = −2`, `β² + γ² = 25/16`, exactly.
    pub scalar_identities_exact: bool,
}

pub fn scalar_identities_exact() -> bool {
    P_COEFF * P_COEFF - P_PERP_COEFF * P_PERP_COEFF == 1.0
        && (P_COEFF + P_PERP_COEFF) * S_COEFF == -2.0
        && P_PERP_COEFF * P_PERP_COEFF + S_COEFF * S_COEFF == 25.0 / 16.0
}

/// Given a symmetry `s` exchanging `p` and `p^⊥` (`p ≠ 0, 1`), returns
/// `k = 2s − 25/16` with `k ≤ p`, `k ≤ p^⊥` and `k ≰ 0`.
pub fn existsk_construct(p: &Projection, s: &Symmetry, tol: &Tolerances) -> Result<ExistsK> {
    if p.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            left: p.dim(),
            right: s.dim(),
        });
    }
    if p.is_zero() || p.is_one() {
        return Err(Error::TrivialProjection);
    }
    let perp = orthocomplement(p);
    let residual = s.matrix().sandwich(p.matrix())?.distance(perp.matrix())?;
    if residual > tol.recon {
        return Err(Error::NotExchanging { residual });
    }

    let k = s.matrix().scale(2.0).shift(-K_SHIFT);
    let d = p
        .matrix()
        .scale(P_COEFF)
        .add(&s.matrix().scale(S_COEFF))?
        .add(&perp.matrix().scale(P_PERP_COEFF))?;
    let p_minus_k = p.matrix().sub(&k)?;
    let perp_minus_k = perp.matrix().sub(&k)?;
    let (p_ok, p_min) = psd_check(&p_minus_k, tol)?;
    let (perp_ok, perp_min) = psd_check(&perp_minus_k, tol)?;
    let k_max = eig_sym(&k, tol)?.max_eigenvalue();
    let identity_residual = d.square().distance(&p_minus_k)?;
    let exact = scalar_identities_exact();

    let out = ExistsK {
        k,
        d,
        p_coeff: P_COEFF,
        p_perp_coeff: P_PERP_COEFF,
        s_coeff: S_COEFF,
        p_minus_k_min_eigenvalue: p_min,
        p_perp_minus_k_min_eigenvalue: perp_min,
        k_max_eigenvalue: k_max,
        identity_residual,
        scalar_identities_exact: exact,
    };
    if !(p_ok && perp_ok && k_max > tol.psd && identity_residual <= tol.recon && exact) {
        return Err(Error::InvariantViolation(format!(
            "k construction failed its checks: {out:?}"
        )));
    }
    Ok(out)
}

/// The descent into the corner `uAu`, `u = p + tpt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerDescent {
    pub u: Projection,
    pub tpt: Projection,
    /// `s = tp + pt`
    pub s: SymMatrix,
    /// `‖s² − u‖_F`
    pub s_squared_residual: f64,
    /// `‖sps − tpt‖_F`
    pub sps_residual: f64,
    pub corner_blocks: Vec<usize>,
    /// `k` in parent coordinates.
    pub k: SymMatrix,
    pub k_max_eigenvalue: f64,
    pub k_below_p: bool,
    pub k_below_tpt: bool,
}

/// Replays the refutation of `p ∧ q = 0` under the exchange hypothesis:
/// builds `u = p + tpt` and `s = tp + pt`, checks `s² = u` and `sps = tpt`,
/// then runs the `k` construction inside `uAu`, where `s` is a symmetry and
/// `tpt` is the orthocomplement of `p`.
pub fn corner_descent(
    algebra: &AlgebraSpec,
    p: &Projection,
    q: &Projection,
    t: &Symmetry,
    tol: &Tolerances,
) -> Result<CornerDescent> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::HypothesisViolation(
            "p and q must be nonzero (tpt = 0)".into(),
        ));
    }
    if !is_orthogonal(p, q, tol)? {
        return Err(Error::HypothesisViolation(
            "p and q are not orthogonal".into(),
        ));
    }
    let tpt_m = t.matrix().sandwich(p.matrix())?;
    if !leq(&tpt_m, q.matrix(), tol)? {
        return Err(Error::HypothesisViolation("tpt is not below q".into()));
    }
    let tpt =
        Projection::new(&tpt_m, tol).map_err(|e| Error::HypothesisViolation(e.to_string()))?;
    let u = Projection::new(&p.matrix().add(tpt.matrix())?, tol)
        .map_err(|e| Error::HypothesisViolation(e.to_string()))?;

    let tp = t.matrix().mul(p.matrix())?;
    let s = tp.symmetric_part().scale(2.0);
    let s_squared_residual = s.square().distance(u.matrix())?;
    let sps_residual = s.sandwich(p.matrix())?.distance(tpt.matrix())?;
    if s_squared_residual > tol.recon || sps_residual > tol.recon {
        return Err(Error::InvariantViolation(format!(
            "partial symmetry checks failed (s² residual {s_squared_residual:e}, sps residual {sps_residual:e})"
        )));
    }

    let c = corner(algebra, &u, tol)?;
    let p_local = Projection::new(&c.compress(p.matrix())?, tol)?;
    let s_local = Symmetry::new(&c.compress(&s)?, tol)?;
    let local = existsk_construct(&p_local, &s_local, tol)?;
    let k = c.lift(&local.k)?;
    let k_below_p = leq(&k, p.matrix(), tol)?;
    let k_below_tpt = leq(&k, tpt.matrix(), tol)?;
    let k_max_eigenvalue = eig_sym(&k, tol)?.max_eigenvalue();
    if !k_below_p || !k_below_tpt || k_max_eigenvalue <= tol.psd {
        return Err(Error::InvariantViolation(
            "lifted k fails its bounds".into(),
        ));
    }
    Ok(CornerDescent {
        u,
        tpt,
        s,
        s_squared_residual,
        sps_residual,
        corner_blocks: c.algebra.blocks().to_vec(),
        k,
        k_max_eigenvalue,
        k_below_p,
        k_below_tpt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AntilatticeVerdict {
    Antilattice,
    NotAntilattice,
}

/// An incomparable pair together with its infimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub c: Element,
    pub d: Element,
    pub infimum: Element,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FalsificationStats {
    pub pairs_tested: usize,
    pub incomparable_pairs: usize,
    pub exists_verdicts: usize,
    /// `Exists` verdicts on incomparable inputs; nonzero refutes the antilattice property.
    pub exists_on_incomparable: usize,
    pub not_exists_verdicts: usize,
    pub falsifiers_verified: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ExchangeStats {
    pub pairs_tested: usize,
    pub passed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntilatticeReport {
    pub algebra: AlgebraSpec,
    pub is_factor: bool,
    pub center_dim: usize,
    pub verdict: AntilatticeVerdict,
    pub counterexample: Option<Counterexample>,
    pub trials: usize,
    pub seed: u64,
    pub falsification: FalsificationStats,
    pub exchange: ExchangeStats,
}

impl AntilatticeReport {
    /// The verdict agrees with the factor test.
    pub fn consistent(&self) -> bool {
        (self.verdict == AntilatticeVerdict::Antilattice) == self.is_factor
    }
}

/// Stream offset separating exchange trials from infimum trials.
const EXCHANGE_STREAM: u64 = 1 << 32;
const RESAMPLE_LIMIT: usize = 16;

struct TrialOutcome {
    stats: FalsificationStats,
    counterexample: Option<Counterexample>,
}

fn infimum_trial(
    algebra: &AlgebraSpec,
    seed: u64,
    index: u64,
    tol: &Tolerances,
) -> Result<TrialOutcome> {
    let mut rng = sampling::trial_rng(seed, index);
    let base = sampling::element(&mut rng, algebra);
    let perturbation = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<Element> {
        let blocks: Vec<SymMatrix> = algebra
            .blocks()
            .iter()
            .map(|&n| sampling::traceless(rng, n))
            .collect();
        Element::from_blocks(algebra, &blocks)
    };
    let mut pair = None;
    for _ in 0..RESAMPLE_LIMIT {
        let c = base.add(&perturbation(&mut rng)?)?;
        let d = base.add(&perturbation(&mut rng)?)?;
        let comparable = loewner_cmp(c.matrix(), d.matrix(), tol)?.comparable();
        pair = Some((c, d, comparable));
        if !comparable {
            break;
        }
    }
    let (c, d, comparable) = pair.expect("at least one sample");

    let mut stats = FalsificationStats {
        pairs_tested: 1,
        incomparable_pairs: usize::from(!comparable),
        ..Default::default()
    };
    let verdict = infimum_decide(&c, &d, tol)?;
    let mut counterexample = None;
    match verdict.status {
        InfimumStatus::Exists => {
            stats.exists_verdicts = 1;
            if !comparable {
                stats.exists_on_incomparable = 1;
                counterexample = Some(Counterexample {
                    c: c.clone(),
                    d: d.clone(),
                    infimum: verdict.value.clone().expect("exists carries a value"),
                });
            }
        }
        InfimumStatus::NotExists => {
            stats.not_exists_verdicts = 1;
            if falsifier_holds(&c, &d, &verdict, tol)? {
                stats.falsifiers_verified = 1;
            }
        }
        InfimumStatus::Unknown => {}
    }
    Ok(TrialOutcome {
        stats,
        counterexample,
    })
}

fn exchange_trial(algebra: &AlgebraSpec, seed: u64, index: u64, tol: &Tolerances) -> Result<bool> {
    use rand::Rng;
    let n = algebra.total_dim();
    let mut rng = sampling::trial_rng(seed, EXCHANGE_STREAM + index);
    let rank_p = rng.random_range(1..n);
    let rank_q = rng.random_range(1..=n - rank_p);
    let vectors = sampling::orthonormal(&mut rng, n, rank_p + rank_q);
    let p = Projection::from_basis(&crate::linalg::SubspaceBasis {
        ambient_dim: n,
        columns: vectors[..rank_p].to_vec(),
    });
    let q = Projection::from_basis(&crate::linalg::SubspaceBasis {
        ambient_dim: n,
        columns: vectors[rank_p..].to_vec(),
    });
    let swap = exchange_symmetry(&p, &q, algebra, tol)?;
    let t = swap.symmetry.matrix();
    let square_ok = t.square().distance(&SymMatrix::identity(n))? <= tol.recon;
    let moved_ok = match swap.direction {
        ExchangeDirection::PIntoQ => leq(&t.sandwich(p.matrix())?, q.matrix(), tol)?,
        ExchangeDirection::QIntoP => leq(&t.sandwich(q.matrix())?, p.matrix(), tol)?,
    };
    Ok(square_ok && moved_ok && !swap.symmetry.is_trivial(tol))
}

/// Tests the antilattice property of `A` against the factor test.
///
/// A non-factor yields the counterexample `(h, h^⊥)` for a central projection
/// `h ∉ {0, 1}`, whose infimum is `0`. A factor is probed with `trials`
/// random incomparable pairs (every `Exists` verdict on an incomparable pair
/// would be a counterexample) and, when `n ≥ 2`, with `trials` random
/// orthogonal projection pairs fed to [`exchange_symmetry`]. Trial `i` draws
/// from the stream `(seed, i)`, so results do not depend on scheduling.
pub fn antilattice_suite(
    algebra: &AlgebraSpec,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<AntilatticeReport> {
    if trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    let factor = is_factor(algebra, tol)?;
    let mut report = AntilatticeReport {
        algebra: algebra.clone(),
        is_factor: factor.is_factor,
        center_dim: factor.center_dim,
        verdict: AntilatticeVerdict::Antilattice,
        counterexample: None,
        trials,
        seed,
        falsification: FalsificationStats::default(),
        exchange: ExchangeStats::default(),
    };

    if let Some(h) = factor.witness {
        let h_perp = algebra.unit().sub(&h)?;
        let verdict = infimum_decide(&h, &h_perp, tol)?;
        let incomparable = !loewner_cmp(h.matrix(), h_perp.matrix(), tol)?.comparable();
        if !(verdict.is_exists_zero(tol) && incomparable) {
            return Err(Error::InvariantViolation(
                "central projection pair failed to produce a counterexample".into(),
            ));
        }
        report.verdict = AntilatticeVerdict::NotAntilattice;
        report.counterexample = Some(Counterexample {
            c: h,
            d: h_perp,
            infimum: verdict.value.expect("exists carries a value"),
        });
        return Ok(report);
    }

    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|i| infimum_trial(algebra, seed, i, tol))
        .collect::<Result<_>>()?;
    for outcome in outcomes {
        let s = outcome.stats;
        let f = &mut report.falsification;
        f.pairs_tested += s.pairs_tested;
        f.incomparable_pairs += s.incomparable_pairs;
        f.exists_verdicts += s.exists_verdicts;
        f.exists_on_incomparable += s.exists_on_incomparable;
        f.not_exists_verdicts += s.not_exists_verdicts;
        f.falsifiers_verified += s.falsifiers_verified;
        if report.counterexample.is_none() {
            report.counterexample = outcome.counterexample;
        }
    }
    if report.counterexample.is_some() {
        report.verdict = AntilatticeVerdict::NotAntilattice;
    }

    if algebra.total_dim() >= 2 {
        let results: Vec<bool> = (0..trials as u64)
            .into_par_iter()
            .map(|i| exchange_trial(algebra, seed, i, tol))
            .collect::<Result<_>>()?;
        report.exchange = ExchangeStats {
            pairs_tested: results.len(),
            passed: results.iter().filter(|&&ok| ok).count(),
        };
    }
    Ok(report)
}
