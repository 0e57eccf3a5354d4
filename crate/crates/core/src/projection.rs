//! Projections, effects, symmetries and the orthomodular lattice of
//! projections.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_sym, range_basis, subspace_intersect, SubspaceBasis, SymMatrix, Tolerances,
};
use crate::order::{is_psd, leq, psd_check};

/// An idempotent `p = p²`.
///
/// Construction snaps eigenvalues within `tol.eig` of 0 or 1 and rebuilds the
/// matrix as the exact projector onto the unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: SymMatrix,
    rank: usize,
}

impl Serialize for Projection {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl Projection {
    pub fn new(m: &SymMatrix, tol: &Tolerances) -> Result<Self> {
        let sys = eig_sym(m, tol)?;
        let mut columns = Vec::new();
        for (l, v) in sys.eigenvalues.iter().zip(&sys.eigenvectors) {
            if (l - 1.0).abs() <= tol.eig {
                columns.push(v.clone());
            } else if l.abs() > tol.eig {
                return Err(Error::NotProjection(format!(
                    "eigenvalue {l} is neither 0 nor 1"
                )));
            }
        }
        Ok(Self::from_basis(&SubspaceBasis {
            ambient_dim: m.dim(),
            columns,
        }))
    }

    /// Orthogonal projector onto the span of an orthonormal basis.
    pub fn from_basis(basis: &SubspaceBasis) -> Self {
        Projection {
            matrix: basis.projector(),
            rank: basis.dim(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Projection {
            matrix: SymMatrix::zeros(dim),
            rank: 0,
        }
    }

    pub fn one(dim: usize) -> Self {
        Projection {
            matrix: SymMatrix::identity(dim),
            rank: dim,
        }
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    pub fn is_one(&self) -> bool {
        self.rank == self.dim()
    }

    /// Orthonormal basis of the range.
    pub fn range(&self, tol: &Tolerances) -> Result<SubspaceBasis> {
        range_basis(&self.matrix, tol)
    }

    /// `‖p² − p‖_F`
    pub fn idempotency_residual(&self) -> f64 {
        self.matrix
            .square()
            .distance(&self.matrix)
            .unwrap_or(f64::INFINITY)
    }
}

/// An element with `0 ≤ e ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    matrix: SymMatrix,
}

impl Effect {
    pub fn new(m: &SymMatrix, tol: &Tolerances) -> Result<Self> {
        let (lower, min) = psd_check(m, tol)?;
        let (upper, _) = psd_check(&SymMatrix::identity(m.dim()).sub(m)?, tol)?;
        if !lower || !upper {
            return Err(Error::NotEffect(format!(
                "spectrum not inside [0,1] (min eigenvalue {min})"
            )));
        }
        Ok(Effect { matrix: m.clone() })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }
}

impl From<Projection> for Effect {
    fn from(p: Projection) -> Self {
        Effect { matrix: p.matrix }
    }
}

/// An element with `s² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetry {
    matrix: SymMatrix,
}

impl Symmetry {
    pub fn new(m: &SymMatrix, tol: &Tolerances) -> Result<Self> {
        let residual = m.square().distance(&SymMatrix::identity(m.dim()))?;
        if residual > tol.recon {
            return Err(Error::NotSymmetry(format!("‖s² − 1‖_F = {residual:e}")));
        }
        Ok(Symmetry { matrix: m.clone() })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// True when `s = 1` or `s = −1` within `tol.recon`.
    pub fn is_trivial(&self, tol: &Tolerances) -> bool {
        let one = SymMatrix::identity(self.dim());
        self.matrix.distance(&one).unwrap_or(f64::INFINITY) <= tol.recon
            || self
                .matrix
                .distance(&one.scale(-1.0))
                .unwrap_or(f64::INFINITY)
                <= tol.recon
    }
}

/// An element with `t² = p` for a projection `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSymmetry {
    matrix: SymMatrix,
    support: Projection,
}

impl PartialSymmetry {
    pub fn new(m: &SymMatrix, tol: &Tolerances) -> Result<Self> {
        let support = Projection::new(&m.square(), tol)?;
        let residual = m.square().distance(support.matrix())?;
        if residual > tol.recon {
            return Err(Error::NotSymmetry(format!("‖t² − p‖_F = {residual:e}")));
        }
        Ok(PartialSymmetry {
            matrix: m.clone(),
            support,
        })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn support(&self) -> &Projection {
        &self.support
    }
}

/// The carrier `a°`: the projector onto the range of `a`.
pub fn carrier(a: &SymMatrix, tol: &Tolerances) -> Result<Projection> {
    Ok(Projection::from_basis(&range_basis(a, tol)?))
}

fn check_same_dim(p: &Projection, q: &Projection) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    Ok(())
}

/// `p ∧ q`: the projector onto `Ran p ∩ Ran q`.
pub fn proj_meet(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<Projection> {
    check_same_dim(p, q)?;
    let basis = subspace_intersect(&p.range(tol)?, &q.range(tol)?, tol)?;
    Ok(Projection::from_basis(&basis))
}

/// `p ∨ q = (p^⊥ ∧ q^⊥)^⊥`
pub fn proj_join(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<Projection> {
    check_same_dim(p, q)?;
    let meet = proj_meet(&orthocomplement(p), &orthocomplement(q), tol)?;
    Ok(orthocomplement(&meet))
}

/// `p^⊥ = 1 − p`
pub fn orthocomplement(p: &Projection) -> Projection {
    let dim = p.dim();
    Projection {
        matrix: SymMatrix::identity(dim)
            .sub(&p.matrix)
            .expect("same dimension"),
        rank: dim - p.rank,
    }
}

/// `p ⊥ q` iff `pq = 0`.
pub fn is_orthogonal(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<bool> {
    check_same_dim(p, q)?;
    Ok(p.matrix.mul(&q.matrix)?.frobenius_norm() <= tol.recon)
}

/// `p ≤ q` in the projection order.
pub fn proj_leq(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<bool> {
    check_same_dim(p, q)?;
    leq(&p.matrix, &q.matrix, tol)
}

/// `s = 2p − 1`
pub fn symmetry_from_projection(p: &Projection, tol: &Tolerances) -> Result<Symmetry> {
    let s = p.matrix.scale(2.0).shift(-1.0);
    Symmetry::new(&s, tol).map_err(|e| Error::InvariantViolation(e.to_string()))
}

/// `p = ½(s + 1)`
pub fn projection_from_symmetry(s: &Symmetry, tol: &Tolerances) -> Result<Projection> {
    let p = s.matrix.shift(1.0).scale(0.5);
    Projection::new(&p, tol).map_err(|e| Error::InvariantViolation(e.to_string()))
}

/// Either side of the correspondence `s ↔ p`.
#[derive(Debug, Clone, PartialEq)]
pub enum SymOrProj {
    Symmetry(Symmetry),
    Projection(Projection),
}

pub fn symmetry_projection_bijection(x: &SymOrProj, tol: &Tolerances) -> Result<SymOrProj> {
    match x {
        SymOrProj::Projection(p) => symmetry_from_projection(p, tol).map(SymOrProj::Symmetry),
        SymOrProj::Symmetry(s) => projection_from_symmetry(s, tol).map(SymOrProj::Projection),
    }
}

/// Something that exchanges elements by conjugation.
#[derive(Debug, Clone, Copy)]
pub enum Exchanger<'a> {
    Symmetry(&'a Symmetry),
    Partial(&'a PartialSymmetry),
}

/// `tat`. For a partial symmetry, `a` must live in the support corner.
pub fn exchange(t: Exchanger<'_>, a: &SymMatrix, tol: &Tolerances) -> Result<SymMatrix> {
    match t {
        Exchanger::Symmetry(s) => s.matrix.sandwich(a),
        Exchanger::Partial(t) => {
            let u = t.support.matrix();
            let compressed = u.sandwich(a)?;
            if compressed.distance(a)? > tol.recon * a.frobenius_norm().max(1.0) {
                return Err(Error::SupportViolation);
            }
            t.matrix.sandwich(a)
        }
    }
}

/// The two clusters `e ≤ p ⇔ e = ep ⇔ e = pe` and `p ≤ e ⇔ p = pe ⇔ p = ep`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectOrderReport {
    pub e_leq_p: bool,
    pub e_eq_ep: bool,
    pub e_eq_pe: bool,
    pub p_leq_e: bool,
    pub p_eq_pe: bool,
    pub p_eq_ep: bool,
}

impl EffectOrderReport {
    pub fn first_cluster_consistent(&self) -> bool {
        self.e_leq_p == self.e_eq_ep && self.e_eq_ep == self.e_eq_pe
    }

    pub fn second_cluster_consistent(&self) -> bool {
        self.p_leq_e == self.p_eq_pe && self.p_eq_pe == self.p_eq_ep
    }

    pub fn consistent(&self) -> bool {
        self.first_cluster_consistent() && self.second_cluster_consistent()
    }
}

pub fn effect_proj_order_check(
    e: &Effect,
    p: &Projection,
    tol: &Tolerances,
) -> Result<EffectOrderReport> {
    let em = e.matrix();
    let pm = p.matrix();
    let ep = em.mul(pm)?;
    let pe = pm.mul(em)?;
    let close = |x: &crate::linalg::Matrix, y: &SymMatrix| -> bool {
        x.sub(&y.clone().into_matrix())
            .map(|d| d.frobenius_norm() <= tol.recon)
            .unwrap_or(false)
    };
    let report = EffectOrderReport {
        e_leq_p: leq(em, pm, tol)?,
        e_eq_ep: close(&ep, em),
        e_eq_pe: close(&pe, em),
        p_leq_e: leq(pm, em, tol)?,
        p_eq_pe: close(&pe, pm),
        p_eq_ep: close(&ep, pm),
    };
    if !report.consistent() {
        return Err(Error::InvariantViolation(format!(
            "effect/projection order clusters disagree: {report:?}"
        )));
    }
    Ok(report)
}

/// `e ≤ e°` for an effect, the defining bound of the carrier on `E`.
pub fn effect_below_carrier(e: &Effect, tol: &Tolerances) -> Result<bool> {
    let c = carrier(e.matrix(), tol)?;
    is_psd(&c.matrix().sub(e.matrix())?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn m(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn proj(rows: &[&[f64]]) -> Projection {
        Projection::new(&m(rows), &tol()).unwrap()
    }

    fn diag_proj(d: &[f64]) -> Projection {
        Projection::new(&SymMatrix::from_diag(d), &tol()).unwrap()
    }

    fn half() -> Projection {
        proj(&[&[0.5, 0.5], &[0.5, 0.5]])
    }

    #[test]
    fn projection_snaps_and_rejects() {
        let p = Projection::new(&SymMatrix::from_diag(&[1.0 + 1e-12, 1e-12, 1.0]), &tol()).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.matrix(), &SymMatrix::from_diag(&[1.0, 0.0, 1.0]));
        assert!(matches!(
            Projection::new(&SymMatrix::from_diag(&[0.5, 1.0]), &tol()),
            Err(Error::NotProjection(_))
        ));
    }

    #[test]
    fn carrier_examples() {
        assert_eq!(
            carrier(&SymMatrix::identity(3), &tol()).unwrap().matrix(),
            &SymMatrix::identity(3)
        );
        let c = carrier(&SymMatrix::from_diag(&[0.0, 3.0, -2.0]), &tol()).unwrap();
        assert_eq!(c.matrix(), &SymMatrix::from_diag(&[0.0, 1.0, 1.0]));
        assert!(carrier(&SymMatrix::zeros(2), &tol()).unwrap().is_zero());
    }

    #[test]
    fn carrier_absorbs() {
        let a = m(&[&[2.0, 1.0, 0.0], &[1.0, 0.5, 0.0], &[0.0, 0.0, 0.0]]);
        let c = carrier(&a, &tol()).unwrap();
        let ac = a.mul(c.matrix()).unwrap();
        assert!(ac.sub(&a.clone().into_matrix()).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn effect_below_its_carrier() {
        let e = Effect::new(
            &m(&[&[0.5, 0.2, 0.0], &[0.2, 0.3, 0.0], &[0.0, 0.0, 0.0]]),
            &tol(),
        )
        .unwrap();
        assert!(effect_below_carrier(&e, &tol()).unwrap());
        assert!(Effect::new(&SymMatrix::from_diag(&[1.5, 0.0]), &tol()).is_err());
        assert!(Effect::new(&SymMatrix::from_diag(&[-0.5, 0.0]), &tol()).is_err());
    }

    #[test]
    fn meet_examples() {
        let p = half();
        assert!(
            proj_meet(&p, &p, &tol())
                .unwrap()
                .matrix()
                .distance(p.matrix())
                .unwrap()
                < 1e-12
        );

        let r = proj_meet(
            &diag_proj(&[1.0, 1.0, 0.0]),
            &diag_proj(&[0.0, 1.0, 1.0]),
            &tol(),
        )
        .unwrap();
        assert!(
            r.matrix()
                .distance(&SymMatrix::from_diag(&[0.0, 1.0, 0.0]))
                .unwrap()
                < 1e-12
        );

        assert!(proj_meet(&diag_proj(&[1.0, 0.0]), &half(), &tol())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn meet_matches_product_when_commuting() {
        let p = diag_proj(&[1.0, 1.0, 0.0, 1.0]);
        let q = diag_proj(&[0.0, 1.0, 1.0, 1.0]);
        let meet = proj_meet(&p, &q, &tol()).unwrap();
        let product = p.matrix().mul(q.matrix()).unwrap().symmetric_part();
        assert!(meet.matrix().distance(&product).unwrap() < 1e-12);
    }

    #[test]
    fn join_examples() {
        let p = half();
        let zero = Projection::zero(2);
        assert!(
            proj_join(&p, &zero, &tol())
                .unwrap()
                .matrix()
                .distance(p.matrix())
                .unwrap()
                < 1e-12
        );
        let j = proj_join(&diag_proj(&[1.0, 0.0]), &diag_proj(&[0.0, 1.0]), &tol()).unwrap();
        assert!(j.is_one());
        let j = proj_join(&diag_proj(&[1.0, 0.0]), &half(), &tol()).unwrap();
        assert!(j.matrix().distance(&SymMatrix::identity(2)).unwrap() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Projection::one(2);
        let b = Projection::one(3);
        assert!(matches!(
            proj_meet(&a, &b, &tol()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            proj_join(&a, &b, &tol()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            is_orthogonal(&a, &b, &tol()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn orthocomplement_examples() {
        assert!(orthocomplement(&Projection::zero(3)).is_one());
        assert!(orthocomplement(&Projection::one(3)).is_zero());
        assert_eq!(
            orthocomplement(&diag_proj(&[1.0, 0.0])).matrix(),
            &SymMatrix::from_diag(&[0.0, 1.0])
        );
        let p = half();
        assert_eq!(orthocomplement(&orthocomplement(&p)), p);
    }

    #[test]
    fn orthogonality_examples() {
        let p = half();
        assert!(is_orthogonal(&p, &orthocomplement(&p), &tol()).unwrap());
        assert!(!is_orthogonal(&p, &p, &tol()).unwrap());
        assert!(!is_orthogonal(&diag_proj(&[1.0, 0.0]), &half(), &tol()).unwrap());
    }

    #[test]
    fn bijection_examples() {
        let s = symmetry_from_projection(&Projection::one(2), &tol()).unwrap();
        assert_eq!(s.matrix(), &SymMatrix::identity(2));
        let s = symmetry_from_projection(&Projection::zero(2), &tol()).unwrap();
        assert_eq!(s.matrix(), &SymMatrix::scalar(2, -1.0));
        let s = symmetry_from_projection(&diag_proj(&[1.0, 0.0]), &tol()).unwrap();
        assert_eq!(s.matrix(), &SymMatrix::from_diag(&[1.0, -1.0]));

        let back = symmetry_projection_bijection(&SymOrProj::Symmetry(s), &tol()).unwrap();
        assert_eq!(back, SymOrProj::Projection(diag_proj(&[1.0, 0.0])));
    }

    #[test]
    fn exchange_examples() {
        let one = Symmetry::new(&SymMatrix::identity(2), &tol()).unwrap();
        let a = m(&[&[1.0, 2.0], &[2.0, -1.0]]);
        assert_eq!(exchange(Exchanger::Symmetry(&one), &a, &tol()).unwrap(), a);

        let swap = Symmetry::new(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), &tol()).unwrap();
        let r = exchange(
            Exchanger::Symmetry(&swap),
            &SymMatrix::from_diag(&[1.0, 0.0]),
            &tol(),
        )
        .unwrap();
        assert_eq!(r, SymMatrix::from_diag(&[0.0, 1.0]));
        let back = exchange(Exchanger::Symmetry(&swap), &r, &tol()).unwrap();
        assert_eq!(back, SymMatrix::from_diag(&[1.0, 0.0]));

        // a commuting with p is fixed by 2p − 1
        let p = diag_proj(&[1.0, 1.0, 0.0]);
        let s = symmetry_from_projection(&p, &tol()).unwrap();
        let a = m(&[&[1.0, 2.0, 0.0], &[2.0, 3.0, 0.0], &[0.0, 0.0, 5.0]]);
        assert!(
            exchange(Exchanger::Symmetry(&s), &a, &tol())
                .unwrap()
                .distance(&a)
                .unwrap()
                < 1e-14
        );
    }

    #[test]
    fn partial_exchange_support() {
        let t = PartialSymmetry::new(
            &m(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]),
            &tol(),
        )
        .unwrap();
        assert_eq!(t.support().rank(), 2);
        let inside = SymMatrix::from_diag(&[1.0, 0.0, 0.0]);
        assert_eq!(
            exchange(Exchanger::Partial(&t), &inside, &tol()).unwrap(),
            SymMatrix::from_diag(&[0.0, 1.0, 0.0])
        );
        let outside = SymMatrix::from_diag(&[0.0, 0.0, 1.0]);
        assert_eq!(
            exchange(Exchanger::Partial(&t), &outside, &tol()),
            Err(Error::SupportViolation)
        );
    }

    #[test]
    fn effect_order_examples() {
        let p = diag_proj(&[1.0, 1.0, 0.0]);
        let r = effect_proj_order_check(&Effect::from(p.clone()), &p, &tol()).unwrap();
        assert!(r.e_leq_p && r.e_eq_ep && r.e_eq_pe && r.p_leq_e && r.p_eq_pe && r.p_eq_ep);

        let e = Effect::new(&p.matrix().scale(0.5), &tol()).unwrap();
        let r = effect_proj_order_check(&e, &p, &tol()).unwrap();
        assert!(r.e_leq_p && r.e_eq_ep && r.e_eq_pe);
        assert!(!r.p_leq_e && !r.p_eq_pe && !r.p_eq_ep);
    }
}
