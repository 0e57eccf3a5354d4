//! C ABI over the `synlab` core.
//!
//! Algebras and elements cross the boundary as opaque handles created by
//! `*_new` and released by `*_free`. Every fallible call returns a
//! [`SynlabStatus`]; on failure the message is available from
//! [`synlab_last_error_message`] on the same thread. Tolerance pointers may be
//! null, selecting the defaults.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use synlab::antilattice::{antilattice_suite, infimum_decide, InfimumStatus};
use synlab::cli::to_json_string;
use synlab::projection::{carrier, proj_join, proj_meet, Projection};
use synlab::structure::is_factor;
use synlab::{AlgebraSpec, Element, Error, SymMatrix, Tolerances};

/// Opaque handle to a block structure.
pub struct SynlabAlgebra(AlgebraSpec);

/// Opaque handle to an element of an algebra.
pub struct SynlabElement(Element);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynlabStatus {
    Ok = 0,
    NullPointer,
    Panic,
    NonConvergence,
    DimensionMismatch,
    DomainError,
    NotPositive,
    NotStrictlyPositive,
    NotInvertible,
    NotProjection,
    NotEffect,
    NotSymmetry,
    InvariantViolation,
    SupportViolation,
    AlgebraMismatch,
    UnitMissing,
    PreconditionUnmet,
    NotAWitnessPair,
    NotFactor,
    NotOrthogonal,
    ZeroProjection,
    NotExchanging,
    TrivialProjection,
    HypothesisViolation,
    InvalidTolerance,
    ParseError,
    ValidationError,
    UnknownCommand,
}

impl From<&Error> for SynlabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonConvergence { .. } => SynlabStatus::NonConvergence,
            Error::DimensionMismatch { .. } => SynlabStatus::DimensionMismatch,
            Error::DomainError { .. } => SynlabStatus::DomainError,
            Error::NotPositive { .. } => SynlabStatus::NotPositive,
            Error::NotStrictlyPositive(_) => SynlabStatus::NotStrictlyPositive,
            Error::NotInvertible { .. } => SynlabStatus::NotInvertible,
            Error::NotProjection(_) => SynlabStatus::NotProjection,
            Error::NotEffect(_) => SynlabStatus::NotEffect,
            Error::NotSymmetry(_) => SynlabStatus::NotSymmetry,
            Error::InvariantViolation(_) => SynlabStatus::InvariantViolation,
            Error::SupportViolation => SynlabStatus::SupportViolation,
            Error::AlgebraMismatch => SynlabStatus::AlgebraMismatch,
            Error::UnitMissing => SynlabStatus::UnitMissing,
            Error::PreconditionUnmet(_) => SynlabStatus::PreconditionUnmet,
            Error::NotAWitnessPair(_) => SynlabStatus::NotAWitnessPair,
            Error::NotFactor => SynlabStatus::NotFactor,
            Error::NotOrthogonal => SynlabStatus::NotOrthogonal,
            Error::ZeroProjection => SynlabStatus::ZeroProjection,
            Error::NotExchanging { .. } => SynlabStatus::NotExchanging,
            Error::TrivialProjection => SynlabStatus::TrivialProjection,
            Error::HypothesisViolation(_) => SynlabStatus::HypothesisViolation,
            Error::InvalidTolerance(_) => SynlabStatus::InvalidTolerance,
            Error::Parse(_) => SynlabStatus::ParseError,
            Error::Validation(_) => SynlabStatus::ValidationError,
            Error::UnknownCommand(_) => SynlabStatus::UnknownCommand,
        }
    }
}

/// Numerical tolerances; see the core library for their meaning.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynlabTolerances {
    pub eig: f64,
    pub recon: f64,
    pub ortho: f64,
    pub psd: f64,
}

impl From<SynlabTolerances> for Tolerances {
    fn from(t: SynlabTolerances) -> Self {
        Tolerances {
            eig: t.eig,
            recon: t.recon,
            ortho: t.ortho,
            psd: t.psd,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynlabInfimum {
    Exists = 0,
    NotExists = 1,
    Unknown = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SynlabStatus>) -> SynlabStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SynlabStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            SynlabStatus::Panic
        }
    }
}

fn fail(e: Error) -> SynlabStatus {
    set_last_error(&format!("{}: {e}", e.name()));
    SynlabStatus::from(&e)
}

fn null(what: &str) -> SynlabStatus {
    set_last_error(&format!("null pointer: {what}"));
    SynlabStatus::NullPointer
}

unsafe fn tolerances(tol: *const SynlabTolerances) -> Result<Tolerances, SynlabStatus> {
    let t = match tol.as_ref() {
        Some(t) => Tolerances::from(*t),
        None => Tolerances::default(),
    };
    t.validate().map_err(fail)?;
    Ok(t)
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, SynlabStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), SynlabStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// The default tolerance set.
#[no_mangle]
pub extern "C" fn synlab_tolerances_default() -> SynlabTolerances {
    let t = Tolerances::default();
    SynlabTolerances {
        eig: t.eig,
        recon: t.recon,
        ortho: t.ortho,
        psd: t.psd,
    }
}

/// Stable name of a status code, e.g. `"NotProjection"`. Never null.
#[no_mangle]
pub extern "C" fn synlab_status_name(status: SynlabStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SynlabStatus::Ok => c"Ok",
        SynlabStatus::NullPointer => c"NullPointer",
        SynlabStatus::Panic => c"Panic",
        SynlabStatus::NonConvergence => c"NonConvergence",
        SynlabStatus::DimensionMismatch => c"DimensionMismatch",
        SynlabStatus::DomainError => c"DomainError",
        SynlabStatus::NotPositive => c"NotPositive",
        SynlabStatus::NotStrictlyPositive => c"NotStrictlyPositive",
        SynlabStatus::NotInvertible => c"NotInvertible",
        SynlabStatus::NotProjection => c"NotProjection",
        SynlabStatus::NotEffect => c"NotEffect",
        SynlabStatus::NotSymmetry => c"NotSymmetry",
        SynlabStatus::InvariantViolation => c"InvariantViolation",
        SynlabStatus::SupportViolation => c"SupportViolation",
        SynlabStatus::AlgebraMismatch => c"AlgebraMismatch",
        SynlabStatus::UnitMissing => c"UnitMissing",
        SynlabStatus::PreconditionUnmet => c"PreconditionUnmet",
        SynlabStatus::NotAWitnessPair => c"NotAWitnessPair",
        SynlabStatus::NotFactor => c"NotFactor",
        SynlabStatus::NotOrthogonal => c"NotOrthogonal",
        SynlabStatus::ZeroProjection => c"ZeroProjection",
        SynlabStatus::NotExchanging => c"NotExchanging",
        SynlabStatus::TrivialProjection => c"TrivialProjection",
        SynlabStatus::HypothesisViolation => c"HypothesisViolation",
        SynlabStatus::InvalidTolerance => c"InvalidTolerance",
        SynlabStatus::ParseError => c"ParseError",
        SynlabStatus::ValidationError => c"ValidationError",
        SynlabStatus::UnknownCommand => c"UnknownCommand",
    };
    s.as_ptr()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn synlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates the algebra with block sizes `blocks[0..len]`.
///
/// # Safety
/// `blocks` must point to `len` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn synlab_algebra_new(
    blocks: *const usize,
    len: usize,
    out: *mut *mut SynlabAlgebra,
) -> SynlabStatus {
    guard(|| {
        if blocks.is_null() && len > 0 {
            return Err(null("blocks"));
        }
        let sizes = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(blocks, len).to_vec()
        };
        let a = AlgebraSpec::new(sizes).map_err(fail)?;
        emit(out, SynlabAlgebra(a))
    })
}

/// # Safety
/// `algebra` must be null or a handle from [`synlab_algebra_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn synlab_algebra_free(algebra: *mut SynlabAlgebra) {
    if !algebra.is_null() {
        drop(Box::from_raw(algebra));
    }
}

/// Matrix size of the algebra's elements, or 0 for a null handle.
///
/// # Safety
/// `algebra` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn synlab_algebra_total_dim(algebra: *const SynlabAlgebra) -> usize {
    algebra.as_ref().map_or(0, |a| a.0.total_dim())
}

/// # Safety
/// `algebra` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn synlab_algebra_is_factor(
    algebra: *const SynlabAlgebra,
    tol: *const SynlabTolerances,
    out: *mut bool,
) -> SynlabStatus {
    guard(|| {
        let a = deref(algebra, "algebra")?;
        let t = tolerances(tol)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = is_factor(&a.0, &t).map_err(fail)?.is_factor;
        Ok(())
    })
}

/// Creates an element from `n × n` row-major entries, `n` the algebra's
/// total dimension. The input must be symmetric and block diagonal.
///
/// # Safety
/// `entries` must point to `len` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn synlab_element_new(
    algebra: *const SynlabAlgebra,
    entries: *const f64,
    len: usize,
    tol: *const SynlabTolerances,
    out: *mut *mut SynlabElement,
) -> SynlabStatus {
    guard(|| {
        let a = deref(algebra, "algebra")?;
        let t = tolerances(tol)?;
        let n = a.0.total_dim();
        if entries.is_null() {
            return Err(null("entries"));
        }
        if len != n * n {
            return Err(fail(Error::DimensionMismatch {
                left: n * n,
                right: len,
            }));
        }
        let data = std::slice::from_raw_parts(entries, len);
        for i in 0..n {
            for j in 0..i {
                let scale = data[i * n + j].abs().max(data[j * n + i].abs()).max(1.0);
                if (data[i * n + j] - data[j * n + i]).abs() > t.recon * scale {
                    return Err(fail(Error::Validation(format!("asymmetric at ({i}, {j})"))));
                }
            }
        }
        let m = SymMatrix::from_row_major(n, data.to_vec()).map_err(fail)?;
        let e = Element::new(&a.0, m, &t).map_err(fail)?;
        emit(out, SynlabElement(e))
    })
}

/// # Safety
/// `element` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn synlab_element_free(element: *mut SynlabElement) {
    if !element.is_null() {
        drop(Box::from_raw(element));
    }
}

/// Matrix size of the element, or 0 for a null handle.
///
/// # Safety
/// `element` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn synlab_element_dim(element: *const SynlabElement) -> usize {
    element.as_ref().map_or(0, |e| e.0.matrix().dim())
}

/// Copies the `n × n` row-major entries into `out[0..len]`.
///
/// # Safety
/// `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn synlab_element_copy(
    element: *const SynlabElement,
    out: *mut f64,
    len: usize,
) -> SynlabStatus {
    guard(|| {
        let e = deref(element, "element")?;
        let data = e.0.matrix().as_slice();
        if out.is_null() {
            return Err(null("out"));
        }
        if len != data.len() {
            return Err(fail(Error::DimensionMismatch {
                left: data.len(),
                right: len,
            }));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(data);
        Ok(())
    })
}

fn wrap(
    algebra: &AlgebraSpec,
    p: &Projection,
    t: &Tolerances,
) -> Result<SynlabElement, SynlabStatus> {
    Element::new(algebra, p.matrix().clone(), t)
        .map(SynlabElement)
        .map_err(fail)
}

/// The carrier (range projection) of `a`.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn synlab_carrier(
    a: *const SynlabElement,
    tol: *const SynlabTolerances,
    out: *mut *mut SynlabElement,
) -> SynlabStatus {
    guard(|| {
        let a = deref(a, "a")?;
        let t = tolerances(tol)?;
        let p = carrier(a.0.matrix(), &t).map_err(fail)?;
        emit(out, wrap(a.0.algebra(), &p, &t)?)
    })
}

unsafe fn lattice_op(
    p: *const SynlabElement,
    q: *const SynlabElement,
    tol: *const SynlabTolerances,
    out: *mut *mut SynlabElement,
    op: fn(&Projection, &Projection, &Tolerances) -> synlab::Result<Projection>,
) -> SynlabStatus {
    guard(|| {
        let p = deref(p, "p")?;
        let q = deref(q, "q")?;
        let t = tolerances(tol)?;
        if p.0.algebra() != q.0.algebra() {
            return Err(fail(Error::AlgebraMismatch));
        }
        let pp = Projection::new(p.0.matrix(), &t).map_err(fail)?;
        let qp = Projection::new(q.0.matrix(), &t).map_err(fail)?;
        let r = op(&pp, &qp, &t).map_err(fail)?;
        emit(out, wrap(p.0.algebra(), &r, &t)?)
    })
}

/// Meet of two projections in the projection lattice.
///
/// # Safety
/// `p`, `q` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn synlab_meet(
    p: *const SynlabElement,
    q: *const SynlabElement,
    tol: *const SynlabTolerances,
    out: *mut *mut SynlabElement,
) -> SynlabStatus {
    lattice_op(p, q, tol, out, proj_meet)
}

/// Join of two projections in the projection lattice.
///
/// # Safety
/// `p`, `q` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn synlab_join(
    p: *const SynlabElement,
    q: *const SynlabElement,
    tol: *const SynlabTolerances,
    out: *mut *mut SynlabElement,
) -> SynlabStatus {
    lattice_op(p, q, tol, out, proj_join)
}

/// Decides whether the infimum of `c` and `d` exists in their algebra. On
/// `Exists`, `*value` receives a new handle to it; otherwise `*value` is set
/// to null. `value` may be null when only the decision is wanted.
///
/// # Safety
/// `c`, `d` must be live handles; `status` must be writable.
#[no_mangle]
pub unsafe extern "C" fn synlab_infimum(
    c: *const SynlabElement,
    d: *const SynlabElement,
    tol: *const SynlabTolerances,
    status: *mut SynlabInfimum,
    value: *mut *mut SynlabElement,
) -> SynlabStatus {
    guard(|| {
        let c = deref(c, "c")?;
        let d = deref(d, "d")?;
        let t = tolerances(tol)?;
        if status.is_null() {
            return Err(null("status"));
        }
        let v = infimum_decide(&c.0, &d.0, &t).map_err(fail)?;
        *status = match v.status {
            InfimumStatus::Exists => SynlabInfimum::Exists,
            InfimumStatus::NotExists => SynlabInfimum::NotExists,
            InfimumStatus::Unknown => SynlabInfimum::Unknown,
        };
        if !value.is_null() {
            *value = match v.value {
                Some(e) => Box::into_raw(Box::new(SynlabElement(e))),
                None => ptr::null_mut(),
            };
        }
        Ok(())
    })
}

/// Runs the antilattice suite and returns its report as a JSON string, to be
/// released with [`synlab_string_free`].
///
/// # Safety
/// `algebra` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn synlab_suite_json(
    algebra: *const SynlabAlgebra,
    trials: usize,
    seed: u64,
    tol: *const SynlabTolerances,
    out: *mut *mut c_char,
) -> SynlabStatus {
    guard(|| {
        let a = deref(algebra, "algebra")?;
        let t = tolerances(tol)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let report = antilattice_suite(&a.0, trials, seed, &t).map_err(fail)?;
        let json = CString::new(to_json_string(&report, false)).expect("JSON has no interior NUL");
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn synlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
