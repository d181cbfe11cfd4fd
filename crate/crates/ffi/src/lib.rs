//! C ABI over `kato-core`.
//!
//! Objects are opaque heap handles released with their `_free` function.
//! Every call returns a [`KatoStatus`]; on failure the message is available
//! from [`kato_last_error`] on the same thread. Strings handed out by the
//! library must be released with [`kato_string_free`]. Panics never cross
//! the boundary; they are reported as `KATO_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kato_core::bass_serre::{abelian_free_rank, presentation};
use kato_core::census::{
    enumerate_charts, AcceptAll, CensusError, CensusReport, SearchBounds, Signature,
};
use kato_core::group::{are_isomorphic, Group};
use kato_core::io::{emit_graph, emit_report, emit_report_table, load_group, parse_graph};
use kato_core::kato::{canonical_form, paste, stable_model, validate, CuspId};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KatoStatus {
    Ok = 0,
    /// A mathematical precondition failed (invalid graph, no isomorphism, …).
    DomainError = 1,
    /// Malformed text input.
    ParseError = 2,
    /// The census hit its vertex cap; the partial report is still returned.
    Incomplete = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// A finite group.
pub struct KatoGroup(Group);

/// A Kato graph.
pub struct KatoGraph(kato_core::kato::KatoGraph);

/// A census report.
pub struct KatoReport(CensusReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(KatoStatus, String);

fn guard(f: impl FnOnce() -> Result<KatoStatus, Fail>) -> KatoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KatoStatus::Panic
        }
    }
}

fn domain(e: impl std::fmt::Display) -> Fail {
    Fail(KatoStatus::DomainError, e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(KatoStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(KatoStatus::InvalidUtf8, "argument is not UTF-8".into()))
}

unsafe fn obj<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(KatoStatus::NullPointer, "null handle".into()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(KatoStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| domain("output contains NUL"))?;
    put(out, c.into_raw())
}

/// Message of the last failed call on this thread, or NULL. Valid until
/// the next failing call on this thread; do not free.
#[no_mangle]
pub extern "C" fn kato_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kato_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Catalog name (`C6`, `D4`, `A5`, `C2xC2`, …) or path to a group file.
///
/// # Safety
/// `name` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_group_load(
    name: *const c_char,
    out: *mut *mut KatoGroup,
) -> KatoStatus {
    guard(|| {
        let g = load_group(str_arg(name)?).map_err(|e| Fail(KatoStatus::ParseError, e))?;
        put(out, Box::into_raw(Box::new(KatoGroup(g))))?;
        Ok(KatoStatus::Ok)
    })
}

/// # Safety
/// `g` is a valid handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_group_order(g: *const KatoGroup, out: *mut usize) -> KatoStatus {
    guard(|| {
        put(out, obj(g)?.0.order())?;
        Ok(KatoStatus::Ok)
    })
}

/// # Safety
/// `g` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kato_group_free(g: *mut KatoGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Parses and validates a graph document.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_graph_parse(
    text: *const c_char,
    out: *mut *mut KatoGraph,
) -> KatoStatus {
    guard(|| {
        let g =
            parse_graph(str_arg(text)?).map_err(|e| Fail(KatoStatus::ParseError, e.to_string()))?;
        validate(&g).map_err(domain)?;
        put(out, Box::into_raw(Box::new(KatoGraph(g))))?;
        Ok(KatoStatus::Ok)
    })
}

/// Serializes a graph; free the result with [`kato_string_free`].
///
/// # Safety
/// `g` is a valid handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_graph_emit(g: *const KatoGraph, out: *mut *mut c_char) -> KatoStatus {
    guard(|| {
        put_string(out, emit_graph(&obj(g)?.0))?;
        Ok(KatoStatus::Ok)
    })
}

/// Betti number, cusp count and Euler characteristic `chi_num / chi_den`
/// (reduced, positive denominator).
///
/// # Safety
/// `g` is a valid handle; all outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn kato_graph_invariants(
    g: *const KatoGraph,
    betti: *mut usize,
    cusps: *mut usize,
    chi_num: *mut i64,
    chi_den: *mut i64,
) -> KatoStatus {
    guard(|| {
        let inv = validate(&obj(g)?.0).map_err(domain)?;
        let part = |x: &kato_core::Rational, numer: bool| {
            let v = if numer { x.numer() } else { x.denom() };
            i64::try_from(v).map_err(|_| domain("Euler characteristic out of range"))
        };
        put(betti, inv.betti)?;
        put(cusps, inv.cusp_count)?;
        put(chi_num, part(&inv.euler_char, true)?)?;
        put(chi_den, part(&inv.euler_char, false)?)?;
        Ok(KatoStatus::Ok)
    })
}

/// # Safety
/// `g` is a valid handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_graph_stabilize(
    g: *const KatoGraph,
    out: *mut *mut KatoGraph,
) -> KatoStatus {
    guard(|| {
        let s = stable_model(&obj(g)?.0).map_err(domain)?;
        put(out, Box::into_raw(Box::new(KatoGraph(s))))?;
        Ok(KatoStatus::Ok)
    })
}

/// Glues cusp `c1` of `a` to cusp `c2` of `b` along an isomorphism of the
/// cusp groups.
///
/// # Safety
/// `a`, `b` are valid handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_graph_paste(
    a: *const KatoGraph,
    c1: u32,
    b: *const KatoGraph,
    c2: u32,
    out: *mut *mut KatoGraph,
) -> KatoStatus {
    guard(|| {
        let (a, b) = (&obj(a)?.0, &obj(b)?.0);
        let (c1, c2) = (CuspId(c1), CuspId(c2));
        let g1 = &a.cusp(c1).ok_or_else(|| domain(format!("no cusp {c1}")))?.group;
        let g2 = &b.cusp(c2).ok_or_else(|| domain(format!("no cusp {c2}")))?.group;
        let iso = are_isomorphic(g1, g2).ok_or_else(|| domain("cusp groups are not isomorphic"))?;
        let p = paste(a, c1, b, c2, &iso).map_err(domain)?;
        put(out, Box::into_raw(Box::new(KatoGraph(p))))?;
        Ok(KatoStatus::Ok)
    })
}

/// Free rank of the abelianized Bass–Serre group.
///
/// # Safety
/// `g` is a valid handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_graph_free_rank(g: *const KatoGraph, out: *mut usize) -> KatoStatus {
    guard(|| {
        let p = presentation(&obj(g)?.0).map_err(domain)?;
        put(out, abelian_free_rank(&p))?;
        Ok(KatoStatus::Ok)
    })
}

/// Hex digest of the canonical key; free with [`kato_string_free`].
///
/// # Safety
/// `g` is a valid handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_graph_digest(
    g: *const KatoGraph,
    out: *mut *mut c_char,
) -> KatoStatus {
    guard(|| {
        let key = canonical_form(&obj(g)?.0).map_err(domain)?;
        put_string(out, key.digest())?;
        Ok(KatoStatus::Ok)
    })
}

/// # Safety
/// `g` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kato_graph_free(g: *mut KatoGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Runs a census with no admissibility filter. `max_vertices == 0` selects
/// the default cap. On `KATO_STATUS_INCOMPLETE` the partial report is still
/// stored in `out`.
///
/// # Safety
/// `indices` points to `n` readable values (or may be NULL when `n == 0`);
/// `group` is a valid handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_census(
    genus: usize,
    indices: *const usize,
    n: usize,
    group: *const KatoGroup,
    max_vertices: usize,
    out: *mut *mut KatoReport,
) -> KatoStatus {
    guard(|| {
        let idx = if n == 0 {
            Vec::new()
        } else if indices.is_null() {
            return Err(Fail(KatoStatus::NullPointer, "null signature".into()));
        } else {
            std::slice::from_raw_parts(indices, n).to_vec()
        };
        let sig = Signature::new(genus, idx).map_err(domain)?;
        let bounds = SearchBounds { max_vertices: (max_vertices > 0).then_some(max_vertices) };
        let (report, status) = match enumerate_charts(&sig, &obj(group)?.0, &bounds, &AcceptAll) {
            Ok(r) => (r, KatoStatus::Ok),
            Err(CensusError::Incomplete(r)) => {
                set_error(CensusError::Incomplete(r.clone()).to_string());
                (*r, KatoStatus::Incomplete)
            }
            Err(e) => return Err(domain(e)),
        };
        put(out, Box::into_raw(Box::new(KatoReport(report))))?;
        Ok(status)
    })
}

/// # Safety
/// `r` is a valid handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_report_class_count(
    r: *const KatoReport,
    out: *mut usize,
) -> KatoStatus {
    guard(|| {
        put(out, obj(r)?.0.classes.len())?;
        Ok(KatoStatus::Ok)
    })
}

/// Serializes a report, as a table when `table` is nonzero; free the
/// result with [`kato_string_free`].
///
/// # Safety
/// `r` is a valid handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn kato_report_emit(
    r: *const KatoReport,
    table: i32,
    out: *mut *mut c_char,
) -> KatoStatus {
    guard(|| {
        let r = &obj(r)?.0;
        put_string(out, if table != 0 { emit_report_table(r) } else { emit_report(r) })?;
        Ok(KatoStatus::Ok)
    })
}

/// # Safety
/// `r` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kato_report_free(r: *mut KatoReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
