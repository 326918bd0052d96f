//! C ABI for the `cichon` crate.
//!
//! Conditions and diagram states cross the boundary as opaque handles built
//! from JSON. Every function returns a [`CichonStatus`]; on failure the
//! message is available from [`cichon_last_error`] until the next call on the
//! same thread. Strings handed out must be released with [`cichon_string_free`],
//! handles with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use cichon::combinatorics::{least_threshold, FinFunc, RelationKind, Slalom};
use cichon::diagram::{self, DiagramState};
use cichon::posets::{self, Condition, PosetKind};
use cichon::projections;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CichonStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    Precondition = 4,
    UnknownName = 5,
}

/// Opaque forcing condition.
pub struct CichonCondition {
    inner: Condition,
}

/// Opaque diagram state.
pub struct CichonState {
    inner: DiagramState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: CichonStatus, message: impl Into<String>) -> CichonStatus {
    set_error(message);
    status
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, CichonStatus> {
    if s.is_null() {
        return Err(fail(CichonStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CichonStatus::InvalidUtf8, "argument is not UTF-8"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, CichonStatus> {
    p.as_ref().ok_or_else(|| fail(CichonStatus::NullPointer, "null handle"))
}

unsafe fn put<T>(out: *mut T, value: T) -> CichonStatus {
    if out.is_null() {
        return fail(CichonStatus::NullPointer, "null output pointer");
    }
    *out = value;
    CichonStatus::Ok
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

macro_rules! attempt {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

fn parse_kind(kind: &str) -> Result<PosetKind, CichonStatus> {
    kind.parse().map_err(|e: String| fail(CichonStatus::UnknownName, e))
}

/// Message describing the most recent failure on this thread, or NULL.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn cichon_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn cichon_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a condition from its tagged JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_condition_from_json(json: *const c_char, out: *mut *mut CichonCondition) -> CichonStatus {
    let text = attempt!(read_str(json));
    let inner: Condition = match serde_json::from_str(text) {
        Ok(c) => c,
        Err(e) => return fail(CichonStatus::ParseError, e.to_string()),
    };
    put(out, Box::into_raw(Box::new(CichonCondition { inner })))
}

/// # Safety
/// `cond` must be NULL or a handle from this library not freed already.
#[no_mangle]
pub unsafe extern "C" fn cichon_condition_free(cond: *mut CichonCondition) {
    if !cond.is_null() {
        drop(Box::from_raw(cond));
    }
}

/// # Safety
/// `cond` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_condition_to_json(cond: *const CichonCondition, out: *mut *mut c_char) -> CichonStatus {
    let c = attempt!(handle(cond));
    let json = serde_json::to_string(&c.inner).expect("conditions serialize");
    put(out, to_c_string(json))
}

/// Writes whether the condition satisfies every clause of its kind. The
/// violated clauses, if any, are reported through `cichon_last_error`.
///
/// # Safety
/// `cond` must be a live handle; `out_valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_condition_validate(cond: *const CichonCondition, out_valid: *mut bool) -> CichonStatus {
    let c = attempt!(handle(cond));
    let violations = posets::validate(&c.inner);
    if !violations.is_empty() {
        set_error(violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "));
    }
    put(out_valid, violations.is_empty())
}

/// `a ≤ b` in the poset named by `kind`.
///
/// # Safety
/// `kind` must be a NUL-terminated string, `a` and `b` live handles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_leq(
    kind: *const c_char,
    a: *const CichonCondition,
    b: *const CichonCondition,
    out: *mut bool,
) -> CichonStatus {
    let kind = attempt!(read_str(kind).and_then(parse_kind));
    let (a, b) = (attempt!(handle(a)), attempt!(handle(b)));
    match posets::leq(kind, &a.inner, &b.inner) {
        Ok(v) => put(out, v),
        Err(e) => fail(CichonStatus::Precondition, e.to_string()),
    }
}

/// `a ≤_n b` for `sacks`, `laver` or `product`.
///
/// # Safety
/// As for [`cichon_leq`].
#[no_mangle]
pub unsafe extern "C" fn cichon_fusion_leq(
    kind: *const c_char,
    a: *const CichonCondition,
    b: *const CichonCondition,
    n: usize,
    out: *mut bool,
) -> CichonStatus {
    let kind = attempt!(read_str(kind).and_then(parse_kind));
    let (a, b) = (attempt!(handle(a)), attempt!(handle(b)));
    match posets::fusion_leq(kind, &a.inner, &b.inner, n) {
        Ok(v) => put(out, v),
        Err(e) => fail(CichonStatus::Precondition, e.to_string()),
    }
}

fn loc_of(c: &CichonCondition) -> Result<&posets::LocCond, CichonStatus> {
    match &c.inner {
        Condition::Loc(l) => Ok(l),
        other => Err(fail(
            CichonStatus::Precondition,
            format!("KindMismatch: expected loc, got {}", other.kind()),
        )),
    }
}

/// Projects a localization condition along `map` (`"loc-d"` or `"loc-e"`).
///
/// # Safety
/// `map` must be a NUL-terminated string, `cond` a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_project(
    map: *const c_char,
    cond: *const CichonCondition,
    out: *mut *mut CichonCondition,
) -> CichonStatus {
    let map = attempt!(read_str(map));
    let loc = attempt!(loc_of(attempt!(handle(cond))));
    let projected = match map {
        "loc-d" => projections::proj_loc_to_d(loc).map(Condition::Hechler),
        "loc-e" => projections::proj_loc_to_e(loc).map(Condition::E),
        other => return fail(CichonStatus::UnknownName, format!("unknown projection `{other}`")),
    };
    match projected {
        Ok(inner) => put(out, Box::into_raw(Box::new(CichonCondition { inner }))),
        Err(e) => fail(CichonStatus::Precondition, e.to_string()),
    }
}

/// Lifts `target` (Hechler for `"loc-d"`, E for `"loc-e"`) along the projection from `cond`.
///
/// # Safety
/// As for [`cichon_project`]; `target` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cichon_lift(
    map: *const c_char,
    cond: *const CichonCondition,
    target: *const CichonCondition,
    out: *mut *mut CichonCondition,
) -> CichonStatus {
    let map = attempt!(read_str(map));
    let loc = attempt!(loc_of(attempt!(handle(cond))));
    let target = attempt!(handle(target));
    let lifted = match (map, &target.inner) {
        ("loc-d", Condition::Hechler(q)) => projections::lift_loc_to_d(loc, q),
        ("loc-e", Condition::E(q)) => projections::lift_loc_to_e(loc, q),
        ("loc-d" | "loc-e", other) => {
            return fail(
                CichonStatus::Precondition,
                format!("KindMismatch: target of kind {} does not fit {map}", other.kind()),
            )
        }
        (other, _) => return fail(CichonStatus::UnknownName, format!("unknown projection `{other}`")),
    };
    match lifted {
        Ok(l) => put(out, Box::into_raw(Box::new(CichonCondition { inner: Condition::Loc(l) }))),
        Err(e) => fail(CichonStatus::Precondition, e.to_string()),
    }
}

/// Least threshold of `f R g` for `relation` in `leq`, `neq`, `in`
/// (`g` is a slalom for `in`). Both arguments are JSON.
///
/// # Safety
/// All pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cichon_check(
    relation: *const c_char,
    f_json: *const c_char,
    g_json: *const c_char,
    out_threshold: *mut usize,
    out_vacuous: *mut bool,
) -> CichonStatus {
    let rel: RelationKind = match attempt!(read_str(relation)).parse() {
        Ok(r) => r,
        Err(e) => return fail(CichonStatus::UnknownName, e),
    };
    let parse_err = |e: serde_json::Error| fail(CichonStatus::ParseError, e.to_string());
    let f: FinFunc = attempt!(serde_json::from_str(attempt!(read_str(f_json))).map_err(parse_err));
    let g_text = attempt!(read_str(g_json));
    let report = if rel == RelationKind::In {
        let sigma: Slalom = attempt!(serde_json::from_str(g_text).map_err(parse_err));
        least_threshold(rel, &f, &sigma)
    } else {
        let g: FinFunc = attempt!(serde_json::from_str(g_text).map_err(parse_err));
        least_threshold(rel, &f, &g)
    };
    match report {
        Ok(r) => {
            let s = put(out_threshold, r.threshold);
            if s != CichonStatus::Ok {
                return s;
            }
            put(out_vacuous, r.vacuous)
        }
        Err(e) => fail(CichonStatus::Precondition, e.to_string()),
    }
}

/// Knowledge-base profile of a named forcing.
///
/// # Safety
/// `name` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_kb_lookup(name: *const c_char, out: *mut *mut CichonState) -> CichonStatus {
    let name = attempt!(read_str(name));
    match diagram::kb_lookup(name) {
        Ok(p) => put(out, Box::into_raw(Box::new(CichonState { inner: p.state.clone() }))),
        Err(e) => fail(CichonStatus::UnknownName, e.to_string()),
    }
}

/// # Safety
/// `state` must be NULL or a handle from this library not freed already.
#[no_mangle]
pub unsafe extern "C" fn cichon_state_free(state: *mut CichonState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_state_to_json(state: *const CichonState, out: *mut *mut c_char) -> CichonStatus {
    let s = attempt!(handle(state));
    put(out, to_c_string(diagram::emit_json(&s.inner)))
}

/// # Safety
/// `state` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_state_to_dot(state: *const CichonState, out: *mut *mut c_char) -> CichonStatus {
    let s = attempt!(handle(state));
    put(out, to_c_string(diagram::emit_dot(&s.inner)))
}

/// Number of nodes marked nonempty.
///
/// # Safety
/// `state` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_state_nonempty_count(state: *const CichonState, out: *mut usize) -> CichonStatus {
    let s = attempt!(handle(state));
    put(out, s.inner.nonempty_set().len())
}

/// All cuts with their realizing forcings, as a JSON array.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cichon_cuts_json(out: *mut *mut c_char) -> CichonStatus {
    let json = serde_json::to_string(&diagram::cut_entries()).expect("cuts serialize");
    put(out, to_c_string(json))
}
