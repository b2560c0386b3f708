//! C interface to `fusion-ring`.
//!
//! Tables are opaque handles created by [`fusion_table_new`] and released with
//! [`fusion_table_free`]. Every function returns a [`FusionStatus`]; outputs go
//! through pointer arguments. Strings returned by the library must be released
//! with [`fusion_string_free`].

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fusion_ring::cli::{build_context, compute_table, CliError, ContextArgs, EXIT_CERTIFICATE, EXIT_USAGE};
use fusion_ring::{FusionTable, Method};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad type string, level below 1, or rank above the default bound.
    Usage = 3,
    /// Non-integral or singular data, or an engine disagreement.
    Integrity = 4,
    Certificate = 5,
    OutOfRange = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMethod {
    Verlinde = 0,
    Ideal = 1,
    KacWalton = 2,
}

impl From<FusionMethod> for Method {
    fn from(m: FusionMethod) -> Method {
        match m {
            FusionMethod::Verlinde => Method::Verlinde,
            FusionMethod::Ideal => Method::Ideal,
            FusionMethod::KacWalton => Method::KacWalton,
        }
    }
}

/// Opaque fusion table.
pub struct FusionRingTable {
    table: FusionTable,
}

fn classify(e: &CliError) -> FusionStatus {
    match e.exit_code() {
        EXIT_USAGE => FusionStatus::Usage,
        EXIT_CERTIFICATE => FusionStatus::Certificate,
        _ => FusionStatus::Integrity,
    }
}

fn guard(f: impl FnOnce() -> FusionStatus) -> FusionStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(FusionStatus::Panic)
}

unsafe fn table<'a>(t: *const FusionRingTable) -> Option<&'a FusionTable> {
    t.as_ref().map(|t| &t.table)
}

fn build(type_name: &str, level: i64, method: FusionMethod) -> Result<FusionTable, CliError> {
    let args = ContextArgs { affine_type: type_name.to_string(), level, rank_override: None };
    let ctx = build_context(&args, None, &mut std::io::sink())?;
    Ok(compute_table(&ctx, method.into())?)
}

/// Computes the fusion table of `type_name` (e.g. `"A3~2"`) at `level`.
///
/// # Safety
/// `type_name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fusion_table_new(
    type_name: *const c_char,
    level: i64,
    method: FusionMethod,
    out: *mut *mut FusionRingTable,
) -> FusionStatus {
    guard(|| {
        if type_name.is_null() || out.is_null() {
            return FusionStatus::NullPointer;
        }
        *out = std::ptr::null_mut();
        let Ok(name) = CStr::from_ptr(type_name).to_str() else {
            return FusionStatus::InvalidUtf8;
        };
        match build(name, level, method) {
            Ok(table) => {
                *out = Box::into_raw(Box::new(FusionRingTable { table }));
                FusionStatus::Ok
            }
            Err(e) => classify(&e),
        }
    })
}

/// Releases a table. Null is ignored.
///
/// # Safety
/// `t` must come from [`fusion_table_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fusion_table_free(t: *mut FusionRingTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of level-ℓ weights `p`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fusion_table_size(t: *const FusionRingTable, out: *mut usize) -> FusionStatus {
    guard(|| match (table(t), out.is_null()) {
        (Some(tb), false) => {
            *out = tb.size();
            FusionStatus::Ok
        }
        _ => FusionStatus::NullPointer,
    })
}

/// Length of each weight vector (the finite rank).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fusion_table_rank(t: *const FusionRingTable, out: *mut usize) -> FusionStatus {
    guard(|| match (table(t), out.is_null()) {
        (Some(tb), false) => {
            *out = tb.weights.first().map_or(0, Vec::len);
            FusionStatus::Ok
        }
        _ => FusionStatus::NullPointer,
    })
}

/// Copies weight `index` (Dynkin labels, affine node omitted) into `buf`.
///
/// # Safety
/// `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fusion_table_weight(
    t: *const FusionRingTable,
    index: usize,
    buf: *mut i64,
    len: usize,
) -> FusionStatus {
    guard(|| {
        let Some(tb) = table(t) else { return FusionStatus::NullPointer };
        if buf.is_null() {
            return FusionStatus::NullPointer;
        }
        let Some(w) = tb.weights.get(index) else { return FusionStatus::OutOfRange };
        if len < w.len() {
            return FusionStatus::BufferTooSmall;
        }
        std::slice::from_raw_parts_mut(buf, w.len()).copy_from_slice(w);
        FusionStatus::Ok
    })
}

/// `N_{λμ}^ν` by weight index.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fusion_table_coefficient(
    t: *const FusionRingTable,
    lambda: usize,
    mu: usize,
    nu: usize,
    out: *mut i64,
) -> FusionStatus {
    guard(|| {
        let Some(tb) = table(t) else { return FusionStatus::NullPointer };
        if out.is_null() {
            return FusionStatus::NullPointer;
        }
        let p = tb.size();
        if lambda >= p || mu >= p || nu >= p {
            return FusionStatus::OutOfRange;
        }
        *out = tb.get(lambda, mu, nu);
        FusionStatus::Ok
    })
}

/// Table as a JSON document; release with [`fusion_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fusion_table_to_json(t: *const FusionRingTable, out: *mut *mut c_char) -> FusionStatus {
    guard(|| {
        let Some(tb) = table(t) else { return FusionStatus::NullPointer };
        if out.is_null() {
            return FusionStatus::NullPointer;
        }
        match CString::new(tb.to_json_string()) {
            Ok(s) => {
                *out = s.into_raw();
                FusionStatus::Ok
            }
            Err(_) => FusionStatus::Integrity,
        }
    })
}

/// Releases a string from this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fusion_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn fusion_status_message(status: FusionStatus) -> *const c_char {
    let s: &'static CStr = match status {
        FusionStatus::Ok => c"ok",
        FusionStatus::NullPointer => c"null pointer argument",
        FusionStatus::InvalidUtf8 => c"type name is not valid UTF-8",
        FusionStatus::Usage => c"invalid type, level or rank bound",
        FusionStatus::Integrity => c"integrity failure",
        FusionStatus::Certificate => c"affine fold certificate failure",
        FusionStatus::OutOfRange => c"index out of range",
        FusionStatus::BufferTooSmall => c"buffer too small",
        FusionStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
