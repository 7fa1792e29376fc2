//! C interface to `zomat`.
//!
//! Matrices cross the boundary as opaque [`ZomMatrix`] handles. Every fallible
//! function returns a [`ZomStatus`]; on failure a message for the calling
//! thread is available from [`zom_last_error`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use zomat::canon::{phi_representative, pi_rep};
use zomat::count::pi_class_count;
use zomat::exact::{determinant, rank};
use zomat::extend::extension_spectrum;
use zomat::snf::smith_normal_form;
use zomat::{BitMatrix, Error};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZomStatus {
    Ok = 0,
    NullPointer = 1,
    /// Text input is not valid UTF-8 or not a matrix.
    Parse = 2,
    /// Wrong order, or an output buffer that is too short.
    Dimension = 3,
    Overflow = 4,
    Domain = 5,
    /// A panic was caught at the boundary.
    Internal = 6,
}

/// An order-`n` (0,1) matrix.
pub struct ZomMatrix(BitMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ZomStatus {
    match e {
        Error::Parse(_) | Error::MalformedMatrix(_) => ZomStatus::Parse,
        Error::Dimension { .. } | Error::IndexOutOfRange { .. } => ZomStatus::Dimension,
        Error::Overflow(_) => ZomStatus::Overflow,
        _ => ZomStatus::Domain,
    }
}

fn fail(status: ZomStatus, msg: impl Into<String>) -> ZomStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), ZomStatus>) -> ZomStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZomStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            fail(ZomStatus::Internal, msg)
        }
    }
}

fn lib<T>(r: zomat::Result<T>) -> Result<T, ZomStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn matrix<'a>(m: *const ZomMatrix) -> Result<&'a BitMatrix, ZomStatus> {
    m.as_ref()
        .map(|m| &m.0)
        .ok_or_else(|| fail(ZomStatus::NullPointer, "null matrix handle"))
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, ZomStatus> {
    p.as_mut()
        .ok_or_else(|| fail(ZomStatus::NullPointer, "null output pointer"))
}

fn new_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// The message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn zom_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses comma-separated hexadecimal rows such as `"3,5,6"`.
///
/// # Safety
/// `rows` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zom_matrix_from_hex(
    rows: *const c_char,
    out: *mut *mut ZomMatrix,
) -> ZomStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = ptr::null_mut();
        if rows.is_null() {
            return Err(fail(ZomStatus::NullPointer, "null string"));
        }
        let text = CStr::from_ptr(rows)
            .to_str()
            .map_err(|_| fail(ZomStatus::Parse, "input is not UTF-8"))?;
        let m = lib(BitMatrix::parse_hex_line(text))?;
        *out = Box::into_raw(Box::new(ZomMatrix(m)));
        Ok(())
    })
}

/// Releases a matrix. NULL is ignored.
///
/// # Safety
/// `m` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn zom_matrix_free(m: *mut ZomMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zom_matrix_order(m: *const ZomMatrix, out: *mut usize) -> ZomStatus {
    guard(|| {
        *out_ptr(out)? = matrix(m)?.order();
        Ok(())
    })
}

/// Hexadecimal rows of the matrix; release with [`zom_string_free`].
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zom_matrix_to_hex(
    m: *const ZomMatrix,
    out: *mut *mut c_char,
) -> ZomStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = new_string(matrix(m)?.to_hex_line());
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn zom_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exact determinant; `ZOM_STATUS_OVERFLOW` if it does not fit 64 bits.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zom_matrix_determinant(m: *const ZomMatrix, out: *mut i64) -> ZomStatus {
    guard(|| {
        let d = lib(determinant(matrix(m)?))?;
        *out_ptr(out)? =
            i64::try_from(d).map_err(|_| fail(ZomStatus::Overflow, format!("determinant {d}")))?;
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zom_matrix_rank(m: *const ZomMatrix, out: *mut usize) -> ZomStatus {
    guard(|| {
        *out_ptr(out)? = lib(rank(matrix(m)?))?;
        Ok(())
    })
}

/// Writes the Smith normal form diagonal into `diag`, which must hold at
/// least `order` entries.
///
/// # Safety
/// `m` must be a live handle and `diag` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn zom_matrix_snf(
    m: *const ZomMatrix,
    diag: *mut u64,
    len: usize,
) -> ZomStatus {
    guard(|| {
        let a = matrix(m)?;
        if diag.is_null() {
            return Err(fail(ZomStatus::NullPointer, "null output buffer"));
        }
        if len < a.order() {
            return Err(fail(
                ZomStatus::Dimension,
                format!("buffer holds {len} entries, order is {}", a.order()),
            ));
        }
        let s = lib(smith_normal_form(a))?;
        std::slice::from_raw_parts_mut(diag, a.order()).copy_from_slice(s.diag());
        Ok(())
    })
}

unsafe fn derived(
    m: *const ZomMatrix,
    out: *mut *mut ZomMatrix,
    f: fn(&BitMatrix) -> BitMatrix,
) -> ZomStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = ptr::null_mut();
        let r = f(matrix(m)?);
        *out = Box::into_raw(Box::new(ZomMatrix(r)));
        Ok(())
    })
}

/// Lex-smallest matrix reachable by row and column permutations.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zom_matrix_pi_rep(
    m: *const ZomMatrix,
    out: *mut *mut ZomMatrix,
) -> ZomStatus {
    derived(m, out, pi_rep)
}

/// Lex-smallest matrix of the φ-orbit.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zom_matrix_phi_rep(
    m: *const ZomMatrix,
    out: *mut *mut ZomMatrix,
) -> ZomStatus {
    derived(m, out, phi_representative)
}

/// Largest order accepted by [`zom_extension_first_missing`]; the sweep visits
/// `2^(2n+1)` borders.
pub const ZOM_MAX_EXTENSION_ORDER: usize = 14;

/// Smallest nonnegative integer that is not `|det|` of any border of `m`.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zom_extension_first_missing(
    m: *const ZomMatrix,
    out: *mut u64,
) -> ZomStatus {
    guard(|| {
        let a = matrix(m)?;
        if a.order() > ZOM_MAX_EXTENSION_ORDER {
            return Err(fail(
                ZomStatus::Domain,
                format!("order {} is above {ZOM_MAX_EXTENSION_ORDER}", a.order()),
            ));
        }
        *out_ptr(out)? = lib(extension_spectrum(a))?.first_missing;
        Ok(())
    })
}

/// Number of π-classes of order-`n` matrices, as a decimal string; release
/// with [`zom_string_free`].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zom_pi_class_count(n: usize, out: *mut *mut c_char) -> ZomStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if n > 64 {
            return Err(fail(ZomStatus::Domain, format!("order {n} is above 64")));
        }
        *out = new_string(pi_class_count(n).to_string());
        Ok(())
    })
}
