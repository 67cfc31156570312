//! C ABI for the `mur` library.
//!
//! Conventions: every fallible call returns a [`MurStatus`]; on failure the
//! message is available from [`mur_last_error_message`] on the same thread.
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Array outputs use caller buffers: pass the
//! capacity, receive the required length in `*written`, and get
//! `MUR_STATUS_BUFFER_TOO_SMALL` if it did not fit.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mur::bounds::{dp_bound, ds_bound, normalized_ds_bound, CumulativeBoundProfile};
use mur::majorization::dominated_by_profile;
use mur::measures::Measure;
use mur::num_complex::Complex64;
use mur::quantum::{born_probabilities, builtin_basis, BuiltinBasis, OrthonormalBasis, ProbabilityVector, PureState};
use mur::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MurStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed input: bad name, bad JSON, invalid state or distribution.
    InvalidInput = 2,
    /// Dimension, arity or size-limit violation.
    Semantic = 3,
    /// The measure is undefined on this input (log-product with zeros).
    Undefined = 4,
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// Bound construction selector for [`mur_bound`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MurBoundKind {
    DirectProduct = 0,
    DirectSum = 1,
    /// Two-measurement direct sum scaled by 1/2.
    NormalizedDirectSum = 2,
}

/// Opaque orthonormal basis.
pub struct MurBasis(OrthonormalBasis);

/// Opaque cumulative bound profile.
pub struct MurProfile(CumulativeBoundProfile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MurStatus {
    match e {
        Error::Undefined { .. } => MurStatus::Undefined,
        _ if e.exit_code() == 3 => MurStatus::Semantic,
        _ => MurStatus::InvalidInput,
    }
}

fn fail(e: Error) -> MurStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), MurStatus>) -> MurStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MurStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            MurStatus::Internal
        }
    }
}

fn lift<T>(r: mur::Result<T>) -> Result<T, MurStatus> {
    r.map_err(fail)
}

fn null(what: &str) -> MurStatus {
    set_error(format!("{what} is null"));
    MurStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, MurStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        MurStatus::InvalidInput
    })
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], MurStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), MurStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_array(values: &[f64], buf: *mut f64, capacity: usize, written: *mut usize) -> Result<(), MurStatus> {
    if written.is_null() {
        return Err(null("written"));
    }
    written.write(values.len());
    if capacity < values.len() {
        set_error(format!("buffer holds {capacity} values, {} needed", values.len()));
        return Err(MurStatus::BufferTooSmall);
    }
    if !values.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mur_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Built-in basis by name: "A", "B", "C1", "C2", "C3".
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mur_basis_builtin(name: *const c_char, out: *mut *mut MurBasis) -> MurStatus {
    guard(|| {
        let which: BuiltinBasis = lift(str_arg(name, "name")?.parse())?;
        write_out(out, Box::into_raw(Box::new(MurBasis(builtin_basis(which)))), "out")
    })
}

/// Basis from the JSON basis-file format (`dim`, `vectors` of `[re, im]`
/// columns, `label`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mur_basis_from_json(json: *const c_char, out: *mut *mut MurBasis) -> MurStatus {
    guard(|| {
        let basis = lift(OrthonormalBasis::from_json_str(str_arg(json, "json")?))?;
        write_out(out, Box::into_raw(Box::new(MurBasis(basis))), "out")
    })
}

/// Basis from `dim * dim` real and imaginary parts, vector `j` stored at
/// `[j * dim, (j + 1) * dim)`. `label` may be null.
///
/// # Safety
/// `re` and `im` must point to `dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mur_basis_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    label: *const c_char,
    out: *mut *mut MurBasis,
) -> MurStatus {
    guard(|| {
        let n = dim.checked_mul(dim).ok_or_else(|| fail(Error::InvalidMatrix("dimension overflow".into())))?;
        let re = slice_arg(re, n, "re")?;
        let im = slice_arg(im, n, "im")?;
        let label = if label.is_null() { "basis" } else { str_arg(label, "label")? };
        let vectors =
            (0..dim).map(|j| (0..dim).map(|i| Complex64::new(re[j * dim + i], im[j * dim + i])).collect()).collect();
        let basis = lift(OrthonormalBasis::new(label, vectors))?;
        write_out(out, Box::into_raw(Box::new(MurBasis(basis))), "out")
    })
}

/// Dimension of `basis`, 0 for null.
///
/// # Safety
/// `basis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mur_basis_dim(basis: *const MurBasis) -> usize {
    basis.as_ref().map_or(0, |b| b.0.dim())
}

/// # Safety
/// `basis` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mur_basis_free(basis: *mut MurBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Bound profile of `count` measurements.
///
/// # Safety
/// `bases` must point to `count` live basis handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mur_bound(
    bases: *const *const MurBasis,
    count: usize,
    kind: i32,
    out: *mut *mut MurProfile,
) -> MurStatus {
    guard(|| {
        let handles = slice_arg(bases, count, "bases")?;
        let refs = handles
            .iter()
            .map(|&h| h.as_ref().map(|b| &b.0).ok_or_else(|| null("basis handle")))
            .collect::<Result<Vec<_>, _>>()?;
        let profile = match kind {
            k if k == MurBoundKind::DirectProduct as i32 => lift(dp_bound(&refs))?,
            k if k == MurBoundKind::DirectSum as i32 => lift(ds_bound(&refs))?,
            k if k == MurBoundKind::NormalizedDirectSum as i32 => lift(normalized_ds_bound(&refs))?,
            k => {
                set_error(format!("unknown bound kind {k}"));
                return Err(MurStatus::InvalidInput);
            }
        };
        write_out(out, Box::into_raw(Box::new(MurProfile(profile))), "out")
    })
}

/// Number of cumulative entries, 0 for null.
///
/// # Safety
/// `profile` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mur_profile_len(profile: *const MurProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.0.omega().len())
}

/// Cumulative values `Omega_1, ..., Omega_n`.
///
/// # Safety
/// `buf` must hold `capacity` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mur_profile_omega(
    profile: *const MurProfile,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> MurStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        write_array(p.0.omega(), buf, capacity, written)
    })
}

/// Increments `Omega_k - Omega_{k-1}`.
///
/// # Safety
/// As for [`mur_profile_omega`].
#[no_mangle]
pub unsafe extern "C" fn mur_profile_increments(
    profile: *const MurProfile,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> MurStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        write_array(&p.0.increments(), buf, capacity, written)
    })
}

/// Shannon entropy of the increments, in bits.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mur_profile_entropy(profile: *const MurProfile, out: *mut f64) -> MurStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        write_out(out, p.0.entropy_bits(), "out")
    })
}

/// Profile as JSON; release the string with [`mur_string_free`].
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mur_profile_to_json(profile: *const MurProfile, out: *mut *mut c_char) -> MurStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        let text = lift(mur::output::json_rounded(&p.0.to_json()).map_err(Error::from))?;
        let c = CString::new(text).map_err(|_| fail(Error::Parse("interior NUL".into())))?;
        write_out(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `profile` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mur_profile_free(profile: *mut MurProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mur_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Outcome probabilities of the normalized pure state `re + i im` measured
/// in `basis`.
///
/// # Safety
/// `re`, `im` and `out` must each hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn mur_born_probabilities(
    basis: *const MurBasis,
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut f64,
) -> MurStatus {
    guard(|| {
        let b = basis.as_ref().ok_or_else(|| null("basis"))?;
        let re = slice_arg(re, dim, "re")?;
        let im = slice_arg(im, dim, "im")?;
        let state = lift(PureState::new(re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()))?;
        let p = lift(born_probabilities(&state, &b.0))?;
        let mut written = 0usize;
        write_array(p.entries(), out, dim, &mut written)
    })
}

/// Evaluates the named measure ("shannon", "sum", "max", "s-minus-m",
/// "log-product", "min-entropy") on a nonnegative vector.
///
/// # Safety
/// `name` must be NUL-terminated; `x` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mur_measure_evaluate(
    name: *const c_char,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> MurStatus {
    guard(|| {
        let m: Measure = lift(str_arg(name, "name")?.parse())?;
        let v = lift(ProbabilityVector::from_entries(slice_arg(x, len, "x")?.to_vec()))?;
        write_out(out, lift(m.evaluate(&v))?, "out")
    })
}

/// Whether `x` (total mass equal to the profile's) respects `profile` at
/// every prefix within `tol`.
///
/// # Safety
/// `x` must hold `len` doubles; `profile` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mur_dominated_by_profile(
    x: *const f64,
    len: usize,
    profile: *const MurProfile,
    tol: f64,
    out: *mut bool,
) -> MurStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        let v = lift(ProbabilityVector::from_entries(slice_arg(x, len, "x")?.to_vec()))?;
        write_out(out, dominated_by_profile(&v, &p.0, tol), "out")
    })
}
