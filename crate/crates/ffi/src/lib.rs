//! C ABI for `omegalab`.
//!
//! Every fallible call returns an [`OmgStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`omg_last_error_message`]. Handles are opaque; each `*_new` or
//! `*_profile` result must be released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use omegalab::averages::{
    average_along_omega, ek_weighted_average, gaussian_cdf, weyl_sum, AverageScheme,
    RealTestFunction,
};
use omegalab::dynamics::rotation_two_points_liouville;
use omegalab::sieve::{omega_oracle, OmegaProfile, Sieve, SieveConfig};
use omegalab::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidRange = 3,
    RangeTooLarge = 4,
    BufferTooSmall = 5,
    Io = 6,
    Panic = 7,
}

/// Values accepted as the `scheme` argument of
/// [`omg_profile_liouville_average`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmgScheme {
    Cesaro = 0,
    Logarithmic = 1,
}

/// A configured sieve. Opaque.
pub struct OmgSieve(Sieve);

/// `pi_k` counts and per-`k` reciprocal sums at one `N`. Opaque.
pub struct OmgProfile(OmegaProfile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OmgStatus {
    match e {
        Error::InvalidRange { .. } | Error::InvalidInterval { .. } => OmgStatus::InvalidRange,
        Error::RangeTooLarge { .. } | Error::SearchExhausted { .. } => OmgStatus::RangeTooLarge,
        Error::Io(_) | Error::CacheFormat(_) => OmgStatus::Io,
        _ => OmgStatus::InvalidArgument,
    }
}

/// Runs `f`, recording the message of any error or panic.
fn guard<F>(f: F) -> OmgStatus
where
    F: FnOnce() -> Result<(), (OmgStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OmgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            OmgStatus::Panic
        }
    }
}

fn lib(e: Error) -> (OmgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (OmgStatus, String) {
    (OmgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (OmgStatus, String)> {
    // SAFETY: the caller passes a pointer obtained from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), (OmgStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null, and the caller guarantees it points to writable storage.
    unsafe { p.write(v) };
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len - 1` bytes) and returns the full message
/// length without the NUL. Returns 0 if there is no message.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn omg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: `buf` has room for `len` bytes and n < len.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Creates a sieve for `1..=limit`. `workers = 0` uses every available core.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn omg_sieve_new(
    limit: u64,
    workers: u32,
    out: *mut *mut OmgSieve,
) -> OmgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut config = SieveConfig::with_limit(limit);
        if workers > 0 {
            config = config.workers(workers as usize);
        }
        let sieve = Sieve::new(config).map_err(lib)?;
        unsafe { write(out, Box::into_raw(Box::new(OmgSieve(sieve))), "out") }
    })
}

/// Releases a sieve. Null is ignored.
///
/// # Safety
/// `sieve` must be null or a handle from [`omg_sieve_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn omg_sieve_free(sieve: *mut OmgSieve) {
    if !sieve.is_null() {
        // SAFETY: allocated by `omg_sieve_new` via Box.
        drop(unsafe { Box::from_raw(sieve) });
    }
}

/// Writes `Omega(n)` for `lo <= n < hi` into `out[0 .. hi - lo]`.
///
/// # Safety
/// `sieve` must be a live handle; `out` must point to `out_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn omg_sieve_segment(
    sieve: *const OmgSieve,
    lo: u64,
    hi: u64,
    out: *mut u8,
    out_len: usize,
) -> OmgStatus {
    guard(|| {
        let sieve = unsafe { deref(sieve, "sieve") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let seg = sieve.0.sieve_segment(lo, hi).map_err(lib)?;
        if seg.len() > out_len {
            return Err((
                OmgStatus::BufferTooSmall,
                format!("need {} bytes, buffer has {out_len}", seg.len()),
            ));
        }
        // SAFETY: `out` has room for `out_len >= seg.len()` bytes.
        unsafe { ptr::copy_nonoverlapping(seg.counts().as_ptr(), out, seg.len()) };
        Ok(())
    })
}

/// Builds the `Omega` profile of `1..=n`.
///
/// # Safety
/// `sieve` must be a live handle; `out` must be valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn omg_sieve_profile(
    sieve: *const OmgSieve,
    n: u64,
    out: *mut *mut OmgProfile,
) -> OmgStatus {
    guard(|| {
        let sieve = unsafe { deref(sieve, "sieve") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let profile = sieve.0.profile(n).map_err(lib)?;
        unsafe { write(out, Box::into_raw(Box::new(OmgProfile(profile))), "out") }
    })
}

/// Releases a profile. Null is ignored.
///
/// # Safety
/// `profile` must be null or a handle from [`omg_sieve_profile`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn omg_profile_free(profile: *mut OmgProfile) {
    if !profile.is_null() {
        // SAFETY: allocated by `omg_sieve_profile` via Box.
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// The `N` of the profile.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn omg_profile_n(profile: *const OmgProfile, out: *mut u64) -> OmgStatus {
    guard(|| {
        let p = unsafe { deref(profile, "profile") }?;
        unsafe { write(out, p.0.n(), "out") }
    })
}

/// Largest `k` with `pi_k(N) > 0`.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn omg_profile_k_max(profile: *const OmgProfile, out: *mut u32) -> OmgStatus {
    guard(|| {
        let p = unsafe { deref(profile, "profile") }?;
        unsafe { write(out, p.0.histogram().k_max() as u32, "out") }
    })
}

/// `pi_k(N)`; 0 for `k` past the largest occurring value.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn omg_profile_pi_k(
    profile: *const OmgProfile,
    k: u32,
    out: *mut u64,
) -> OmgStatus {
    guard(|| {
        let p = unsafe { deref(profile, "profile") }?;
        unsafe { write(out, p.0.histogram().get(k as usize), "out") }
    })
}

/// Average of `lambda(n)` over `n <= N` under `scheme` (an [`OmgScheme`]
/// value).
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn omg_profile_liouville_average(
    profile: *const OmgProfile,
    scheme: u32,
    out: *mut f64,
) -> OmgStatus {
    guard(|| {
        let p = unsafe { deref(profile, "profile") }?;
        let scheme = match scheme {
            s if s == OmgScheme::Cesaro as u32 => AverageScheme::Cesaro,
            s if s == OmgScheme::Logarithmic as u32 => AverageScheme::Logarithmic,
            s => return Err((OmgStatus::InvalidArgument, format!("unknown scheme {s}"))),
        };
        let v = average_along_omega(&p.0, &rotation_two_points_liouville(), scheme).re;
        unsafe { write(out, v, "out") }
    })
}

/// `(1/N) sum_{n <= N} exp(2 pi i beta Omega(n))`.
///
/// # Safety
/// `profile` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn omg_profile_weyl_sum(
    profile: *const OmgProfile,
    beta: f64,
    re: *mut f64,
    im: *mut f64,
) -> OmgStatus {
    guard(|| {
        let p = unsafe { deref(profile, "profile") }?;
        if !beta.is_finite() {
            return Err((
                OmgStatus::InvalidArgument,
                format!("beta must be finite, got {beta}"),
            ));
        }
        let z = weyl_sum(&p.0, beta);
        unsafe {
            write(re, z.re, "re")?;
            write(im, z.im, "im")
        }
    })
}

/// `(1/N) sum_{3 <= n <= N} F((Omega(n) - log log N) / sqrt(log log N))`
/// for `F` the indicator of `[a, b]`, or its linear-ramp smoothing of
/// width `ramp` when `ramp > 0`.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn omg_profile_ek_weighted_average(
    profile: *const OmgProfile,
    a: f64,
    b: f64,
    ramp: f64,
    out: *mut f64,
) -> OmgStatus {
    guard(|| {
        let p = unsafe { deref(profile, "profile") }?;
        let f = if ramp == 0.0 {
            RealTestFunction::indicator(a, b)
        } else {
            RealTestFunction::smoothed_indicator(a, b, ramp)
        }
        .map_err(lib)?;
        let v = ek_weighted_average(&p.0, &f).map_err(lib)?;
        unsafe { write(out, v, "out") }
    })
}

/// Standard normal distribution function.
#[no_mangle]
pub extern "C" fn omg_gaussian_cdf(x: f64) -> f64 {
    gaussian_cdf(x)
}

/// `Omega(n)` by trial division; 0 for `n <= 1`.
#[no_mangle]
pub extern "C" fn omg_omega(n: u64) -> u32 {
    omega_oracle(n)
}
