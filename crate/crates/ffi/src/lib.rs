//! C ABI for the atpf core: rank bounds, dense tensors, antisymmetrization,
//! and heuristic rank search behind opaque handles and status codes.
//!
//! Conventions:
//! * every function returns [`AtpfStatus`]; results travel through out
//!   pointers;
//! * handles allocated here must be released with the matching `*_free`;
//! * on any non-OK status a thread-local message is set, readable with
//!   [`atpf_last_error_message`];
//! * indices are 1-based, matching the core library and file formats.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use atpf::als::{rank_search, AlsOptions, RankReport};
use atpf::antisym::{antisymmetrize, basis_tensor, determinant_tensor};
use atpf::bounds::{antisym_rank_bounds, asymptotic_lower_bound, det_rank_bounds};
use atpf::multi_index::MultiIndex;
use atpf::tensor::DenseTensor;

/// Status codes returned by every binding.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtpfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    Io = 4,
    Utf8 = 5,
    Overflow = 6,
}

/// Opaque dense complex tensor.
pub struct AtpfTensor(DenseTensor);

/// Opaque rank-search report.
pub struct AtpfRankReport(RankReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(msg).unwrap_or_default();
    });
}

fn status_of(err: &atpf::Error) -> AtpfStatus {
    match err {
        atpf::Error::Io(_) => AtpfStatus::Io,
        atpf::Error::BoundOverflow(_) => AtpfStatus::Overflow,
        atpf::Error::Numeric(_) | atpf::Error::Degenerate(_) => AtpfStatus::Numeric,
        _ => AtpfStatus::InvalidArgument,
    }
}

fn fail(err: atpf::Error) -> AtpfStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null_arg(what: &str) -> AtpfStatus {
    set_error(format!("null pointer argument: {what}"));
    AtpfStatus::NullPointer
}

/// Copies the last error message (thread-local) into `buf` as a
/// NUL-terminated string, truncating to `cap`. Returns the full message
/// length in bytes (excluding the terminator).
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null (query mode).
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                // always terminate
                *buf.add(n - 1) = 0;
            }
        }
        bytes.len() - 1
    })
}

/// Library version as a static NUL-terminated string.
#[unsafe(no_mangle)]
pub extern "C" fn atpf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Determinant-tensor CP-rank bounds:
/// `binom(N, floor(N/2)) <= rank <= floor(N! (5/6)^floor(N/3))`, exact.
///
/// # Safety
/// `lower` and `upper` must be valid writable pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_det_rank_bounds(
    n: u32,
    lower: *mut u64,
    upper: *mut u64,
) -> AtpfStatus {
    if lower.is_null() || upper.is_null() {
        return null_arg("lower/upper");
    }
    match det_rank_bounds(n as usize) {
        Ok((lo, hi)) => {
            unsafe {
                *lower = lo;
                *upper = hi;
            }
            AtpfStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Rank bounds for nonzero antisymmetric tensors in the `(N, K)` space.
/// Fails with `OVERFLOW` when the exact value exceeds `u64`.
///
/// # Safety
/// `lower` and `upper` must be valid writable pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_antisym_rank_bounds(
    n: u32,
    k: u32,
    lower: *mut u64,
    upper: *mut u64,
) -> AtpfStatus {
    if lower.is_null() || upper.is_null() {
        return null_arg("lower/upper");
    }
    match antisym_rank_bounds(n as usize, k as usize) {
        Ok((lo, hi)) => {
            let (Ok(lo), Ok(hi)) = (u64::try_from(lo), u64::try_from(hi)) else {
                set_error("bound exceeds u64");
                return AtpfStatus::Overflow;
            };
            unsafe {
                *lower = lo;
                *upper = hi;
            }
            AtpfStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// The exact `binom(N, floor(N/2))` alongside the `2^N / sqrt(N)` estimate.
///
/// # Safety
/// `exact` and `estimate` must be valid writable pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_asymptotic_lower_bound(
    n: u32,
    exact: *mut u64,
    estimate: *mut f64,
) -> AtpfStatus {
    if exact.is_null() || estimate.is_null() {
        return null_arg("exact/estimate");
    }
    match asymptotic_lower_bound(n as usize) {
        Ok((ex, est)) => {
            let Ok(ex) = u64::try_from(ex) else {
                set_error("binomial exceeds u64");
                return AtpfStatus::Overflow;
            };
            unsafe {
                *exact = ex;
                *estimate = est;
            }
            AtpfStatus::Ok
        }
        Err(err) => fail(err),
    }
}

fn emit_tensor(out: *mut *mut AtpfTensor, tensor: DenseTensor) -> AtpfStatus {
    unsafe {
        *out = Box::into_raw(Box::new(AtpfTensor(tensor)));
    }
    AtpfStatus::Ok
}

/// Allocates the order-`N` determinant tensor.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_determinant_tensor(n: u32, out: *mut *mut AtpfTensor) -> AtpfStatus {
    if out.is_null() {
        return null_arg("out");
    }
    match determinant_tensor(n as usize) {
        Ok(t) => emit_tensor(out, t),
        Err(err) => fail(err),
    }
}

/// Allocates the basis tensor `E_k` for a strictly increasing 1-based
/// multi-index of length `len` in ambient dimension `dim`.
///
/// # Safety
/// `indices` must point to `len` readable `u32`s; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_basis_tensor(
    indices: *const u32,
    len: usize,
    dim: u32,
    out: *mut *mut AtpfTensor,
) -> AtpfStatus {
    if indices.is_null() || out.is_null() {
        return null_arg("indices/out");
    }
    let slice = unsafe { std::slice::from_raw_parts(indices, len) };
    let entries: Vec<usize> = slice.iter().map(|&v| v as usize).collect();
    let result = MultiIndex::new(entries).and_then(|k| basis_tensor(&k, dim as usize));
    match result {
        Ok(t) => emit_tensor(out, t),
        Err(err) => fail(err),
    }
}

/// Reads a tensor from the plain-text format.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_tensor_read(
    path: *const c_char,
    out: *mut *mut AtpfTensor,
) -> AtpfStatus {
    if path.is_null() || out.is_null() {
        return null_arg("path/out");
    }
    let path = match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(p) => p,
        Err(_) => {
            set_error("path is not valid UTF-8");
            return AtpfStatus::Utf8;
        }
    };
    match DenseTensor::read_from_path(path) {
        Ok(t) => emit_tensor(out, t),
        Err(err) => fail(err),
    }
}

/// Writes a tensor in the plain-text format.
///
/// # Safety
/// `tensor` must be a live handle; `path` a valid NUL-terminated string.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_tensor_write(
    tensor: *const AtpfTensor,
    path: *const c_char,
) -> AtpfStatus {
    if tensor.is_null() || path.is_null() {
        return null_arg("tensor/path");
    }
    let path = match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(p) => p,
        Err(_) => {
            set_error("path is not valid UTF-8");
            return AtpfStatus::Utf8;
        }
    };
    match unsafe { &(*tensor).0 }.write_to_path(path) {
        Ok(()) => AtpfStatus::Ok,
        Err(err) => fail(err),
    }
}

/// Tensor order (number of modes).
///
/// # Safety
/// `tensor` must be a live handle; `order` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_tensor_order(
    tensor: *const AtpfTensor,
    order: *mut u32,
) -> AtpfStatus {
    if tensor.is_null() || order.is_null() {
        return null_arg("tensor/order");
    }
    unsafe {
        *order = (*tensor).0.order() as u32;
    }
    AtpfStatus::Ok
}

/// Copies the mode dimensions into `dims` (must hold at least `order`
/// entries).
///
/// # Safety
/// `tensor` must be a live handle; `dims` must point to `cap` writable u32s.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_tensor_dims(
    tensor: *const AtpfTensor,
    dims: *mut u32,
    cap: usize,
) -> AtpfStatus {
    if tensor.is_null() || dims.is_null() {
        return null_arg("tensor/dims");
    }
    let t = unsafe { &(*tensor).0 };
    if cap < t.order() {
        set_error(format!("dims buffer holds {cap}, need {}", t.order()));
        return AtpfStatus::InvalidArgument;
    }
    for (i, &d) in t.dims().iter().enumerate() {
        unsafe {
            *dims.add(i) = d as u32;
        }
    }
    AtpfStatus::Ok
}

/// Entry at a 1-based multi-index of length `len`.
///
/// # Safety
/// `tensor` live; `index` points to `len` readable u32s; `re`/`im` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_tensor_get(
    tensor: *const AtpfTensor,
    index: *const u32,
    len: usize,
    re: *mut f64,
    im: *mut f64,
) -> AtpfStatus {
    if tensor.is_null() || index.is_null() || re.is_null() || im.is_null() {
        return null_arg("tensor/index/re/im");
    }
    let idx: Vec<usize> = unsafe { std::slice::from_raw_parts(index, len) }
        .iter()
        .map(|&v| v as usize)
        .collect();
    match unsafe { &(*tensor).0 }.get(&idx) {
        Ok(z) => {
            unsafe {
                *re = z.re;
                *im = z.im;
            }
            AtpfStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Allocates the antisymmetrized tensor (signed average over all index
/// permutations).
///
/// # Safety
/// `tensor` must be a live handle; `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_tensor_antisymmetrize(
    tensor: *const AtpfTensor,
    out: *mut *mut AtpfTensor,
) -> AtpfStatus {
    if tensor.is_null() || out.is_null() {
        return null_arg("tensor/out");
    }
    match antisymmetrize(unsafe { &(*tensor).0 }) {
        Ok(t) => emit_tensor(out, t),
        Err(err) => fail(err),
    }
}

/// Releases a tensor handle. Null is a no-op.
///
/// # Safety
/// `tensor` must have been returned by this library and not freed before.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_tensor_free(tensor: *mut AtpfTensor) {
    if !tensor.is_null() {
        drop(unsafe { Box::from_raw(tensor) });
    }
}

/// Heuristic rank search: best-of-restarts ALS fits from the analytic lower
/// bound (or 1) up to `p_max`. Pass 0 for `restarts`/`max_sweeps` to use the
/// defaults (16 restarts, 2000 sweeps); `rel_tol <= 0` selects 1e-8.
///
/// # Safety
/// `tensor` must be a live handle; `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_rank_search(
    tensor: *const AtpfTensor,
    p_max: u32,
    rel_tol: f64,
    restarts: u32,
    seed: u64,
    max_sweeps: u32,
    out: *mut *mut AtpfRankReport,
) -> AtpfStatus {
    if tensor.is_null() || out.is_null() {
        return null_arg("tensor/out");
    }
    let defaults = AlsOptions::default();
    let opts = AlsOptions {
        rel_tol: if rel_tol > 0.0 {
            rel_tol
        } else {
            defaults.rel_tol
        },
        restarts: if restarts > 0 {
            restarts as usize
        } else {
            defaults.restarts
        },
        max_sweeps: if max_sweeps > 0 {
            max_sweeps as usize
        } else {
            defaults.max_sweeps
        },
        seed,
        ..defaults
    };
    match rank_search(unsafe { &(*tensor).0 }, p_max as usize, &opts) {
        Ok(report) => {
            unsafe {
                *out = Box::into_raw(Box::new(AtpfRankReport(report)));
            }
            AtpfStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Estimated rank, or -1 when no tried rank met the tolerance. The estimate
/// is heuristic: an ALS failure is never a rank certificate.
///
/// # Safety
/// `report` must be a live handle; `estimated` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_rank_report_estimated(
    report: *const AtpfRankReport,
    estimated: *mut i64,
) -> AtpfStatus {
    if report.is_null() || estimated.is_null() {
        return null_arg("report/estimated");
    }
    unsafe {
        *estimated = match (*report).0.estimated_rank {
            Some(rank) => rank as i64,
            None => -1,
        };
    }
    AtpfStatus::Ok
}

/// Analytic bounds carried by the report.
///
/// # Safety
/// `report` must be a live handle; `lower`/`upper` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_rank_report_bounds(
    report: *const AtpfRankReport,
    lower: *mut u64,
    upper: *mut u64,
) -> AtpfStatus {
    if report.is_null() || lower.is_null() || upper.is_null() {
        return null_arg("report/lower/upper");
    }
    let r = unsafe { &(*report).0 };
    let (Ok(lo), Ok(hi)) = (u64::try_from(r.lower_bound), u64::try_from(r.upper_bound)) else {
        set_error("bound exceeds u64");
        return AtpfStatus::Overflow;
    };
    unsafe {
        *lower = lo;
        *upper = hi;
    }
    AtpfStatus::Ok
}

/// Best residual recorded for a rank tried by the search.
///
/// # Safety
/// `report` must be a live handle; `residual` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_rank_report_residual(
    report: *const AtpfRankReport,
    rank: u32,
    residual: *mut f64,
) -> AtpfStatus {
    if report.is_null() || residual.is_null() {
        return null_arg("report/residual");
    }
    match unsafe { &(*report).0 }.residuals.get(&(rank as usize)) {
        Some(&res) => {
            unsafe {
                *residual = res;
            }
            AtpfStatus::Ok
        }
        None => {
            set_error(format!("rank {rank} was not tried by the search"));
            AtpfStatus::InvalidArgument
        }
    }
}

/// Copies the report's CSV block into `buf` (NUL-terminated, truncating to
/// `cap`). Returns the full CSV length in bytes.
///
/// # Safety
/// `report` must be a live handle; `buf` must point to `cap` writable bytes
/// or be null (query mode).
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_rank_report_csv(
    report: *const AtpfRankReport,
    buf: *mut c_char,
    cap: usize,
) -> usize {
    if report.is_null() {
        return 0;
    }
    let csv = unsafe { &(*report).0 }.to_csv();
    let bytes = csv.as_bytes();
    if !buf.is_null() && cap > 0 {
        let n = bytes.len().min(cap - 1);
        unsafe {
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
    }
    bytes.len()
}

/// Releases a rank report handle. Null is a no-op.
///
/// # Safety
/// `report` must have been returned by this library and not freed before.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn atpf_rank_report_free(report: *mut AtpfRankReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}
