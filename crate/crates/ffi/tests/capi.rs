//! Exercises the C ABI surface exactly as a foreign caller would: through
//! raw pointers and status codes.

use std::ffi::{c_char, CString};

use atpf_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let len = unsafe { atpf_last_error_message(buf.as_mut_ptr() as *mut c_char, buf.len()) };
    buf.truncate(len.min(buf.len() - 1));
    String::from_utf8_lossy(&buf).trim_end_matches('\0').to_string()
}

#[test]
fn version_is_non_empty() {
    let ptr = atpf_version();
    assert!(!ptr.is_null());
    let s = unsafe { std::ffi::CStr::from_ptr(ptr) }.to_str().unwrap();
    assert!(!s.is_empty());
}

#[test]
fn det_bounds_roundtrip() {
    let (mut lo, mut hi) = (0u64, 0u64);
    let status = unsafe { atpf_det_rank_bounds(3, &mut lo, &mut hi) };
    assert_eq!(status, AtpfStatus::Ok);
    assert_eq!((lo, hi), (3, 5));

    let status = unsafe { atpf_det_rank_bounds(21, &mut lo, &mut hi) };
    assert_eq!(status, AtpfStatus::Overflow);
    assert!(last_error().contains("20"));

    let status = unsafe { atpf_det_rank_bounds(3, std::ptr::null_mut(), &mut hi) };
    assert_eq!(status, AtpfStatus::NullPointer);
}

#[test]
fn antisym_bounds_and_asymptotic() {
    let (mut lo, mut hi) = (0u64, 0u64);
    assert_eq!(
        unsafe { atpf_antisym_rank_bounds(3, 3, &mut lo, &mut hi) },
        AtpfStatus::Ok
    );
    assert_eq!((lo, hi), (3, 5));
    assert_eq!(
        unsafe { atpf_antisym_rank_bounds(3, 2, &mut lo, &mut hi) },
        AtpfStatus::InvalidArgument
    );
    assert!(last_error().contains("trivial"));

    let (mut exact, mut est) = (0u64, 0f64);
    assert_eq!(
        unsafe { atpf_asymptotic_lower_bound(20, &mut exact, &mut est) },
        AtpfStatus::Ok
    );
    assert_eq!(exact, 184_756);
    assert!((est - 2f64.powi(20) / 20f64.sqrt()).abs() < 1e-9);
}

#[test]
fn tensor_lifecycle_and_antisymmetrize() {
    let mut tensor: *mut AtpfTensor = std::ptr::null_mut();
    assert_eq!(
        unsafe { atpf_determinant_tensor(2, &mut tensor) },
        AtpfStatus::Ok
    );
    assert!(!tensor.is_null());

    let mut order = 0u32;
    assert_eq!(unsafe { atpf_tensor_order(tensor, &mut order) }, AtpfStatus::Ok);
    assert_eq!(order, 2);
    let mut dims = [0u32; 2];
    assert_eq!(
        unsafe { atpf_tensor_dims(tensor, dims.as_mut_ptr(), dims.len()) },
        AtpfStatus::Ok
    );
    assert_eq!(dims, [2, 2]);

    let (mut re, mut im) = (0f64, 0f64);
    let idx = [1u32, 2u32];
    assert_eq!(
        unsafe { atpf_tensor_get(tensor, idx.as_ptr(), 2, &mut re, &mut im) },
        AtpfStatus::Ok
    );
    assert_eq!((re, im), (1.0, 0.0));
    let bad = [0u32, 2u32];
    assert_eq!(
        unsafe { atpf_tensor_get(tensor, bad.as_ptr(), 2, &mut re, &mut im) },
        AtpfStatus::InvalidArgument
    );

    // antisymmetrize is a fixed point here
    let mut anti: *mut AtpfTensor = std::ptr::null_mut();
    assert_eq!(
        unsafe { atpf_tensor_antisymmetrize(tensor, &mut anti) },
        AtpfStatus::Ok
    );
    assert_eq!(
        unsafe { atpf_tensor_get(anti, idx.as_ptr(), 2, &mut re, &mut im) },
        AtpfStatus::Ok
    );
    assert_eq!((re, im), (1.0, 0.0));

    unsafe {
        atpf_tensor_free(anti);
        atpf_tensor_free(tensor);
        atpf_tensor_free(std::ptr::null_mut()); // no-op
    }
}

#[test]
fn basis_tensor_and_file_io() {
    let mut tensor: *mut AtpfTensor = std::ptr::null_mut();
    let indices = [1u32, 3u32];
    assert_eq!(
        unsafe { atpf_basis_tensor(indices.as_ptr(), 2, 3, &mut tensor) },
        AtpfStatus::Ok
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e13.txt");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { atpf_tensor_write(tensor, cpath.as_ptr()) },
        AtpfStatus::Ok
    );

    let mut back: *mut AtpfTensor = std::ptr::null_mut();
    assert_eq!(
        unsafe { atpf_tensor_read(cpath.as_ptr(), &mut back) },
        AtpfStatus::Ok
    );
    let (mut re, mut im) = (0f64, 0f64);
    let idx = [3u32, 1u32];
    assert_eq!(
        unsafe { atpf_tensor_get(back, idx.as_ptr(), 2, &mut re, &mut im) },
        AtpfStatus::Ok
    );
    assert_eq!((re, im), (-1.0, 0.0));

    let missing = CString::new(dir.path().join("nope.txt").to_str().unwrap()).unwrap();
    let mut nope: *mut AtpfTensor = std::ptr::null_mut();
    assert_eq!(
        unsafe { atpf_tensor_read(missing.as_ptr(), &mut nope) },
        AtpfStatus::Io
    );

    // invalid multi-index
    let bad = [2u32, 2u32];
    let mut t2: *mut AtpfTensor = std::ptr::null_mut();
    assert_eq!(
        unsafe { atpf_basis_tensor(bad.as_ptr(), 2, 3, &mut t2) },
        AtpfStatus::InvalidArgument
    );

    unsafe {
        atpf_tensor_free(back);
        atpf_tensor_free(tensor);
    }
}

#[test]
fn rank_search_via_c_abi() {
    let mut tensor: *mut AtpfTensor = std::ptr::null_mut();
    assert_eq!(
        unsafe { atpf_determinant_tensor(2, &mut tensor) },
        AtpfStatus::Ok
    );
    let mut report: *mut AtpfRankReport = std::ptr::null_mut();
    assert_eq!(
        unsafe { atpf_rank_search(tensor, 3, 0.0, 0, 0, 0, &mut report) },
        AtpfStatus::Ok
    );
    let mut estimated = 0i64;
    assert_eq!(
        unsafe { atpf_rank_report_estimated(report, &mut estimated) },
        AtpfStatus::Ok
    );
    assert_eq!(estimated, 2);

    let (mut lo, mut hi) = (0u64, 0u64);
    assert_eq!(
        unsafe { atpf_rank_report_bounds(report, &mut lo, &mut hi) },
        AtpfStatus::Ok
    );
    assert_eq!((lo, hi), (2, 2));

    let mut residual = 1.0f64;
    assert_eq!(
        unsafe { atpf_rank_report_residual(report, 2, &mut residual) },
        AtpfStatus::Ok
    );
    assert!(residual <= 1e-8);
    assert_eq!(
        unsafe { atpf_rank_report_residual(report, 1, &mut residual) },
        AtpfStatus::InvalidArgument
    );

    let needed = unsafe { atpf_rank_report_csv(report, std::ptr::null_mut(), 0) };
    assert!(needed > 0);
    let mut buf = vec![0u8; needed + 1];
    let written = unsafe {
        atpf_rank_report_csv(report, buf.as_mut_ptr() as *mut c_char, buf.len())
    };
    assert_eq!(written, needed);
    let csv = String::from_utf8_lossy(&buf[..needed]).to_string();
    assert!(csv.starts_with("# lower=2 upper=2 heuristic=true\n"));
    assert!(csv.contains("rank,best_residual,restarts_used"));

    unsafe {
        atpf_rank_report_free(report);
        atpf_tensor_free(tensor);
    }
}

#[test]
fn generated_header_compiles_as_c() {
    // best-effort syntax check of the cbindgen output with the system cc
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("atpf.h");
    assert!(header.exists(), "header was not generated at {header:?}");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "atpf_det_rank_bounds",
        "atpf_rank_search",
        "atpf_tensor_free",
        "ATPF_STATUS_OK",
        "typedef struct AtpfTensor AtpfTensor;",
    ] {
        assert!(text.contains(symbol), "header missing `{symbol}`");
    }
    let cc = ["cc", "gcc", "clang"]
        .iter()
        .find(|cc| {
            std::process::Command::new(cc)
                .arg("--version")
                .output()
                .is_ok()
        })
        .copied();
    if let Some(cc) = cc {
        let status = std::process::Command::new(cc)
            .args(["-fsyntax-only", "-x", "c", header.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success(), "{cc} rejected the generated header");
    }
}
