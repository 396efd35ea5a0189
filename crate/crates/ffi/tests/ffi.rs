use std::ffi::{c_char, CStr};
use std::ptr;

use degenkernel_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { dk_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn model_kernel_value() {
    let mut q = 0.0;
    assert_eq!(unsafe { dk_eval_q(0.0, 0.05, 0.06, 0.01, &mut q) }, DkStatus::Ok);
    assert!((q - 10.142266021023).abs() < 1e-9);
    assert_eq!(unsafe { dk_eval_q(0.0, -1.0, 0.06, 0.01, &mut q) }, DkStatus::Domain);
    assert!(last_error().contains("z = -1"));
    assert_eq!(unsafe { dk_eval_q(0.0, 1.0, 1.0, 1.0, ptr::null_mut()) }, DkStatus::NullPointer);
}

#[test]
fn kernel_handle_lifecycle() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dk_kernel_new_constant_drift(1.0, 0.0, 2.0, &mut h) }, DkStatus::Ok);
    assert!(!h.is_null());
    let mut v = DkValue::default();
    assert_eq!(unsafe { dk_kernel_eval(h, 2, 0.05, 0.06, 0.01, DkVariant::Scale, &mut v) }, DkStatus::Precondition);
    assert_eq!(unsafe { dk_kernel_set_localization(h, 1.0) }, DkStatus::Ok);
    assert_eq!(unsafe { dk_kernel_eval(h, 2, 0.05, 0.06, 0.01, DkVariant::Scale, &mut v) }, DkStatus::Ok);
    assert!((v.value - 10.142266021023).abs() < 1e-9);
    assert!(v.relative_certificate >= 0.0 && v.relative_certificate < 1e-6);
    assert_eq!(unsafe { dk_kernel_eval(h, 2, 0.5, 0.06, 0.01, DkVariant::Scale, &mut v) }, DkStatus::Region);
    assert!(last_error().contains("psi(phi(G)/9)"));
    unsafe { dk_kernel_free(h) };
    unsafe { dk_kernel_free(ptr::null_mut()) };
}

#[test]
fn config_handle() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/exact.toml\0");
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dk_kernel_from_config(path.as_ptr().cast(), &mut h) }, DkStatus::Ok);
    let mut v = DkValue::default();
    assert_eq!(unsafe { dk_kernel_eval(h, 1, 0.05, 0.06, 0.01, DkVariant::Escape, &mut v) }, DkStatus::Ok);
    unsafe { dk_kernel_free(h) };
    let missing = "/nonexistent/problem.toml\0";
    assert_eq!(unsafe { dk_kernel_from_config(missing.as_ptr().cast(), &mut h) }, DkStatus::Config);
    assert!(h.is_null());
}

#[test]
fn wright_fisher_sides_mirror() {
    let (mut l, mut r) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { dk_wf_new(1.0, 1.0, DkSide::Left, 0.3, 0.5, &mut l) }, DkStatus::Ok);
    assert_eq!(unsafe { dk_wf_new(1.0, 1.0, DkSide::Right, 0.7, 0.5, &mut r) }, DkStatus::Ok);
    let (mut a, mut b) = (DkValue::default(), DkValue::default());
    assert_eq!(unsafe { dk_wf_eval(l, 2, 0.02, 0.03, 0.002, &mut a) }, DkStatus::Ok);
    assert_eq!(unsafe { dk_wf_eval(r, 2, 0.98, 0.97, 0.002, &mut b) }, DkStatus::Ok);
    assert!((a.value - b.value).abs() < 1e-10 * a.value);
    assert_eq!(unsafe { dk_wf_eval(l, 2, 0.98, 0.97, 0.002, &mut b) }, DkStatus::Region);
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { dk_wf_new(2.5, 1.0, DkSide::Left, 0.3, 0.5, &mut bad) }, DkStatus::Domain);
    unsafe {
        dk_wf_free(l);
        dk_wf_free(r);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(dk_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/degenkernel.h")).unwrap();
    for name in [
        "dk_eval_q",
        "dk_kernel_new_constant_drift",
        "dk_kernel_from_config",
        "dk_kernel_set_localization",
        "dk_kernel_eval",
        "dk_kernel_free",
        "dk_wf_new",
        "dk_wf_eval",
        "dk_wf_free",
        "dk_last_error",
        "typedef struct dk_kernel dk_kernel",
        "DK_STATUS_REGION = 4",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/degenkernel.h");
    let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header]).output() else {
        eprintln!("cc not found; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
