//! C ABI for `degenkernel`.
//!
//! Every function returns a [`DkStatus`]. Results go through out-pointers.
//! Handles are opaque and must be released with their `_free` function.
//! The message of the last failure on the calling thread is available
//! from [`dk_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use degenkernel::coeffs::Problem;
use degenkernel::config::{load_config, ProblemConfig};
use degenkernel::kernel::{BudgetVariant, KernelModel, Localization};
use degenkernel::transform::TransformBundle;
use degenkernel::wrightfisher::{Side, WfKernel, WfProblem};
use degenkernel::Error;

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DkStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Precondition = 3,
    Region = 4,
    Config = 5,
    Numerical = 6,
    Simulation = 7,
    Io = 8,
    Panic = 9,
}

/// Budget variants for [`dk_kernel_eval`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DkVariant {
    Local = 0,
    Scale = 1,
    Escape = 2,
    Confined = 3,
}

/// Anchoring boundary for Wright–Fisher kernels.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DkSide {
    Left = 0,
    Right = 1,
}

/// An approximate kernel value and its certificate.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DkValue {
    pub value: f64,
    pub certificate: f64,
    pub relative_certificate: f64,
}

/// A general problem with an optional inner level `G`.
pub struct DkKernel {
    model: KernelModel,
    localization: Option<Localization>,
}

/// One side of a Wright–Fisher problem.
pub struct DkWfKernel {
    kernel: WfKernel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DkStatus {
    match e {
        Error::Domain(_) => DkStatus::Domain,
        Error::Precondition(_) => DkStatus::Precondition,
        Error::Region(_) => DkStatus::Region,
        Error::Config(_) => DkStatus::Config,
        Error::Numerical(_) => DkStatus::Numerical,
        Error::Simulation(_) => DkStatus::Simulation,
        Error::Io(_) => DkStatus::Io,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> DkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DkStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            DkStatus::Panic
        }
    }
}

fn null_error(name: &str) -> DkStatus {
    set_error(format!("{name} is null"));
    DkStatus::NullPointer
}

fn variant_of(v: DkVariant) -> BudgetVariant {
    match v {
        DkVariant::Local => BudgetVariant::Local,
        DkVariant::Scale => BudgetVariant::Scale,
        DkVariant::Escape => BudgetVariant::Escape,
        DkVariant::Confined => BudgetVariant::Confined,
    }
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length, or 0
/// when there is none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dk_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `q(z, w, t)` of the model equation `z∂z² + ν∂z`.
///
/// # Safety
/// `out` must be null or a valid pointer to an `f64`.
#[no_mangle]
pub unsafe extern "C" fn dk_eval_q(nu: f64, z: f64, w: f64, t: f64, out: *mut f64) -> DkStatus {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        let v = degenkernel::modelkernel::eval_q(nu, z, w, t)?;
        *out = v.value;
        Ok(())
    })
}

unsafe fn finish_kernel(problem: Problem, out: *mut *mut DkKernel) -> DkStatus {
    if out.is_null() {
        return null_error("out");
    }
    *out = std::ptr::null_mut();
    guard(|| {
        let model = KernelModel::new(TransformBundle::new(problem)?)?;
        *out = Box::into_raw(Box::new(DkKernel { model, localization: None }));
        Ok(())
    })
}

/// Kernel for `a ≡ 1`, `b ≡ b0` on `(0, interval]`.
///
/// # Safety
/// `out` must be null or a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn dk_kernel_new_constant_drift(alpha: f64, b0: f64, interval: f64, out: *mut *mut DkKernel) -> DkStatus {
    finish_kernel(Problem::constant_drift(alpha, b0, interval), out)
}

/// Kernel from a problem file; the file's `localization` is applied.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn dk_kernel_from_config(path: *const c_char, out: *mut *mut DkKernel) -> DkStatus {
    if path.is_null() {
        return null_error("path");
    }
    if out.is_null() {
        return null_error("out");
    }
    *out = std::ptr::null_mut();
    let path = CStr::from_ptr(path).to_string_lossy().into_owned();
    guard(|| {
        let ProblemConfig::General(g) = load_config(Path::new(&path))? else {
            return Err(Error::Config("beta: set, use dk_wf_new".into()));
        };
        let mut bundle = TransformBundle::new(g.problem)?;
        if let Some(nu) = g.nu_override {
            bundle = bundle.with_nu_override(nu);
        }
        let model = KernelModel::new(bundle)?;
        let localization = g.localization.map(|l| model.localization(l)).transpose()?;
        *out = Box::into_raw(Box::new(DkKernel { model, localization }));
        Ok(())
    })
}

/// Sets the inner level `G` used by the global variants.
///
/// # Safety
/// `h` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dk_kernel_set_localization(h: *mut DkKernel, g: f64) -> DkStatus {
    let Some(h) = h.as_mut() else { return null_error("kernel") };
    guard(|| {
        h.localization = Some(h.model.localization(g)?);
        Ok(())
    })
}

/// `p^{k-approx}(x, y, t)` with its certificate.
///
/// # Safety
/// `h` must be null or a live handle; `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn dk_kernel_eval(
    h: *const DkKernel,
    k: usize,
    x: f64,
    y: f64,
    t: f64,
    variant: DkVariant,
    out: *mut DkValue,
) -> DkStatus {
    let Some(h) = h.as_ref() else { return null_error("kernel") };
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        let v = match (variant_of(variant), &h.localization) {
            (BudgetVariant::Local, _) => h.model.p_k_approx(k, x, y, t)?,
            (v, Some(loc)) => h.model.p_k_global(loc, k, x, y, t, v)?,
            (_, None) => return Err(Error::Precondition("no localization level set".into())),
        };
        *out = DkValue {
            value: v.value,
            certificate: v.certificate,
            relative_certificate: v.relative_certificate,
        };
        Ok(())
    })
}

/// Releases a kernel handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dk_kernel_free(h: *mut DkKernel) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Wright–Fisher kernel anchored at `side` with level `G` (left) or `H`
/// (right) and inner point `interval`.
///
/// # Safety
/// `out` must be null or a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn dk_wf_new(alpha: f64, beta: f64, side: DkSide, level: f64, interval: f64, out: *mut *mut DkWfKernel) -> DkStatus {
    if out.is_null() {
        return null_error("out");
    }
    *out = std::ptr::null_mut();
    guard(|| {
        let side = match side {
            DkSide::Left => Side::Left,
            DkSide::Right => Side::Right,
        };
        let kernel = WfKernel::new(WfProblem::new(alpha, beta)?, side, level, interval)?;
        *out = Box::into_raw(Box::new(DkWfKernel { kernel }));
        Ok(())
    })
}

/// Two-sided `p^{k-approx}(x, y, t)` with its certificate.
///
/// # Safety
/// `h` must be null or a live handle; `out` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn dk_wf_eval(h: *const DkWfKernel, k: usize, x: f64, y: f64, t: f64, out: *mut DkValue) -> DkStatus {
    let Some(h) = h.as_ref() else { return null_error("kernel") };
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        let v = h.kernel.value(k, x, y, t)?;
        *out = DkValue {
            value: v.value,
            certificate: v.certificate,
            relative_certificate: v.relative_certificate,
        };
        Ok(())
    })
}

/// Releases a Wright–Fisher handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dk_wf_free(h: *mut DkWfKernel) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
