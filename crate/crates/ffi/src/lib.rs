//! C ABI over `volterra-core`.
//!
//! Every fallible function returns a [`VkStatus`] and writes its result
//! through an out-pointer. Objects cross the boundary as opaque handles
//! ([`VkSolution`], [`VkSigDecimal`]) that must be released with the
//! matching `*_free` function. Strings returned to the caller are released
//! with [`vk_string_free`]. A panic inside the library is caught and
//! reported as [`VkStatus::Panic`].
//!
//! The header `include/volterra.h` is generated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use num_bigint::BigUint;
use volterra_core::forward::Mesh;
use volterra_core::kernel::{max_step, smallest_root, KernelError, KernelSpec, StepBound};
use volterra_core::sigdec::{estimate_f_diff, estimate_f_sum, SigDecimal, SigError};
use volterra_core::solver::{convergence_order, solve, MeshSolution, Scheme, SolverError};

/// Result codes. `VK_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoRoot = 3,
    StepRejected = 4,
    UndefinedOrder = 5,
    Parse = 6,
    DigitMismatch = 7,
    Range = 8,
    Panic = 99,
}

pub const VK_SCHEME_MIDPOINT: u32 = 0;
pub const VK_SCHEME_PRODUCT: u32 = 1;

/// Mesh solution with its error record against the reference solution.
pub struct VkSolution {
    inner: MeshSolution,
}

/// Fixed-length decimal with valid-digit count.
pub struct VkSigDecimal {
    inner: SigDecimal,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(VkStatus, String);

impl From<KernelError> for Failure {
    fn from(e: KernelError) -> Self {
        let code = match e {
            KernelError::NoRoot { .. } | KernelError::Bracketing { .. } => VkStatus::NoRoot,
            KernelError::Sig(ref s) => sig_status(s),
            _ => VkStatus::InvalidArgument,
        };
        Failure(code, e.to_string())
    }
}

fn sig_status(e: &SigError) -> VkStatus {
    match e {
        SigError::Range(_) => VkStatus::Range,
        SigError::DigitMismatch(..) => VkStatus::DigitMismatch,
        SigError::Parse(_) | SigError::Malformed(_) => VkStatus::Parse,
        _ => VkStatus::InvalidArgument,
    }
}

impl From<SigError> for Failure {
    fn from(e: SigError) -> Self {
        Failure(sig_status(&e), e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e {
            SolverError::StepRejected { .. } => VkStatus::StepRejected,
            SolverError::UndefinedOrder(..) => VkStatus::UndefinedOrder,
            _ => VkStatus::InvalidArgument,
        };
        Failure(code, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(VkStatus::InvalidArgument, msg.into())
}

fn null(what: &str) -> Failure {
    Failure(VkStatus::NullPointer, format!("{what} is null"))
}

fn guard<F>(body: F) -> VkStatus
where
    F: FnOnce() -> Result<(), Failure> + UnwindSafe,
{
    match catch_unwind(body) {
        Ok(Ok(())) => VkStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(_) => {
            set_last_error("panic inside volterra".into());
            VkStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(VkStatus::Parse, format!("{what} is not UTF-8")))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn vk_status_message(status: VkStatus) -> *const c_char {
    let s: &'static CStr = match status {
        VkStatus::Ok => c"ok",
        VkStatus::NullPointer => c"null pointer argument",
        VkStatus::InvalidArgument => c"invalid argument",
        VkStatus::NoRoot => c"kernel has no positive root",
        VkStatus::StepRejected => c"mesh step rejected",
        VkStatus::UndefinedOrder => c"convergence order undefined",
        VkStatus::Parse => c"parse error",
        VkStatus::DigitMismatch => c"significand lengths differ",
        VkStatus::Range => c"exponent out of range",
        VkStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn vk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// kernel ---------------------------------------------------------------------

/// `K_N(λ)`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn vk_kernel_eval(order: u32, lambda: f64, out: *mut f64) -> VkStatus {
    guard(|| {
        let v = KernelSpec::new(order)?.try_eval(lambda)?;
        write(out, v, "out")
    })
}

/// Smallest positive root `λ*` of `K_N`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn vk_kernel_root(order: u32, out: *mut f64) -> VkStatus {
    guard(|| {
        let root = smallest_root(&KernelSpec::new(order)?)?;
        write(out, root, "out")
    })
}

/// Largest admissible midpoint step `2 λ*`; `+inf` when unbounded.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn vk_kernel_max_step(order: u32, out: *mut f64) -> VkStatus {
    guard(|| {
        let h = match max_step(&KernelSpec::new(order)?) {
            StepBound::Below(h) => h,
            StepBound::Unbounded => f64::INFINITY,
        };
        write(out, h, "out")
    })
}

// solver ---------------------------------------------------------------------

/// Solves for the reference solution with shape `alpha` on `nodes` nodes
/// of `[0, 1]`. `scheme` is `VK_SCHEME_MIDPOINT` or `VK_SCHEME_PRODUCT`.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by
/// the caller.
#[no_mangle]
pub unsafe extern "C" fn vk_solve(
    scheme: u32,
    order: u32,
    alpha: f64,
    nodes: usize,
    out: *mut *mut VkSolution,
) -> VkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let scheme = match scheme {
            VK_SCHEME_MIDPOINT => Scheme::Midpoint,
            VK_SCHEME_PRODUCT => Scheme::Product,
            other => return Err(invalid(format!("unknown scheme {other}"))),
        };
        let spec = KernelSpec::new(order)?;
        let mesh = Mesh::unit(nodes).map_err(|e| invalid(e.to_string()))?;
        let inner = solve(&spec, scheme, alpha, &mesh)?;
        out.write(Box::into_raw(Box::new(VkSolution { inner })));
        Ok(())
    })
}

/// Number of nodes; 0 for null.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vk_solution_len(sol: *const VkSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.inner.values().len())
}

/// Midpoint values `φ_{i-1/2}`, `i = 1..len`, owned by the handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vk_solution_values(sol: *const VkSolution) -> *const f64 {
    sol.as_ref()
        .map_or(ptr::null(), |s| s.inner.values().as_ptr())
}

/// Maximum midpoint error against the reference solution.
///
/// # Safety
/// `sol` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vk_solution_norm(sol: *const VkSolution, out: *mut f64) -> VkStatus {
    guard(|| {
        let s = borrow(sol, "solution")?;
        let norm = s.inner.error().map_or(f64::NAN, |e| e.norm);
        write(out, norm, "out")
    })
}

/// 1 when the error norm exceeds `max |φ|`, 0 otherwise, -1 for null.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vk_solution_overflow(sol: *const VkSolution) -> i32 {
    match sol.as_ref() {
        None => -1,
        Some(s) => s.inner.error().map_or(0, |e| e.overflow as i32),
    }
}

/// # Safety
/// `sol` must be null or a handle from [`vk_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vk_solution_free(sol: *mut VkSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// `log2(coarse / fine)`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn vk_convergence_order(coarse: f64, fine: f64, out: *mut f64) -> VkStatus {
    guard(|| {
        let g = convergence_order(coarse, fine)?;
        write(out, g, "out")
    })
}

// sigdec ---------------------------------------------------------------------

unsafe fn emit(out: *mut *mut VkSigDecimal, inner: SigDecimal) -> Result<(), Failure> {
    write(out, Box::into_raw(Box::new(VkSigDecimal { inner })), "out")
}

/// Rounds `x` to `digits` significand digits, all valid.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_from_real(
    x: f64,
    digits: u32,
    out: *mut *mut VkSigDecimal,
) -> VkStatus {
    guard(|| emit(out, SigDecimal::from_real(x, digits)?))
}

/// Parses `+18652239e2 (f=6, L=8)`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_parse(
    text: *const c_char,
    out: *mut *mut VkSigDecimal,
) -> VkStatus {
    guard(|| {
        let s = c_str(text, "text")?;
        emit(out, s.parse::<SigDecimal>()?)
    })
}

/// # Safety
/// `a`, `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_add(
    a: *const VkSigDecimal,
    b: *const VkSigDecimal,
    out: *mut *mut VkSigDecimal,
) -> VkStatus {
    guard(|| {
        let (a, b) = (borrow(a, "a")?, borrow(b, "b")?);
        emit(out, a.inner.add(&b.inner)?)
    })
}

/// # Safety
/// `a`, `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_sub(
    a: *const VkSigDecimal,
    b: *const VkSigDecimal,
    out: *mut *mut VkSigDecimal,
) -> VkStatus {
    guard(|| {
        let (a, b) = (borrow(a, "a")?, borrow(b, "b")?);
        emit(out, a.inner.sub(&b.inner)?)
    })
}

/// Text rendering; release with [`vk_string_free`].
///
/// # Safety
/// `x` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_render(
    x: *const VkSigDecimal,
    out: *mut *mut c_char,
) -> VkStatus {
    guard(|| {
        let x = borrow(x, "value")?;
        let s = CString::new(x.inner.to_string()).map_err(|e| invalid(e.to_string()))?;
        write(out, s.into_raw(), "out")
    })
}

/// Valid significand digits `f`; 0 for null.
///
/// # Safety
/// `x` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_valid(x: *const VkSigDecimal) -> u32 {
    x.as_ref().map_or(0, |x| x.inner.valid())
}

/// Significand length `L`; 0 for null.
///
/// # Safety
/// `x` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_digits(x: *const VkSigDecimal) -> u32 {
    x.as_ref().map_or(0, |x| x.inner.digits())
}

/// Decimal exponent `p`; 0 for null.
///
/// # Safety
/// `x` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_exponent(x: *const VkSigDecimal) -> i32 {
    x.as_ref().map_or(0, |x| x.inner.exponent())
}

/// Nearest double; NaN for null.
///
/// # Safety
/// `x` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_to_double(x: *const VkSigDecimal) -> f64 {
    x.as_ref().map_or(f64::NAN, |x| x.inner.to_f64())
}

/// # Safety
/// `x` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vk_sigdec_free(x: *mut VkSigDecimal) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// Valid-digit minorant of a sum from exponents and valid digits.
#[no_mangle]
pub extern "C" fn vk_estimate_f_sum(p1: i32, f1: u32, p2: i32, f2: u32) -> i64 {
    estimate_f_sum(p1, f1, p2, f2)
}

/// Valid-digit minorant of `|x4| - |x3|`; significands are decimal strings.
///
/// # Safety
/// `m3`, `m4` must be NUL-terminated strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vk_estimate_f_diff(
    m3: *const c_char,
    f3: u32,
    m4: *const c_char,
    f4: u32,
    digits: u32,
    out: *mut u32,
) -> VkStatus {
    guard(|| {
        let parse = |s: &str, what: &str| {
            s.parse::<BigUint>()
                .map_err(|_| Failure(VkStatus::Parse, format!("{what}: not a digit string")))
        };
        let a = parse(c_str(m3, "m3")?, "m3")?;
        let b = parse(c_str(m4, "m4")?, "m4")?;
        write(out, estimate_f_diff(&a, f3, &b, f4, digits), "out")
    })
}
