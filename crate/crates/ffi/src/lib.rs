//! C ABI for `crhls`.
//!
//! Objects live behind opaque handles created by `*_new`-style constructors
//! and released with the matching `*_free`. Every fallible call returns a
//! [`CrhlsStatus`]; on failure [`crhls_last_error_message`] describes the
//! error for the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use crhls::discretization::{
    assemble_kernel, assemble_orbit_kernel, read_kernel_csv, sphere_grid, KernelMatrix, KernelSpec,
    QuadratureGrid, SphereResolution,
};
use crhls::functional::{rayleigh_quotient, GridFunction};
use crhls::solver::{solve_subcritical, Init, SolverOptions, SubcriticalResult};
use crhls::{sharp_constant_dh, Error, Params};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrhlsStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    DimensionMismatch = 3,
    Grid = 4,
    Solver = 5,
    Parse = 6,
    Io = 7,
    Panic = 8,
}

/// Model parameters `(n, alpha)` and derived exponents.
pub struct CrhlsParams(Params);

/// Quadrature nodes and weights.
pub struct CrhlsGrid(QuadratureGrid);

/// Dense kernel matrix.
pub struct CrhlsKernel(KernelMatrix);

/// Outcome of a subcritical solve.
pub struct CrhlsResult(SubcriticalResult);

/// Scalar fields of a [`CrhlsResult`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrhlsSolveSummary {
    pub p: f64,
    pub d: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Fail(CrhlsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) | Error::CayleyPole(_) | Error::NonpositiveBase { .. } => {
                CrhlsStatus::Domain
            }
            Error::DimensionMismatch { .. } => CrhlsStatus::DimensionMismatch,
            Error::Grid(_) => CrhlsStatus::Grid,
            Error::Solver(_) => CrhlsStatus::Solver,
            Error::Io(_) => CrhlsStatus::Io,
            Error::Csv(c) if c.is_io_error() => CrhlsStatus::Io,
            _ => CrhlsStatus::Parse,
        };
        Fail(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn call(f: impl FnOnce() -> Result<(), Fail>) -> CrhlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CrhlsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            CrhlsStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Fail> {
    ptr.as_ref()
        .ok_or_else(|| Fail(CrhlsStatus::NullPointer, format!("{name} is null")))
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], Fail> {
    if ptr.is_null() {
        return Err(Fail(CrhlsStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(CrhlsStatus::NullPointer, format!("{name} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Fail> {
    if len != src.len() {
        return Err(Fail::from(Error::DimensionMismatch {
            expected: src.len(),
            got: len,
        }));
    }
    if buf.is_null() {
        return Err(Fail(CrhlsStatus::NullPointer, "buf is null".into()));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf, len);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn crhls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn crhls_params_new(
    n: usize,
    alpha: f64,
    out: *mut *mut CrhlsParams,
) -> CrhlsStatus {
    call(|| {
        let p = Params::new(n, alpha)?;
        put(out, boxed(CrhlsParams(p)), "out")
    })
}

/// # Safety
/// `params` must be null or a handle from [`crhls_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crhls_params_free(params: *mut CrhlsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Writes `p_alpha`, `q_alpha` and `b_n`.
///
/// # Safety
/// `params` must be a live handle; each output must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_params_exponents(
    params: *const CrhlsParams,
    p_alpha: *mut f64,
    q_alpha: *mut f64,
    b_n: *mut f64,
) -> CrhlsStatus {
    call(|| {
        let p = &borrow(params, "params")?.0;
        put(p_alpha, p.p_alpha, "p_alpha")?;
        put(q_alpha, p.q_alpha, "q_alpha")?;
        put(b_n, p.b_n, "b_n")
    })
}

/// # Safety
/// `params` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_sharp_constant(
    params: *const CrhlsParams,
    out: *mut f64,
) -> CrhlsStatus {
    call(|| put(out, sharp_constant_dh(&borrow(params, "params")?.0), "out"))
}

/// Hopf product rule on `S^3`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn crhls_grid_sphere(
    theta: usize,
    phi1: usize,
    phi2: usize,
    out: *mut *mut CrhlsGrid,
) -> CrhlsStatus {
    call(|| {
        let g = sphere_grid(SphereResolution { theta, phi1, phi2 })?;
        put(out, boxed(CrhlsGrid(g)), "out")
    })
}

/// Abstract grid with the given positive weights.
///
/// # Safety
/// `weights` must point to `len` readable doubles; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_grid_discrete(
    weights: *const f64,
    len: usize,
    out: *mut *mut CrhlsGrid,
) -> CrhlsStatus {
    call(|| {
        let g = QuadratureGrid::discrete(slice(weights, len, "weights")?.to_vec())?;
        put(out, boxed(CrhlsGrid(g)), "out")
    })
}

/// # Safety
/// `grid` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_grid_len(grid: *const CrhlsGrid, out: *mut usize) -> CrhlsStatus {
    call(|| put(out, borrow(grid, "grid")?.0.len(), "out"))
}

/// Copies the weights into `buf`, which must hold exactly the grid length.
///
/// # Safety
/// `grid` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn crhls_grid_weights(
    grid: *const CrhlsGrid,
    buf: *mut f64,
    len: usize,
) -> CrhlsStatus {
    call(|| copy_out(&borrow(grid, "grid")?.0.weights, buf, len))
}

/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crhls_grid_free(grid: *mut CrhlsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Kernel from `dim * dim` row-major entries.
///
/// # Safety
/// `entries` must point to `dim * dim` readable doubles; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_kernel_from_entries(
    dim: usize,
    entries: *const f64,
    out: *mut *mut CrhlsKernel,
) -> CrhlsStatus {
    call(|| {
        let len = dim
            .checked_mul(dim)
            .ok_or_else(|| Fail(CrhlsStatus::Domain, format!("dim {dim} overflows")))?;
        let k = KernelMatrix::from_entries(dim, slice(entries, len, "entries")?.to_vec())?;
        put(out, boxed(CrhlsKernel(k)), "out")
    })
}

/// Pure singular kernel `rho^{alpha - Q}` on every node pair of `grid`.
///
/// # Safety
/// `grid` and `params` must be live handles; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_kernel_pure_singular(
    grid: *const CrhlsGrid,
    params: *const CrhlsParams,
    out: *mut *mut CrhlsKernel,
) -> CrhlsStatus {
    call(|| {
        let k = assemble_kernel(
            &borrow(grid, "grid")?.0,
            &KernelSpec::PureSingular,
            &borrow(params, "params")?.0,
        )?;
        put(out, boxed(CrhlsKernel(k)), "out")
    })
}

/// Orbit-reduced pure singular kernel on `grid`; also returns the reduced grid.
///
/// # Safety
/// `grid` and `params` must be live handles; both outputs must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_kernel_orbit(
    grid: *const CrhlsGrid,
    params: *const CrhlsParams,
    out_grid: *mut *mut CrhlsGrid,
    out_kernel: *mut *mut CrhlsKernel,
) -> CrhlsStatus {
    call(|| {
        let (g, k) = assemble_orbit_kernel(
            &borrow(grid, "grid")?.0,
            &KernelSpec::PureSingular,
            &borrow(params, "params")?.0,
        )?;
        if out_grid.is_null() {
            return Err(Fail(CrhlsStatus::NullPointer, "out_grid is null".into()));
        }
        put(out_kernel, boxed(CrhlsKernel(k)), "out_kernel")?;
        put(out_grid, boxed(CrhlsGrid(g)), "out_grid")
    })
}

/// Reads a kernel CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_kernel_read_csv(
    path: *const c_char,
    out: *mut *mut CrhlsKernel,
) -> CrhlsStatus {
    call(|| {
        if path.is_null() {
            return Err(Fail(CrhlsStatus::NullPointer, "path is null".into()));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(CrhlsStatus::Parse, "path is not UTF-8".into()))?;
        let (k, _, _) = read_kernel_csv(Path::new(path))?;
        put(out, boxed(CrhlsKernel(k)), "out")
    })
}

/// # Safety
/// `kernel` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_kernel_dim(
    kernel: *const CrhlsKernel,
    out: *mut usize,
) -> CrhlsStatus {
    call(|| put(out, borrow(kernel, "kernel")?.0.dim(), "out"))
}

/// # Safety
/// `kernel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crhls_kernel_free(kernel: *mut CrhlsKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// `B(f, f) / ||f||_p^2`.
///
/// # Safety
/// Handles must be live; `f` must point to `len` readable doubles; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_rayleigh_quotient(
    kernel: *const CrhlsKernel,
    grid: *const CrhlsGrid,
    f: *const f64,
    len: usize,
    p: f64,
    out: *mut f64,
) -> CrhlsStatus {
    call(|| {
        let f = GridFunction::new(slice(f, len, "f")?.to_vec())?;
        let q = rayleigh_quotient(
            &borrow(kernel, "kernel")?.0,
            &borrow(grid, "grid")?.0,
            &f,
            p,
        )?;
        put(out, q, "out")
    })
}

/// Subcritical maximizer from the uniform start. Non-convergence is reported
/// in the result summary, not as an error.
///
/// # Safety
/// Handles must be live; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_solve_subcritical(
    kernel: *const CrhlsKernel,
    grid: *const CrhlsGrid,
    p: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut CrhlsResult,
) -> CrhlsStatus {
    call(|| {
        let opts = SolverOptions { tol, max_iter };
        let r = solve_subcritical(
            &borrow(kernel, "kernel")?.0,
            &borrow(grid, "grid")?.0,
            p,
            opts,
            Init::Uniform,
        )?;
        put(out, boxed(CrhlsResult(r)), "out")
    })
}

/// # Safety
/// `result` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn crhls_result_summary(
    result: *const CrhlsResult,
    out: *mut CrhlsSolveSummary,
) -> CrhlsStatus {
    call(|| {
        let r = &borrow(result, "result")?.0;
        let s = CrhlsSolveSummary {
            p: r.p,
            d: r.d_estimate,
            residual: r.residual,
            iterations: r.iterations,
            converged: r.converged,
        };
        put(out, s, "out")
    })
}

/// Copies the maximizer into `buf`, which must hold exactly the grid length.
///
/// # Safety
/// `result` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn crhls_result_values(
    result: *const CrhlsResult,
    buf: *mut f64,
    len: usize,
) -> CrhlsStatus {
    call(|| copy_out(borrow(result, "result")?.0.f.values(), buf, len))
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crhls_result_free(result: *mut CrhlsResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
