//! C interface to the fracwave solver.
//!
//! Every fallible function returns an [`FwStatus`]; on failure the message is
//! kept per thread and can be copied out with [`fw_last_error`]. Handles are
//! opaque: [`fw_problem_from_toml`] and [`fw_solve`] create them, the matching
//! `*_free` function releases them. No function panics across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fracwave::cli::ProblemConfig;
use fracwave::fracops::{caputo_derivative, frac_integral, mittag_leffler, FracOrder, SampledPath, TimeGrid};
use fracwave::galerkin::{eigenpair, solve_ibvp, SolutionBundle, SpectralProblem};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Precondition = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// A validated problem.
pub struct FwProblem {
    problem: SpectralProblem,
}

/// A solved problem: modal coefficients on the time grid and norm report.
pub struct FwSolution {
    bundle: SolutionBundle,
}

/// Norms of the Galerkin solution.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FwNorms {
    pub h1_sup: f64,
    pub dt_l2: f64,
    pub h2_sup: f64,
    pub caputo_sup: f64,
    pub h_alpha_hminus1: f64,
    pub q_norm: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: FwStatus, message: impl Into<String>) -> FwStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.into());
    status
}

fn guard(f: impl FnOnce() -> FwStatus) -> FwStatus {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(FwStatus::Panic, "internal panic"))
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(FwStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one, or 0 when
/// the last call succeeded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn fw_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if msg.is_empty() {
            return 0;
        }
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a TOML problem description and assembles its Galerkin system.
///
/// # Safety
/// `source` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fw_problem_from_toml(source: *const c_char, out: *mut *mut FwProblem) -> FwStatus {
    guard(|| {
        non_null!(source, out);
        *out = std::ptr::null_mut();
        let Ok(text) = CStr::from_ptr(source).to_str() else {
            return fail(FwStatus::InvalidArgument, "source is not valid UTF-8");
        };
        let config = match ProblemConfig::parse("<memory>", text) {
            Ok(c) => c,
            Err(e) => return fail(FwStatus::Config, e.0),
        };
        match config.spectral_problem(config.problem.n_steps, config.problem.modes) {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(FwProblem { problem }));
                FwStatus::Ok
            }
            Err(e) => fail(FwStatus::Config, e.to_string()),
        }
    })
}

/// Releases a problem; null is ignored.
///
/// # Safety
/// `problem` must come from [`fw_problem_from_toml`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fw_problem_free(problem: *mut FwProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves `problem`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fw_solve(problem: *const FwProblem, out: *mut *mut FwSolution) -> FwStatus {
    guard(|| {
        non_null!(problem, out);
        *out = std::ptr::null_mut();
        match solve_ibvp(&(*problem).problem, &[], usize::MAX) {
            Ok(bundle) => {
                *out = Box::into_raw(Box::new(FwSolution { bundle }));
                FwStatus::Ok
            }
            Err(e) => fail(FwStatus::Precondition, e.to_string()),
        }
    })
}

/// Releases a solution; null is ignored.
///
/// # Safety
/// `solution` must come from [`fw_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fw_solution_free(solution: *mut FwSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of time nodes (`n_steps + 1`) and modes.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fw_solution_dims(solution: *const FwSolution, n_times: *mut usize, modes: *mut usize) -> FwStatus {
    guard(|| {
        non_null!(solution, n_times, modes);
        let u = &(*solution).bundle.p.u;
        *n_times = u.grid().len();
        *modes = u.dim();
        FwStatus::Ok
    })
}

/// Copies the time nodes into `out[0..n_times]`.
///
/// # Safety
/// `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fw_solution_times(solution: *const FwSolution, out: *mut f64, len: usize) -> FwStatus {
    guard(|| {
        non_null!(solution, out);
        let grid = *(*solution).bundle.p.u.grid();
        if len < grid.len() {
            return fail(FwStatus::BufferTooSmall, format!("need {} doubles, got {len}", grid.len()));
        }
        for (i, t) in grid.nodes().enumerate() {
            *out.add(i) = t;
        }
        FwStatus::Ok
    })
}

/// Copies the modal coefficients, row-major by time node, into
/// `out[0..n_times * modes]`.
///
/// # Safety
/// `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fw_solution_coefficients(solution: *const FwSolution, out: *mut f64, len: usize) -> FwStatus {
    guard(|| {
        non_null!(solution, out);
        let values = (*solution).bundle.p.u.values();
        if len < values.len() {
            return fail(FwStatus::BufferTooSmall, format!("need {} doubles, got {len}", values.len()));
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        FwStatus::Ok
    })
}

/// Evaluates `u_N(x, t_node)`.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fw_solution_eval(solution: *const FwSolution, node: usize, x: f64, out: *mut f64) -> FwStatus {
    guard(|| {
        non_null!(solution, out);
        let u = &(*solution).bundle.p.u;
        if node >= u.grid().len() || !(0.0..=1.0).contains(&x) {
            return fail(FwStatus::InvalidArgument, format!("node {node} or x = {x} out of range"));
        }
        let mut sum = 0.0;
        for (k, p) in u.at(node).iter().enumerate() {
            let (_, phi) = eigenpair(k + 1).expect("k >= 1");
            sum += p * phi.value(x);
        }
        *out = sum;
        FwStatus::Ok
    })
}

/// Norm report of the solution.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fw_solution_norms(solution: *const FwSolution, out: *mut FwNorms) -> FwStatus {
    guard(|| {
        non_null!(solution, out);
        let b = &(*solution).bundle;
        *out = FwNorms {
            h1_sup: b.norms.h1_sup,
            dt_l2: b.norms.dt_l2,
            h2_sup: b.norms.h2_sup,
            caputo_sup: b.norms.caputo_sup,
            h_alpha_hminus1: b.norms.h_alpha_hminus1,
            q_norm: b.q_norm,
        };
        FwStatus::Ok
    })
}

/// Two-parameter Mittag-Leffler function `E_{alpha,beta}(z)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fw_mittag_leffler(alpha: f64, beta: f64, z: f64, out: *mut f64) -> FwStatus {
    guard(|| {
        non_null!(out);
        match mittag_leffler(alpha, beta, z) {
            Ok(v) => {
                *out = v;
                FwStatus::Ok
            }
            Err(e) => fail(FwStatus::InvalidArgument, e.to_string()),
        }
    })
}

unsafe fn map_uniform(
    t_max: f64,
    values: *const f64,
    len: usize,
    out: *mut f64,
    op: impl FnOnce(&SampledPath) -> Result<SampledPath, fracwave::fracops::FracError>,
) -> FwStatus {
    non_null!(values, out);
    if len < 3 {
        return fail(FwStatus::InvalidArgument, "need at least 3 samples");
    }
    let input = std::slice::from_raw_parts(values, len).to_vec();
    let result = TimeGrid::new(t_max, len - 1)
        .and_then(|g| SampledPath::new(g, 1, input))
        .and_then(|p| op(&p));
    match result {
        Ok(p) => {
            std::ptr::copy_nonoverlapping(p.values().as_ptr(), out, len);
            FwStatus::Ok
        }
        Err(e) => fail(FwStatus::InvalidArgument, e.to_string()),
    }
}

/// Riemann-Liouville integral `J^gamma` of samples `values[0..len]` on the
/// uniform grid of `[0, t_max]`, written to `out[0..len]`.
///
/// # Safety
/// `values` and `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fw_frac_integral(gamma: f64, t_max: f64, values: *const f64, len: usize, out: *mut f64) -> FwStatus {
    guard(|| map_uniform(t_max, values, len, out, |p| frac_integral(FracOrder::new(gamma)?, p)))
}

/// Caputo derivative `∂^gamma` of samples on the uniform grid of `[0, t_max]`.
///
/// # Safety
/// `values` and `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fw_caputo_derivative(
    gamma: f64,
    t_max: f64,
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> FwStatus {
    guard(|| map_uniform(t_max, values, len, out, |p| caputo_derivative(FracOrder::derivative(gamma)?, p)))
}
