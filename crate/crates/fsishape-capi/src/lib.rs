//! C ABI over the fsishape library: opaque handles, status codes, no
//! panics across the boundary.
//!
//! The generated header lives at `include/fsishape.h` (see `cbindgen.toml`;
//! regenerate with `cbindgen --config cbindgen.toml --crate fsishape-capi
//! --output include/fsishape.h`). All functions return `FsiStatus`; results
//! come back through out-pointers. Handles must be released with the
//! matching `_free` function.

use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fsishape::example::{self, ExampleParams, PerturbationSample};
use fsishape::moments::{self, Quantity, StudyTarget};
use fsishape::verify;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsiStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range (amplitude, epsilon, quantity code...).
    InvalidArgument = 2,
    /// The evaluation point lies outside the admissible window.
    OutOfDomain = 3,
    /// A numerical failure (degenerate transport Jacobian or similar).
    NumericalFailure = 4,
    /// An internal error; should not happen.
    InternalError = 5,
}

/// Opaque benchmark handle (problem parameters).
pub struct FsiBenchmark {
    params: ExampleParams,
}

/// Opaque perturbation-sample handle.
pub struct FsiSample {
    sample: PerturbationSample,
}

fn map_error(e: &fsishape::Error) -> FsiStatus {
    use fsishape::Error::*;
    match e {
        OutOfDomain { .. } | CornerZone { .. } | NotOnSegment { .. } => FsiStatus::OutOfDomain,
        InvalidConfig(_)
        | EpsilonTooLarge { .. }
        | TooFewEpsilons(_)
        | NonPositiveLame { .. }
        | UnsupportedDimension(_)
        | DimensionMismatch(_) => FsiStatus::InvalidArgument,
        DegenerateJacobian { .. } => FsiStatus::NumericalFailure,
        Io(_) | Serialize(_) => FsiStatus::InternalError,
    }
}

fn guard(f: impl FnOnce() -> FsiStatus) -> FsiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => FsiStatus::InternalError,
    }
}

fn quantity_from_code(code: c_int) -> Option<Quantity> {
    match code {
        0 => Some(Quantity::Pressure),
        1 => Some(Quantity::Displacement(0)),
        2 => Some(Quantity::Displacement(1)),
        3 => Some(Quantity::Stress(0, 0)),
        4 => Some(Quantity::Stress(0, 1)),
        5 => Some(Quantity::Stress(1, 0)),
        6 => Some(Quantity::Stress(1, 1)),
        _ => None,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fsishape_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Human-readable description of a status code (static storage).
#[no_mangle]
pub extern "C" fn fsishape_status_message(status: FsiStatus) -> *const c_char {
    let msg: &'static str = match status {
        FsiStatus::Ok => "ok\0",
        FsiStatus::NullPointer => "null pointer argument\0",
        FsiStatus::InvalidArgument => "argument out of range\0",
        FsiStatus::OutOfDomain => "point outside admissible window\0",
        FsiStatus::NumericalFailure => "numerical failure\0",
        FsiStatus::InternalError => "internal error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Creates a benchmark handle with the standard parameters.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fsishape_benchmark_new(out: *mut *mut FsiBenchmark) -> FsiStatus {
    if out.is_null() {
        return FsiStatus::NullPointer;
    }
    guard(|| {
        let handle = Box::new(FsiBenchmark {
            params: ExampleParams::default(),
        });
        unsafe { *out = Box::into_raw(handle) };
        FsiStatus::Ok
    })
}

/// Releases a benchmark handle; a null pointer is a no-op.
///
/// # Safety
/// `handle` must have come from `fsishape_benchmark_new` and not have been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn fsishape_benchmark_free(handle: *mut FsiBenchmark) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Creates a perturbation sample; amplitudes must lie in `[-1, 1]` and
/// `epsilon` in `[0, 0.25]`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fsishape_sample_new(
    epsilon: f64,
    a: f64,
    b: f64,
    out: *mut *mut FsiSample,
) -> FsiStatus {
    if out.is_null() {
        return FsiStatus::NullPointer;
    }
    guard(|| match PerturbationSample::with_second(epsilon, a, b) {
        Ok(sample) => {
            unsafe { *out = Box::into_raw(Box::new(FsiSample { sample })) };
            FsiStatus::Ok
        }
        Err(e) => map_error(&e),
    })
}

/// Releases a sample handle; a null pointer is a no-op.
///
/// # Safety
/// `handle` must have come from `fsishape_sample_new` and not have been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn fsishape_sample_free(handle: *mut FsiSample) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Unperturbed pressure at a point.
///
/// # Safety
/// `benchmark` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fsishape_eval_pressure(
    benchmark: *const FsiBenchmark,
    x: f64,
    y: f64,
    out: *mut f64,
) -> FsiStatus {
    if benchmark.is_null() || out.is_null() {
        return FsiStatus::NullPointer;
    }
    guard(|| {
        let p = example::pressure();
        unsafe { *out = p.eval(&[x, y]) };
        FsiStatus::Ok
    })
}

/// Unperturbed displacement at a point; writes two components.
///
/// # Safety
/// `benchmark` must be valid and `out` must point to two writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fsishape_eval_displacement(
    benchmark: *const FsiBenchmark,
    x: f64,
    y: f64,
    out: *mut f64,
) -> FsiStatus {
    if benchmark.is_null() || out.is_null() {
        return FsiStatus::NullPointer;
    }
    guard(|| {
        let u = example::displacement().eval(&[x, y]);
        unsafe {
            *out = u[0];
            *out.add(1) = u[1];
        }
        FsiStatus::Ok
    })
}

/// Unperturbed stress at a point; writes four components in row-major
/// order.
///
/// # Safety
/// `benchmark` must be valid and `out` must point to four writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fsishape_eval_stress(
    benchmark: *const FsiBenchmark,
    x: f64,
    y: f64,
    out: *mut f64,
) -> FsiStatus {
    if benchmark.is_null() || out.is_null() {
        return FsiStatus::NullPointer;
    }
    guard(|| {
        let s = example::stress().eval(&[x, y]);
        unsafe {
            for i in 0..2 {
                for j in 0..2 {
                    *out.add(2 * i + j) = s[(i, j)];
                }
            }
        }
        FsiStatus::Ok
    })
}

fn run_verification(
    benchmark: &FsiBenchmark,
    sample: &FsiSample,
    interior_points: usize,
    boundary_nodes: usize,
    second_order: bool,
) -> (f64, bool) {
    let reports = if second_order {
        verify::verify_shape_hessian(
            &benchmark.params,
            &sample.sample,
            interior_points,
            boundary_nodes,
        )
    } else {
        let mut r = verify::verify_shape_derivative_interior(
            &benchmark.params,
            &sample.sample,
            interior_points,
        );
        r.extend(verify::verify_shape_derivative_boundary(
            &benchmark.params,
            &sample.sample,
            boundary_nodes,
        ));
        r
    };
    let max = reports.iter().fold(0.0f64, |m, r| m.max(r.norm_max));
    let pass = reports.iter().all(|r| r.pass);
    (max, pass)
}

/// Runs the first-order residual verification; reports the worst residual
/// and whether every identity passed.
///
/// # Safety
/// All pointer arguments must be valid; `pass` uses 1 for true, 0 for false.
#[no_mangle]
pub unsafe extern "C" fn fsishape_verify_first_order(
    benchmark: *const FsiBenchmark,
    sample: *const FsiSample,
    interior_points: usize,
    boundary_nodes: usize,
    max_residual: *mut f64,
    pass: *mut c_int,
) -> FsiStatus {
    if benchmark.is_null() || sample.is_null() || max_residual.is_null() || pass.is_null() {
        return FsiStatus::NullPointer;
    }
    if interior_points == 0 || boundary_nodes == 0 {
        return FsiStatus::InvalidArgument;
    }
    guard(|| {
        let (max, ok) = run_verification(
            unsafe { &*benchmark },
            unsafe { &*sample },
            interior_points,
            boundary_nodes,
            false,
        );
        unsafe {
            *max_residual = max;
            *pass = ok as c_int;
        }
        FsiStatus::Ok
    })
}

/// Runs the second-order residual verification.
///
/// # Safety
/// All pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn fsishape_verify_second_order(
    benchmark: *const FsiBenchmark,
    sample: *const FsiSample,
    interior_points: usize,
    boundary_nodes: usize,
    max_residual: *mut f64,
    pass: *mut c_int,
) -> FsiStatus {
    if benchmark.is_null() || sample.is_null() || max_residual.is_null() || pass.is_null() {
        return FsiStatus::NullPointer;
    }
    if interior_points == 0 || boundary_nodes == 0 {
        return FsiStatus::InvalidArgument;
    }
    guard(|| {
        let (max, ok) = run_verification(
            unsafe { &*benchmark },
            unsafe { &*sample },
            interior_points,
            boundary_nodes,
            true,
        );
        unsafe {
            *max_residual = max;
            *pass = ok as c_int;
        }
        FsiStatus::Ok
    })
}

/// Quadrature mean and variance of an observable.
///
/// Quantity codes: 0 pressure, 1 and 2 displacement components, 3..=6
/// stress components in row-major order.
///
/// # Safety
/// All pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn fsishape_moment_oracle(
    benchmark: *const FsiBenchmark,
    x: f64,
    y: f64,
    eps: f64,
    quantity: c_int,
    mean: *mut f64,
    variance: *mut f64,
) -> FsiStatus {
    if benchmark.is_null() || mean.is_null() || variance.is_null() {
        return FsiStatus::NullPointer;
    }
    let Some(q) = quantity_from_code(quantity) else {
        return FsiStatus::InvalidArgument;
    };
    guard(|| {
        let params = unsafe { &(*benchmark).params };
        match moments::moment_oracle(params, &[x, y], eps, q, moments::ORACLE_QUADRATURE_ORDER) {
            Ok(est) => {
                unsafe {
                    *mean = est.mean;
                    *variance = est.variance;
                }
                FsiStatus::Ok
            }
            Err(e) => map_error(&e),
        }
    })
}

/// Monte Carlo mean and variance of an observable, with the standard error
/// of the mean.
///
/// # Safety
/// All pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn fsishape_moment_monte_carlo(
    benchmark: *const FsiBenchmark,
    x: f64,
    y: f64,
    eps: f64,
    quantity: c_int,
    n_samples: usize,
    seed: u64,
    mean: *mut f64,
    variance: *mut f64,
    stderr_mean: *mut f64,
) -> FsiStatus {
    if benchmark.is_null() || mean.is_null() || variance.is_null() || stderr_mean.is_null() {
        return FsiStatus::NullPointer;
    }
    let Some(q) = quantity_from_code(quantity) else {
        return FsiStatus::InvalidArgument;
    };
    guard(|| {
        let params = unsafe { &(*benchmark).params };
        match moments::moment_monte_carlo(params, &[x, y], eps, q, n_samples, seed) {
            Ok(est) => {
                unsafe {
                    *mean = est.mean;
                    *variance = est.variance;
                    *stderr_mean = est.stderr_mean;
                }
                FsiStatus::Ok
            }
            Err(e) => map_error(&e),
        }
    })
}

/// Fitted convergence slope of a moment-approximation error.
///
/// Targets: 0 mean error, 1 variance error, 2 Taylor remainder.
///
/// # Safety
/// `eps_list` must point to `n_eps` doubles; all out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fsishape_convergence_slope(
    benchmark: *const FsiBenchmark,
    x: f64,
    y: f64,
    quantity: c_int,
    target: c_int,
    eps_list: *const f64,
    n_eps: usize,
    slope: *mut f64,
) -> FsiStatus {
    if benchmark.is_null() || eps_list.is_null() || slope.is_null() {
        return FsiStatus::NullPointer;
    }
    let Some(q) = quantity_from_code(quantity) else {
        return FsiStatus::InvalidArgument;
    };
    let t = match target {
        0 => StudyTarget::Mean,
        1 => StudyTarget::Variance,
        2 => StudyTarget::TaylorRemainder,
        _ => return FsiStatus::InvalidArgument,
    };
    guard(|| {
        let eps = unsafe { std::slice::from_raw_parts(eps_list, n_eps) };
        let params = unsafe { &(*benchmark).params };
        match moments::convergence_study(
            params,
            &[x, y],
            q,
            t,
            eps,
            moments::ORACLE_QUADRATURE_ORDER,
        ) {
            Ok(rep) => {
                unsafe { *slope = rep.slope };
                FsiStatus::Ok
            }
            Err(e) => map_error(&e),
        }
    })
}

/// Used by the tests to confirm the message table is NUL-terminated.
#[allow(dead_code)]
fn message_as_str(status: FsiStatus) -> &'static str {
    unsafe { CStr::from_ptr(fsishape_status_message(status)) }
        .to_str()
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_messages_are_nul_terminated() {
        assert_eq!(message_as_str(FsiStatus::Ok), "ok");
        assert_eq!(
            message_as_str(FsiStatus::NullPointer),
            "null pointer argument"
        );
    }
}
