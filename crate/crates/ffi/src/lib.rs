//! C ABI for the `pgpe` crate.
//!
//! Every function returns a [`PgpeStatus`]; results are written through out
//! pointers. On failure a human-readable message is stored per thread and
//! can be read with [`pgpe_last_error_message`]. Panics never cross the
//! boundary: they are caught and reported as [`PgpeStatus::Panic`].
//!
//! Optimizers are opaque handles created by [`pgpe_optimizer_new`] and
//! released with [`pgpe_optimizer_free`]. Strings returned by the library
//! must be released with [`pgpe_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use pgpe::harness::{run_batch, seeded_rng, RunRng};
use pgpe::report::write_aggregate_csv;
use pgpe::config::ExperimentFile;
use pgpe::{BaselineKind, Hypothesis, MetaParams, Objective, Optimizer, PgpeError, Variant};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgpeStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A numeric argument was outside its domain.
    InvalidArgument = 2,
    /// Vector lengths disagree.
    DimensionMismatch = 3,
    /// A configuration document could not be parsed or validated.
    Config = 4,
    /// The requested operation is not supported for these arguments.
    Unsupported = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Codes accepted by the `objective` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgpeObjective {
    Sphere = 0,
    Rastrigin = 1,
}

/// Codes accepted by the `variant` argument of [`pgpe_optimizer_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgpeVariant {
    Pgpe = 0,
    Sys = 1,
    SupSys = 2,
    Pgpe4smp = 3,
    SupIf = 4,
}

fn objective_from(code: i32) -> Result<Objective, Failure> {
    match code {
        c if c == PgpeObjective::Sphere as i32 => Ok(Objective::Sphere),
        c if c == PgpeObjective::Rastrigin as i32 => Ok(Objective::Rastrigin),
        c => Err(Failure(PgpeStatus::InvalidArgument, format!("unknown objective code {c}"))),
    }
}

fn variant_from(code: i32) -> Result<Variant, Failure> {
    let known = [
        (PgpeVariant::Pgpe, Variant::Pgpe),
        (PgpeVariant::Sys, Variant::Sys),
        (PgpeVariant::SupSys, Variant::SupSys),
        (PgpeVariant::Pgpe4smp, Variant::Pgpe4smp),
        (PgpeVariant::SupIf, Variant::SupIf),
    ];
    known
        .iter()
        .find(|(c, _)| *c as i32 == code)
        .map(|&(_, v)| v)
        .ok_or_else(|| Failure(PgpeStatus::InvalidArgument, format!("unknown variant code {code}")))
}

/// Reward callback: receives `dim` parameters and the caller's `user_data`.
pub type PgpeRewardFn = Option<unsafe extern "C" fn(theta: *const f64, dim: usize, user_data: *mut c_void) -> f64>;

/// Opaque optimizer handle.
pub struct PgpeOptimizer {
    optimizer: Optimizer,
    rng: RunRng,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PgpeStatus, String);

impl From<PgpeError> for Failure {
    fn from(e: PgpeError) -> Self {
        let status = match e {
            PgpeError::Domain { .. } => PgpeStatus::InvalidArgument,
            PgpeError::DimensionMismatch { .. } => PgpeStatus::DimensionMismatch,
            PgpeError::MissingRewards => PgpeStatus::InvalidArgument,
            PgpeError::Unsupported(_) => PgpeStatus::Unsupported,
            PgpeError::Config { .. } => PgpeStatus::Config,
        };
        Failure(status, e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(PgpeStatus::NullPointer, format!("{name} is null"))
}

/// Runs `body`, translating errors and panics into a status code.
fn guard<F>(body: F) -> PgpeStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PgpeStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {message}"));
            PgpeStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn vector<'a>(data: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if data.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn live<'a>(h: *mut PgpeOptimizer) -> Result<&'a mut PgpeOptimizer, Failure> {
    h.as_mut().ok_or_else(|| null("optimizer"))
}

/// Message of the last failed call on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pgpe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Median deviation `0.67449 * sigma`.
///
/// # Safety
/// `out` must be null or valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn pgpe_median_from_std(sigma: f64, out: *mut f64) -> PgpeStatus {
    guard(|| write(out, "out", pgpe::sampling::median_from_std(sigma)?))
}

/// Mirror of `eps` across the median deviation `phi`.
///
/// # Safety
/// `out` must be null or valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn pgpe_mirror(eps: f64, phi: f64, out: *mut f64) -> PgpeStatus {
    guard(|| write(out, "out", pgpe::sampling::mirror(eps, phi)?))
}

/// Objective value (to be minimized) at `theta[0..dim]`.
///
/// # Safety
/// `theta` must point to `dim` doubles; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pgpe_objective_value(
    objective: i32,
    theta: *const f64,
    dim: usize,
    out: *mut f64,
) -> PgpeStatus {
    guard(|| {
        let theta = vector(theta, dim, "theta")?;
        if dim == 0 {
            return Err(Failure(PgpeStatus::InvalidArgument, "dim must be at least 1".into()));
        }
        write(out, "out", objective_from(objective)?.value(theta))
    })
}

/// Creates an optimizer at `mu0[0..dim]` with isotropic `sigma0`, the
/// default decaying baseline and a random stream seeded by `seed`.
///
/// # Safety
/// `mu0` must point to `dim` doubles; `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn pgpe_optimizer_new(
    variant: i32,
    mu0: *const f64,
    dim: usize,
    sigma0: f64,
    alpha_mu: f64,
    alpha_sigma: f64,
    seed: u64,
    out: *mut *mut PgpeOptimizer,
) -> PgpeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mu0 = vector(mu0, dim, "mu0")?;
        let hypothesis = Hypothesis::isotropic(mu0.to_vec(), sigma0)?;
        let meta = MetaParams::new(variant_from(variant)?, alpha_mu, alpha_sigma)?;
        let optimizer = Optimizer::new(hypothesis, meta, BaselineKind::default())?;
        let boxed = Box::new(PgpeOptimizer {
            optimizer,
            rng: seeded_rng(seed),
        });
        out.write(Box::into_raw(boxed));
        Ok(())
    })
}

/// Releases an optimizer. Null is ignored.
///
/// # Safety
/// `handle` must be null or come from [`pgpe_optimizer_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pgpe_optimizer_free(handle: *mut PgpeOptimizer) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// One update against a built-in objective. `best_reward` (optional)
/// receives the best reward sampled during the step.
///
/// # Safety
/// `handle` must be a live optimizer; `best_reward` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pgpe_optimizer_step(
    handle: *mut PgpeOptimizer,
    objective: i32,
    best_reward: *mut f64,
) -> PgpeStatus {
    guard(|| {
        let h = live(handle)?;
        let objective = objective_from(objective)?;
        let report = h.optimizer.step(&mut h.rng, |theta| objective.reward(theta))?;
        if !best_reward.is_null() {
            best_reward.write(report.best_reward());
        }
        Ok(())
    })
}

/// One update against a caller-supplied reward (higher is better).
///
/// # Safety
/// `handle` must be a live optimizer, `reward` a function that reads at
/// most `dim` doubles, and `best_reward` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pgpe_optimizer_step_with(
    handle: *mut PgpeOptimizer,
    reward: PgpeRewardFn,
    user_data: *mut c_void,
    best_reward: *mut f64,
) -> PgpeStatus {
    guard(|| {
        let h = live(handle)?;
        let reward = reward.ok_or_else(|| null("reward"))?;
        let report = h
            .optimizer
            .step(&mut h.rng, |theta| reward(theta.as_ptr(), theta.len(), user_data))?;
        if !best_reward.is_null() {
            best_reward.write(report.best_reward());
        }
        Ok(())
    })
}

/// Search-space dimension of the optimizer.
///
/// # Safety
/// `handle` must be a live optimizer; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pgpe_optimizer_dim(handle: *const PgpeOptimizer, out: *mut usize) -> PgpeStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("optimizer"))?;
        write(out, "out", h.optimizer.hypothesis().dim())
    })
}

/// Objective evaluations consumed so far.
///
/// # Safety
/// `handle` must be a live optimizer; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pgpe_optimizer_evaluations(handle: *const PgpeOptimizer, out: *mut u64) -> PgpeStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("optimizer"))?;
        write(out, "out", h.optimizer.evaluations())
    })
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len != src.len() {
        return Err(PgpeError::DimensionMismatch { expected: src.len(), found: len }.into());
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, len);
    Ok(())
}

/// Copies the current mean into `out[0..len]`; `len` must equal the dimension.
///
/// # Safety
/// `handle` must be a live optimizer; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pgpe_optimizer_mu(handle: *const PgpeOptimizer, out: *mut f64, len: usize) -> PgpeStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("optimizer"))?;
        copy_out(h.optimizer.hypothesis().mu(), out, len)
    })
}

/// Copies the current standard deviations into `out[0..len]`.
///
/// # Safety
/// `handle` must be a live optimizer; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pgpe_optimizer_sigma(handle: *const PgpeOptimizer, out: *mut f64, len: usize) -> PgpeStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("optimizer"))?;
        copy_out(h.optimizer.hypothesis().sigma(), out, len)
    })
}

/// Runs the batch described by a JSON experiment document (the format read
/// by `pgpe run --config`) and returns the
/// aggregate curve as CSV in `*out_csv` (free with [`pgpe_string_free`]).
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_csv` writable.
#[no_mangle]
pub unsafe extern "C" fn pgpe_run_batch_json(config_json: *const c_char, out_csv: *mut *mut c_char) -> PgpeStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        if out_csv.is_null() {
            return Err(null("out_csv"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Failure(PgpeStatus::Config, format!("config is not UTF-8: {e}")))?;
        let file = ExperimentFile::parse(text)?;
        let batch = run_batch(&file.run)?;
        let mut csv = Vec::new();
        write_aggregate_csv(&mut csv, &batch.stats).expect("writing to memory cannot fail");
        let csv = CString::new(csv).expect("CSV has no NUL bytes");
        out_csv.write(csv.into_raw());
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn pgpe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
