//! C ABI over the gclab kernels.
//!
//! Every fallible function returns a [`GclabStatus`]; on anything but
//! `GCLAB_STATUS_OK` a message is kept per thread and read with
//! [`gclab_last_error_message`]. Handles are opaque and owned by the caller
//! once returned; release them with the matching `_free` function.
//! Strings are UTF-8 and NUL-terminated. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use gclab::carleman::sup_threshold_exponent;
use gclab::grid::{weighted_l2_norm, Grid1D, WaveField, WeightSpec};
use gclab::lab::{Experiment, RunConfig, RunRecord, Status};
use gclab::propagators::{airy_function, free_propagate, heat_regularize, oracle_gaussian};
use gclab::{Complex64, Error};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GclabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Precondition = 3,
    Numerical = 4,
    Config = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A sampled complex field on a periodic grid.
pub struct GclabField(WaveField);

/// A finished lab run and its record.
pub struct GclabRun {
    record: RunRecord,
    json: Vec<u8>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> GclabStatus {
    match e {
        Error::InvalidGrid(_) | Error::UnknownIdentity(_) => GclabStatus::InvalidArgument,
        Error::Precondition(_) | Error::OutOfBox { .. } | Error::SupportViolation { .. } | Error::TimeNotSampled(_) => {
            GclabStatus::Precondition
        }
        Error::Config(_) | Error::Format(_) => GclabStatus::Config,
        Error::Io(_) => GclabStatus::Io,
        _ => GclabStatus::Numerical,
    }
}

struct Fail(GclabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GclabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GclabStatus::Ok,
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {m}"));
            GclabStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(GclabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn field_ref<'a>(p: *const GclabField) -> Result<&'a WaveField, Fail> {
    p.as_ref().map(|f| &f.0).ok_or_else(|| null("field"))
}

unsafe fn string_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(GclabStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Copies `s` plus a NUL into `buf` when it fits; returns the size needed.
unsafe fn copy_out(s: &[u8], buf: *mut c_char, len: usize) -> usize {
    let need = s.len() + 1;
    if !buf.is_null() && len >= need {
        std::ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
        *buf.add(s.len()) = 0;
    }
    need
}

fn boxed(f: WaveField) -> *mut GclabField {
    Box::into_raw(Box::new(GclabField(f)))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn gclab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes the calling thread's last error message into `buf` (NUL-terminated)
/// if `len` is large enough, and returns the size required including the NUL.
/// Pass a null `buf` to query the size.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gclab_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| copy_out(e.borrow().as_bytes(), buf, len))
}

/// The closed-form Gaussian `e^{−κx²}` evolved to time `t` under `∂_t u = z ∂²u`,
/// sampled on `n_points` nodes of `[−half_width, half_width)`.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a new handle.
#[no_mangle]
pub unsafe extern "C" fn gclab_field_gaussian(
    n_points: usize,
    half_width: f64,
    kappa: f64,
    z_re: f64,
    z_im: f64,
    t: f64,
    out: *mut *mut GclabField,
) -> GclabStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = Grid1D::new(n_points, half_width)?;
        let f = oracle_gaussian(Complex64::new(kappa, 0.0), t, Complex64::new(z_re, z_im), &g)?;
        *out = boxed(f);
        Ok(())
    })
}

/// A field from `n_points` samples given as separate real and imaginary arrays.
///
/// # Safety
/// `re` and `im` must each point to `n_points` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gclab_field_from_samples(
    n_points: usize,
    half_width: f64,
    re: *const f64,
    im: *const f64,
    time: f64,
    out: *mut *mut GclabField,
) -> GclabStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if re.is_null() || im.is_null() {
            return Err(null("samples"));
        }
        let g = Grid1D::new(n_points, half_width)?;
        let (re, im) = (std::slice::from_raw_parts(re, n_points), std::slice::from_raw_parts(im, n_points));
        let samples = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        *out = boxed(WaveField::new(g, samples, time)?);
        Ok(())
    })
}

/// Releases a field. Null is ignored.
///
/// # Safety
/// `field` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gclab_field_free(field: *mut GclabField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gclab_field_len(field: *const GclabField) -> usize {
    field.as_ref().map_or(0, |f| f.0.samples().len())
}

/// Copies the samples into `re` and `im`, each of capacity `len`.
///
/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gclab_field_samples(
    field: *const GclabField,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> GclabStatus {
    guard(|| {
        let f = field_ref(field)?;
        if re.is_null() || im.is_null() {
            return Err(null("output arrays"));
        }
        let s = f.samples();
        if len < s.len() {
            return Err(Fail(GclabStatus::BufferTooSmall, format!("need {} samples, got {len}", s.len())));
        }
        for (j, v) in s.iter().enumerate() {
            *re.add(j) = v.re;
            *im.add(j) = v.im;
        }
        Ok(())
    })
}

/// Exact free Schrödinger flow by `t`.
///
/// # Safety
/// `field` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gclab_field_free_propagate(
    field: *const GclabField,
    t: f64,
    out: *mut *mut GclabField,
) -> GclabStatus {
    guard(|| {
        let f = field_ref(field)?;
        let out = out_ptr(out, "out")?;
        if !t.is_finite() {
            return Err(Fail(GclabStatus::InvalidArgument, format!("t = {t}")));
        }
        *out = boxed(free_propagate(f, t));
        Ok(())
    })
}

/// Heat flow `e^{a∂²}`, `a ≥ 0`.
///
/// # Safety
/// `field` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gclab_field_heat_regularize(
    field: *const GclabField,
    a: f64,
    out: *mut *mut GclabField,
) -> GclabStatus {
    guard(|| {
        let f = field_ref(field)?;
        let out = out_ptr(out, "out")?;
        *out = boxed(heat_regularize(f, a)?);
        Ok(())
    })
}

/// `‖a − b‖ / ‖b‖` on a shared grid.
///
/// # Safety
/// Both handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gclab_field_relative_l2_error(
    a: *const GclabField,
    b: *const GclabField,
    out: *mut f64,
) -> GclabStatus {
    guard(|| {
        let (a, b) = (field_ref(a)?, field_ref(b)?);
        let out = out_ptr(out, "out")?;
        if a.grid() != b.grid() {
            return Err(Fail(GclabStatus::InvalidArgument, "fields live on different grids".into()));
        }
        *out = a.relative_l2_error(b);
        Ok(())
    })
}

/// `log ‖e^{γx²} f‖`; `divergent` is set when the tail reaches the box edge.
///
/// # Safety
/// `field` must be a live handle; `log_norm` and `divergent` valid.
#[no_mangle]
pub unsafe extern "C" fn gclab_field_gaussian_log_norm(
    field: *const GclabField,
    gamma: f64,
    log_norm: *mut f64,
    divergent: *mut bool,
) -> GclabStatus {
    guard(|| {
        let f = field_ref(field)?;
        let (log_norm, divergent) = (out_ptr(log_norm, "log_norm")?, out_ptr(divergent, "divergent")?);
        let n = weighted_l2_norm(f, &WeightSpec::Gaussian { gamma })?;
        *log_norm = n.log_norm();
        *divergent = n.divergent;
        Ok(())
    })
}

/// The Airy function `Ai(x)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gclab_airy(x: f64, out: *mut f64) -> GclabStatus {
    guard(|| {
        *out_ptr(out, "out")? = airy_function(x)?;
        Ok(())
    })
}

/// `sup_ε E(γ, ε, 0)` and its maximiser.
///
/// # Safety
/// `eps_star` and `sup` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gclab_threshold_sup(gamma: f64, eps_star: *mut f64, sup: *mut f64) -> GclabStatus {
    guard(|| {
        let (e, s) = (out_ptr(eps_star, "eps_star")?, out_ptr(sup, "sup")?);
        (*e, *s) = sup_threshold_exponent(gamma)?;
        Ok(())
    })
}

/// Verifies a named operator identity (`"I1"` .. `"I4"`) in exact arithmetic;
/// `residual_monomials` is 0 when it holds.
///
/// # Safety
/// `name` must be a NUL-terminated string and `residual_monomials` valid.
#[no_mangle]
pub unsafe extern "C" fn gclab_verify_identity(name: *const c_char, residual_monomials: *mut usize) -> GclabStatus {
    guard(|| {
        let name = string_arg(name, "name")?;
        let out = out_ptr(residual_monomials, "residual_monomials")?;
        *out = gclab::weyl::verify_identity(name)?.summary().residual_monomials;
        Ok(())
    })
}

/// Runs one experiment and writes its artifacts into `out_dir/<experiment>/`.
///
/// `config_toml` may be null for the defaults; otherwise its keys override them.
/// A run whose checks fail still returns `GCLAB_STATUS_OK`; query the handle.
///
/// # Safety
/// `experiment` and `out_dir` must be NUL-terminated strings, `config_toml`
/// null or NUL-terminated, and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gclab_run_execute(
    experiment: *const c_char,
    config_toml: *const c_char,
    out_dir: *const c_char,
    out: *mut *mut GclabRun,
) -> GclabStatus {
    guard(|| {
        let name = string_arg(experiment, "experiment")?;
        let dir = string_arg(out_dir, "out_dir")?;
        let out = out_ptr(out, "out")?;
        let exp = Experiment::ALL
            .into_iter()
            .find(|e| e.name() == name && *e != Experiment::Suite)
            .ok_or_else(|| Fail(GclabStatus::InvalidArgument, format!("unknown experiment `{name}`")))?;
        let cfg = if config_toml.is_null() {
            RunConfig::defaults(exp)
        } else {
            RunConfig::from_toml_str(string_arg(config_toml, "config_toml")?, Some(exp))?
        };
        cfg.validate()?;
        let record = gclab::lab::execute(&cfg, &Path::new(dir).join(exp.name()))?;
        let json = serde_json::to_vec(&record).map_err(|e| Fail(GclabStatus::Numerical, e.to_string()))?;
        *out = Box::into_raw(Box::new(GclabRun { record, json }));
        Ok(())
    })
}

/// 1 if every check passed, 0 if some failed, -1 if the experiment errored or `run` is null.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gclab_run_passed(run: *const GclabRun) -> i32 {
    match run.as_ref().map(|r| &r.record.status) {
        Some(Status::Pass) => 1,
        Some(Status::Fail) => 0,
        _ => -1,
    }
}

/// Number of checks in the record, 0 for null.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gclab_run_check_count(run: *const GclabRun) -> usize {
    run.as_ref().map_or(0, |r| r.record.checks.len())
}

/// The run record as JSON, copied like [`gclab_last_error_message`]; returns the size needed.
///
/// # Safety
/// `run` must be a live handle; `buf` null or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gclab_run_record_json(run: *const GclabRun, buf: *mut c_char, len: usize) -> usize {
    run.as_ref().map_or(0, |r| copy_out(&r.json, buf, len))
}

/// Releases a run. Null is ignored.
///
/// # Safety
/// `run` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gclab_run_free(run: *mut GclabRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
