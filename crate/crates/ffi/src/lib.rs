//! C ABI over `qcat`.
//!
//! Every entry point returns a [`QcatStatus`]; results come back through out
//! pointers. Runs live behind the opaque [`QcatRun`] handle, which the caller
//! releases with [`qcat_run_free`]. The message of the last failure on the
//! calling thread is available from [`qcat_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qcat::analysis::PeakKind;
use qcat::cli::{simulate, write_run, RunConfig, RunResult};
use qcat::dynamics::SystemParams;
use qcat::interaction::fq_element;
use qcat::qalgebra::{q_number, DeformationParam};
use qcat::{Error, C64};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DimensionMismatch = 3,
    NonConvergence = 4,
    NormDrift = 5,
    TruncationLeak = 6,
    EmptySeries = 7,
    Parse = 8,
    Io = 9,
    OutOfRange = 10,
    Panic = 11,
}

impl From<&Error> for QcatStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => QcatStatus::InvalidParameter,
            Error::DimensionMismatch { .. } => QcatStatus::DimensionMismatch,
            Error::NonConvergence { .. } => QcatStatus::NonConvergence,
            Error::NormDrift { .. } => QcatStatus::NormDrift,
            Error::TruncationLeak { .. } => QcatStatus::TruncationLeak,
            Error::EmptySeries => QcatStatus::EmptySeries,
            Error::Parse(_) | Error::Json(_) => QcatStatus::Parse,
            Error::Io(_) => QcatStatus::Io,
        }
    }
}

/// System parameters; frequencies in units of the Rabi frequency.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QcatParams {
    pub omega_bar: f64,
    pub delta_bar: f64,
    pub epsilon: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub phi: f64,
    pub tau: f64,
    pub n_max: u32,
}

/// One sample of the observables on the plotted-time grid.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QcatSample {
    pub t_plot: f64,
    pub p_g: f64,
    pub p_e: f64,
    pub inversion: f64,
    pub coherence_re: f64,
    pub coherence_im: f64,
    pub p_g1: f64,
    pub p_e1: f64,
    pub p_g2: f64,
    pub p_e2: f64,
    pub s_p: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcatPeakKind {
    Initial = 0,
    Revival = 1,
    Collapse = 2,
    Unclassified = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QcatPeak {
    pub t_plot: f64,
    pub s_value: f64,
    pub kind: QcatPeakKind,
    pub envelope_amplitude: f64,
}

/// Opaque handle to a finished run.
pub struct QcatRun {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: QcatStatus, msg: impl Into<String>) -> QcatStatus {
    set_error(msg.into());
    status
}

fn guard<F: FnOnce() -> QcatStatus>(f: F) -> QcatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(QcatStatus::Panic, "internal panic"),
    }
}

fn from_error(e: Error) -> QcatStatus {
    let status = QcatStatus::from(&e);
    fail(status, e.to_string())
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, QcatStatus> {
    if p.is_null() {
        return Err(fail(QcatStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(QcatStatus::Parse, "string is not UTF-8"))
}

impl From<&SystemParams> for QcatParams {
    fn from(p: &SystemParams) -> Self {
        QcatParams {
            omega_bar: p.omega_bar,
            delta_bar: p.delta_bar,
            epsilon: p.epsilon,
            beta_re: p.beta.re,
            beta_im: p.beta.im,
            phi: p.phi,
            tau: p.deformation.tau(),
            n_max: p.n_max as u32,
        }
    }
}

impl QcatParams {
    fn to_system(self) -> Result<SystemParams, Error> {
        Ok(SystemParams {
            omega_bar: self.omega_bar,
            delta_bar: self.delta_bar,
            epsilon: self.epsilon,
            beta: C64::new(self.beta_re, self.beta_im),
            phi: self.phi,
            deformation: DeformationParam::new(self.tau)?,
            n_max: self.n_max as usize,
        })
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qcat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Fills `out` with the default parameter set.
///
/// # Safety
/// `out` must be null or point to writable memory for one `QcatParams`.
#[no_mangle]
pub unsafe extern "C" fn qcat_params_default(out: *mut QcatParams) -> QcatStatus {
    if out.is_null() {
        return fail(QcatStatus::NullPointer, "out is null");
    }
    *out = QcatParams::from(&SystemParams::default());
    QcatStatus::Ok
}

fn start_run(cfg: RunConfig, out: *mut *mut QcatRun) -> QcatStatus {
    match simulate(&cfg) {
        Ok(r) => {
            // SAFETY: callers check `out` before getting here
            unsafe { *out = Box::into_raw(Box::new(QcatRun { inner: r })) };
            QcatStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Evolves the cat state and both branches from `params` up to plotted time
/// `t_end_plot` with physical step `dt`, using defaults for everything else.
///
/// # Safety
/// `params` must point to a valid `QcatParams`; `out` must be writable. On
/// success `*out` owns a handle to be released with `qcat_run_free`.
#[no_mangle]
pub unsafe extern "C" fn qcat_run_new(
    params: *const QcatParams,
    t_end_plot: f64,
    dt: f64,
    out: *mut *mut QcatRun,
) -> QcatStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return fail(QcatStatus::NullPointer, "params or out is null");
        }
        *out = ptr::null_mut();
        let p = match (*params).to_system() {
            Ok(p) => p,
            Err(e) => return from_error(e),
        };
        let cfg = RunConfig { params: p, t_end_plot, dt, outputs: Vec::new(), ..RunConfig::default() };
        start_run(cfg, out)
    })
}

/// Like `qcat_run_new` with a full JSON run configuration.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_run_from_json(json: *const c_char, out: *mut *mut QcatRun) -> QcatStatus {
    guard(|| {
        if out.is_null() {
            return fail(QcatStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match c_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::from_json(text) {
            Ok(cfg) => start_run(cfg, out),
            Err(e) => from_error(e),
        }
    })
}

/// Releases a run handle. Null is ignored.
///
/// # Safety
/// `run` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcat_run_free(run: *mut QcatRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

unsafe fn handle<'a>(run: *const QcatRun) -> Result<&'a RunResult, QcatStatus> {
    run.as_ref().map(|r| &r.inner).ok_or_else(|| fail(QcatStatus::NullPointer, "run is null"))
}

/// Number of time samples in the run.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_run_sample_count(run: *const QcatRun, out: *mut usize) -> QcatStatus {
    let r = match handle(run) {
        Ok(r) => r,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail(QcatStatus::NullPointer, "out is null");
    }
    *out = r.samples.len();
    QcatStatus::Ok
}

/// Observables at sample `index`.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_run_sample(run: *const QcatRun, index: usize, out: *mut QcatSample) -> QcatStatus {
    let r = match handle(run) {
        Ok(r) => r,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail(QcatStatus::NullPointer, "out is null");
    }
    let Some(s) = r.samples.get(index) else {
        return fail(QcatStatus::OutOfRange, format!("sample {index} of {}", r.samples.len()));
    };
    *out = QcatSample {
        t_plot: s.t_plot,
        p_g: s.full.p_g,
        p_e: s.full.p_e,
        inversion: s.inversion(),
        coherence_re: s.full.c_ge.re,
        coherence_im: s.full.c_ge.im,
        p_g1: s.branch1.p_g,
        p_e1: s.branch1.p_e,
        p_g2: s.branch2.p_g,
        p_e2: s.branch2.p_e,
        s_p: s.s_p,
    };
    QcatStatus::Ok
}

/// Number of classified S(P) peaks, the initial record included.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_run_peak_count(run: *const QcatRun, out: *mut usize) -> QcatStatus {
    let r = match handle(run) {
        Ok(r) => r,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail(QcatStatus::NullPointer, "out is null");
    }
    *out = r.peaks.records.len();
    QcatStatus::Ok
}

/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_run_peak(run: *const QcatRun, index: usize, out: *mut QcatPeak) -> QcatStatus {
    let r = match handle(run) {
        Ok(r) => r,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail(QcatStatus::NullPointer, "out is null");
    }
    let Some(p) = r.peaks.records.get(index) else {
        return fail(QcatStatus::OutOfRange, format!("peak {index} of {}", r.peaks.records.len()));
    };
    *out = QcatPeak {
        t_plot: p.t_plot,
        s_value: p.s_value,
        kind: match p.kind {
            PeakKind::Initial => QcatPeakKind::Initial,
            PeakKind::Revival => QcatPeakKind::Revival,
            PeakKind::Collapse => QcatPeakKind::Collapse,
            PeakKind::Unclassified => QcatPeakKind::Unclassified,
        },
        envelope_amplitude: p.envelope_amplitude,
    };
    QcatStatus::Ok
}

/// Writes the run's files (`timeseries.csv`, `peaks.csv`, `run_meta.json`)
/// into `dir`, creating it if needed.
///
/// # Safety
/// `run` must be a live handle; `dir` a nul-terminated path.
#[no_mangle]
pub unsafe extern "C" fn qcat_run_write(run: *const QcatRun, dir: *const c_char) -> QcatStatus {
    guard(|| {
        let r = match handle(run) {
            Ok(r) => r,
            Err(s) => return s,
        };
        let dir = match c_str(dir) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let mut r = r.clone();
        r.config.outputs =
            vec![qcat::cli::Output::Timeseries, qcat::cli::Output::Peaks];
        match write_run(&r, Path::new(dir)) {
            Ok(()) => QcatStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// `<m|F_q|n>` of the laser coupling operator.
///
/// # Safety
/// `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_fq_element(
    m: u32,
    n: u32,
    epsilon: f64,
    tau: f64,
    re: *mut f64,
    im: *mut f64,
) -> QcatStatus {
    if re.is_null() || im.is_null() {
        return fail(QcatStatus::NullPointer, "re or im is null");
    }
    let d = match DeformationParam::new(tau) {
        Ok(d) => d,
        Err(e) => return from_error(e),
    };
    if !epsilon.is_finite() {
        return fail(QcatStatus::InvalidParameter, "epsilon must be finite");
    }
    let v = fq_element(m as usize, n as usize, epsilon, d);
    *re = v.re;
    *im = v.im;
    QcatStatus::Ok
}

/// The q-number `[x]_q` with `q = e^tau`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcat_q_number(x: f64, tau: f64, out: *mut f64) -> QcatStatus {
    if out.is_null() {
        return fail(QcatStatus::NullPointer, "out is null");
    }
    match DeformationParam::new(tau) {
        Ok(d) => {
            *out = q_number(x, d);
            QcatStatus::Ok
        }
        Err(e) => from_error(e),
    }
}
