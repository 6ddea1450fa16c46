//! C ABI over `qfc-core`.
//!
//! Every function returns a [`QfcStatus`] and writes results through out
//! pointers. On failure, [`qfc_last_error`] returns a message for the
//! calling thread. Objects with internal state (index models, CMT
//! parameters, paths) are opaque handles that must be released with their
//! `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use qfc_core::cmt::{self, CmtParams, Drive, OdeOptions};
use qfc_core::dispersion::{self, Band, IndexModel};
use qfc_core::layout::{self, EulerBendSpec, PathPolyline};
use qfc_core::ring::{self, BandQ, CouplerSpec, QSet, RingParams};
use qfc_core::spectra::{self, CouplingRegime, RegimeHint, SpectrumTrace};
use qfc_core::system::{self, PowerBudget};
use qfc_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    OutOfRange = 3,
    NoSolution = 4,
    NoConvergence = 5,
    NoDip = 6,
    MultipleDips = 7,
    Config = 8,
    BufferTooSmall = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfcBand {
    Signal = 0,
    Pump = 1,
    Sf = 2,
}

impl From<QfcBand> for Band {
    fn from(b: QfcBand) -> Self {
        match b {
            QfcBand::Signal => Band::Signal,
            QfcBand::Pump => Band::Pump,
            QfcBand::Sf => Band::Sf,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfcRegime {
    Over = 0,
    Under = 1,
    Critical = 2,
}

/// Power coupling fractions at ports A and B per band.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QfcCouplers {
    pub kappa2_signal_a: f64,
    pub kappa2_signal_b: f64,
    pub kappa2_pump_a: f64,
    pub kappa2_pump_b: f64,
    pub kappa2_sf_a: f64,
    pub kappa2_sf_b: f64,
}

/// Intrinsic and loaded Q per band.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QfcQSet {
    pub signal_intrinsic: f64,
    pub signal_loaded: f64,
    pub pump_intrinsic: f64,
    pub pump_loaded: f64,
    pub sf_intrinsic: f64,
    pub sf_loaded: f64,
}

impl From<&QfcQSet> for QSet {
    fn from(q: &QfcQSet) -> Self {
        QSet {
            signal: BandQ { intrinsic: q.signal_intrinsic, loaded: q.signal_loaded },
            pump: BandQ { intrinsic: q.pump_intrinsic, loaded: q.pump_loaded },
            sf: BandQ { intrinsic: q.sf_intrinsic, loaded: q.sf_loaded },
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QfcResonanceFit {
    pub center_nm: f64,
    pub fwhm_nm: f64,
    pub loaded_q: f64,
    pub intrinsic_q: f64,
    pub min_transmission: f64,
    pub baseline: f64,
    pub rms_residual: f64,
    /// A [`QfcRegime`] value.
    pub regime: i32,
    pub iterations: u32,
    pub converged: bool,
}

/// Opaque effective-index model.
pub struct QfcIndexModel(IndexModel);
/// Opaque coupled-mode parameter set.
pub struct QfcCmtParams(CmtParams);
/// Opaque sampled path.
pub struct QfcPath(PathPolyline);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QfcStatus {
    match e {
        Error::OutOfRange { .. } | Error::LossRegime { .. } => QfcStatus::OutOfRange,
        Error::NoSolution(_) | Error::NoConversion => QfcStatus::NoSolution,
        Error::Convergence { .. } => QfcStatus::NoConvergence,
        Error::NoDip { .. } => QfcStatus::NoDip,
        Error::MultipleDips { .. } => QfcStatus::MultipleDips,
        Error::Config { .. } => QfcStatus::Config,
        Error::Io(_) => QfcStatus::Io,
        _ => QfcStatus::InvalidInput,
    }
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), (QfcStatus, String)>) -> QfcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QfcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            QfcStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (QfcStatus, String)>;
}

impl<T> IntoFfi<T> for qfc_core::Result<T> {
    fn ffi(self) -> Result<T, (QfcStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, (QfcStatus, String)> {
    // SAFETY: caller promises `p` is either null or valid for reads.
    unsafe { p.as_ref() }.ok_or_else(|| (QfcStatus::NullPointer, format!("{what} is NULL")))
}

fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (QfcStatus, String)> {
    // SAFETY: caller promises `p` is either null or valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| (QfcStatus::NullPointer, format!("{what} is NULL")))
}

fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (QfcStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err((QfcStatus::NullPointer, format!("{what} is NULL")));
    }
    // SAFETY: non-null and the caller promises `n` readable elements.
    Ok(unsafe { std::slice::from_raw_parts(p, n) })
}

fn boxed<T>(slot: *mut *mut T, value: T) -> Result<(), (QfcStatus, String)> {
    *out(slot, "handle out-pointer")? = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qfc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// η_max of the double-pulley ring from coupling fractions and loss.
#[no_mangle]
pub extern "C" fn qfc_eta_max_couplings(
    radius_um: f64,
    ring_width_um: f64,
    loss_db_per_cm: f64,
    couplers: *const QfcCouplers,
    eta_out: *mut f64,
) -> QfcStatus {
    guard(|| {
        let c = non_null(couplers, "couplers")?;
        let ring = RingParams::new(radius_um, ring_width_um, loss_db_per_cm).ffi()?;
        let spec = CouplerSpec {
            kappa2_signal_a: c.kappa2_signal_a,
            kappa2_signal_b: c.kappa2_signal_b,
            kappa2_pump_a: c.kappa2_pump_a,
            kappa2_pump_b: c.kappa2_pump_b,
            kappa2_sf_a: c.kappa2_sf_a,
            kappa2_sf_b: c.kappa2_sf_b,
            port_a: None,
            port_b: None,
        };
        *out(eta_out, "eta_out")? = ring::eta_max_couplings(&ring, &spec).ffi()?;
        Ok(())
    })
}

/// η_max from measured intrinsic and loaded Q factors.
#[no_mangle]
pub extern "C" fn qfc_eta_max_q(q: *const QfcQSet, eta_out: *mut f64) -> QfcStatus {
    guard(|| {
        let q: QSet = non_null(q, "q")?.into();
        *out(eta_out, "eta_out")? = ring::eta_max_q(&q).ffi()?;
        Ok(())
    })
}

/// Quasi-phase-matching order `m_sf − m_s − m_p` (may be ≤ 0).
#[no_mangle]
pub extern "C" fn qfc_qpm_order(m_s: u32, m_p: u32, m_sf: u32, order_out: *mut i64) -> QfcStatus {
    guard(|| {
        *out(order_out, "order_out")? = m_sf as i64 - m_s as i64 - m_p as i64;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qfc_poling_period(radius_um: f64, order: i64, period_um_out: *mut f64) -> QfcStatus {
    guard(|| {
        *out(period_um_out, "period_um_out")? = ring::poling_period(radius_um, order).ffi()?;
        Ok(())
    })
}

/// Fractional round-trip propagation loss.
#[no_mangle]
pub extern "C" fn qfc_alpha_roundtrip(
    radius_um: f64,
    ring_width_um: f64,
    loss_db_per_cm: f64,
    alpha_out: *mut f64,
) -> QfcStatus {
    guard(|| {
        let ring = RingParams::new(radius_um, ring_width_um, loss_db_per_cm).ffi()?;
        *out(alpha_out, "alpha_out")? = ring::alpha_roundtrip(&ring);
        Ok(())
    })
}

/// Effective index that puts mode `m` on resonance at `lambda_nm`.
#[no_mangle]
pub extern "C" fn qfc_resonant_index(m: u32, lambda_nm: f64, radius_um: f64, n_out: *mut f64) -> QfcStatus {
    guard(|| {
        *out(n_out, "n_out")? = dispersion::resonant_index(m, lambda_nm, radius_um).ffi()?;
        Ok(())
    })
}

/// Polynomial index model about `center_nm` valid over `[lo_nm, hi_nm]`.
#[no_mangle]
pub extern "C" fn qfc_index_model_new(
    band: QfcBand,
    center_nm: f64,
    coeffs: *const f64,
    n_coeffs: usize,
    lo_nm: f64,
    hi_nm: f64,
    model_out: *mut *mut QfcIndexModel,
) -> QfcStatus {
    guard(|| {
        let c = slice(coeffs, n_coeffs, "coeffs")?.to_vec();
        let m = IndexModel::new(band.into(), center_nm, c, [lo_nm, hi_nm]).ffi()?;
        boxed(model_out, QfcIndexModel(m))
    })
}

/// Calibrated model of the reference ring for `band`.
#[no_mangle]
pub extern "C" fn qfc_index_model_reference(band: QfcBand, model_out: *mut *mut QfcIndexModel) -> QfcStatus {
    guard(|| {
        let [s, p, sf] = dispersion::reference_models();
        let m = match band {
            QfcBand::Signal => s,
            QfcBand::Pump => p,
            QfcBand::Sf => sf,
        };
        boxed(model_out, QfcIndexModel(m))
    })
}

#[no_mangle]
pub extern "C" fn qfc_index_model_n_eff(model: *const QfcIndexModel, lambda_nm: f64, n_out: *mut f64) -> QfcStatus {
    guard(|| {
        *out(n_out, "n_out")? = non_null(model, "model")?.0.n_eff(lambda_nm).ffi()?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qfc_index_model_n_group(model: *const QfcIndexModel, lambda_nm: f64, n_out: *mut f64) -> QfcStatus {
    guard(|| {
        *out(n_out, "n_out")? = non_null(model, "model")?.0.n_group(lambda_nm).ffi()?;
        Ok(())
    })
}

/// Releases a model; NULL is ignored.
#[no_mangle]
/// # Safety
/// The pointer must come from this library and must not be used afterwards.
pub unsafe extern "C" fn qfc_index_model_free(model: *mut QfcIndexModel) {
    if !model.is_null() {
        // SAFETY: caller contract; created by Box::into_raw in this crate and not yet freed.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Mode rates from Q factors at the given wavelengths, with `g = 0`.
#[no_mangle]
pub extern "C" fn qfc_cmt_params_from_q(
    q: *const QfcQSet,
    lambda_s_nm: f64,
    lambda_p_nm: f64,
    lambda_sf_nm: f64,
    params_out: *mut *mut QfcCmtParams,
) -> QfcStatus {
    guard(|| {
        let q: QSet = non_null(q, "q")?.into();
        let p = CmtParams::from_q(&q, [lambda_s_nm, lambda_p_nm, lambda_sf_nm], 0.0).ffi()?;
        boxed(params_out, QfcCmtParams(p))
    })
}

/// Rates of the reference device at its design wavelengths, `g = 0`.
#[no_mangle]
pub extern "C" fn qfc_cmt_params_reference(params_out: *mut *mut QfcCmtParams) -> QfcStatus {
    guard(|| boxed(params_out, QfcCmtParams(cmt::reference_rates())))
}

/// Sets `g` so the saturation pump power equals `p_opt_w`.
#[no_mangle]
pub extern "C" fn qfc_calibrate_g(
    params: *mut QfcCmtParams,
    eta_max: f64,
    p_opt_w: f64,
    g_out: *mut f64,
) -> QfcStatus {
    guard(|| {
        let h = out(params, "params")?;
        let (p, cal) = cmt::calibrate_g(eta_max, p_opt_w, &h.0).ffi()?;
        h.0 = p;
        if !g_out.is_null() {
            *out(g_out, "g_out")? = cal.g_rad_per_s;
        }
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qfc_p_opt(params: *const QfcCmtParams, p_opt_w_out: *mut f64) -> QfcStatus {
    guard(|| {
        *out(p_opt_w_out, "p_opt_w_out")? = cmt::p_opt(&non_null(params, "params")?.0).ffi()?;
        Ok(())
    })
}

/// Closed-form conversion efficiency at on-chip pump power `pump_w`.
#[no_mangle]
pub extern "C" fn qfc_eta_of_pump(params: *const QfcCmtParams, pump_w: f64, eta_out: *mut f64) -> QfcStatus {
    guard(|| {
        *out(eta_out, "eta_out")? = cmt::eta_of_pump(&non_null(params, "params")?.0, pump_w).ffi()?;
        Ok(())
    })
}

/// Time-domain steady state; writes η and the flux-balance relative error.
#[no_mangle]
pub extern "C" fn qfc_steady_state_ode(
    params: *const QfcCmtParams,
    pump_w: f64,
    signal_w: f64,
    eta_out: *mut f64,
    flux_error_out: *mut f64,
) -> QfcStatus {
    guard(|| {
        let p = &non_null(params, "params")?.0;
        let ss = cmt::steady_state_ode(p, Drive { pump_w, signal_w }, &OdeOptions::default()).ffi()?;
        *out(eta_out, "eta_out")? = ss.eta;
        if !flux_error_out.is_null() {
            *out(flux_error_out, "flux_error_out")? = ss.flux.relative_error();
        }
        Ok(())
    })
}

#[no_mangle]
/// # Safety
/// The pointer must come from this library and must not be used afterwards.
pub unsafe extern "C" fn qfc_cmt_params_free(params: *mut QfcCmtParams) {
    if !params.is_null() {
        // SAFETY: caller contract; created by Box::into_raw in this crate and not yet freed.
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Fits the single dip of a through-port trace. `hint` is
/// [`QfcRegime::Over`] or [`QfcRegime::Under`].
#[no_mangle]
pub extern "C" fn qfc_fit_resonance(
    wavelengths_nm: *const f64,
    transmission: *const f64,
    n: usize,
    hint: QfcRegime,
    fit_out: *mut QfcResonanceFit,
) -> QfcStatus {
    guard(|| {
        let wl = slice(wavelengths_nm, n, "wavelengths_nm")?.to_vec();
        let tr = slice(transmission, n, "transmission")?.to_vec();
        let hint = match hint {
            QfcRegime::Over => RegimeHint::Over,
            QfcRegime::Under => RegimeHint::Under,
            QfcRegime::Critical => {
                return Err((QfcStatus::InvalidInput, "hint must be over or under".into()));
            }
        };
        let trace = SpectrumTrace::new(wl, tr, None).ffi()?;
        let f = spectra::fit_resonance(&trace, hint).ffi()?;
        *out(fit_out, "fit_out")? = QfcResonanceFit {
            center_nm: f.center_nm,
            fwhm_nm: f.fwhm_nm,
            loaded_q: f.loaded_q,
            intrinsic_q: f.intrinsic_q,
            min_transmission: f.min_transmission,
            baseline: f.baseline,
            rms_residual: f.rms_residual,
            regime: match f.regime {
                CouplingRegime::Over => QfcRegime::Over,
                CouplingRegime::Under => QfcRegime::Under,
                CouplingRegime::Critical => QfcRegime::Critical,
            } as i32,
            iterations: f.iterations as u32,
            converged: f.converged,
        };
        Ok(())
    })
}

/// Samples a symmetric Euler bend.
#[no_mangle]
pub extern "C" fn qfc_euler_bend(
    r_max_um: f64,
    r_min_um: f64,
    total_angle_rad: f64,
    width_nm: f64,
    n_samples: usize,
    path_out: *mut *mut QfcPath,
) -> QfcStatus {
    guard(|| {
        let spec = EulerBendSpec::new(r_max_um, r_min_um, total_angle_rad, width_nm).ffi()?;
        let p = layout::euler_bend_path(&spec, n_samples).ffi()?;
        boxed(path_out, QfcPath(p))
    })
}

#[no_mangle]
pub extern "C" fn qfc_path_len(path: *const QfcPath, len_out: *mut usize) -> QfcStatus {
    guard(|| {
        *out(len_out, "len_out")? = non_null(path, "path")?.0.len();
        Ok(())
    })
}

/// Copies path channels into caller buffers of `capacity` elements. Any
/// channel pointer may be NULL to skip it.
#[no_mangle]
pub extern "C" fn qfc_path_copy(
    path: *const QfcPath,
    s_um: *mut f64,
    x_um: *mut f64,
    y_um: *mut f64,
    theta_rad: *mut f64,
    k_per_um: *mut f64,
    capacity: usize,
) -> QfcStatus {
    guard(|| {
        let p = &non_null(path, "path")?.0;
        if capacity < p.len() {
            return Err((
                QfcStatus::BufferTooSmall,
                format!("buffers hold {capacity} values; path has {}", p.len()),
            ));
        }
        for (dst, src) in [(s_um, &p.s_um), (x_um, &p.x_um), (y_um, &p.y_um), (theta_rad, &p.theta_rad), (k_per_um, &p.k_per_um)] {
            if !dst.is_null() {
                // SAFETY: non-null and the caller promises `capacity` ≥ len writable elements.
                unsafe { std::ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len()) };
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qfc_path_effective_radius(path: *const QfcPath, radius_um_out: *mut f64) -> QfcStatus {
    guard(|| {
        *out(radius_um_out, "radius_um_out")? = layout::effective_radius(&non_null(path, "path")?.0).ffi()?;
        Ok(())
    })
}

#[no_mangle]
/// # Safety
/// The pointer must come from this library and must not be used afterwards.
pub unsafe extern "C" fn qfc_path_free(path: *mut QfcPath) {
    if !path.is_null() {
        // SAFETY: caller contract; created by Box::into_raw in this crate and not yet freed.
        drop(unsafe { Box::from_raw(path) });
    }
}

/// Whole channels supported by the on-chip pump.
#[no_mangle]
pub extern "C" fn qfc_channel_count(
    source_mw: f64,
    coupling: f64,
    per_channel_uw: f64,
    count_out: *mut u64,
) -> QfcStatus {
    guard(|| {
        let b = PowerBudget { source_mw, coupling, per_channel_uw };
        *out(count_out, "count_out")? = system::channel_count(&b).ffi()?;
        Ok(())
    })
}

/// Runs the task list of a JSON config and returns the report JSON in a
/// string to be released with [`qfc_string_free`]. Relative paths resolve
/// against `base_dir` (NULL for the working directory).
#[no_mangle]
pub extern "C" fn qfc_run_config_json(
    config_json: *const c_char,
    base_dir: *const c_char,
    report_out: *mut *mut c_char,
) -> QfcStatus {
    guard(|| {
        let text = cstr(config_json, "config_json")?;
        let base = if base_dir.is_null() { "." } else { cstr(base_dir, "base_dir")? };
        let report = qfc_core::run::run_config_json(text, Path::new(base)).ffi()?;
        let c = CString::new(report).map_err(|e| (QfcStatus::InvalidInput, e.to_string()))?;
        *out(report_out, "report_out")? = c.into_raw();
        Ok(())
    })
}

fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, (QfcStatus, String)> {
    if p.is_null() {
        return Err((QfcStatus::NullPointer, format!("{what} is NULL")));
    }
    // SAFETY: non-null and the caller promises a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|e| (QfcStatus::InvalidInput, format!("{what} is not UTF-8: {e}")))
}

#[no_mangle]
/// # Safety
/// The pointer must come from this library and must not be used afterwards.
pub unsafe extern "C" fn qfc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: caller contract; created by CString::into_raw in this crate and not yet freed.
        drop(unsafe { CString::from_raw(s) });
    }
}
