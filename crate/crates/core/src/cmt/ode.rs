//! Fixed-step RK4 integration of the three-mode equations of motion:
//!
//! ```text
//! ȧ_s  = −(κ_s/2  + iδ_s)a_s  − i g a_p* a_sf + √κ_ext,s s_in
//! ȧ_p  = −(κ_p/2  + iδ_p)a_p  [− i g a_s* a_sf] + √κ_ext,p p_in
//! ȧ_sf = −(κ_sf/2 + iδ_sf)a_sf − i g a_s a_p
//! ```
//!
//! The bracketed pump back-action is only included with
//! [`OdeOptions::pump_depletion`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CmtParams;
use crate::consts::HBAR;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Step is `step_factor / max(κ_tot)`.
    pub step_factor: f64,
    /// Converged once the largest per-mode relative change per unit of
    /// `1/min(κ_tot)` drops below this.
    pub tolerance: f64,
    pub max_steps: usize,
    pub pump_depletion: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            step_factor: 0.01,
            tolerance: 1e-10,
            max_steps: 2_000_000,
            pump_depletion: false,
        }
    }
}

/// On-chip powers (W) at the input ports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    pub pump_w: f64,
    pub signal_w: f64,
}

/// Intracavity amplitudes; `|a|²` is a photon number.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CmtState {
    pub signal: Complex64,
    pub pump: Complex64,
    pub sf: Complex64,
}

impl CmtState {
    fn axpy(&self, h: f64, d: &CmtState) -> CmtState {
        CmtState {
            signal: self.signal + d.signal * h,
            pump: self.pump + d.pump * h,
            sf: self.sf + d.sf * h,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.signal, self.pump, self.sf].iter().all(|a| a.is_finite())
    }
}

/// Signal photon bookkeeping at steady state, all in photons/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxBalance {
    pub input: f64,
    /// SF photons leaving the extraction port.
    pub converted: f64,
    /// Signal photons leaving the input bus.
    pub residual: f64,
    /// Intrinsic loss of signal and SF, plus SF leaving the other port.
    pub dissipated: f64,
}

impl FluxBalance {
    pub fn relative_error(&self) -> f64 {
        (self.converted + self.residual + self.dissipated - self.input).abs() / self.input
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub state: CmtState,
    /// Converted SF photon flux over input signal photon flux.
    pub eta: f64,
    pub steps: usize,
    pub flux: FluxBalance,
}

struct Rhs<'a> {
    p: &'a CmtParams,
    s_in: f64,
    p_in: f64,
    depletion: bool,
}

impl Rhs<'_> {
    fn eval(&self, a: &CmtState) -> CmtState {
        let (s, p, sf, g) = (&self.p.signal, &self.p.pump, &self.p.sf, self.p.g);
        let decay = |m: &super::ModeRates| Complex64::new(0.5 * m.kappa_total, m.detuning);
        let mut dp = -decay(p) * a.pump + p.kappa_ext.sqrt() * self.p_in;
        if self.depletion {
            dp -= I * g * a.signal.conj() * a.sf;
        }
        CmtState {
            signal: -decay(s) * a.signal - I * g * a.pump.conj() * a.sf
                + s.kappa_ext.sqrt() * self.s_in,
            pump: dp,
            sf: -decay(sf) * a.sf - I * g * a.signal * a.pump,
        }
    }

    fn rk4(&self, a: &CmtState, h: f64) -> CmtState {
        let k1 = self.eval(a);
        let k2 = self.eval(&a.axpy(0.5 * h, &k1));
        let k3 = self.eval(&a.axpy(0.5 * h, &k2));
        let k4 = self.eval(&a.axpy(h, &k3));
        CmtState {
            signal: a.signal + (k1.signal + 2.0 * k2.signal + 2.0 * k3.signal + k4.signal) * (h / 6.0),
            pump: a.pump + (k1.pump + 2.0 * k2.pump + 2.0 * k3.pump + k4.pump) * (h / 6.0),
            sf: a.sf + (k1.sf + 2.0 * k2.sf + 2.0 * k3.sf + k4.sf) * (h / 6.0),
        }
    }
}

fn relative_change(old: Complex64, new: Complex64) -> f64 {
    let scale = new.norm();
    if scale == 0.0 {
        0.0
    } else {
        (new - old).norm() / scale
    }
}

/// Integrates from an empty cavity until the state stops changing and
/// returns the steady amplitudes and conversion efficiency.
pub fn steady_state_ode(params: &CmtParams, drive: Drive, opts: &OdeOptions) -> Result<SteadyState> {
    params.validate()?;
    if !(drive.signal_w > 0.0 && drive.pump_w >= 0.0) {
        return Err(Error::InvalidInput(
            "signal power must be positive and pump power non-negative".into(),
        ));
    }
    let s_in = (drive.signal_w / (HBAR * params.signal.omega)).sqrt();
    let p_in = (drive.pump_w / (HBAR * params.pump.omega)).sqrt();
    let rhs = Rhs {
        p: params,
        s_in,
        p_in,
        depletion: opts.pump_depletion,
    };

    let kappas = params.modes().map(|m| m.kappa_total);
    let k_max = kappas.iter().copied().fold(f64::MIN, f64::max);
    let k_min = kappas.iter().copied().fold(f64::MAX, f64::min);
    let h = opts.step_factor / k_max;
    // Never declare convergence before a few slowest lifetimes have elapsed.
    let min_steps = (5.0 / (k_min * h)).ceil() as usize;

    let mut a = CmtState::default();
    let mut rate = f64::INFINITY;
    for step in 1..=opts.max_steps {
        let next = rhs.rk4(&a, h);
        if !next.is_finite() {
            return Err(Error::Convergence {
                steps: step,
                residual: f64::NAN,
            });
        }
        let change = relative_change(a.signal, next.signal)
            .max(relative_change(a.pump, next.pump))
            .max(relative_change(a.sf, next.sf));
        rate = change / (h * k_min);
        a = next;
        if step >= min_steps && rate < opts.tolerance {
            return Ok(finish(params, a, s_in, step));
        }
    }
    Err(Error::Convergence {
        steps: opts.max_steps,
        residual: rate,
    })
}

fn finish(params: &CmtParams, a: CmtState, s_in: f64, steps: usize) -> SteadyState {
    let (s, sf) = (&params.signal, &params.sf);
    let input = s_in * s_in;
    let converted = sf.kappa_ext * a.sf.norm_sqr();
    let out = Complex64::from(s_in) - s.kappa_ext.sqrt() * a.signal;
    let flux = FluxBalance {
        input,
        converted,
        residual: out.norm_sqr(),
        dissipated: s.kappa_int() * a.signal.norm_sqr() + sf.kappa_int() * a.sf.norm_sqr(),
    };
    SteadyState {
        state: a,
        eta: converted / input,
        steps,
        flux,
    }
}
