//! Classical coupled-mode model of three-wave sum-frequency generation in a
//! triply resonant ring.
//!
//! Amplitudes are normalised so `|a|²` is the intracavity photon number and
//! `|s|²` an input photon flux; a mode leaks `κ_ext·|a|²` photons per second
//! through its designated port. With an undepleted pump the on-resonance
//! steady state is
//!
//! ```text
//! η(P) = η_max · 4x / (1 + x)²,   x = P / P_opt
//! η_max = (κ_ext,s/κ_s)(κ_ext,sf/κ_sf)
//! P_opt: 4 g² N_p = κ_s κ_sf,  N_p = 4 κ_ext,p P / (ħ ω_p κ_p²)
//! ```
//!
//! [`steady_state_ode`] integrates the full equations of motion and is the
//! independent check on these closed forms.

mod ode;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::consts::{omega_from_nm, HBAR};
use crate::ring::QSet;
use crate::{Error, Result};

pub use ode::{steady_state_ode, CmtState, Drive, FluxBalance, OdeOptions, SteadyState};

/// Relative tolerance on `ω_sf = ω_s + ω_p`.
pub const FREQUENCY_MATCH_TOL: f64 = 1e-4;

/// Decay and detuning of one cavity mode, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRates {
    pub omega: f64,
    pub kappa_total: f64,
    /// Decay through the designated port (signal→A, pump→A, sf→B).
    pub kappa_ext: f64,
    #[serde(default)]
    pub detuning: f64,
}

impl ModeRates {
    /// Rates for a mode at `lambda_nm` with intrinsic and loaded Q.
    pub fn from_q(lambda_nm: f64, intrinsic_q: f64, loaded_q: f64) -> Self {
        let omega = omega_from_nm(lambda_nm);
        let kappa_total = omega / loaded_q;
        Self {
            omega,
            kappa_total,
            kappa_ext: kappa_total - omega / intrinsic_q,
            detuning: 0.0,
        }
    }

    pub fn kappa_int(&self) -> f64 {
        self.kappa_total - self.kappa_ext
    }

    pub fn extraction_ratio(&self) -> f64 {
        self.kappa_ext / self.kappa_total
    }

    /// `κ/2 + iδ` magnitude squared, the denominator of a driven response.
    fn response_norm2(&self) -> f64 {
        0.25 * self.kappa_total * self.kappa_total + self.detuning * self.detuning
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmtParams {
    pub signal: ModeRates,
    pub pump: ModeRates,
    pub sf: ModeRates,
    /// Nonlinear coupling rate, rad/s.
    pub g: f64,
}

impl CmtParams {
    pub fn new(signal: ModeRates, pump: ModeRates, sf: ModeRates, g: f64) -> Result<Self> {
        let p = Self { signal, pump, sf, g };
        p.validate()?;
        Ok(p)
    }

    /// Rates from measured Q factors; `lambdas_nm` ordered signal, pump, sf.
    pub fn from_q(q: &QSet, lambdas_nm: [f64; 3], g: f64) -> Result<Self> {
        q.validate()?;
        Self::new(
            ModeRates::from_q(lambdas_nm[0], q.signal.intrinsic, q.signal.loaded),
            ModeRates::from_q(lambdas_nm[1], q.pump.intrinsic, q.pump.loaded),
            ModeRates::from_q(lambdas_nm[2], q.sf.intrinsic, q.sf.loaded),
            g,
        )
    }

    pub fn modes(&self) -> [&ModeRates; 3] {
        [&self.signal, &self.pump, &self.sf]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, m) in ["signal", "pump", "sf"].iter().zip(self.modes()) {
            if !(m.omega > 0.0 && m.omega.is_finite()) {
                return Err(Error::InvalidInput(format!("{name}: angular frequency must be positive")));
            }
            if !(m.kappa_ext > 0.0 && m.kappa_ext <= m.kappa_total && m.kappa_total.is_finite()) {
                return Err(Error::InvariantViolation(format!(
                    "{name}: need 0 < kappa_ext ({}) <= kappa_total ({})",
                    m.kappa_ext, m.kappa_total
                )));
            }
            if !m.detuning.is_finite() {
                return Err(Error::InvalidInput(format!("{name}: detuning must be finite")));
            }
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidInput(format!("g = {} must be non-negative", self.g)));
        }
        let sum = self.signal.omega + self.pump.omega;
        let rel = (self.sf.omega - sum).abs() / sum;
        if rel > FREQUENCY_MATCH_TOL {
            return Err(Error::InvariantViolation(format!(
                "omega_sf differs from omega_s + omega_p by {rel:.2e} relative"
            )));
        }
        Ok(())
    }

    pub fn with_g(mut self, g: f64) -> Result<Self> {
        self.g = g;
        self.validate()?;
        Ok(self)
    }

    pub fn is_on_resonance(&self) -> bool {
        self.modes().iter().all(|m| m.detuning == 0.0)
    }

    /// Saturation ceiling `(κ_ext,s/κ_s)(κ_ext,sf/κ_sf)`.
    pub fn eta_max(&self) -> f64 {
        self.signal.extraction_ratio() * self.sf.extraction_ratio()
    }

    /// Intracavity pump photon number for on-chip pump power `pump_w`,
    /// including pump detuning.
    pub fn pump_photons(&self, pump_w: f64) -> f64 {
        let flux = pump_w / (HBAR * self.pump.omega);
        self.pump.kappa_ext * flux / self.pump.response_norm2()
    }
}

/// Pump power (W) at which conversion saturates, `4g²N_p = κ_s κ_sf`.
pub fn p_opt(params: &CmtParams) -> Result<f64> {
    if params.g == 0.0 {
        return Err(Error::NoConversion);
    }
    let (s, p, sf) = (&params.signal, &params.pump, &params.sf);
    Ok(s.kappa_total * sf.kappa_total * p.kappa_total * p.kappa_total * HBAR * p.omega
        / (16.0 * params.g * params.g * p.kappa_ext))
}

/// On-resonance conversion efficiency at pump power `pump_w`:
/// `η_max·4x/(1+x)²`. Detunings in `params` are ignored; see
/// [`eta_of_pump_detuned`].
pub fn eta_of_pump(params: &CmtParams, pump_w: f64) -> Result<f64> {
    if !(pump_w >= 0.0) {
        return Err(Error::InvalidInput(format!("pump power {pump_w} W must be non-negative")));
    }
    if params.g == 0.0 || pump_w == 0.0 {
        return Ok(0.0);
    }
    let x = pump_w / p_opt(params)?;
    Ok(params.eta_max() * saturation(x))
}

/// `4x/(1+x)²`, symmetric under `x → 1/x`.
pub fn saturation(x: f64) -> f64 {
    4.0 * x / ((1.0 + x) * (1.0 + x))
}

/// Undepleted-pump steady-state efficiency with arbitrary detunings.
pub fn eta_of_pump_detuned(params: &CmtParams, pump_w: f64) -> Result<f64> {
    if !(pump_w >= 0.0) {
        return Err(Error::InvalidInput(format!("pump power {pump_w} W must be non-negative")));
    }
    use num_complex::Complex64;
    let (s, sf) = (&params.signal, &params.sf);
    let g2n = params.g * params.g * params.pump_photons(pump_w);
    let d_s = Complex64::new(0.5 * s.kappa_total, s.detuning);
    let d_sf = Complex64::new(0.5 * sf.kappa_total, sf.detuning);
    let eff = d_s + g2n / d_sf;
    Ok(sf.kappa_ext * s.kappa_ext * g2n / (d_sf.norm_sqr() * eff.norm_sqr()))
}

/// The `{g_rad_per_s, p_opt_W, eta_max}` calibration record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub g_rad_per_s: f64,
    #[serde(rename = "p_opt_W")]
    pub p_opt_w: f64,
    pub eta_max: f64,
}

/// Sets `g` so that [`p_opt`] returns `p_opt_w`. The measured `eta_max`
/// does not enter `g`; it is carried into the calibration record and
/// compared against the decay-rate ceiling.
pub fn calibrate_g(eta_max: f64, p_opt_w: f64, partial: &CmtParams) -> Result<(CmtParams, Calibration)> {
    if !(eta_max > 0.0 && eta_max < 1.0) {
        return Err(Error::InvalidInput(format!("eta_max {eta_max} must lie in (0, 1)")));
    }
    if !(p_opt_w > 0.0 && p_opt_w.is_finite()) {
        return Err(Error::InvalidInput(format!("P_opt {p_opt_w} W must be positive")));
    }
    let (s, p, sf) = (&partial.signal, &partial.pump, &partial.sf);
    let g2 = s.kappa_total * sf.kappa_total * p.kappa_total * p.kappa_total * HBAR * p.omega
        / (16.0 * p.kappa_ext * p_opt_w);
    let params = partial.with_g(g2.sqrt())?;
    let ceiling = params.eta_max();
    if eta_max > ceiling {
        log::warn!("measured eta_max {eta_max} exceeds the decay-rate ceiling {ceiling:.4}");
    }
    Ok((
        params,
        Calibration {
            g_rad_per_s: params.g,
            p_opt_w,
            eta_max,
        },
    ))
}

/// Sampled `η(P)` with its saturation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionCurve {
    points: Vec<(f64, f64)>,
    pub eta_max: f64,
    pub p_opt_w: f64,
}

impl ConversionCurve {
    pub fn new(points: Vec<(f64, f64)>, eta_max: f64, p_opt_w: f64) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidInput("pump powers must be strictly increasing".into()));
        }
        let slack = 1e-12;
        if let Some(&(p, eta)) = points
            .iter()
            .find(|&&(p, eta)| p < 0.0 || eta < -slack || eta > eta_max + slack)
        {
            return Err(Error::InvariantViolation(format!(
                "point ({p} W, {eta}) outside 0 <= eta <= eta_max = {eta_max}"
            )));
        }
        Ok(Self {
            points,
            eta_max,
            p_opt_w,
        })
    }

    /// Closed-form curve sampled at `pumps_w`.
    pub fn sample(params: &CmtParams, pumps_w: &[f64]) -> Result<Self> {
        let points = pumps_w
            .iter()
            .map(|&p| Ok((p, eta_of_pump(params, p)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, params.eta_max(), p_opt(params)?)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// CSV with header `pump_W,eta`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "pump_W,eta")?;
        for &(p, eta) in &self.points {
            writeln!(w, "{},{}", crate::format::sig(p), crate::format::sig(eta))?;
        }
        Ok(())
    }
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// Minimum number of sub-saturation points needed for a slope estimate.
pub const MIN_LOW_POWER_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedEfficiency {
    /// Low-power slope dη/dP, %/W.
    pub pct_per_w: f64,
    pub points_used: usize,
}

/// Low-power slope of a conversion curve in %/W.
///
/// Fits `η = aP + bP² + cP³` by least squares over points below
/// `0.1·P_opt`; the higher terms absorb the onset of saturation so `a`
/// matches the analytic `4η_max/P_opt` for the closed-form curve.
pub fn normalized_efficiency(curve: &ConversionCurve) -> Result<NormalizedEfficiency> {
    let cut = 0.1 * curve.p_opt_w;
    let low: Vec<(f64, f64)> = curve
        .points()
        .iter()
        .copied()
        .filter(|&(p, _)| p > 0.0 && p < cut)
        .collect();
    if low.len() < MIN_LOW_POWER_POINTS {
        return Err(Error::Sampling(format!(
            "{} points below 0.1·P_opt ({cut:.3e} W); need at least {MIN_LOW_POWER_POINTS}",
            low.len()
        )));
    }
    // Powers scaled by the cut for conditioning.
    let a = DMatrix::from_fn(low.len(), 3, |i, k| (low[i].0 / cut).powi(k as i32 + 1));
    let b = DVector::from_iterator(low.len(), low.iter().map(|p| p.1));
    let coeffs = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::Sampling(format!("low-power points do not resolve a slope: {e}")))?;
    Ok(NormalizedEfficiency {
        pct_per_w: 100.0 * coeffs[0] / cut,
        points_used: low.len(),
    })
}

/// Closed-form low-power slope `4η_max/P_opt`, %/W.
pub fn normalized_efficiency_closed_form(eta_max: f64, p_opt_w: f64) -> f64 {
    100.0 * 4.0 * eta_max / p_opt_w
}

/// Photon-number conversion ratio `P_sf·λ_sf / (P_s·λ_s)`.
pub fn qe_from_powers(p_signal_w: f64, p_sf_w: f64, lambda_s_nm: f64, lambda_sf_nm: f64) -> Result<f64> {
    if p_signal_w == 0.0 {
        return Err(Error::InvalidInput("signal power is zero".into()));
    }
    if !(p_signal_w > 0.0 && p_sf_w >= 0.0 && lambda_s_nm > 0.0 && lambda_sf_nm > 0.0) {
        return Err(Error::InvalidInput("powers and wavelengths must be non-negative".into()));
    }
    Ok(p_sf_w * lambda_sf_nm / (p_signal_w * lambda_s_nm))
}

/// Rates from the reference Q factors at the reference wavelengths, g unset.
pub fn reference_rates() -> CmtParams {
    let lambdas = crate::ring::ModeTriple::reference().lambdas_nm();
    let q = QSet::reference();
    CmtParams {
        signal: ModeRates::from_q(lambdas[0], q.signal.intrinsic, q.signal.loaded),
        pump: ModeRates::from_q(lambdas[1], q.pump.intrinsic, q.pump.loaded),
        sf: ModeRates::from_q(lambdas[2], q.sf.intrinsic, q.sf.loaded),
        g: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::reference;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn calibrated() -> CmtParams {
        calibrate_g(0.57, 360e-6, &reference_rates()).unwrap().0
    }

    #[test]
    fn saturation_shape() {
        let p = calibrated();
        let popt = p_opt(&p).unwrap();
        assert_relative_eq!(eta_of_pump(&p, popt).unwrap(), p.eta_max(), max_relative = 1e-14);
        assert_eq!(eta_of_pump(&p, 0.0).unwrap(), 0.0);
        for c in [2.0, 5.0, 10.0] {
            let a = eta_of_pump(&p, c * popt).unwrap();
            let b = eta_of_pump(&p, popt / c).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn p_opt_scalings() {
        let p = calibrated();
        let base = p_opt(&p).unwrap();
        let doubled_g = p.with_g(2.0 * p.g).unwrap();
        assert_relative_eq!(p_opt(&doubled_g).unwrap(), base / 4.0, max_relative = 1e-12);

        // doubling κ_ext,p at fixed κ_tot,p
        let mut q = p;
        q.pump.kappa_ext = 0.4 * q.pump.kappa_total;
        let mut q2 = q;
        q2.pump.kappa_ext = 0.8 * q.pump.kappa_total;
        assert_relative_eq!(p_opt(&q2).unwrap(), p_opt(&q).unwrap() / 2.0, max_relative = 1e-12);

        assert!(matches!(p_opt(&reference_rates()), Err(Error::NoConversion)));
    }

    #[test]
    fn calibration_round_trip() {
        let (params, cal) = calibrate_g(0.57, 360e-6, &reference_rates()).unwrap();
        let back = p_opt(&params).unwrap();
        assert!((back - 360e-6).abs() / 360e-6 < 1e-9);
        assert!(cal.g_rad_per_s > 0.0 && cal.g_rad_per_s.is_finite());
        assert_eq!(cal.eta_max, 0.57);
        let v = serde_json::to_value(cal).unwrap();
        assert!(v.get("p_opt_W").is_some() && v.get("g_rad_per_s").is_some());
    }

    #[test]
    fn calibrated_g_scales_as_rate_to_three_halves() {
        // g² ∝ κ_s κ_sf κ_p² / κ_ext,p: scaling every rate by c gives g ∝ c^1.5
        let base = reference_rates();
        let c = 3.0;
        let mut scaled = base;
        for m in [&mut scaled.signal, &mut scaled.pump, &mut scaled.sf] {
            m.kappa_total *= c;
            m.kappa_ext *= c;
        }
        let g0 = calibrate_g(0.57, 360e-6, &base).unwrap().1.g_rad_per_s;
        let g1 = calibrate_g(0.57, 360e-6, &scaled).unwrap().1.g_rad_per_s;
        assert_relative_eq!(g1 / g0, c.powf(1.5), max_relative = 1e-12);
    }

    #[test]
    fn normalized_efficiency_closed_form_slope() {
        // η_max = 0.5, P_opt = 1 mW → 200 000 %/W
        let mut p = reference_rates();
        // force η_max = 0.5 exactly
        p.signal.kappa_ext = 0.5 * p.signal.kappa_total;
        p.sf.kappa_ext = p.sf.kappa_total;
        let (p, _) = calibrate_g(0.5, 1e-3, &p).unwrap();
        assert_relative_eq!(p.eta_max(), 0.5, max_relative = 1e-12);
        let curve = ConversionCurve::sample(&p, &log_space(1e-7, 1e-2, 60)).unwrap();
        let ne = normalized_efficiency(&curve).unwrap();
        assert!((ne.pct_per_w - 200_000.0).abs() / 200_000.0 < 1e-3, "{}", ne.pct_per_w);
        assert_relative_eq!(normalized_efficiency_closed_form(0.5, 1e-3), 200_000.0);

        // stretching the power axis by c divides the slope by c
        let c = 4.0;
        let stretched = ConversionCurve::new(
            curve.points().iter().map(|&(pw, e)| (c * pw, e)).collect(),
            curve.eta_max,
            c * curve.p_opt_w,
        )
        .unwrap();
        let ne2 = normalized_efficiency(&stretched).unwrap();
        assert_relative_eq!(ne2.pct_per_w, ne.pct_per_w / c, max_relative = 1e-9);
    }

    #[test]
    fn measured_operating_point_slope_differs_from_quoted_figure() {
        let slope = normalized_efficiency_closed_form(0.57, 360e-6);
        assert!((slope - 633_333.3).abs() < 1.0);
        let quoted = reference::QUOTED_NORMALIZED_EFFICIENCY_PCT_PER_W;
        assert!((slope - quoted).abs() / quoted > 0.5);
    }

    #[test]
    fn normalized_efficiency_needs_low_power_points() {
        let p = calibrated();
        let curve = ConversionCurve::sample(&p, &log_space(1e-4, 1e-2, 10)).unwrap();
        assert!(matches!(normalized_efficiency(&curve), Err(Error::Sampling(_))));
    }

    #[test]
    fn qe_from_powers_cases() {
        // P_sf chosen so the forward formula returns 0.57 at 20 nW
        let p_sf: f64 = 0.57 * 20e-9 * 1533.0 / 628.0;
        assert!((p_sf - 27.8e-9).abs() < 0.05e-9);
        assert!((qe_from_powers(20e-9, 27.8e-9, 1533.0, 628.0).unwrap() - 0.57).abs() < 1e-3);
        assert_eq!(qe_from_powers(20e-9, 0.0, 1533.0, 628.0).unwrap(), 0.0);
        assert_eq!(qe_from_powers(1e-6, 1e-6, 1000.0, 1000.0).unwrap(), 1.0);
        assert!(qe_from_powers(0.0, 1e-9, 1533.0, 628.0).is_err());
    }

    #[test]
    fn detuned_closed_form_reduces_on_resonance() {
        let p = calibrated();
        let popt = p_opt(&p).unwrap();
        for x in [0.01, 0.3, 1.0, 7.0] {
            let a = eta_of_pump(&p, x * popt).unwrap();
            let b = eta_of_pump_detuned(&p, x * popt).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn curve_rejects_bad_points() {
        assert!(ConversionCurve::new(vec![(1.0, 0.1), (1.0, 0.2)], 0.5, 1.0).is_err());
        assert!(ConversionCurve::new(vec![(1.0, 0.6)], 0.5, 1.0).is_err());
        let mut buf = Vec::new();
        ConversionCurve::new(vec![(1e-4, 0.25)], 0.5, 1e-4)
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "pump_W,eta\n0.0001,0.25\n");
    }

    #[test]
    fn invariants_checked() {
        let mut p = reference_rates();
        p.sf.omega *= 1.01;
        assert!(p.validate().is_err());
        let mut p = reference_rates();
        p.signal.kappa_ext = 2.0 * p.signal.kappa_total;
        assert!(p.validate().is_err());
        assert!(reference_rates().with_g(-1.0).is_err());
    }

    #[test]
    fn reference_ceiling_bounds_curve() {
        let ring = crate::ring::RingParams::reference();
        let c = crate::ring::CouplerSpec::reference();
        let eta_max = crate::ring::eta_max_couplings(&ring, &c).unwrap();
        let ng = [2.3, 2.3, 2.4];
        let lambdas = crate::ring::ModeTriple::reference().lambdas_nm();
        let q = crate::ring::qset_from_couplers(&ring, &c, ng, lambdas).unwrap();
        let p = CmtParams::from_q(&q, lambdas, 0.0).unwrap();
        assert_relative_eq!(p.eta_max(), eta_max, max_relative = 1e-9);
        let (p, _) = calibrate_g(0.57, 100e-6, &p).unwrap();
        for pw in log_space(1e-7, 1e-1, 200) {
            assert!(eta_of_pump(&p, pw).unwrap() <= 0.7265);
        }
    }

    proptest! {
        #[test]
        fn saturation_is_reciprocal(x in 1e-4f64..1e4) {
            prop_assert!((saturation(x) - saturation(1.0 / x)).abs() < 1e-12);
            prop_assert!(saturation(x) <= 1.0);
        }
    }
}
