//! Through-port transmission spectra of a ring resonator.
//!
//! Synthesis uses the single-port Lorentzian response
//! `T(δ) = |1 − κ_ext/(iδ + κ/2)|²`, repeated every free spectral range.
//! [`fit_resonance`] recovers loaded and intrinsic Q from one dip, and
//! [`dc`] models the signal/pump combiner in front of the ring.

pub mod dc;
mod fit;

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::consts::C;
use crate::dispersion::Band;
use crate::ring::RingParams;
use crate::{Error, Result};

pub use dc::{dc_transfer, DcModel, DcTransfer};
pub use fit::{fit_resonance, CouplingRegime, RegimeHint, ResonanceFit, LM_GRADIENT_TOL, LM_MAX_ITER};

/// Headroom above unity allowed in measured or noisy transmission.
pub const TRANSMISSION_EPS: f64 = 0.1;

/// Samples required per linewidth in synthesized spectra.
pub const MIN_SAMPLES_PER_LINEWIDTH: f64 = 20.0;
/// Linewidths a synthesized grid must span around the resonance.
pub const MIN_SPAN_LINEWIDTHS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    wavelengths_nm: Vec<f64>,
    transmission: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    band: Option<Band>,
}

impl SpectrumTrace {
    pub fn new(wavelengths_nm: Vec<f64>, transmission: Vec<f64>, band: Option<Band>) -> Result<Self> {
        if wavelengths_nm.len() != transmission.len() {
            return Err(Error::InvalidInput(format!(
                "{} wavelengths but {} transmission samples",
                wavelengths_nm.len(),
                transmission.len()
            )));
        }
        if wavelengths_nm.is_empty() {
            return Err(Error::Empty("spectrum trace"));
        }
        if let Some(i) = wavelengths_nm.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "wavelengths must be strictly increasing (row {})",
                i + 2
            )));
        }
        if let Some(&t) = transmission
            .iter()
            .find(|&&t| !(0.0..=1.0 + TRANSMISSION_EPS).contains(&t))
        {
            return Err(Error::InvalidInput(format!(
                "transmission {t} outside [0, {}]",
                1.0 + TRANSMISSION_EPS
            )));
        }
        Ok(Self {
            wavelengths_nm,
            transmission,
            band,
        })
    }

    pub fn wavelengths_nm(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    pub fn transmission(&self) -> &[f64] {
        &self.transmission
    }

    pub fn band(&self) -> Option<Band> {
        self.band
    }

    pub fn len(&self) -> usize {
        self.wavelengths_nm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths_nm.is_empty()
    }

    /// CSV with header `wavelength_nm,transmission`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "wavelength_nm,transmission")?;
        for (l, t) in self.wavelengths_nm.iter().zip(&self.transmission) {
            writeln!(w, "{},{}", crate::format::sig(*l), crate::format::sig(*t))?;
        }
        Ok(())
    }

    /// Reads the `wavelength_nm,transmission` CSV written by [`Self::write_csv`].
    pub fn read_csv<R: BufRead>(r: R, band: Option<Band>) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or(Error::Empty("spectrum CSV"))??;
        if header.trim() != "wavelength_nm,transmission" {
            return Err(Error::InvalidInput(format!(
                "unexpected CSV header `{}`; want `wavelength_nm,transmission`",
                header.trim()
            )));
        }
        let (mut wl, mut tr) = (Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let parse = |c: Option<&str>| -> Result<f64> {
                c.and_then(|s| s.trim().parse().ok()).ok_or_else(|| {
                    Error::InvalidInput(format!("malformed CSV row {}: `{line}`", i + 2))
                })
            };
            wl.push(parse(cols.next())?);
            tr.push(parse(cols.next())?);
            if cols.next().is_some() {
                return Err(Error::InvalidInput(format!("extra columns in CSV row {}", i + 2)));
            }
        }
        Self::new(wl, tr, band)
    }
}

/// One cavity resonance: centre wavelength and decay rates (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub center_nm: f64,
    /// Decay into the measured bus.
    pub kappa_ext: f64,
    /// All other decay (propagation and any other port).
    pub kappa_int: f64,
}

impl Resonance {
    pub fn from_q(center_nm: f64, intrinsic_q: f64, loaded_q: f64) -> Result<Self> {
        crate::ring::BandQ::new(intrinsic_q, loaded_q)?;
        let omega = crate::consts::omega_from_nm(center_nm);
        let kappa = omega / loaded_q;
        let kappa_int = omega / intrinsic_q;
        Ok(Self {
            center_nm,
            kappa_ext: kappa - kappa_int,
            kappa_int,
        })
    }

    pub fn kappa_total(&self) -> f64 {
        self.kappa_ext + self.kappa_int
    }

    pub fn loaded_q(&self) -> f64 {
        crate::consts::omega_from_nm(self.center_nm) / self.kappa_total()
    }

    pub fn intrinsic_q(&self) -> f64 {
        crate::consts::omega_from_nm(self.center_nm) / self.kappa_int
    }

    /// Linewidth in nm.
    pub fn fwhm_nm(&self) -> f64 {
        self.center_nm / self.loaded_q()
    }

    /// On-resonance transmission `(1 − 2κ_ext/κ)²`.
    pub fn min_transmission(&self) -> f64 {
        let r = 1.0 - 2.0 * self.kappa_ext / self.kappa_total();
        r * r
    }

    /// Through-port amplitude at angular detuning `delta`.
    pub fn amplitude(&self, delta: f64) -> Complex64 {
        Complex64::new(1.0, 0.0)
            - self.kappa_ext / Complex64::new(0.5 * self.kappa_total(), delta)
    }
}

/// Additive Gaussian noise on synthesized transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Free spectral range `λ²/(n_g·L)` in nm.
pub fn fsr(ring: &RingParams, n_group: f64, lambda_nm: f64) -> Result<f64> {
    if !(n_group > 0.0 && lambda_nm > 0.0) {
        return Err(Error::InvalidInput("group index and wavelength must be positive".into()));
    }
    Ok(lambda_nm * lambda_nm / (n_group * ring.circumference_um() * 1e3))
}

/// `n` evenly spaced wavelengths covering `center ± half_span`.
pub fn wavelength_grid(center_nm: f64, half_span_nm: f64, n: usize) -> Vec<f64> {
    let lo = center_nm - half_span_nm;
    let step = 2.0 * half_span_nm / (n.max(2) - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Through-port spectrum of `resonance` and its neighbours one FSR apart
/// (FSR from `n_group` and the ring circumference, uniform in frequency).
pub fn synth_transmission(
    ring: &RingParams,
    n_group: f64,
    resonance: &Resonance,
    grid_nm: &[f64],
    noise: Option<NoiseSpec>,
    band: Option<Band>,
) -> Result<SpectrumTrace> {
    if grid_nm.len() < 2 {
        return Err(Error::Sampling("grid needs at least two wavelengths".into()));
    }
    if grid_nm.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    if !(n_group > 0.0) {
        return Err(Error::InvalidInput("group index must be positive".into()));
    }
    let fwhm = resonance.fwhm_nm();
    let (lo, hi) = (grid_nm[0], grid_nm[grid_nm.len() - 1]);
    let half = 0.5 * MIN_SPAN_LINEWIDTHS * fwhm;
    if lo > resonance.center_nm - half || hi < resonance.center_nm + half {
        return Err(Error::Sampling(format!(
            "grid [{lo}, {hi}] nm does not cover {MIN_SPAN_LINEWIDTHS} linewidths ({:.4e} nm) around {} nm",
            2.0 * half,
            resonance.center_nm
        )));
    }
    let max_step = fwhm / MIN_SAMPLES_PER_LINEWIDTH * (1.0 + 1e-9);
    if let Some(w) = grid_nm
        .windows(2)
        .find(|w| w[1] > resonance.center_nm - half && w[0] < resonance.center_nm + half && w[1] - w[0] > max_step)
    {
        return Err(Error::Sampling(format!(
            "grid step {:.3e} nm near resonance exceeds linewidth/{MIN_SAMPLES_PER_LINEWIDTH} = {max_step:.3e} nm",
            w[1] - w[0]
        )));
    }

    let nu0 = C / (resonance.center_nm * 1e-9);
    let fsr_hz = C / (n_group * ring.circumference_um() * 1e-6);
    let mut rng = noise.map(|n| (ChaCha8Rng::seed_from_u64(n.seed), n.sigma));
    let mut out = Vec::with_capacity(grid_nm.len());
    for &l in grid_nm {
        let nu = C / (l * 1e-9);
        let offset = nu - nu0;
        let nearest = offset - (offset / fsr_hz).round() * fsr_hz;
        let mut t = resonance.amplitude(2.0 * PI * nearest).norm_sqr();
        if let Some((rng, sigma)) = rng.as_mut() {
            if *sigma > 0.0 {
                let dist = Normal::new(0.0, *sigma)
                    .map_err(|e| Error::InvalidInput(format!("noise sigma: {e}")))?;
                t += dist.sample(rng);
            }
        }
        out.push(t.clamp(0.0, 1.0 + TRANSMISSION_EPS));
    }
    SpectrumTrace::new(grid_nm.to_vec(), out, band)
}
