//! Single-dip Lorentzian fit in optical frequency.
//!
//! Model: `T(ν) = B·(1 − A / (1 + ((ν − ν₀)/w)²))`, with `w` the half-width
//! at half-depth. The through-port response is exactly this shape in
//! frequency, so noiseless synthetic spectra are recovered to rounding.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::SpectrumTrace;
use crate::consts::C;
use crate::{Error, Result};

pub const LM_MAX_ITER: usize = 200;
pub const LM_GRADIENT_TOL: f64 = 1e-12;
const MIN_RUN: usize = 3;
const MIN_POINTS: usize = 10;

/// Which side of critical coupling the caller believes the resonance is on.
/// A single intensity trace cannot tell the two apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeHint {
    Over,
    Under,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingRegime {
    Over,
    Under,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFit {
    pub center_nm: f64,
    pub fwhm_nm: f64,
    pub loaded_q: f64,
    pub intrinsic_q: f64,
    /// Normalized on-resonance transmission.
    pub min_transmission: f64,
    pub baseline: f64,
    pub regime: CouplingRegime,
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ResonanceFit {
    /// `κ_ext/κ` implied by the chosen regime.
    pub fn extraction_ratio(&self) -> f64 {
        1.0 - self.loaded_q / self.intrinsic_q
    }
}

/// Critical coupling is reported when `√T₀` is below this.
const CRITICAL_SQRT_T0: f64 = 1e-3;

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Locates the single dip; returns the index range (inclusive) of its run.
fn find_dip(t: &[f64], baseline: f64) -> Result<(usize, usize)> {
    let mut diffs: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let m = median(&mut diffs.clone());
    for d in diffs.iter_mut() {
        *d = (*d - m).abs();
    }
    // MAD of first differences; differencing doubles the variance.
    let sigma = 1.4826 * median(&mut diffs) / std::f64::consts::SQRT_2;
    // A quarter of the deepest excursion keeps Lorentzian tails of
    // neighbouring dips from bridging them into one run.
    let deepest = t.iter().map(|&v| baseline - v).fold(0.0, f64::max);
    let threshold = (3.0 * sigma).max(0.25 * deepest).max(1e-4 * baseline);

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &v) in t.iter().enumerate() {
        let below = baseline - v > threshold;
        match (below, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, t.len() - 1));
    }
    // Noise can split one dip; join runs separated by less than their width.
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for r in runs {
        if let Some(last) = merged.last_mut() {
            let gap = r.0 - last.1;
            let width = (last.1 - last.0 + 1).max(r.1 - r.0 + 1);
            if gap <= width {
                last.1 = r.1;
                continue;
            }
        }
        merged.push(r);
    }
    merged.retain(|r| r.1 - r.0 + 1 >= MIN_RUN);
    match merged.len() {
        0 => Err(Error::NoDip { threshold }),
        1 => Ok(merged[0]),
        n => Err(Error::MultipleDips { count: n }),
    }
}

struct Problem<'a> {
    u: &'a [f64],
    t: &'a [f64],
}

impl Problem<'_> {
    /// Residuals and Jacobian for params `[u0, w, A, B]`.
    fn eval(&self, p: &Vector4<f64>, jac: Option<&mut Vec<Vector4<f64>>>) -> (Vec<f64>, f64) {
        let (u0, w, a, b) = (p[0], p[1], p[2], p[3]);
        let mut r = Vec::with_capacity(self.u.len());
        let mut cost = 0.0;
        let mut rows = Vec::new();
        for (&u, &t) in self.u.iter().zip(self.t) {
            let x = (u - u0) / w;
            let l = 1.0 / (1.0 + x * x);
            let model = b * (1.0 - a * l);
            let res = model - t;
            cost += res * res;
            r.push(res);
            if jac.is_some() {
                // dl/dx = −2x l²
                let dl_du0 = 2.0 * x * l * l / w;
                let dl_dw = 2.0 * x * x * l * l / w;
                rows.push(Vector4::new(-b * a * dl_du0, -b * a * dl_dw, -b * l, 1.0 - a * l));
            }
        }
        if let Some(j) = jac {
            *j = rows;
        }
        (r, cost)
    }
}

/// Fits the single resonance dip in `trace` and extracts loaded and
/// intrinsic Q, choosing the intrinsic-Q branch from `hint`.
pub fn fit_resonance(trace: &SpectrumTrace, hint: RegimeHint) -> Result<ResonanceFit> {
    if trace.len() < MIN_POINTS {
        return Err(Error::Sampling(format!(
            "{} samples; at least {MIN_POINTS} needed",
            trace.len()
        )));
    }
    // Work in increasing frequency.
    let mut nu: Vec<f64> = trace.wavelengths_nm().iter().rev().map(|l| C / (l * 1e-9)).collect();
    let t: Vec<f64> = trace.transmission().iter().rev().copied().collect();
    let baseline = median(&mut t.clone());
    if !(baseline > 0.0) {
        return Err(Error::Degenerate("spectrum baseline is zero".into()));
    }
    let (lo, hi) = find_dip(&t, baseline)?;

    let imin = (lo..=hi).min_by(|&i, &j| t[i].total_cmp(&t[j])).unwrap();
    let depth0 = (1.0 - t[imin] / baseline).clamp(1e-6, 1.0);
    let half_level = baseline * (1.0 - 0.5 * depth0);
    let first_above = |mut it: Box<dyn Iterator<Item = usize>>| it.find(|&i| t[i] >= half_level).map(|i| nu[i]);
    let left = first_above(Box::new((0..imin).rev())).unwrap_or(nu[lo.saturating_sub(1)]);
    let right = first_above(Box::new(imin + 1..t.len())).unwrap_or(nu[(hi + 1).min(t.len() - 1)]);
    let hw0 = (0.5 * (right - left)).max(nu[1] - nu[0]);
    if !(hw0 > 0.0) {
        return Err(Error::Degenerate("dip has no measurable width".into()));
    }
    let nu_ref = nu[imin];
    for v in nu.iter_mut() {
        *v = (*v - nu_ref) / hw0;
    }
    let prob = Problem { u: &nu, t: &t };

    let mut p = Vector4::new(0.0, 1.0, depth0, baseline);
    let mut jac = Vec::new();
    let (_, mut cost) = prob.eval(&p, Some(&mut jac));
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < LM_MAX_ITER {
        iterations += 1;
        let (r, _) = prob.eval(&p, Some(&mut jac));
        let mut jtj = Matrix4::zeros();
        let mut grad = Vector4::zeros();
        for (row, res) in jac.iter().zip(&r) {
            jtj += row * row.transpose();
            grad += row * *res;
        }
        if grad.amax() < LM_GRADIENT_TOL {
            converged = true;
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for k in 0..4 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = damped.lu().solve(&(-grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            if !(trial[1] > 0.0) {
                lambda *= 10.0;
                continue;
            }
            let (_, c) = prob.eval(&trial, None);
            if c < cost {
                let small = step.amax() <= 1e-15 * (p.amax() + 1e-15);
                p = trial;
                let rel_drop = (cost - c) / cost.max(f64::MIN_POSITIVE);
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if small || rel_drop < 1e-15 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || converged {
            // No downhill step left: at a minimum to machine precision.
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("resonance fit stopped after {LM_MAX_ITER} iterations without converging");
    }

    let nu0 = nu_ref + p[0] * hw0;
    let fwhm_nu = 2.0 * p[1].abs() * hw0;
    let center_nm = C / nu0 * 1e9;
    let loaded_q = nu0 / fwhm_nu;
    let t0 = (1.0 - p[2]).clamp(0.0, 1.0);
    let s = t0.sqrt();
    let (intrinsic_q, regime) = match hint {
        RegimeHint::Over => (2.0 * loaded_q / (1.0 - s), CouplingRegime::Over),
        RegimeHint::Under => (2.0 * loaded_q / (1.0 + s), CouplingRegime::Under),
    };
    let regime = if s < CRITICAL_SQRT_T0 { CouplingRegime::Critical } else { regime };
    if !(intrinsic_q.is_finite() && intrinsic_q > 0.0) {
        return Err(Error::Degenerate(
            "dip depth implies no intrinsic loss (T₀ = 1)".into(),
        ));
    }
    Ok(ResonanceFit {
        center_nm,
        fwhm_nm: center_nm / loaded_q,
        loaded_q,
        intrinsic_q,
        min_transmission: t0,
        baseline: p[3],
        regime,
        rms_residual: (cost / t.len() as f64).sqrt(),
        iterations,
        converged,
    })
}
