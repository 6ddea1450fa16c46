//! System-level calculators: loss chains, multi-channel pump budgets, DFB
//! thermal tuning and a pump-noise model.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossStage {
    pub name: String,
    /// Transmitted fraction, in (0, 1].
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LossChain {
    pub stages: Vec<LossStage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainEfficiency {
    pub efficiency: f64,
    pub loss_db: f64,
}

impl LossChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stage(mut self, name: impl Into<String>, efficiency: f64) -> Self {
        self.stages.push(LossStage { name: name.into(), efficiency });
        self
    }
}

/// Product of the stage efficiencies and the equivalent total loss in dB.
pub fn chain_efficiency(chain: &LossChain) -> Result<ChainEfficiency> {
    if chain.stages.is_empty() {
        return Err(Error::Empty("loss chain"));
    }
    let mut eff = 1.0;
    let mut db = 0.0;
    for s in &chain.stages {
        if !(s.efficiency > 0.0 && s.efficiency <= 1.0) {
            return Err(Error::OutOfRange {
                what: "stage efficiency",
                value: s.efficiency,
                lo: 0.0,
                hi: 1.0,
            });
        }
        eff *= s.efficiency;
        db += -10.0 * s.efficiency.log10();
    }
    Ok(ChainEfficiency { efficiency: eff, loss_db: db })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    pub source_mw: f64,
    pub coupling: f64,
    pub per_channel_uw: f64,
}

impl PowerBudget {
    /// 20 mW DFB, ~20 % fiber-to-chip, 360 µW per channel.
    pub fn reference() -> Self {
        Self { source_mw: 20.0, coupling: 0.20, per_channel_uw: 360.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.source_mw > 0.0 && self.per_channel_uw > 0.0) {
            return Err(Error::InvalidInput("source and per-channel power must be positive".into()));
        }
        if !(self.coupling > 0.0 && self.coupling <= 1.0) {
            return Err(Error::OutOfRange { what: "coupling efficiency", value: self.coupling, lo: 0.0, hi: 1.0 });
        }
        Ok(())
    }

    /// On-chip pump power (mW).
    pub fn on_chip_mw(&self) -> f64 {
        self.source_mw * self.coupling
    }
}

/// Whole channels the on-chip pump can feed.
pub fn channel_count(b: &PowerBudget) -> Result<u64> {
    b.validate()?;
    // Guard the floor against 4 mW / 0.4 mW landing on 9.999…
    let ratio = b.on_chip_mw() * 1e3 / b.per_channel_uw;
    Ok((ratio * (1.0 + 1e-12)).floor() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfbTuning {
    pub lambda0_nm: f64,
    pub t0_c: f64,
    #[serde(default = "default_slope")]
    pub slope_pm_per_c: f64,
    #[serde(default = "default_range")]
    pub safe_range_c: [f64; 2],
}

pub const DFB_SLOPE_PM_PER_C: f64 = 85.5;
pub const DFB_SAFE_RANGE_C: [f64; 2] = [15.0, 60.0];

fn default_slope() -> f64 {
    DFB_SLOPE_PM_PER_C
}

fn default_range() -> [f64; 2] {
    DFB_SAFE_RANGE_C
}

impl DfbTuning {
    pub fn new(lambda0_nm: f64, t0_c: f64) -> Self {
        Self { lambda0_nm, t0_c, slope_pm_per_c: DFB_SLOPE_PM_PER_C, safe_range_c: DFB_SAFE_RANGE_C }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slope_pm_per_c > 0.0) {
            return Err(Error::InvalidInput("tuning slope must be positive".into()));
        }
        if !(self.safe_range_c[0] < self.safe_range_c[1]) {
            return Err(Error::InvalidInput("safe temperature range is empty".into()));
        }
        Ok(())
    }

    /// Temperature change that shifts the wavelength by `delta_nm`.
    pub fn delta_t_for_shift(&self, delta_nm: f64) -> f64 {
        delta_nm / (self.slope_pm_per_c * 1e-3)
    }
}

pub fn dfb_wavelength(t: &DfbTuning, temp_c: f64) -> Result<f64> {
    t.validate()?;
    let [lo, hi] = t.safe_range_c;
    if !(lo..=hi).contains(&temp_c) {
        return Err(Error::OutOfRange { what: "DFB temperature (°C)", value: temp_c, lo, hi });
    }
    Ok(t.lambda0_nm + t.slope_pm_per_c * 1e-3 * (temp_c - t.t0_c))
}

/// Pump-induced noise count rate `N(P) = c₁P + c₂P²` (counts/s, P in W).
/// The default is a single-anchor linear placeholder (7000 cps at 360 µW).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub c1_cps_per_w: f64,
    #[serde(default)]
    pub c2_cps_per_w2: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { c1_cps_per_w: 7000.0 / 360e-6, c2_cps_per_w2: 0.0 }
    }
}

impl NoiseModel {
    pub fn rate(&self, pump_w: f64) -> f64 {
        self.c1_cps_per_w * pump_w + self.c2_cps_per_w2 * pump_w * pump_w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn chains() {
        let one = LossChain::new().stage("on-chip", 0.57);
        assert_relative_eq!(chain_efficiency(&one).unwrap().efficiency, 0.57);
        let split = LossChain::new().stage("ring", 0.70).stage("residual", 0.57 / 0.70);
        assert_relative_eq!(chain_efficiency(&split).unwrap().efficiency, 0.57, max_relative = 1e-12);
        let fiber = LossChain::new().stage("on-chip", 0.57).stage("fiber", 0.30);
        let e = chain_efficiency(&fiber).unwrap();
        assert_relative_eq!(e.efficiency, 0.171, max_relative = 1e-12);
        assert_relative_eq!(e.loss_db, -10.0 * 0.171f64.log10(), max_relative = 1e-12);
        assert!(matches!(chain_efficiency(&LossChain::new()), Err(Error::Empty(_))));
        assert!(chain_efficiency(&LossChain::new().stage("bad", 0.0)).is_err());
        assert!(chain_efficiency(&LossChain::new().stage("bad", 1.1)).is_err());
    }

    #[test]
    fn channels() {
        assert_eq!(channel_count(&PowerBudget::reference()).unwrap(), 11);
        let starved = PowerBudget { source_mw: 1.0, ..PowerBudget::reference() };
        assert_eq!(channel_count(&starved).unwrap(), 0);
        let exact = PowerBudget { source_mw: 20.0, coupling: 0.2, per_channel_uw: 400.0 };
        assert_eq!(channel_count(&exact).unwrap(), 10);
        let doubled = PowerBudget { coupling: 0.4, ..PowerBudget::reference() };
        assert_eq!(channel_count(&doubled).unwrap(), 22);
        assert!(channel_count(&PowerBudget { coupling: 1.5, ..PowerBudget::reference() }).is_err());
    }

    #[test]
    fn dfb() {
        let t = DfbTuning::new(1064.0, 25.0);
        assert_eq!(dfb_wavelength(&t, 25.0).unwrap(), 1064.0);
        assert_relative_eq!(dfb_wavelength(&t, 35.0).unwrap(), 1064.855, max_relative = 1e-12);
        assert!(dfb_wavelength(&t, 70.0).is_err());
        assert_relative_eq!(t.delta_t_for_shift(2.298), 2.298 / 0.0855, max_relative = 1e-12);
    }

    #[test]
    fn noise_anchor() {
        assert_relative_eq!(NoiseModel::default().rate(360e-6), 7000.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn chain_order_invariant(mut effs in prop::collection::vec(0.01f64..=1.0, 1..8)) {
            let a = effs.iter().enumerate().fold(LossChain::new(), |c, (i, &e)| c.stage(format!("s{i}"), e));
            effs.reverse();
            let b = effs.iter().enumerate().fold(LossChain::new(), |c, (i, &e)| c.stage(format!("s{i}"), e));
            let (ea, eb) = (chain_efficiency(&a).unwrap(), chain_efficiency(&b).unwrap());
            prop_assert!((ea.efficiency - eb.efficiency).abs() <= 1e-12 * ea.efficiency);
        }

        #[test]
        fn channel_count_monotone(
            src in 1.0f64..100.0, eta in 0.01f64..1.0, per in 10.0f64..1000.0, f in 1.0f64..3.0,
        ) {
            let b = PowerBudget { source_mw: src, coupling: eta, per_channel_uw: per };
            let n = channel_count(&b).unwrap();
            let more_src = PowerBudget { source_mw: src * f, ..b };
            let more_eta = PowerBudget { coupling: (eta * f).min(1.0), ..b };
            let more_per = PowerBudget { per_channel_uw: per * f, ..b };
            prop_assert!(channel_count(&more_src).unwrap() >= n);
            prop_assert!(channel_count(&more_eta).unwrap() >= n);
            prop_assert!(channel_count(&more_per).unwrap() <= n);
        }
    }
}
