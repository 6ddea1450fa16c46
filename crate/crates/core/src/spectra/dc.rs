//! Directional-coupler combiner: bar/cross power splitting vs wavelength.
//!
//! The coupling angle is anchored at a reference wavelength and varies
//! linearly with wavelength: `θ(λ) = θ_ref·(1 + s·(λ − λ_ref))`, with
//! `cross = sin²θ`, `bar = cos²θ`, both scaled by the excess loss.

use serde::{Deserialize, Serialize};

use crate::dispersion::Band;
use crate::{Error, Result};

/// Placeholder wavelength slope of the coupling angle (1/nm); no measured
/// dispersion of the combiner is available.
pub const DEFAULT_SLOPE_PER_NM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcModel {
    pub length_um: f64,
    pub ref_nm: f64,
    pub cross_at_ref: f64,
    #[serde(default = "default_slope")]
    pub slope_per_nm: f64,
    #[serde(default)]
    pub excess_loss_db: f64,
    /// Wavelength range the model is valid over.
    pub band_nm: [f64; 2],
}

fn default_slope() -> f64 {
    DEFAULT_SLOPE_PER_NM
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcTransfer {
    pub bar: f64,
    pub cross: f64,
}

impl DcModel {
    /// Signal combiner: 450 µm long, 98 % cross at 1533 nm.
    pub fn signal() -> Self {
        Self {
            length_um: 450.0,
            ref_nm: 1533.0,
            cross_at_ref: 0.98,
            slope_per_nm: DEFAULT_SLOPE_PER_NM,
            excess_loss_db: 0.0,
            band_nm: [1500.0, 1580.0],
        }
    }

    /// Pump path: 1.2 % lost to the cross port at 1064 nm.
    pub fn pump() -> Self {
        Self {
            length_um: 450.0,
            ref_nm: 1064.0,
            cross_at_ref: 0.012,
            slope_per_nm: DEFAULT_SLOPE_PER_NM,
            excess_loss_db: 0.0,
            band_nm: [1050.0, 1080.0],
        }
    }

    pub fn for_band(band: Band) -> Result<Self> {
        match band {
            Band::Signal => Ok(Self::signal()),
            Band::Pump => Ok(Self::pump()),
            Band::Sf => Err(Error::InvalidInput("no combiner model for the SF band".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.cross_at_ref) {
            return Err(Error::OutOfRange {
                what: "cross_at_ref",
                value: self.cross_at_ref,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if !(self.length_um > 0.0) || !(self.excess_loss_db >= 0.0) || !self.slope_per_nm.is_finite() {
            return Err(Error::InvalidInput(
                "coupler length must be positive, excess loss non-negative, slope finite".into(),
            ));
        }
        let [lo, hi] = self.band_nm;
        if !(lo < hi) || !(lo..=hi).contains(&self.ref_nm) {
            return Err(Error::InvalidInput(format!(
                "band [{lo}, {hi}] nm must contain the reference {} nm",
                self.ref_nm
            )));
        }
        Ok(())
    }

    pub fn theta(&self, lambda_nm: f64) -> f64 {
        self.cross_at_ref.sqrt().asin() * (1.0 + self.slope_per_nm * (lambda_nm - self.ref_nm))
    }

    /// Coupling per unit length (rad/µm).
    pub fn coupling_rate_per_um(&self, lambda_nm: f64) -> f64 {
        self.theta(lambda_nm) / self.length_um
    }
}

/// Bar and cross power fractions at `lambda_nm`.
pub fn dc_transfer(model: &DcModel, lambda_nm: f64) -> Result<DcTransfer> {
    model.validate()?;
    let [lo, hi] = model.band_nm;
    if !(lo..=hi).contains(&lambda_nm) {
        return Err(Error::OutOfRange {
            what: "combiner wavelength (nm)",
            value: lambda_nm,
            lo,
            hi,
        });
    }
    let th = model.theta(lambda_nm);
    let t = 10f64.powf(-model.excess_loss_db / 10.0);
    Ok(DcTransfer {
        bar: t * th.cos().powi(2),
        cross: t * th.sin().powi(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn anchors() {
        let s = dc_transfer(&DcModel::signal(), 1533.0).unwrap();
        assert!((s.cross - 0.98).abs() < 1e-12);
        let p = dc_transfer(&DcModel::pump(), 1064.0).unwrap();
        assert!((p.bar - 0.988).abs() < 1e-12);
    }

    #[test]
    fn full_transfer_at_half_pi() {
        let m = DcModel { cross_at_ref: 1.0, ..DcModel::signal() };
        let t = dc_transfer(&m, 1533.0).unwrap();
        assert!((t.cross - 1.0).abs() < 1e-12 && t.bar < 1e-12);
    }

    #[test]
    fn out_of_band_and_bad_models() {
        assert!(matches!(dc_transfer(&DcModel::signal(), 1064.0), Err(Error::OutOfRange { .. })));
        let bad = DcModel { cross_at_ref: 1.2, ..DcModel::signal() };
        assert!(dc_transfer(&bad, 1533.0).is_err());
        assert!(DcModel::for_band(Band::Sf).is_err());
    }

    proptest! {
        #[test]
        fn power_conserved_or_lost(
            cross in 0.0f64..=1.0, slope in -5e-3f64..5e-3, loss in 0.0f64..3.0, l in 1500.0f64..1580.0,
        ) {
            let m = DcModel { cross_at_ref: cross, slope_per_nm: slope, excess_loss_db: loss, ..DcModel::signal() };
            let t = dc_transfer(&m, l).unwrap();
            prop_assert!(t.bar + t.cross <= 1.0 + 1e-12);
            if loss == 0.0 {
                prop_assert!((t.bar + t.cross - 1.0).abs() < 1e-12);
            } else {
                prop_assert!(t.bar + t.cross < 1.0);
            }
        }
    }
}
