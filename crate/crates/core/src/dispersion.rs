//! Effective and group index models for the quasi-TM fundamental mode.
//!
//! Each band (signal, pump, sum-frequency) gets its own low-order
//! polynomial in `(λ − λc)` valid over a few nanometres around the band
//! centre. The reference models are constants pinned to the resonance
//! condition `m = 2πR·n_eff/λ` at the reference mode numbers, so the
//! triple-resonance check is exact out of the box.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::consts::{reference, sum_frequency_nm};
use crate::{Error, Result};

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 4;

/// Group index used when a band model has no dispersion information.
pub const DEFAULT_GROUP_INDEX: f64 = 2.2;

/// Half-width of the validity window given to calibrated models.
pub const DEFAULT_RANGE_PAD_NM: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Signal,
    Pump,
    Sf,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Signal, Band::Pump, Band::Sf];

    pub fn as_str(self) -> &'static str {
        match self {
            Band::Signal => "signal",
            Band::Pump => "pump",
            Band::Sf => "sf",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thin-film rib cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideXSection {
    pub film_thickness_nm: f64,
    pub etch_depth_nm: f64,
    pub top_width_nm: f64,
}

impl WaveguideXSection {
    pub fn new(film_thickness_nm: f64, etch_depth_nm: f64, top_width_nm: f64) -> Result<Self> {
        if !(film_thickness_nm > 0.0 && etch_depth_nm > 0.0 && top_width_nm > 0.0) {
            return Err(Error::InvalidInput(
                "cross-section lengths must be positive".into(),
            ));
        }
        if etch_depth_nm > film_thickness_nm {
            return Err(Error::InvalidInput(format!(
                "etch depth {etch_depth_nm} nm exceeds film thickness {film_thickness_nm} nm"
            )));
        }
        Ok(Self {
            film_thickness_nm,
            etch_depth_nm,
            top_width_nm,
        })
    }

    /// The fabricated ring cross-section (1.73 µm top width).
    pub fn reference_ring() -> Self {
        Self {
            film_thickness_nm: reference::FILM_THICKNESS_NM,
            etch_depth_nm: reference::ETCH_DEPTH_NM,
            top_width_nm: reference::RING_WIDTH_UM * 1e3,
        }
    }
}

/// Result of a group-index lookup that may have fallen back to an override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupIndex {
    pub value: f64,
    /// Set when the model carries no slope and `value` is the override.
    pub fallback: bool,
}

/// Polynomial effective index `n_eff(λ) = Σ c_k (λ − λc)^k`, λ in nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndexModelRepr", into = "IndexModelRepr")]
pub struct IndexModel {
    band: Band,
    center_nm: f64,
    coeffs: Vec<f64>,
    range_nm: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct IndexModelRepr {
    band: Band,
    center_nm: f64,
    coeffs: Vec<f64>,
    range_nm: [f64; 2],
}

impl TryFrom<IndexModelRepr> for IndexModel {
    type Error = Error;

    fn try_from(r: IndexModelRepr) -> Result<Self> {
        IndexModel::new(r.band, r.center_nm, r.coeffs, r.range_nm)
    }
}

impl From<IndexModel> for IndexModelRepr {
    fn from(m: IndexModel) -> Self {
        Self {
            band: m.band,
            center_nm: m.center_nm,
            coeffs: m.coeffs,
            range_nm: m.range_nm,
        }
    }
}

impl IndexModel {
    pub fn new(band: Band, center_nm: f64, coeffs: Vec<f64>, range_nm: [f64; 2]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Empty("index model coefficients"));
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidInput(format!(
                "polynomial degree {} exceeds {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !center_nm.is_finite() {
            return Err(Error::InvalidInput("non-finite index model parameter".into()));
        }
        let [lo, hi] = range_nm;
        if !(lo.is_finite() && hi.is_finite() && lo < hi && lo > 0.0) {
            return Err(Error::InvalidInput(format!(
                "valid range [{lo}, {hi}] nm must be a nonempty positive interval"
            )));
        }
        let model = Self {
            band,
            center_nm,
            coeffs,
            range_nm,
        };
        // n_eff > 1 across the window, checked on a dense grid.
        const PROBES: usize = 257;
        for i in 0..PROBES {
            let lambda = lo + (hi - lo) * i as f64 / (PROBES - 1) as f64;
            let n = model.eval(lambda);
            if n <= 1.0 {
                return Err(Error::InvariantViolation(format!(
                    "{band} model gives n_eff = {n} <= 1 at {lambda} nm"
                )));
            }
        }
        Ok(model)
    }

    /// Dispersionless model valid over `range_nm`.
    pub fn constant(band: Band, n: f64, center_nm: f64, range_nm: [f64; 2]) -> Result<Self> {
        Self::new(band, center_nm, vec![n], range_nm)
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn center_nm(&self) -> f64 {
        self.center_nm
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn range_nm(&self) -> [f64; 2] {
        self.range_nm
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// True when every coefficient above the constant term is zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    fn eval(&self, lambda_nm: f64) -> f64 {
        let d = lambda_nm - self.center_nm;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * d + c)
    }

    fn eval_slope(&self, lambda_nm: f64) -> f64 {
        let d = lambda_nm - self.center_nm;
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * d + k as f64 * c)
    }

    fn check_range(&self, lambda_nm: f64) -> Result<()> {
        let [lo, hi] = self.range_nm;
        if lambda_nm >= lo && lambda_nm <= hi {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                what: "wavelength (nm)",
                value: lambda_nm,
                lo,
                hi,
            })
        }
    }

    /// Effective index at `lambda_nm`.
    pub fn n_eff(&self, lambda_nm: f64) -> Result<f64> {
        self.check_range(lambda_nm)?;
        Ok(self.eval(lambda_nm))
    }

    /// `dn_eff/dλ` in 1/nm.
    pub fn dn_dlambda(&self, lambda_nm: f64) -> Result<f64> {
        self.check_range(lambda_nm)?;
        Ok(self.eval_slope(lambda_nm))
    }

    /// Group index `n_eff − λ·dn_eff/dλ`, with the derivative taken from the
    /// polynomial. The wavelength must lie strictly inside the valid range.
    pub fn n_group(&self, lambda_nm: f64) -> Result<f64> {
        let [lo, hi] = self.range_nm;
        if !(lambda_nm > lo && lambda_nm < hi) {
            return Err(Error::OutOfRange {
                what: "wavelength (nm)",
                value: lambda_nm,
                lo,
                hi,
            });
        }
        Ok(self.eval(lambda_nm) - lambda_nm * self.eval_slope(lambda_nm))
    }

    /// Group index for FSR/Q work: a constant model has no dispersion data,
    /// so `override_ng` is returned instead with the fallback flag set.
    pub fn group_index_or(&self, lambda_nm: f64, override_ng: f64) -> Result<GroupIndex> {
        let value = self.n_group(lambda_nm)?;
        if self.is_constant() {
            log::warn!(
                "{} index model is dispersionless; using group index override {override_ng}",
                self.band
            );
            Ok(GroupIndex {
                value: override_ng,
                fallback: true,
            })
        } else {
            Ok(GroupIndex {
                value,
                fallback: false,
            })
        }
    }

    /// Least-squares polynomial fit of degree `degree` through `anchors`
    /// `(λ nm, n_eff)`. The model is centred on the mean anchor wavelength
    /// and is valid `pad_nm` beyond the outermost anchors.
    pub fn calibrate_with_pad(
        band: Band,
        anchors: &[(f64, f64)],
        degree: usize,
        pad_nm: f64,
    ) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::Empty("calibration anchors"));
        }
        if degree > MAX_DEGREE {
            return Err(Error::InvalidInput(format!(
                "polynomial degree {degree} exceeds {MAX_DEGREE}"
            )));
        }
        if anchors.len() < degree + 1 {
            return Err(Error::Degenerate(format!(
                "{} anchors cannot determine a degree-{degree} polynomial",
                anchors.len()
            )));
        }
        let mut sorted: Vec<f64> = anchors.iter().map(|a| a.0).collect();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Degenerate("duplicate anchor wavelengths".into()));
        }
        if !(pad_nm > 0.0) {
            return Err(Error::InvalidInput("range pad must be positive".into()));
        }

        let n = anchors.len();
        let center = sorted.iter().sum::<f64>() / n as f64;
        let lo = sorted[0];
        let hi = sorted[n - 1];
        // Scaled abscissa keeps the Vandermonde matrix well conditioned.
        let scale = ((hi - lo) / 2.0).max(1.0);

        let a = DMatrix::from_fn(n, degree + 1, |i, k| {
            ((anchors[i].0 - center) / scale).powi(k as i32)
        });
        let b = DVector::from_iterator(n, anchors.iter().map(|a| a.1));
        let svd = a.svd(true, true);
        let sol = svd
            .solve(&b, 1e-14)
            .map_err(|e| Error::Degenerate(e.to_string()))?;
        let coeffs = sol
            .iter()
            .enumerate()
            .map(|(k, &c)| c / scale.powi(k as i32))
            .collect();
        Self::new(band, center, coeffs, [lo - pad_nm, hi + pad_nm])
    }

    pub fn calibrate(band: Band, anchors: &[(f64, f64)], degree: usize) -> Result<Self> {
        Self::calibrate_with_pad(band, anchors, degree, DEFAULT_RANGE_PAD_NM)
    }
}

/// Effective index that puts azimuthal order `m` on resonance at `lambda_nm`
/// for a ring of radius `radius_um`: `m·λ/(2πR)`.
pub fn resonant_index(m: u32, lambda_nm: f64, radius_um: f64) -> Result<f64> {
    if m == 0 || !(lambda_nm > 0.0) || !(radius_um > 0.0) {
        return Err(Error::InvalidInput(
            "mode number, wavelength and radius must be positive".into(),
        ));
    }
    Ok(m as f64 * lambda_nm / (2.0 * PI * radius_um * 1e3))
}

/// Reference sum-frequency wavelength, from energy conservation between the
/// reference signal and pump.
pub fn reference_sf_nm() -> f64 {
    sum_frequency_nm(reference::LAMBDA_SIGNAL_NM, reference::LAMBDA_PUMP_NM)
}

/// Constant per-band models pinned to the reference mode numbers at the
/// reference wavelengths, ordered signal, pump, sf.
pub fn reference_models() -> [IndexModel; 3] {
    let anchors = [
        (Band::Signal, reference::M_SIGNAL, reference::LAMBDA_SIGNAL_NM),
        (Band::Pump, reference::M_PUMP, reference::LAMBDA_PUMP_NM),
        (Band::Sf, reference::M_SF, reference_sf_nm()),
    ];
    anchors.map(|(band, m, lambda)| {
        let n = resonant_index(m, lambda, reference::RADIUS_UM).expect("positive inputs");
        IndexModel::calibrate(band, &[(lambda, n)], 0).expect("single-anchor constant fit")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn linear() -> IndexModel {
        IndexModel::new(Band::Signal, 1533.0, vec![2.0, -1e-4], [1500.0, 1560.0]).unwrap()
    }

    #[test]
    fn constant_model_eval() {
        let m = IndexModel::constant(Band::Signal, 2.0, 1533.0, [1520.0, 1540.0]).unwrap();
        assert_eq!(m.n_eff(1533.0).unwrap(), 2.0);
        assert_eq!(m.n_group(1533.0).unwrap(), 2.0);
    }

    #[test]
    fn out_of_range_names_interval() {
        let m = linear();
        let err = m.n_eff(1600.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1500") && msg.contains("1560"), "{msg}");
        // n_group wants a strictly interior point
        assert!(m.n_group(1500.0).is_err());
        assert!(m.n_eff(1500.0).is_ok());
    }

    #[test]
    fn linear_group_index_by_hand() {
        // n_g = 2 - 1533 * (-1e-4)
        assert_relative_eq!(linear().n_group(1533.0).unwrap(), 2.1533, epsilon = 1e-12);
    }

    #[test]
    fn group_index_matches_central_difference() {
        let m = IndexModel::new(Band::Pump, 1064.0, vec![2.0, -2e-4, 3e-7], [1040.0, 1090.0])
            .unwrap();
        let h = 0.01;
        for &lambda in &[1050.0, 1064.0, 1071.5] {
            let slope = (m.n_eff(lambda + h).unwrap() - m.n_eff(lambda - h).unwrap()) / (2.0 * h);
            let fd = m.n_eff(lambda).unwrap() - lambda * slope;
            assert!((m.n_group(lambda).unwrap() - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn resonant_index_reference_modes() {
        assert_relative_eq!(resonant_index(550, 1533.0, 74.0).unwrap(), 1.8134, epsilon = 1e-4);
        assert_relative_eq!(resonant_index(875, 1064.0, 74.0).unwrap(), 2.0024, epsilon = 1e-4);
        assert_relative_eq!(resonant_index(1584, 631.0, 74.0).unwrap(), 2.1497, epsilon = 1e-4);
        assert!(resonant_index(0, 1533.0, 74.0).is_err());
    }

    #[test]
    fn anchored_model_reproduces_anchor() {
        let n = resonant_index(550, 1533.0, 74.0).unwrap();
        let m = IndexModel::calibrate(Band::Signal, &[(1533.0, n)], 0).unwrap();
        assert!((m.n_eff(1533.0).unwrap() - 1.8134).abs() < 1e-4);
    }

    #[test]
    fn two_anchor_line_is_exact() {
        let m = IndexModel::calibrate(Band::Signal, &[(1520.0, 1.82), (1540.0, 1.80)], 1).unwrap();
        assert!((m.n_eff(1520.0).unwrap() - 1.82).abs() < 1e-12);
        assert!((m.n_eff(1540.0).unwrap() - 1.80).abs() < 1e-12);
    }

    #[test]
    fn collinear_quadratic_has_no_curvature() {
        let anchors = [(1060.0, 2.01), (1064.0, 2.0), (1068.0, 1.99)];
        let m = IndexModel::calibrate(Band::Pump, &anchors, 2).unwrap();
        assert!(m.coeffs()[2].abs() < 1e-9);
        for (l, n) in anchors {
            assert!((m.n_eff(l).unwrap() - n).abs() < 1e-6);
        }
    }

    #[test]
    fn duplicate_anchors_rejected() {
        let err = IndexModel::calibrate(Band::Sf, &[(630.0, 2.1), (630.0, 2.2)], 1).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
        assert!(IndexModel::calibrate(Band::Sf, &[(630.0, 2.1)], 1).is_err());
    }

    #[test]
    fn reference_models_round_trip_their_anchors() {
        let models = reference_models();
        let lambdas = [1533.0, 1064.0, reference_sf_nm()];
        let ms = [550u32, 875, 1584];
        for ((model, lambda), m) in models.iter().zip(lambdas).zip(ms) {
            let want = resonant_index(m, lambda, 74.0).unwrap();
            assert!((model.n_eff(lambda).unwrap() - want).abs() < 1e-6);
            assert!(model.is_constant());
        }
    }

    #[test]
    fn constant_model_group_index_falls_back() {
        let m = IndexModel::constant(Band::Signal, 1.81, 1533.0, [1520.0, 1540.0]).unwrap();
        let g = m.group_index_or(1533.0, DEFAULT_GROUP_INDEX).unwrap();
        assert!(g.fallback);
        assert_eq!(g.value, 2.2);
        let g = linear().group_index_or(1533.0, DEFAULT_GROUP_INDEX).unwrap();
        assert!(!g.fallback);
    }

    #[test]
    fn invariants_enforced_on_construction() {
        assert!(IndexModel::new(Band::Signal, 1533.0, vec![0.9], [1500.0, 1560.0]).is_err());
        assert!(IndexModel::new(Band::Signal, 1533.0, vec![2.0; 6], [1500.0, 1560.0]).is_err());
        assert!(IndexModel::new(Band::Signal, 1533.0, vec![2.0], [1560.0, 1500.0]).is_err());
        assert!(WaveguideXSection::new(600.0, 700.0, 1730.0).is_err());
        assert!(WaveguideXSection::new(600.0, 420.0, 1730.0).is_ok());
    }

    #[test]
    fn json_schema() {
        let json = r#"{"band":"pump","center_nm":1064.0,"coeffs":[2.0,-1e-4],"range_nm":[1050.0,1080.0]}"#;
        let m: IndexModel = serde_json::from_str(json).unwrap();
        assert_eq!(m.band(), Band::Pump);
        let back = serde_json::to_value(&m).unwrap();
        assert_eq!(back["range_nm"][1], 1080.0);
        let bad = r#"{"band":"pump","center_nm":1064.0,"coeffs":[0.5],"range_nm":[1050.0,1080.0]}"#;
        assert!(serde_json::from_str::<IndexModel>(bad).is_err());
    }

    proptest! {
        #[test]
        fn resonant_index_inverts_resonance(m in 1u32..5000, lambda in 400.0f64..2000.0, r in 5.0f64..500.0) {
            let n = resonant_index(m, lambda, r).unwrap();
            let back = n * 2.0 * PI * r * 1e3 / lambda;
            prop_assert!((back - m as f64).abs() <= 1e-12 * m as f64);
        }

        #[test]
        fn calibrate_recovers_polynomial(
            c0 in 1.8f64..2.3,
            c1 in -3e-4f64..3e-4,
            c2 in -1e-6f64..1e-6,
            c3 in -1e-9f64..1e-9,
        ) {
            let truth = IndexModel::new(Band::Signal, 1533.0, vec![c0, c1, c2, c3], [1400.0, 1700.0]).unwrap();
            let anchors: Vec<(f64, f64)> = (0..9)
                .map(|i| {
                    let l = 1513.0 + 5.0 * i as f64;
                    (l, truth.n_eff(l).unwrap())
                })
                .collect();
            let fit = IndexModel::calibrate(Band::Signal, &anchors, 3).unwrap();
            // compare coefficients about the same centre
            prop_assert!((fit.center_nm() - 1533.0).abs() < 1e-12);
            // relative to each order's size over the 20 nm half-span, so
            // near-zero coefficients are not held to an impossible bound
            for (k, (a, b)) in fit.coeffs().iter().zip(truth.coeffs()).enumerate() {
                let tol = 1e-9 * (b.abs() + c0 / 20f64.powi(k as i32));
                prop_assert!((a - b).abs() <= tol, "order {k}: {a} vs {b}");
            }
        }
    }
}
