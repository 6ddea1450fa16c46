//! JSON configuration shared by all `qfc` subcommands.
//!
//! Every section is optional and defaults to the reference device, so `{}`
//! is a valid config describing the fabricated ring with no tasks. Parse
//! failures carry the JSON path of the offending field.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dispersion::Band;
use crate::layout::{EulerBendSpec, TaperSpec};
use crate::ring::{CouplerSpec, ModeTriple, QSet, RingParams};
use crate::spectra::{DcModel, NoiseSpec, RegimeHint};
use crate::system::{DfbTuning, LossChain, NoiseModel, PowerBudget};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Design,
    Simulate,
    Sweep,
    Fit,
    Bend,
    Budget,
}

impl Task {
    pub const ALL: [Task; 6] = [Task::Design, Task::Simulate, Task::Sweep, Task::Fit, Task::Bend, Task::Budget];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Design => "design",
            Task::Simulate => "simulate",
            Task::Sweep => "sweep",
            Task::Fit => "fit",
            Task::Bend => "bend",
            Task::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Tasks executed by `qfc run`, in order.
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default = "RingParams::reference")]
    pub ring: RingParams,
    #[serde(default = "CouplerSpec::reference")]
    pub couplers: CouplerSpec,
    #[serde(default = "ModeTriple::reference")]
    pub modes: ModeTriple,
    #[serde(default = "QSet::reference")]
    pub q: QSet,
    /// Group index used for FSR and Q bridges.
    #[serde(default = "default_group_index")]
    pub group_index: f64,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub bend: BendSection,
    #[serde(default)]
    pub budget: BudgetSection,
    /// Free-form notes carried into the report unchanged.
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub metadata: serde_json::Map<String, serde_json::Value>,
}

fn default_group_index() -> f64 {
    crate::dispersion::DEFAULT_GROUP_INDEX
}

impl Default for Config {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// Measured saturation efficiency used in the calibration record.
    pub eta_max: f64,
    /// Measured saturation pump power (W) that fixes g.
    pub p_opt_w: f64,
    pub signal_w: f64,
    pub points: usize,
    /// Sweep from `lo_factor·P_opt` to `hi_factor·P_opt`, log-spaced.
    pub lo_factor: f64,
    pub hi_factor: f64,
    /// Cross-check every point against the time-domain integration.
    pub ode_check: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        use crate::consts::reference::*;
        Self {
            eta_max: MEASURED_ETA_MAX,
            p_opt_w: MEASURED_P_OPT_W,
            signal_w: SIGNAL_POWER_W,
            points: 20,
            lo_factor: 0.01,
            hi_factor: 100.0,
            ode_check: true,
        }
    }
}

/// Quantity varied by the `sweep` task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "kappa2_signal_A")]
    Kappa2SignalA,
    #[serde(rename = "kappa2_signal_B")]
    Kappa2SignalB,
    #[serde(rename = "kappa2_sf_A")]
    Kappa2SfA,
    #[serde(rename = "kappa2_sf_B")]
    Kappa2SfB,
    #[serde(rename = "loss_db_per_cm")]
    LossDbPerCm,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::Kappa2SignalA => "kappa2_signal_A",
            SweepParameter::Kappa2SignalB => "kappa2_signal_B",
            SweepParameter::Kappa2SfA => "kappa2_sf_A",
            SweepParameter::Kappa2SfB => "kappa2_sf_B",
            SweepParameter::LossDbPerCm => "loss_db_per_cm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::Kappa2SfB,
            from: 0.01,
            to: 0.1,
            points: 10,
            spacing: Spacing::Linear,
        }
    }
}

impl SweepSection {
    pub fn values(&self) -> Vec<f64> {
        match (self.spacing, self.points) {
            (_, 0) => vec![],
            (_, 1) => vec![self.from],
            (Spacing::Log, n) => crate::cmt::log_space(self.from, self.to, n),
            (Spacing::Linear, n) => (0..n)
                .map(|i| self.from + (self.to - self.from) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Synthetic trace for `fit` when no measured CSV is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticTrace {
    /// Grid half-span in linewidths.
    pub half_span_linewidths: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

impl Default for SyntheticTrace {
    fn default() -> Self {
        Self { half_span_linewidths: 10.0, points: 2001, noise: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub band: Band,
    pub hint: RegimeHint,
    /// Measured `wavelength_nm,transmission` CSV, relative to the config
    /// file. When absent, a trace is synthesized from the band's Qs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_csv: Option<PathBuf>,
    pub synthetic: SyntheticTrace,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            band: Band::Signal,
            hint: RegimeHint::Over,
            trace_csv: None,
            synthetic: SyntheticTrace::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BendSection {
    pub euler: EulerBendSpec,
    pub samples: usize,
    pub taper: TaperSpec,
    pub taper_samples: usize,
}

impl Default for BendSection {
    fn default() -> Self {
        Self {
            euler: EulerBendSpec::reference(),
            samples: 4096,
            taper: TaperSpec::reference_abrupt(),
            taper_samples: 65,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSection {
    pub power: PowerBudget,
    pub chain: LossChain,
    pub dfb: DfbTuning,
    pub noise: NoiseModel,
    pub combiner_signal: DcModel,
    pub combiner_pump: DcModel,
    /// Recorded only; no thermo-optic model is applied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chip_temperature_c: Option<f64>,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self {
            power: PowerBudget::reference(),
            chain: LossChain::new().stage("on-chip", 0.57).stage("fiber", 0.30),
            dfb: DfbTuning::new(crate::consts::reference::LAMBDA_PUMP_NM, 25.0),
            noise: NoiseModel::default(),
            combiner_signal: DcModel::signal(),
            combiner_pump: DcModel::pump(),
            chip_temperature_c: None,
        }
    }
}

fn config_err(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Config { path: path.to_string(), message: e.to_string() }
}

impl Config {
    /// Parses and validates a config document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(if path.is_empty() { "." } else { &path }, e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(".", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Semantic checks serde cannot express; errors name the field path.
    pub fn validate(&self) -> Result<()> {
        self.couplers.validate().map_err(|e| config_err("couplers", e))?;
        for band in Band::ALL {
            self.q.band(band).validate().map_err(|e| config_err(&format!("q.{band}"), e))?;
        }
        if !(self.group_index > 1.0 && self.group_index.is_finite()) {
            return Err(config_err("group_index", "must be a finite value above 1"));
        }
        let s = &self.simulate;
        if !(s.eta_max > 0.0 && s.eta_max < 1.0) {
            return Err(config_err("simulate.eta_max", "must lie in (0, 1)"));
        }
        for (name, v) in [("simulate.p_opt_w", s.p_opt_w), ("simulate.signal_w", s.signal_w)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(name, "must be positive"));
            }
        }
        if !(s.lo_factor > 0.0 && s.hi_factor > s.lo_factor) {
            return Err(config_err("simulate.lo_factor", "need 0 < lo_factor < hi_factor"));
        }
        if s.points < 2 {
            return Err(config_err("simulate.points", "need at least 2 points"));
        }
        let w = &self.sweep;
        if w.points == 0 {
            return Err(config_err("sweep.points", "need at least 1 point"));
        }
        if !(w.from.is_finite() && w.to.is_finite()) || (w.spacing == Spacing::Log && !(w.from > 0.0 && w.to > 0.0)) {
            return Err(config_err("sweep.from", "range must be finite (and positive for log spacing)"));
        }
        if self.fit.synthetic.points < 10 {
            return Err(config_err("fit.synthetic.points", "need at least 10 points"));
        }
        self.bend.euler.validate().map_err(|e| config_err("bend.euler", e))?;
        self.bend.taper.validate().map_err(|e| config_err("bend.taper", e))?;
        self.budget.power.validate().map_err(|e| config_err("budget.power", e))?;
        self.budget.dfb.validate().map_err(|e| config_err("budget.dfb", e))?;
        self.budget.combiner_signal.validate().map_err(|e| config_err("budget.combiner_signal", e))?;
        self.budget.combiner_pump.validate().map_err(|e| config_err("budget.combiner_pump", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_reference() {
        let c = Config::from_json_str("{}").unwrap();
        assert!(c.tasks.is_empty());
        assert_eq!(c.ring, RingParams::reference());
        assert_eq!(c.q, QSet::reference());
    }

    #[test]
    fn errors_carry_json_path() {
        let e = Config::from_json_str(r#"{"simulate": {"points": "many"}}"#).unwrap_err();
        match &e {
            Error::Config { path, .. } => assert_eq!(path, "simulate.points"),
            other => panic!("{other:?}"),
        }
        assert_eq!(e.exit_code(), 2);
        let e = Config::from_json_str(r#"{"ring": {"radius_um": -1, "ring_width_um": 1, "loss_db_per_cm": 0.2}}"#)
            .unwrap_err();
        assert!(matches!(&e, Error::Config { path, .. } if path == "ring"), "{e}");
        let e = Config::from_json_str(r#"{"tasks": ["dance"]}"#).unwrap_err();
        assert!(matches!(&e, Error::Config { path, .. } if path.starts_with("tasks")), "{e}");
        let e = Config::from_json_str(r#"{"bogus": 1}"#).unwrap_err();
        assert!(matches!(e, Error::Config { .. }));
    }

    #[test]
    fn semantic_errors_name_field() {
        let e = Config::from_json_str(r#"{"q": {"signal": {"intrinsic": 1e5, "loaded": 2e5},
            "pump": {"intrinsic": 3.29e6, "loaded": 5.26e5}, "sf": {"intrinsic": 8.93e5, "loaded": 1.64e5}}}"#)
            .unwrap_err();
        assert!(matches!(&e, Error::Config { path, .. } if path == "q.signal"), "{e}");
    }

    #[test]
    fn sweep_values() {
        let s = SweepSection { from: 1.0, to: 100.0, points: 3, spacing: Spacing::Log, ..SweepSection::default() };
        let v = s.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!(SweepSection::default().values().len(), 10);
    }
}
