//! Task execution behind the `qfc` CLI.
//!
//! Each task adds one section to a JSON report, a few lines to the text
//! summary, and optionally CSV/JSON files. Every float in every output is
//! rounded to [`crate::format::SIG_DIGITS`] significant digits, and sweep
//! points are evaluated in parallel but collected in order, so identical
//! configs give identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::cmt::{
    calibrate_g, eta_of_pump, log_space, normalized_efficiency, normalized_efficiency_closed_form, p_opt,
    steady_state_ode, CmtParams, ConversionCurve, Drive, OdeOptions,
};
use crate::config::{Config, SweepParameter, Task};
use crate::consts::reference::QUOTED_NORMALIZED_EFFICIENCY_PCT_PER_W;
use crate::dispersion::{resonant_index, Band};
use crate::format::{round_sig, sig};
use crate::layout::{bend_arc_length, effective_radius, euler_bend_path, taper_profile};
use crate::ring::{alpha_roundtrip, eta_max_couplings, eta_max_q, poling_period, qpm_order};
use crate::spectra::{fit_resonance, fsr, synth_transmission, wavelength_grid, Resonance, SpectrumTrace};
use crate::system::{chain_efficiency, channel_count, dfb_wavelength};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub tasks: Vec<Task>,
    pub sections: Map<String, Value>,
    pub summary: Vec<String>,
    /// Auxiliary outputs by file name.
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Report {
    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("tasks".into(), json!(self.tasks.iter().map(|t| t.as_str()).collect::<Vec<_>>()));
        for (k, v) in &self.sections {
            root.insert(k.clone(), v.clone());
        }
        if !self.files.is_empty() {
            root.insert("files".into(), json!(self.files.keys().collect::<Vec<_>>()));
        }
        round_value(Value::Object(root))
    }

    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&self.to_value()).expect("report serializes");
        out.push(b'\n');
        out
    }

    pub fn summary_text(&self) -> String {
        let mut s = self.summary.join("\n");
        if !s.is_empty() {
            s.push('\n');
        }
        s
    }

    /// Writes `report.json`, `summary.txt` and all auxiliary files.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json_bytes())?;
        std::fs::write(dir.join("summary.txt"), self.summary_text())?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

/// Rounds every non-integer number to the report precision.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .map(round_sig)
            .and_then(serde_json::Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn json_file<T: serde::Serialize>(x: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&round_value(to_json(x))).expect("plain data serializes");
    out.push(b'\n');
    out
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

/// Runs `tasks` against `cfg`. Relative paths in the config resolve
/// against `base_dir`.
pub fn run_tasks(cfg: &Config, tasks: &[Task], base_dir: &Path) -> Result<Report> {
    let mut report = Report { tasks: tasks.to_vec(), ..Report::default() };
    if !cfg.metadata.is_empty() && !tasks.is_empty() {
        report.sections.insert("metadata".into(), Value::Object(cfg.metadata.clone()));
    }
    for &task in tasks {
        log::info!("running task {}", task.as_str());
        match task {
            Task::Design => design(cfg, &mut report)?,
            Task::Simulate => simulate(cfg, &mut report)?,
            Task::Sweep => sweep(cfg, &mut report)?,
            Task::Fit => fit(cfg, base_dir, &mut report)?,
            Task::Bend => bend(cfg, &mut report)?,
            Task::Budget => budget(cfg, &mut report)?,
        }
    }
    Ok(report)
}

/// Runs the config's own task list.
pub fn run_config(cfg: &Config, base_dir: &Path) -> Result<Report> {
    run_tasks(cfg, &cfg.tasks, base_dir)
}

/// Parses `text` and runs its task list; returns the report JSON.
pub fn run_config_json(text: &str, base_dir: &Path) -> Result<String> {
    let cfg = Config::from_json_str(text)?;
    let report = run_config(&cfg, base_dir)?;
    Ok(String::from_utf8(report.to_json_bytes()).expect("JSON is UTF-8"))
}

fn design(cfg: &Config, report: &mut Report) -> Result<()> {
    let ring = &cfg.ring;
    let triple = &cfg.modes;
    let eta_c = eta_max_couplings(ring, &cfg.couplers)?;
    let eta_q = eta_max_q(&cfg.q)?;
    let m = qpm_order(triple);
    let period = poling_period(ring.radius_um(), m)?;
    let mut bands = Map::new();
    for (band, (mode, lambda)) in Band::ALL.iter().zip(triple.modes().into_iter().zip(triple.lambdas_nm())) {
        bands.insert(
            band.as_str().into(),
            json!({
                "mode_number": mode,
                "lambda_nm": lambda,
                "resonant_index": resonant_index(mode, lambda, ring.radius_um())?,
                "fsr_nm": fsr(ring, cfg.group_index, lambda)?,
            }),
        );
    }
    report.sections.insert(
        "design".into(),
        json!({
            "circumference_um": ring.circumference_um(),
            "roundtrip_loss_db": ring.roundtrip_loss_db(),
            "alpha_roundtrip": alpha_roundtrip(ring),
            "eta_max_couplings": eta_c,
            "eta_max_q": eta_q,
            "qpm_order": m,
            "poling_period_um": period,
            "phase_matched": triple.is_phase_matched(),
            "group_index": cfg.group_index,
            "bands": bands,
        }),
    );
    report.summary.push(format!("design: eta_max (coupling form) = {}", sig(eta_c)));
    report.summary.push(format!("design: eta_max (Q form) = {}", sig(eta_q)));
    report.summary.push(format!("design: QPM order M={m}, poling period = {} µm", sig(period)));
    report.summary.push(format!("design: lambda_sf = {} nm", sig(triple.lambda_sf_nm)));
    Ok(())
}

fn calibrated(cfg: &Config) -> Result<(CmtParams, crate::cmt::Calibration)> {
    let partial = CmtParams::from_q(&cfg.q, cfg.modes.lambdas_nm(), 0.0)?;
    calibrate_g(cfg.simulate.eta_max, cfg.simulate.p_opt_w, &partial)
}

fn simulate(cfg: &Config, report: &mut Report) -> Result<()> {
    let s = &cfg.simulate;
    let (params, cal) = calibrated(cfg)?;
    let popt = p_opt(&params)?;
    let pumps = log_space(s.lo_factor * popt, s.hi_factor * popt, s.points);
    let curve = ConversionCurve::sample(&params, &pumps)?;
    let ode: Option<Vec<f64>> = if s.ode_check {
        let opts = OdeOptions::default();
        Some(
            pumps
                .par_iter()
                .map(|&p| steady_state_ode(&params, Drive { pump_w: p, signal_w: s.signal_w }, &opts).map(|ss| ss.eta))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let max_diff = ode.as_ref().map(|o| {
        o.iter()
            .zip(curve.points())
            .map(|(a, &(_, b))| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let fitted = normalized_efficiency(&curve).ok();
    let measured_slope = normalized_efficiency_closed_form(s.eta_max, popt);

    report.files.insert(
        "conversion.csv".into(),
        csv_bytes(|w| {
            use std::io::Write;
            match &ode {
                Some(o) => {
                    writeln!(w, "pump_W,eta,eta_ode")?;
                    for (&(p, e), eo) in curve.points().iter().zip(o) {
                        writeln!(w, "{},{},{}", sig(p), sig(e), sig(*eo))?;
                    }
                    Ok(())
                }
                None => curve.write_csv(w),
            }
        }),
    );
    report.sections.insert(
        "simulate".into(),
        json!({
            "calibration": to_json(&cal),
            "p_opt_W": popt,
            "eta_ceiling": params.eta_max(),
            "eta_at_p_opt": eta_of_pump(&params, popt)?,
            "points": pumps.len(),
            "ode_max_abs_diff": max_diff,
            "normalized_efficiency_pct_per_W": {
                "model_fit": fitted.map(|f| f.pct_per_w),
                "measured_closed_form": measured_slope,
                "quoted": QUOTED_NORMALIZED_EFFICIENCY_PCT_PER_W,
                "matches_quoted": (measured_slope / QUOTED_NORMALIZED_EFFICIENCY_PCT_PER_W - 1.0).abs() < 0.05,
            },
        }),
    );
    report.summary.push(format!(
        "simulate: P_opt={} µW, g = {} rad/s, eta ceiling = {}",
        sig(popt * 1e6),
        sig(cal.g_rad_per_s),
        sig(params.eta_max())
    ));
    if let Some(d) = max_diff {
        report.summary.push(format!("simulate: ODE vs closed form max |Δη| = {}", sig(d)));
    }
    report.summary.push(format!(
        "simulate: low-power slope 4η/P_opt = {} %/W (quoted {} %/W; mismatch noted)",
        sig(measured_slope),
        sig(QUOTED_NORMALIZED_EFFICIENCY_PCT_PER_W)
    ));
    Ok(())
}

fn sweep(cfg: &Config, report: &mut Report) -> Result<()> {
    let sw = &cfg.sweep;
    let values = sw.values();
    let etas = values
        .par_iter()
        .map(|&v| {
            let mut ring = cfg.ring;
            let mut c = cfg.couplers;
            match sw.parameter {
                SweepParameter::Kappa2SignalA => c.kappa2_signal_a = v,
                SweepParameter::Kappa2SignalB => c.kappa2_signal_b = v,
                SweepParameter::Kappa2SfA => c.kappa2_sf_a = v,
                SweepParameter::Kappa2SfB => c.kappa2_sf_b = v,
                SweepParameter::LossDbPerCm => ring = ring.with_loss(v)?,
            }
            eta_max_couplings(&ring, &c)
        })
        .collect::<Result<Vec<f64>>>()?;
    let name = sw.parameter.as_str();
    report.files.insert(
        "sweep.csv".into(),
        csv_bytes(|w| {
            use std::io::Write;
            writeln!(w, "{name},eta_max")?;
            for (v, e) in values.iter().zip(&etas) {
                writeln!(w, "{},{}", sig(*v), sig(*e))?;
            }
            Ok(())
        }),
    );
    let increasing = etas.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = etas.windows(2).all(|w| w[1] <= w[0]);
    report.sections.insert(
        "sweep".into(),
        json!({
            "parameter": name,
            "values": values,
            "eta_max": etas,
            "monotone": increasing || decreasing,
        }),
    );
    report.summary.push(format!(
        "sweep: {} points of {name}, eta_max {} → {}",
        values.len(),
        sig(etas[0]),
        sig(etas[etas.len() - 1])
    ));
    Ok(())
}

fn fit(cfg: &Config, base_dir: &Path, report: &mut Report) -> Result<()> {
    let f = &cfg.fit;
    let band_index = Band::ALL.iter().position(|&b| b == f.band).expect("band listed");
    let (trace, truth) = match &f.trace_csv {
        Some(rel) => {
            let path = base_dir.join(rel);
            let file = std::fs::File::open(&path)
                .map_err(|e| Error::InvalidInput(format!("cannot open trace {}: {e}", path.display())))?;
            (SpectrumTrace::read_csv(std::io::BufReader::new(file), Some(f.band))?, None)
        }
        None => {
            let q = cfg.q.band(f.band);
            let center = cfg.modes.lambdas_nm()[band_index];
            let res = Resonance::from_q(center, q.intrinsic, q.loaded)?;
            let grid = wavelength_grid(center, f.synthetic.half_span_linewidths * res.fwhm_nm(), f.synthetic.points);
            let trace = synth_transmission(&cfg.ring, cfg.group_index, &res, &grid, f.synthetic.noise, Some(f.band))?;
            report.files.insert("trace.csv".into(), csv_bytes(|w| trace.write_csv(w)));
            (trace, Some(q))
        }
    };
    let result = fit_resonance(&trace, f.hint)?;
    report.files.insert("fit.json".into(), json_file(&result));
    let mut section = json!({ "band": f.band.as_str(), "hint": to_json(&f.hint), "result": to_json(&result) });
    if let Some(q) = truth {
        section["truth"] = json!({ "intrinsic_q": q.intrinsic, "loaded_q": q.loaded });
        section["relative_error"] = json!({
            "intrinsic_q": result.intrinsic_q / q.intrinsic - 1.0,
            "loaded_q": result.loaded_q / q.loaded - 1.0,
        });
    }
    report.sections.insert("fit".into(), section);
    report.summary.push(format!(
        "fit: {} band Q_l = {}, Q_0 = {}, T_0 = {}",
        f.band,
        sig(result.loaded_q),
        sig(result.intrinsic_q),
        sig(result.min_transmission)
    ));
    Ok(())
}

fn bend(cfg: &Config, report: &mut Report) -> Result<()> {
    let b = &cfg.bend;
    let path = euler_bend_path(&b.euler, b.samples)?;
    let taper = taper_profile(&b.taper, b.taper_samples)?;
    let r_eff = effective_radius(&path).ok();
    let (dx, dy) = path.endpoint_displacement();
    report.files.insert("bend.csv".into(), csv_bytes(|w| path.write_csv(w)));
    report.files.insert("bend.json".into(), json_file(&path));
    report.files.insert("taper.csv".into(), csv_bytes(|w| taper.write_csv(w)));
    report.sections.insert(
        "bend".into(),
        json!({
            "spec": to_json(&b.euler),
            "arc_length_um": bend_arc_length(&b.euler),
            "sampled_chord_length_um": path.chord_length(),
            "total_rotation_rad": path.total_rotation(),
            "curvature_integral_rad": path.curvature_integral(),
            "endpoint_um": [dx, dy],
            "effective_radius_um": r_eff,
            "quoted_loss_db": path.quoted_loss_db,
            "taper": {
                "spec": to_json(&b.taper),
                "slope": b.taper.slope(),
                "quoted_loss_db": taper.quoted_loss_db,
            },
        }),
    );
    report.summary.push(format!(
        "bend: arc length = {} µm, R_eff = {} µm",
        sig(bend_arc_length(&b.euler)),
        r_eff.map_or("n/a (not a 90° bend)".to_string(), sig)
    ));
    Ok(())
}

fn budget(cfg: &Config, report: &mut Report) -> Result<()> {
    let b = &cfg.budget;
    let channels = channel_count(&b.power)?;
    let chain = chain_efficiency(&b.chain)?;
    let pump_nm = cfg.modes.lambda_p_nm;
    let pump_fsr = fsr(&cfg.ring, cfg.group_index, pump_nm)?;
    let per_channel_w = b.power.per_channel_uw * 1e-6;
    let sig_dc = crate::spectra::dc_transfer(&b.combiner_signal, cfg.modes.lambda_s_nm)?;
    let pump_dc = crate::spectra::dc_transfer(&b.combiner_pump, pump_nm)?;
    report.sections.insert(
        "budget".into(),
        json!({
            "channel_count": channels,
            "on_chip_pump_mW": b.power.on_chip_mw(),
            "chain": {
                "stages": to_json(&b.chain),
                "efficiency": chain.efficiency,
                "loss_db": chain.loss_db,
            },
            "dfb": {
                "wavelength_at_t0_nm": dfb_wavelength(&b.dfb, b.dfb.t0_c)?,
                "slope_pm_per_C": b.dfb.slope_pm_per_c,
                "delta_t_per_pump_fsr_C": b.dfb.delta_t_for_shift(pump_fsr),
                "pump_fsr_nm": pump_fsr,
            },
            "noise": {
                "model": to_json(&b.noise),
                "cps_per_channel": b.noise.rate(per_channel_w),
                "placeholder": true,
            },
            "combiner": {
                "signal": to_json(&sig_dc),
                "pump": to_json(&pump_dc),
            },
            "chip_temperature_C": b.chip_temperature_c,
        }),
    );
    report.summary.push(format!(
        "budget: {channels} channels at {} µW each from {} mW on chip",
        sig(b.power.per_channel_uw),
        sig(b.power.on_chip_mw())
    ));
    report.summary.push(format!(
        "budget: chain efficiency = {} ({} dB)",
        sig(chain.efficiency),
        sig(chain.loss_db)
    ));
    Ok(())
}
