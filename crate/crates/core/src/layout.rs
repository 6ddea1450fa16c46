//! Waveguide geometry: symmetric Euler (clothoid) bends, linear tapers and
//! sampled path polylines.
//!
//! An Euler bend's curvature rises linearly in arc length from `1/R_max` to
//! `1/R_min` at the midpoint and falls back symmetrically. Mode-loss figures
//! are carried as quoted metadata only.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::format::sig;
use crate::{Error, Result};

pub const MIN_BEND_SAMPLES: usize = 64;
/// RK4 sub-steps between returned samples.
pub const DEFAULT_SUBSTEPS: usize = 8;
/// Quoted loss of the reference Euler bend (≈0.23 %).
pub const BEND_QUOTED_LOSS_DB: f64 = 0.01;
/// Rotation tolerance for [`effective_radius`].
pub const RIGHT_ANGLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerBendSpec {
    pub r_max_um: f64,
    pub r_min_um: f64,
    pub total_angle_rad: f64,
    pub width_nm: f64,
}

impl EulerBendSpec {
    pub fn new(r_max_um: f64, r_min_um: f64, total_angle_rad: f64, width_nm: f64) -> Result<Self> {
        let s = Self { r_max_um, r_min_um, total_angle_rad, width_nm };
        s.validate()?;
        Ok(s)
    }

    /// Constant-radius arc (`R_max = R_min`), the degenerate limit.
    pub fn arc(radius_um: f64, total_angle_rad: f64, width_nm: f64) -> Result<Self> {
        let s = Self { r_max_um: radius_um, r_min_um: radius_um, total_angle_rad, width_nm };
        s.check(true)?;
        Ok(s)
    }

    /// 300 µm → 28.5 µm → 300 µm, 90°.
    pub fn reference() -> Self {
        Self { r_max_um: 300.0, r_min_um: 28.5, total_angle_rad: FRAC_PI_2, width_nm: 1730.0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.check(false)
    }

    fn check(&self, allow_equal: bool) -> Result<()> {
        let ordered = if allow_equal {
            self.r_max_um >= self.r_min_um
        } else {
            self.r_max_um > self.r_min_um
        };
        if !(ordered && self.r_min_um > 0.0 && self.r_max_um.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "need R_max > R_min > 0 (got {} / {} µm)",
                self.r_max_um, self.r_min_um
            )));
        }
        if !(self.total_angle_rad > 0.0 && self.total_angle_rad <= std::f64::consts::PI) {
            return Err(Error::OutOfRange {
                what: "bend angle (rad)",
                value: self.total_angle_rad,
                lo: 0.0,
                hi: std::f64::consts::PI,
            });
        }
        if !(self.width_nm > 0.0) {
            return Err(Error::InvalidInput("bend width must be positive".into()));
        }
        Ok(())
    }

    fn k_ends(&self) -> (f64, f64) {
        (1.0 / self.r_max_um, 1.0 / self.r_min_um)
    }

    /// Curvature at arc length `s` (clamped to the bend).
    pub fn curvature(&self, s: f64) -> f64 {
        let total = bend_arc_length(self);
        let half = 0.5 * total;
        let (k0, k1) = self.k_ends();
        let d = if s <= half { s } else { total - s }.clamp(0.0, half);
        k0 + (k1 - k0) * d / half
    }
}

/// Total arc length of the symmetric bend: `θ / mean(k)`.
pub fn bend_arc_length(spec: &EulerBendSpec) -> f64 {
    let (k0, k1) = spec.k_ends();
    spec.total_angle_rad / (0.5 * (k0 + k1))
}

/// A sampled path. `width_nm` is present for tapers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPolyline {
    pub s_um: Vec<f64>,
    pub x_um: Vec<f64>,
    pub y_um: Vec<f64>,
    pub theta_rad: Vec<f64>,
    pub k_per_um: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_nm: Option<Vec<f64>>,
    /// Quoted (not computed) mode loss of the element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quoted_loss_db: Option<f64>,
}

impl PathPolyline {
    pub fn len(&self) -> usize {
        self.s_um.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_um.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n < 2 {
            return Err(Error::Empty("path polyline"));
        }
        let same = [self.x_um.len(), self.y_um.len(), self.theta_rad.len(), self.k_per_um.len()]
            .iter()
            .all(|&l| l == n)
            && self.width_nm.as_ref().is_none_or(|w| w.len() == n);
        if !same {
            return Err(Error::InvariantViolation("path channels differ in length".into()));
        }
        if self.s_um.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvariantViolation("arc length must increase".into()));
        }
        if self.k_per_um.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvariantViolation("non-finite curvature".into()));
        }
        Ok(())
    }

    pub fn endpoint_displacement(&self) -> (f64, f64) {
        let n = self.len() - 1;
        (self.x_um[n] - self.x_um[0], self.y_um[n] - self.y_um[0])
    }

    pub fn total_rotation(&self) -> f64 {
        self.theta_rad[self.len() - 1] - self.theta_rad[0]
    }

    /// Trapezoid `∫k ds` over the samples.
    pub fn curvature_integral(&self) -> f64 {
        self.s_um
            .windows(2)
            .zip(self.k_per_um.windows(2))
            .map(|(s, k)| 0.5 * (k[0] + k[1]) * (s[1] - s[0]))
            .sum()
    }

    /// Sum of straight-segment lengths between samples.
    pub fn chord_length(&self) -> f64 {
        (1..self.len())
            .map(|i| (self.x_um[i] - self.x_um[i - 1]).hypot(self.y_um[i] - self.y_um[i - 1]))
            .sum()
    }

    /// Uniform scaling of lengths; curvature scales inversely.
    pub fn scaled(&self, factor: f64) -> Self {
        let m = |v: &[f64], f: f64| v.iter().map(|x| x * f).collect();
        Self {
            s_um: m(&self.s_um, factor),
            x_um: m(&self.x_um, factor),
            y_um: m(&self.y_um, factor),
            theta_rad: self.theta_rad.clone(),
            k_per_um: m(&self.k_per_um, 1.0 / factor),
            width_nm: self.width_nm.clone(),
            quoted_loss_db: self.quoted_loss_db,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let has_w = self.width_nm.is_some();
        writeln!(w, "s_um,x_um,y_um,theta_rad,k_per_um{}", if has_w { ",width_nm" } else { "" })?;
        for i in 0..self.len() {
            write!(
                w,
                "{},{},{},{},{}",
                sig(self.s_um[i]),
                sig(self.x_um[i]),
                sig(self.y_um[i]),
                sig(self.theta_rad[i]),
                sig(self.k_per_um[i])
            )?;
            if let Some(wd) = &self.width_nm {
                write!(w, ",{}", sig(wd[i]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Samples the bend at `n_samples` points evenly spaced in arc length,
/// starting at the origin heading along +x.
pub fn euler_bend_path(spec: &EulerBendSpec, n_samples: usize) -> Result<PathPolyline> {
    euler_bend_path_with_substeps(spec, n_samples, DEFAULT_SUBSTEPS)
}

/// As [`euler_bend_path`] with an explicit number of RK4 sub-steps per
/// sample interval (for convergence checks).
pub fn euler_bend_path_with_substeps(
    spec: &EulerBendSpec,
    n_samples: usize,
    substeps: usize,
) -> Result<PathPolyline> {
    spec.check(true)?;
    if n_samples < MIN_BEND_SAMPLES {
        return Err(Error::Sampling(format!(
            "{n_samples} samples; at least {MIN_BEND_SAMPLES} needed"
        )));
    }
    if substeps == 0 {
        return Err(Error::InvalidInput("substeps must be at least 1".into()));
    }
    let total = bend_arc_length(spec);
    let half = 0.5 * total;
    let ds = total / (n_samples - 1) as f64;
    let k = |s: f64| spec.curvature(s);

    // State (x, y, θ); x' = cos θ, y' = sin θ, θ' = k(s).
    let rk4 = |st: [f64; 3], s: f64, h: f64| -> [f64; 3] {
        let f = |st: [f64; 3], s: f64| [st[2].cos(), st[2].sin(), k(s)];
        let add = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
        let k1 = f(st, s);
        let k2 = f(add(st, k1, 0.5 * h), s + 0.5 * h);
        let k3 = f(add(st, k2, 0.5 * h), s + 0.5 * h);
        let k4 = f(add(st, k3, h), s + h);
        [
            st[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            st[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            st[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        ]
    };

    let mut out = PathPolyline {
        s_um: Vec::with_capacity(n_samples),
        x_um: Vec::with_capacity(n_samples),
        y_um: Vec::with_capacity(n_samples),
        theta_rad: Vec::with_capacity(n_samples),
        k_per_um: Vec::with_capacity(n_samples),
        width_nm: None,
        quoted_loss_db: Some(BEND_QUOTED_LOSS_DB),
    };
    let mut st = [0.0; 3];
    let mut s = 0.0;
    let push = |out: &mut PathPolyline, s: f64, st: [f64; 3]| {
        out.s_um.push(s);
        out.x_um.push(st[0]);
        out.y_um.push(st[1]);
        out.theta_rad.push(st[2]);
        out.k_per_um.push(k(s));
    };
    push(&mut out, 0.0, st);
    for i in 1..n_samples {
        let s_next = if i == n_samples - 1 { total } else { i as f64 * ds };
        // Curvature has a kink at the midpoint; never step across it.
        let mut bounds = vec![s];
        if s < half && s_next > half {
            bounds.push(half);
        }
        bounds.push(s_next);
        for w in bounds.windows(2) {
            let h = (w[1] - w[0]) / substeps as f64;
            for j in 0..substeps {
                st = rk4(st, w[0] + j as f64 * h, h);
            }
        }
        s = s_next;
        push(&mut out, s, st);
    }
    Ok(out)
}

/// Radius of the 90° arc with the same endpoint displacement:
/// `max(|Δx|, |Δy|)`.
pub fn effective_radius(path: &PathPolyline) -> Result<f64> {
    path.validate()?;
    let rot = path.total_rotation();
    if (rot.abs() - FRAC_PI_2).abs() > RIGHT_ANGLE_TOL {
        return Err(Error::InvalidInput(format!(
            "effective radius needs a 90° bend; path turns {rot} rad"
        )));
    }
    let (dx, dy) = path.endpoint_displacement();
    Ok(dx.abs().max(dy.abs()))
}

/// Exact circular arc sampled like a bend (test anchor and comparisons).
pub fn circular_arc(radius_um: f64, angle_rad: f64, n_samples: usize) -> Result<PathPolyline> {
    if !(radius_um > 0.0 && angle_rad > 0.0) || n_samples < 2 {
        return Err(Error::InvalidInput("arc needs positive radius, angle and ≥2 samples".into()));
    }
    let mut p = PathPolyline {
        s_um: vec![],
        x_um: vec![],
        y_um: vec![],
        theta_rad: vec![],
        k_per_um: vec![],
        width_nm: None,
        quoted_loss_db: None,
    };
    for i in 0..n_samples {
        let th = angle_rad * i as f64 / (n_samples - 1) as f64;
        p.s_um.push(radius_um * th);
        p.x_um.push(radius_um * th.sin());
        p.y_um.push(radius_um * (1.0 - th.cos()));
        p.theta_rad.push(th);
        p.k_per_um.push(1.0 / radius_um);
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaperKind {
    Abrupt,
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperSpec {
    pub w_in_nm: f64,
    pub w_out_nm: f64,
    pub length_um: f64,
    pub kind: TaperKind,
    #[serde(default)]
    pub quoted_loss_db: Option<f64>,
}

impl TaperSpec {
    /// 300 → 950 nm over 4 µm, quoted 0.24 dB.
    pub fn reference_abrupt() -> Self {
        Self { w_in_nm: 300.0, w_out_nm: 950.0, length_um: 4.0, kind: TaperKind::Abrupt, quoted_loss_db: Some(0.24) }
    }

    /// 300 → 950 nm over 300 µm; no loss figure quoted.
    pub fn reference_adiabatic() -> Self {
        Self { w_in_nm: 300.0, w_out_nm: 950.0, length_um: 300.0, kind: TaperKind::Adiabatic, quoted_loss_db: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_in_nm > 0.0 && self.w_out_nm > 0.0 && self.length_um > 0.0) {
            return Err(Error::InvalidInput("taper widths and length must be positive".into()));
        }
        Ok(())
    }

    /// Width change per unit length (nm/nm).
    pub fn slope(&self) -> f64 {
        (self.w_out_nm - self.w_in_nm) / (self.length_um * 1e3)
    }
}

/// Straight taper along +x with a linear width channel.
pub fn taper_profile(spec: &TaperSpec, n_samples: usize) -> Result<PathPolyline> {
    spec.validate()?;
    if n_samples < 2 {
        return Err(Error::Sampling("taper needs at least 2 samples".into()));
    }
    let last = (n_samples - 1) as f64;
    let f = |i: usize| i as f64 / last;
    let s: Vec<f64> = (0..n_samples).map(|i| spec.length_um * f(i)).collect();
    let width = (0..n_samples)
        .map(|i| match i {
            0 => spec.w_in_nm,
            _ if i == n_samples - 1 => spec.w_out_nm,
            _ => spec.w_in_nm + (spec.w_out_nm - spec.w_in_nm) * f(i),
        })
        .collect();
    Ok(PathPolyline {
        x_um: s.clone(),
        s_um: s,
        y_um: vec![0.0; n_samples],
        theta_rad: vec![0.0; n_samples],
        k_per_um: vec![0.0; n_samples],
        width_nm: Some(width),
        quoted_loss_db: spec.quoted_loss_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Endpoint by Gauss–Legendre quadrature of the closed-form tangent
    /// angle, independent of the RK4 integrator.
    fn quadrature_endpoint(spec: &EulerBendSpec) -> (f64, f64) {
        let total = bend_arc_length(spec);
        let half = 0.5 * total;
        let (k0, k1) = (1.0 / spec.r_max_um, 1.0 / spec.r_min_um);
        let a = (k1 - k0) / half;
        let theta = |s: f64| {
            if s <= half {
                k0 * s + 0.5 * a * s * s
            } else {
                let th_half = k0 * half + 0.5 * a * half * half;
                let d = s - half;
                th_half + k1 * d - 0.5 * a * d * d
            }
        };
        // 5-point Gauss–Legendre on many panels
        let nodes = [0.0, -0.538_469_310_105_683, 0.538_469_310_105_683, -0.906_179_845_938_664, 0.906_179_845_938_664];
        let weights = [0.568_888_888_888_889, 0.478_628_670_499_366, 0.478_628_670_499_366, 0.236_926_885_056_189, 0.236_926_885_056_189];
        let panels = 2000;
        let (mut x, mut y) = (0.0, 0.0);
        for p in 0..panels {
            let (lo, hi) = (total * p as f64 / panels as f64, total * (p + 1) as f64 / panels as f64);
            let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (n, w) in nodes.iter().zip(weights) {
                let th = theta(m + r * n);
                x += w * r * th.cos();
                y += w * r * th.sin();
            }
        }
        (x, y)
    }

    #[test]
    fn reference_arc_length() {
        let s = bend_arc_length(&EulerBendSpec::reference());
        assert!((s - 81.7675).abs() < 1e-3, "{s}");
        let big = EulerBendSpec::new(600.0, 57.0, FRAC_PI_2, 1730.0).unwrap();
        assert_relative_eq!(bend_arc_length(&big), 2.0 * s, max_relative = 1e-12);
        let arc = EulerBendSpec::arc(50.0, FRAC_PI_2, 1000.0).unwrap();
        assert_relative_eq!(bend_arc_length(&arc), 50.0 * FRAC_PI_2, max_relative = 1e-12);
    }

    #[test]
    fn reference_path_geometry() {
        let spec = EulerBendSpec::reference();
        let p = euler_bend_path(&spec, 1025).unwrap();
        p.validate().unwrap();
        assert!((p.total_rotation() - FRAC_PI_2).abs() < 1e-9);
        assert!((p.curvature_integral() - FRAC_PI_2).abs() < 1e-6);
        let (qx, qy) = quadrature_endpoint(&spec);
        let (dx, dy) = p.endpoint_displacement();
        assert!((dx - qx).abs() < 1e-7 && (dy - qy).abs() < 1e-7, "{dx},{dy} vs {qx},{qy}");
        let r = effective_radius(&p).unwrap();
        assert!((r - 49.3345).abs() < 1e-3, "{r}");
        assert!((r / 50.0 - 1.0).abs() < 0.1);
    }

    #[test]
    fn curvature_profile() {
        let spec = EulerBendSpec::reference();
        let p = euler_bend_path(&spec, 1025).unwrap();
        let mid = 512;
        assert_relative_eq!(p.k_per_um[0], 1.0 / 300.0, max_relative = 1e-12);
        assert_relative_eq!(p.k_per_um[1024], 1.0 / 300.0, max_relative = 1e-12);
        assert_relative_eq!(p.k_per_um[mid], 1.0 / 28.5, max_relative = 1e-12);
        assert!(p.k_per_um.iter().all(|&k| k <= 1.0 / 28.5 + 1e-15));
    }

    #[test]
    fn mirror_symmetry() {
        let p = euler_bend_path(&EulerBendSpec::reference(), 1000).unwrap();
        let n = p.len();
        let (dx, dy) = p.endpoint_displacement();
        // Reflect across the perpendicular bisector of the chord.
        let len = dx.hypot(dy);
        let (ux, uy) = (dx / len, dy / len);
        for i in 0..n {
            let (x, y) = (p.x_um[i] - 0.5 * dx, p.y_um[i] - 0.5 * dy);
            let along = x * ux + y * uy;
            let (rx, ry) = (x - 2.0 * along * ux + 0.5 * dx, y - 2.0 * along * uy + 0.5 * dy);
            let j = n - 1 - i;
            assert!((rx - p.x_um[j]).hypot(ry - p.y_um[j]) < 1e-6);
        }
    }

    #[test]
    fn sampling_and_step_convergence() {
        let spec = EulerBendSpec::reference();
        let p = euler_bend_path(&spec, 4096).unwrap();
        assert!((p.chord_length() / bend_arc_length(&spec) - 1.0).abs() < 1e-4);
        let coarse = euler_bend_path_with_substeps(&spec, 64, 1).unwrap();
        let fine = euler_bend_path_with_substeps(&spec, 64, 2).unwrap();
        let (a, b) = (coarse.endpoint_displacement(), fine.endpoint_displacement());
        assert!((a.0 - b.0).hypot(a.1 - b.1) < 1e-4);
        assert!(euler_bend_path(&spec, 10).is_err());
    }

    #[test]
    fn effective_radius_anchors() {
        let q = circular_arc(50.0, FRAC_PI_2, 200).unwrap();
        assert_relative_eq!(effective_radius(&q).unwrap(), 50.0, max_relative = 1e-12);
        assert_relative_eq!(effective_radius(&q.scaled(2.0)).unwrap(), 100.0, max_relative = 1e-12);
        let half = circular_arc(50.0, FRAC_PI_2 / 2.0, 200).unwrap();
        assert!(effective_radius(&half).is_err());
        // Degenerate Euler bend is the circular arc.
        let arc = euler_bend_path(&EulerBendSpec::arc(50.0, FRAC_PI_2, 1.0).unwrap(), 256).unwrap();
        assert!((effective_radius(&arc).unwrap() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn spec_validation() {
        assert!(EulerBendSpec::new(28.5, 300.0, FRAC_PI_2, 1.0).is_err());
        assert!(EulerBendSpec::new(300.0, 300.0, FRAC_PI_2, 1.0).is_err());
        assert!(EulerBendSpec::new(300.0, 28.5, 4.0, 1.0).is_err());
        assert!(EulerBendSpec::new(300.0, 28.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn tapers() {
        let t = taper_profile(&TaperSpec::reference_abrupt(), 5).unwrap();
        let w = t.width_nm.as_ref().unwrap();
        assert_eq!((w[0], w[4]), (300.0, 950.0));
        assert_eq!(t.quoted_loss_db, Some(0.24));
        let flat = TaperSpec { w_out_nm: 300.0, ..TaperSpec::reference_abrupt() };
        assert!(taper_profile(&flat, 7).unwrap().width_nm.unwrap().iter().all(|&x| x == 300.0));
        assert_relative_eq!(TaperSpec::reference_adiabatic().slope(), 650.0 / 300_000.0);
        assert!(taper_profile(&TaperSpec::reference_abrupt(), 1).is_err());
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        taper_profile(&TaperSpec::reference_abrupt(), 3).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s_um,x_um,y_um,theta_rad,k_per_um,width_nm\n"));
        let mut buf = Vec::new();
        circular_arc(1.0, 1.0, 3).unwrap().write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("s_um,x_um,y_um,theta_rad,k_per_um\n"));
    }
}
