//! Resonator geometry, loss and coupling state.
//!
//! Covers the integer quasi-phase-matching condition, the azimuthal poling
//! period, the pulley-coupler index-matching relation and the two forms of
//! the maximum conversion efficiency of a double-pulley add-drop ring: one
//! from round-trip coupling fractions κ² and propagation loss, one from
//! measured intrinsic and loaded Q factors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::consts::reference;
use crate::dispersion::{reference_sf_nm, Band, IndexModel};
use crate::{Error, Result};

/// Default tolerance for declaring triple resonance.
pub const TRIPLE_RESONANCE_TOL: f64 = 1e-3;

/// Relative tolerance on `1/λ_sf = 1/λ_s + 1/λ_p`. Wavelengths are quoted
/// to 1 nm, so nothing tighter is meaningful.
pub const ENERGY_CONSERVATION_TOL: f64 = 1e-4;

/// Upper edge of the small-loss regime for the Q ↔ loss bridge.
pub const SMALL_LOSS_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RingParamsRepr", into = "RingParamsRepr")]
pub struct RingParams {
    radius_um: f64,
    ring_width_um: f64,
    loss_db_per_cm: f64,
    circumference_um: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RingParamsRepr {
    radius_um: f64,
    ring_width_um: f64,
    loss_db_per_cm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    circumference_um: Option<f64>,
}

impl TryFrom<RingParamsRepr> for RingParams {
    type Error = Error;

    fn try_from(r: RingParamsRepr) -> Result<Self> {
        let ring = RingParams::new(r.radius_um, r.ring_width_um, r.loss_db_per_cm)?;
        if let Some(l) = r.circumference_um {
            let rel = (l - ring.circumference_um).abs() / ring.circumference_um;
            if !(rel <= 1e-9) {
                return Err(Error::InvariantViolation(format!(
                    "circumference {l} µm disagrees with 2πR = {} µm",
                    ring.circumference_um
                )));
            }
        }
        Ok(ring)
    }
}

impl From<RingParams> for RingParamsRepr {
    fn from(r: RingParams) -> Self {
        Self {
            radius_um: r.radius_um,
            ring_width_um: r.ring_width_um,
            loss_db_per_cm: r.loss_db_per_cm,
            circumference_um: Some(r.circumference_um),
        }
    }
}

impl RingParams {
    pub fn new(radius_um: f64, ring_width_um: f64, loss_db_per_cm: f64) -> Result<Self> {
        if !(radius_um > 0.0 && radius_um.is_finite()) {
            return Err(Error::InvalidInput(format!("ring radius {radius_um} µm must be positive")));
        }
        if !(ring_width_um > 0.0 && ring_width_um.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "ring width {ring_width_um} µm must be positive"
            )));
        }
        if !(loss_db_per_cm >= 0.0 && loss_db_per_cm.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "propagation loss {loss_db_per_cm} dB/cm must be non-negative"
            )));
        }
        Ok(Self {
            radius_um,
            ring_width_um,
            loss_db_per_cm,
            circumference_um: 2.0 * PI * radius_um,
        })
    }

    /// 74 µm radius, 1.73 µm width, 0.2 dB/cm.
    pub fn reference() -> Self {
        Self::new(
            reference::RADIUS_UM,
            reference::RING_WIDTH_UM,
            reference::LOSS_DB_PER_CM,
        )
        .expect("reference ring is valid")
    }

    pub fn radius_um(&self) -> f64 {
        self.radius_um
    }

    pub fn ring_width_um(&self) -> f64 {
        self.ring_width_um
    }

    pub fn loss_db_per_cm(&self) -> f64 {
        self.loss_db_per_cm
    }

    pub fn circumference_um(&self) -> f64 {
        self.circumference_um
    }

    pub fn with_loss(&self, loss_db_per_cm: f64) -> Result<Self> {
        Self::new(self.radius_um, self.ring_width_um, loss_db_per_cm)
    }

    /// Round-trip propagation loss in dB.
    pub fn roundtrip_loss_db(&self) -> f64 {
        self.loss_db_per_cm * self.circumference_um * 1e-4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    A,
    B,
}

impl Port {
    pub fn other(self) -> Port {
        match self {
            Port::A => Port::B,
            Port::B => Port::A,
        }
    }
}

/// Port through which a band enters (signal, pump) or leaves (sf) the ring.
pub fn designated_port(band: Band) -> Port {
    match band {
        Band::Signal | Band::Pump => Port::A,
        Band::Sf => Port::B,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortGeometry {
    pub w_wg_nm: f64,
    pub gap_nm: f64,
}

/// Round-trip power coupling fractions per band and port, plus the bus
/// geometry of each pulley.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerSpec {
    #[serde(rename = "kappa2_signal_A")]
    pub kappa2_signal_a: f64,
    #[serde(rename = "kappa2_signal_B")]
    pub kappa2_signal_b: f64,
    #[serde(rename = "kappa2_pump_A")]
    pub kappa2_pump_a: f64,
    #[serde(rename = "kappa2_pump_B")]
    pub kappa2_pump_b: f64,
    #[serde(rename = "kappa2_sf_A")]
    pub kappa2_sf_a: f64,
    #[serde(rename = "kappa2_sf_B")]
    pub kappa2_sf_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub port_a: Option<PortGeometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub port_b: Option<PortGeometry>,
}

impl CouplerSpec {
    /// Coupler A: 600 nm bus, 700 nm gap. Coupler B: 300 nm bus, 390 nm gap.
    pub fn reference() -> Self {
        Self {
            kappa2_signal_a: reference::KAPPA2_SIGNAL_A,
            kappa2_signal_b: reference::KAPPA2_SIGNAL_B,
            kappa2_pump_a: reference::KAPPA2_PUMP_A,
            kappa2_pump_b: reference::KAPPA2_PUMP_B,
            kappa2_sf_a: reference::KAPPA2_SF_A,
            kappa2_sf_b: reference::KAPPA2_SF_B,
            port_a: Some(PortGeometry {
                w_wg_nm: 600.0,
                gap_nm: 700.0,
            }),
            port_b: Some(PortGeometry {
                w_wg_nm: 300.0,
                gap_nm: 390.0,
            }),
        }
    }

    pub fn kappa2(&self, band: Band, port: Port) -> f64 {
        match (band, port) {
            (Band::Signal, Port::A) => self.kappa2_signal_a,
            (Band::Signal, Port::B) => self.kappa2_signal_b,
            (Band::Pump, Port::A) => self.kappa2_pump_a,
            (Band::Pump, Port::B) => self.kappa2_pump_b,
            (Band::Sf, Port::A) => self.kappa2_sf_a,
            (Band::Sf, Port::B) => self.kappa2_sf_b,
        }
    }

    pub fn kappa2_mut(&mut self, band: Band, port: Port) -> &mut f64 {
        match (band, port) {
            (Band::Signal, Port::A) => &mut self.kappa2_signal_a,
            (Band::Signal, Port::B) => &mut self.kappa2_signal_b,
            (Band::Pump, Port::A) => &mut self.kappa2_pump_a,
            (Band::Pump, Port::B) => &mut self.kappa2_pump_b,
            (Band::Sf, Port::A) => &mut self.kappa2_sf_a,
            (Band::Sf, Port::B) => &mut self.kappa2_sf_b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for band in Band::ALL {
            for port in [Port::A, Port::B] {
                let k = self.kappa2(band, port);
                if !(0.0..1.0).contains(&k) {
                    return Err(Error::InvariantViolation(format!(
                        "kappa2_{band}_{port:?} = {k} must lie in [0, 1)"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Azimuthal mode numbers and wavelengths of the three interacting modes,
/// plus the poling order of the grating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModeTripleRepr", into = "ModeTripleRepr")]
pub struct ModeTriple {
    pub m_s: u32,
    pub m_p: u32,
    pub m_sf: u32,
    pub lambda_s_nm: f64,
    pub lambda_p_nm: f64,
    pub lambda_sf_nm: f64,
    pub poling_order: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeTripleRepr {
    m_s: u32,
    m_p: u32,
    m_sf: u32,
    lambda_s_nm: f64,
    lambda_p_nm: f64,
    /// Derived from energy conservation when omitted.
    #[serde(default)]
    lambda_sf_nm: Option<f64>,
    /// Defaults to the phase-matching order.
    #[serde(default)]
    poling_order: Option<i64>,
    #[serde(default)]
    energy_tolerance: Option<f64>,
}

impl TryFrom<ModeTripleRepr> for ModeTriple {
    type Error = Error;

    fn try_from(r: ModeTripleRepr) -> Result<Self> {
        let lambda_sf = r
            .lambda_sf_nm
            .unwrap_or_else(|| crate::consts::sum_frequency_nm(r.lambda_s_nm, r.lambda_p_nm));
        let mut t = ModeTriple::with_tolerance(
            [r.m_s, r.m_p, r.m_sf],
            [r.lambda_s_nm, r.lambda_p_nm, lambda_sf],
            r.energy_tolerance.unwrap_or(ENERGY_CONSERVATION_TOL),
        )?;
        if let Some(m) = r.poling_order {
            t.poling_order = m;
        }
        Ok(t)
    }
}

impl From<ModeTriple> for ModeTripleRepr {
    fn from(t: ModeTriple) -> Self {
        Self {
            m_s: t.m_s,
            m_p: t.m_p,
            m_sf: t.m_sf,
            lambda_s_nm: t.lambda_s_nm,
            lambda_p_nm: t.lambda_p_nm,
            lambda_sf_nm: Some(t.lambda_sf_nm),
            poling_order: Some(t.poling_order),
            energy_tolerance: None,
        }
    }
}

impl ModeTriple {
    /// `modes` and `lambdas_nm` are ordered signal, pump, sf. The poling
    /// order is set to the phase-matching value `m_sf − m_s − m_p`.
    pub fn new(modes: [u32; 3], lambdas_nm: [f64; 3]) -> Result<Self> {
        Self::with_tolerance(modes, lambdas_nm, ENERGY_CONSERVATION_TOL)
    }

    pub fn with_tolerance(modes: [u32; 3], lambdas_nm: [f64; 3], tol: f64) -> Result<Self> {
        if modes.contains(&0) {
            return Err(Error::InvalidInput("mode numbers must be positive".into()));
        }
        if lambdas_nm.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidInput("wavelengths must be positive".into()));
        }
        let [ls, lp, lsf] = lambdas_nm;
        let lhs = 1.0 / lsf;
        let rhs = 1.0 / ls + 1.0 / lp;
        let rel = (lhs - rhs).abs() / rhs;
        if rel > tol {
            return Err(Error::InvariantViolation(format!(
                "energy conservation off by {rel:.2e} relative (tolerance {tol:.0e}): \
                 1/{lsf} != 1/{ls} + 1/{lp}"
            )));
        }
        let [m_s, m_p, m_sf] = modes;
        Ok(Self {
            m_s,
            m_p,
            m_sf,
            lambda_s_nm: ls,
            lambda_p_nm: lp,
            lambda_sf_nm: lsf,
            poling_order: m_sf as i64 - m_s as i64 - m_p as i64,
        })
    }

    /// m = (550, 875, 1584) at 1533 nm and 1064 nm, sf from energy conservation.
    pub fn reference() -> Self {
        Self::new(
            [reference::M_SIGNAL, reference::M_PUMP, reference::M_SF],
            [
                reference::LAMBDA_SIGNAL_NM,
                reference::LAMBDA_PUMP_NM,
                reference_sf_nm(),
            ],
        )
        .expect("reference triple conserves energy")
    }

    pub fn modes(&self) -> [u32; 3] {
        [self.m_s, self.m_p, self.m_sf]
    }

    pub fn lambdas_nm(&self) -> [f64; 3] {
        [self.lambda_s_nm, self.lambda_p_nm, self.lambda_sf_nm]
    }

    pub fn is_phase_matched(&self) -> bool {
        qpm_order(self) == self.poling_order
    }
}

/// Intrinsic and loaded Q of one band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandQ {
    pub intrinsic: f64,
    pub loaded: f64,
}

impl BandQ {
    pub fn new(intrinsic: f64, loaded: f64) -> Result<Self> {
        let q = Self { intrinsic, loaded };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intrinsic > 0.0 && self.loaded > 0.0) {
            return Err(Error::InvariantViolation(format!(
                "Q factors must be positive (Q0 = {}, Ql = {})",
                self.intrinsic, self.loaded
            )));
        }
        if !(self.loaded < self.intrinsic) {
            return Err(Error::InvariantViolation(format!(
                "loaded Q {} must be below intrinsic Q {}",
                self.loaded, self.intrinsic
            )));
        }
        Ok(())
    }

    /// Fraction of the total decay that leaves through the designated port,
    /// `1 − Q_l/Q₀`.
    pub fn extraction_ratio(&self) -> f64 {
        1.0 - self.loaded / self.intrinsic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSet {
    pub signal: BandQ,
    pub pump: BandQ,
    pub sf: BandQ,
}

impl QSet {
    /// Measured Q factors of the fabricated ring.
    pub fn reference() -> Self {
        let q = |(i, l): (f64, f64)| BandQ {
            intrinsic: i,
            loaded: l,
        };
        Self {
            signal: q(reference::Q_SIGNAL),
            pump: q(reference::Q_PUMP),
            sf: q(reference::Q_SF),
        }
    }

    pub fn band(&self, band: Band) -> BandQ {
        match band {
            Band::Signal => self.signal,
            Band::Pump => self.pump,
            Band::Sf => self.sf,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for band in Band::ALL {
            self.band(band)
                .validate()
                .map_err(|e| Error::InvariantViolation(format!("{band}: {e}")))?;
        }
        Ok(())
    }
}

/// Grating order that phase-matches the triple: `m_sf − m_s − m_p`.
pub fn qpm_order(triple: &ModeTriple) -> i64 {
    triple.m_sf as i64 - triple.m_s as i64 - triple.m_p as i64
}

/// Poling period along the circumference, `2πR/M`, in µm.
pub fn poling_period(radius_um: f64, order: i64) -> Result<f64> {
    if order <= 0 {
        return Err(Error::InvalidOrder(order));
    }
    if !(radius_um > 0.0) {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    Ok(2.0 * PI * radius_um / order as f64)
}

/// Fractional round-trip power loss from propagation, `1 − 10^(−αL/10)`.
pub fn alpha_roundtrip(ring: &RingParams) -> f64 {
    1.0 - 10f64.powf(-ring.roundtrip_loss_db() / 10.0)
}

fn coupling_ratio(extract: f64, parasitic: f64, what: &str) -> Result<f64> {
    if parasitic > 0.0 {
        Ok(extract / parasitic)
    } else {
        Err(Error::SingularRatio(format!(
            "{what}: internal loss plus parasitic coupling is zero"
        )))
    }
}

/// η_max from raw loss fractions: `r_sf = κ²_sf,B/(αL + κ²_sf,A)`,
/// `r_s = κ²_s,A/(αL + κ²_s,B)`, `η = r_sf/(1+r_sf) · r_s/(1+r_s)`.
pub fn eta_max_from_losses(
    alpha_l: f64,
    kappa2_sf_a: f64,
    kappa2_sf_b: f64,
    kappa2_s_a: f64,
    kappa2_s_b: f64,
) -> Result<f64> {
    let r_sf = coupling_ratio(kappa2_sf_b, alpha_l + kappa2_sf_a, "sf")?;
    let r_s = coupling_ratio(kappa2_s_a, alpha_l + kappa2_s_b, "signal")?;
    Ok(r_sf / (1.0 + r_sf) * (r_s / (1.0 + r_s)))
}

/// Maximum conversion efficiency of the double-pulley ring from coupling
/// fractions and propagation loss.
pub fn eta_max_couplings(ring: &RingParams, c: &CouplerSpec) -> Result<f64> {
    c.validate()?;
    eta_max_from_losses(
        alpha_roundtrip(ring),
        c.kappa2_sf_a,
        c.kappa2_sf_b,
        c.kappa2_signal_a,
        c.kappa2_signal_b,
    )
}

/// Maximum conversion efficiency from measured Q factors,
/// `(1 − Q_s,l/Q_s,0)(1 − Q_sf,l/Q_sf,0)`.
pub fn eta_max_q(q: &QSet) -> Result<f64> {
    q.signal
        .validate()
        .map_err(|e| Error::InvariantViolation(format!("signal: {e}")))?;
    q.sf
        .validate()
        .map_err(|e| Error::InvariantViolation(format!("sf: {e}")))?;
    Ok(q.signal.extraction_ratio() * q.sf.extraction_ratio())
}

/// Small-loss bridge from round-trip loss fractions to Q.
///
/// `coupling_loss` is the coupling at the band's designated port,
/// `other_loss` everything else besides propagation (for the reference
/// ring: the opposite coupler). Intrinsic Q counts propagation plus
/// `other_loss`; loaded Q counts all three. The returned pair is not
/// validated since `coupling_loss = 0` legitimately gives `Q_l = Q₀`.
pub fn q_from_losses(
    n_group: f64,
    ring: &RingParams,
    lambda_nm: f64,
    coupling_loss: f64,
    other_loss: f64,
) -> Result<BandQ> {
    if !(n_group > 0.0 && lambda_nm > 0.0) {
        return Err(Error::InvalidInput(
            "group index and wavelength must be positive".into(),
        ));
    }
    if !(coupling_loss >= 0.0 && other_loss >= 0.0) {
        return Err(Error::InvalidInput("loss fractions must be non-negative".into()));
    }
    let propagation = alpha_roundtrip(ring);
    let total = propagation + coupling_loss + other_loss;
    if !(total > 0.0 && total < SMALL_LOSS_LIMIT) {
        return Err(Error::LossRegime { loss: total });
    }
    let intrinsic_loss = propagation + other_loss;
    if !(intrinsic_loss > 0.0) {
        return Err(Error::InvalidInput(
            "intrinsic loss is zero; intrinsic Q is unbounded".into(),
        ));
    }
    let phase = 2.0 * PI * n_group * ring.circumference_um() / (lambda_nm * 1e-3);
    Ok(BandQ {
        intrinsic: phase / intrinsic_loss,
        loaded: phase / total,
    })
}

/// Q factors for all three bands from a coupler spec using the port
/// convention of [`designated_port`]. Arrays are ordered signal, pump, sf.
pub fn qset_from_couplers(
    ring: &RingParams,
    couplers: &CouplerSpec,
    n_group: [f64; 3],
    lambdas_nm: [f64; 3],
) -> Result<QSet> {
    couplers.validate()?;
    let mut out = [BandQ {
        intrinsic: 0.0,
        loaded: 0.0,
    }; 3];
    for (i, band) in Band::ALL.into_iter().enumerate() {
        let port = designated_port(band);
        out[i] = q_from_losses(
            n_group[i],
            ring,
            lambdas_nm[i],
            couplers.kappa2(band, port),
            couplers.kappa2(band, port.other()),
        )?;
    }
    Ok(QSet {
        signal: out[0],
        pump: out[1],
        sf: out[2],
    })
}

/// Group index that makes [`q_from_losses`] reproduce `loaded_q` for the
/// given total round-trip loss.
pub fn infer_group_index(loaded_q: f64, ring: &RingParams, lambda_nm: f64, total_loss: f64) -> f64 {
    loaded_q * lambda_nm * 1e-3 * total_loss / (2.0 * PI * ring.circumference_um())
}

/// Bus-ring gap (µm) satisfying the pulley index-matching relation for a
/// given index ratio `n_ring/n_wg`.
pub fn pulley_gap_from_ratio(index_ratio: f64, ring: &RingParams, w_wg_um: f64) -> Result<f64> {
    let r = ring.radius_um();
    let w = ring.ring_width_um();
    let gap = index_ratio * (r + w / 4.0) - r - w / 2.0 - w_wg_um / 2.0;
    if gap > 0.0 {
        Ok(gap)
    } else {
        Err(Error::NoSolution(format!(
            "index ratio {index_ratio} gives gap {gap:.4} µm; geometry infeasible"
        )))
    }
}

/// Solves `n_ring·(R + w_ring/4) = n_wg·(R + gap + w_ring/2 + w_wg/2)` for
/// the gap, with both indices evaluated at `lambda_nm`.
pub fn pulley_gap(
    model_ring: &IndexModel,
    model_wg: &IndexModel,
    ring: &RingParams,
    w_wg_um: f64,
    lambda_nm: f64,
) -> Result<f64> {
    let n_ring = model_ring.n_eff(lambda_nm)?;
    let n_wg = model_wg.n_eff(lambda_nm)?;
    if !(n_wg > 0.0) {
        return Err(Error::InvalidInput("bus waveguide index must be positive".into()));
    }
    pulley_gap_from_ratio(n_ring / n_wg, ring, w_wg_um)
}

/// Approximate bus width (µm) that satisfies the matching relation for a
/// fixed `target_gap_um`. The bus index depends on its width, so
/// `wg_models` supplies models at discrete widths `(w_wg µm, model)`; the
/// index is interpolated linearly between them and the width found by
/// bisection.
pub fn pulley_width_for_gap(
    model_ring: &IndexModel,
    wg_models: &[(f64, IndexModel)],
    ring: &RingParams,
    target_gap_um: f64,
    lambda_nm: f64,
) -> Result<f64> {
    if wg_models.len() < 2 {
        return Err(Error::InvalidInput(
            "width search needs bus models at two or more widths".into(),
        ));
    }
    let mut table: Vec<(f64, f64)> = wg_models
        .iter()
        .map(|(w, m)| Ok((*w, m.n_eff(lambda_nm)?)))
        .collect::<Result<_>>()?;
    table.sort_by(|a, b| a.0.total_cmp(&b.0));
    if table.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Degenerate("duplicate bus widths".into()));
    }
    let n_ring = model_ring.n_eff(lambda_nm)?;
    let r = ring.radius_um();
    let wr = ring.ring_width_um();

    let n_wg_at = |w: f64| -> f64 {
        let i = table
            .windows(2)
            .position(|p| w <= p[1].0)
            .unwrap_or(table.len() - 2);
        let (w0, n0) = table[i];
        let (w1, n1) = table[i + 1];
        n0 + (n1 - n0) * (w - w0) / (w1 - w0)
    };
    // Gap residual as a function of bus width.
    let f = |w: f64| n_ring * (r + wr / 4.0) / n_wg_at(w) - r - wr / 2.0 - w / 2.0 - target_gap_um;

    let (mut lo, mut hi) = (table[0].0, table[table.len() - 1].0);
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSolution(format!(
            "no bus width in [{lo}, {hi}] µm matches gap {target_gap_um} µm"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-band resonance residual `2πR·n_eff(λ_b)/λ_b − m_b`, ordered signal,
/// pump, sf. Models must be given in the same order.
pub fn triple_resonance_residual(
    models: &[IndexModel; 3],
    ring: &RingParams,
    triple: &ModeTriple,
) -> Result<[f64; 3]> {
    let lambdas = triple.lambdas_nm();
    let modes = triple.modes();
    let path_nm = 2.0 * PI * ring.radius_um() * 1e3;
    let mut out = [0.0; 3];
    for i in 0..3 {
        let n = models[i].n_eff(lambdas[i])?;
        out[i] = path_nm * n / lambdas[i] - modes[i] as f64;
    }
    Ok(out)
}

pub fn is_triple_resonant(residuals: &[f64; 3], tol: f64) -> bool {
    residuals.iter().all(|r| r.abs() < tol)
}
