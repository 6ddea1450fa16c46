//! Physical constants (SI) and the reference device parameters used by the
//! shipped defaults.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Angular frequency (rad/s) of light with vacuum wavelength `lambda_nm`.
pub fn omega_from_nm(lambda_nm: f64) -> f64 {
    2.0 * PI * C / (lambda_nm * 1e-9)
}

/// Vacuum wavelength (nm) of light with angular frequency `omega` (rad/s).
pub fn nm_from_omega(omega: f64) -> f64 {
    2.0 * PI * C / omega * 1e9
}

/// Wavelength that conserves energy for the sum of two input wavelengths.
pub fn sum_frequency_nm(lambda_a_nm: f64, lambda_b_nm: f64) -> f64 {
    1.0 / (1.0 / lambda_a_nm + 1.0 / lambda_b_nm)
}

/// Reference device: 74 µm radius, 1.73 µm wide ring on 600 nm film.
pub mod reference {
    pub const RADIUS_UM: f64 = 74.0;
    pub const RING_WIDTH_UM: f64 = 1.73;
    pub const LOSS_DB_PER_CM: f64 = 0.2;
    pub const FILM_THICKNESS_NM: f64 = 600.0;
    pub const ETCH_DEPTH_NM: f64 = 420.0;

    pub const M_SIGNAL: u32 = 550;
    pub const M_PUMP: u32 = 875;
    pub const M_SF: u32 = 1584;
    pub const LAMBDA_SIGNAL_NM: f64 = 1533.0;
    pub const LAMBDA_PUMP_NM: f64 = 1064.0;

    pub const KAPPA2_SIGNAL_A: f64 = 0.03;
    pub const KAPPA2_SIGNAL_B: f64 = 0.004;
    pub const KAPPA2_PUMP_A: f64 = 0.03;
    pub const KAPPA2_PUMP_B: f64 = 0.003;
    pub const KAPPA2_SF_A: f64 = 0.005;
    pub const KAPPA2_SF_B: f64 = 0.05;

    /// (intrinsic, loaded)
    pub const Q_SIGNAL: (f64, f64) = (1.01e6, 1.46e5);
    pub const Q_PUMP: (f64, f64) = (3.29e6, 5.26e5);
    pub const Q_SF: (f64, f64) = (8.93e5, 1.64e5);

    pub const MEASURED_ETA_MAX: f64 = 0.57;
    pub const MEASURED_P_OPT_W: f64 = 360e-6;
    pub const SIGNAL_POWER_W: f64 = 20e-9;
    pub const QUOTED_NORMALIZED_EFFICIENCY_PCT_PER_W: f64 = 386_000.0;
}
