//! Physical constants and the unit conversions used throughout the crate.
//!
//! Every conversion between meV, GHz, nm and SI goes through this table.
//! The derived factors are computed from the exact SI defining constants.

use std::f64::consts::PI;

/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant, J·s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Ordinary frequency per unit energy: 1 meV ↔ 241.799 GHz.
pub const GHZ_PER_MEV: f64 = 1e-3 * ELEMENTARY_CHARGE / PLANCK * 1e-9;

/// h·c in eV·nm (≈ 1239.84198).
pub const HC_EV_NM: f64 = PLANCK * SPEED_OF_LIGHT / ELEMENTARY_CHARGE * 1e9;

pub const UM: f64 = 1e-6;
/// 1/cm³ → 1/m³.
pub const PER_CM3: f64 = 1e6;

/// Ordinary GHz → angular GHz (rad/ns).
pub fn angular(ghz: f64) -> f64 {
    2.0 * PI * ghz
}

/// Angular GHz → ordinary GHz.
pub fn ordinary(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Energy in meV → angular frequency in rad/ns.
pub fn mev_to_angular_ghz(mev: f64) -> f64 {
    angular(mev * GHZ_PER_MEV)
}

/// Angular frequency in rad/ns → energy in meV.
pub fn angular_ghz_to_mev(omega: f64) -> f64 {
    ordinary(omega) / GHZ_PER_MEV
}

/// Photon energy (meV) at a vacuum wavelength in nm.
pub fn wavelength_nm_to_mev(lambda_nm: f64) -> f64 {
    HC_EV_NM / lambda_nm * 1e3
}

/// Optical carrier frequency (ordinary GHz) at a vacuum wavelength in nm.
pub fn wavelength_nm_to_ghz(lambda_nm: f64) -> f64 {
    SPEED_OF_LIGHT / (lambda_nm * 1e-9) * 1e-9
}

/// Linearized frequency offset (ordinary GHz) of `lambda_nm` about
/// `lambda0_nm`: Δν = −c·Δλ/λ₀².
pub fn wavelength_offset_to_ghz(lambda_nm: f64, lambda0_nm: f64) -> f64 {
    let dl = (lambda_nm - lambda0_nm) * 1e-9;
    let l0 = lambda0_nm * 1e-9;
    -SPEED_OF_LIGHT * dl / (l0 * l0) * 1e-9
}
