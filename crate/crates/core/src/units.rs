//! Physical constants and unit conversions.
//!
//! Internally everything is in natural relativistic units:
//! hbar = c = m_e = 1, energies in m_e c^2, lengths in reduced Compton
//! wavelengths hbar/(m_e c). Photon wavenumber k equals photon energy omega.
//! Conversions to laboratory units happen only at the I/O boundary.

/// Fine-structure constant.
pub const ALPHA: f64 = 1.0 / 137.035999;

/// m_e c^2 in keV.
pub const MEC2_KEV: f64 = 510.99895;

/// m_e c^2 / hbar in 1/s: converts rates from natural units to s^-1.
pub const RATE_NATURAL_TO_PER_SEC: f64 = 7.763440724e20;

/// Inverse atomic unit of time in 1/s (used by the nonrelativistic oracle).
pub const RATE_AU_TO_PER_SEC: f64 = 4.134137334e16;
