//! Physical constants (SI).

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;

/// Vacuum permeability, H/m (CODATA 2018).
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);

/// Free-space wave impedance, ohms.
pub const ETA0: f64 = MU0 * C0;

/// Free-space wavenumber for a frequency in Hz.
pub fn wavenumber(freq_hz: f64) -> f64 {
    2.0 * PI * freq_hz / C0
}
