//! Physical constants shared across the crate. SI units throughout.

/// Standard gravity, m/s^2. Converts between Isp in seconds and exhaust velocity.
pub const G0: f64 = 9.80665;

/// Universal gas constant, J/(kmol*K), matching molecular weight in kg/kmol.
pub const RU: f64 = 8314.0;

/// Mars surface gravity, m/s^2.
pub const MARS_GRAVITY: f64 = 3.71;

/// Ambient pressure used for the default Mars scenarios, Pa.
pub const MARS_AMBIENT_PRESSURE: f64 = 600.0;
