//! Published reference values the `tables` subcommand (and the test
//! suite) compares against.

/// Hover flight times are reproduced with one fitted mass ratio across
/// every propellant row: ln(m0/mf) ~ 0.454 for a 3 kg robot, i.e. a
/// 1.095 kg propellant load.
pub const REFERENCE_INITIAL_MASS: f64 = 3.0;
pub const REFERENCE_PROPELLANT_MASS: f64 = 1.095;

/// Chamber and exit pressure assumed for the specific-impulse tables.
pub const REFERENCE_CHAMBER_PRESSURE: f64 = 2.0e6;
pub const REFERENCE_EXIT_PRESSURE: f64 = 600.0;

/// Survey sizing tables: resolutions (mm^2/pixel), published camera
/// ranges (m), cave lengths (m), robot counts and mapping times (min).
pub const TABLE4_RESOLUTIONS: [f64; 6] = [5.0, 10.0, 20.0, 30.0, 50.0, 80.0];
pub const TABLE4_RANGES_M: [f64; 6] = [1.96, 2.77, 3.92, 4.80, 6.20, 7.84];
pub const TABLE4_CAVE_LENGTHS_M: [f64; 4] = [250.0, 500.0, 1000.0, 2000.0];
pub const TABLE4_ROBOTS: [u32; 4] = [11, 19, 36, 69];

/// Mapping time, minutes, indexed [resolution][cave length].
pub const TABLE4_TIMES_MIN: [[f64; 4]; 6] = [
    [83.0, 156.0, 303.0, 595.0],
    [62.0, 116.0, 225.0, 443.0],
    [47.0, 88.0, 171.0, 335.0],
    [41.0, 76.0, 147.0, 288.0],
    [34.0, 63.0, 123.0, 241.0],
    [29.0, 54.0, 105.0, 205.0],
];
