//! Rocket performance models: ideal-rocket specific impulse for liquid
//! propellants, quasi-steady internal ballistics for a cylindrical solid
//! grain, and hover/delta-v budgets.
//!
//! All nozzle relations assume a calorically perfect gas expanding
//! isentropically from chamber conditions.

mod solid;

pub use solid::{simulate_solid_burn, BurnProfile, BurnSample, SolidMotorSpec};

use serde::{Deserialize, Serialize};

use crate::constants::{G0, RU};
use crate::error::{Error, Result};

/// Thermochemical description of a propellant's combustion products.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropellantSpec {
    pub name: String,
    /// Mean molecular weight of the exhaust, kg/kmol.
    pub molecular_weight: f64,
    /// Adiabatic flame temperature in the chamber, K.
    pub combustion_temperature: f64,
    /// Specific-heat ratio of the exhaust.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    1.2
}

impl PropellantSpec {
    pub fn new(name: impl Into<String>, molecular_weight: f64, combustion_temperature: f64) -> Self {
        Self {
            name: name.into(),
            molecular_weight,
            combustion_temperature,
            gamma: default_gamma(),
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.molecular_weight > 0.0) {
            return Err(Error::validation(format!(
                "{}: molecular_weight must be positive, got {}",
                self.name, self.molecular_weight
            )));
        }
        if !(self.combustion_temperature > 0.0) {
            return Err(Error::validation(format!(
                "{}: combustion_temperature must be positive, got {}",
                self.name, self.combustion_temperature
            )));
        }
        validate_gamma(self.gamma)?;
        Ok(())
    }

    /// Specific gas constant of the exhaust, J/(kg*K).
    pub fn gas_constant(&self) -> f64 {
        RU / self.molecular_weight
    }

    /// Characteristic velocity c* = sqrt(R*Tc) / Gamma(gamma), m/s.
    pub fn characteristic_velocity(&self) -> f64 {
        (self.gas_constant() * self.combustion_temperature).sqrt() / vandenkerckhove(self.gamma)
    }
}

fn validate_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 1.0 && gamma < 2.0) {
        return Err(Error::validation(format!(
            "gamma must lie in (1, 2), got {gamma}"
        )));
    }
    Ok(())
}

/// Vandenkerckhove function Gamma(gamma) = sqrt(g) * (2/(g+1))^((g+1)/(2(g-1))).
///
/// Relates chamber conditions to choked throat flow: mdot = Gamma * pc * At / sqrt(R*Tc).
pub fn vandenkerckhove(gamma: f64) -> f64 {
    gamma.sqrt() * (2.0 / (gamma + 1.0)).powf((gamma + 1.0) / (2.0 * (gamma - 1.0)))
}

/// Critical (sonic) pressure ratio p_throat/p_chamber for a given gamma.
pub fn critical_pressure_ratio(gamma: f64) -> f64 {
    (2.0 / (gamma + 1.0)).powf(gamma / (gamma - 1.0))
}

/// Ideal-rocket specific impulse, seconds.
///
/// Isp = (1/g0) * sqrt( 2g/(g-1) * R*Tc * (1 - (pe/pc)^((g-1)/g)) )
/// for a fully expanded (adapted) nozzle.
pub fn ideal_isp(prop: &PropellantSpec, chamber_pressure: f64, exit_pressure: f64) -> Result<f64> {
    prop.validate()?;
    if !(exit_pressure > 0.0 && exit_pressure < chamber_pressure) {
        return Err(Error::validation(format!(
            "pressure ordering violated: need 0 < p_exit < p_chamber, got p_exit = {exit_pressure}, p_chamber = {chamber_pressure}"
        )));
    }
    let g = prop.gamma;
    let expansion = 1.0 - (exit_pressure / chamber_pressure).powf((g - 1.0) / g);
    let ve2 = 2.0 * g / (g - 1.0) * prop.gas_constant() * prop.combustion_temperature * expansion;
    Ok(ve2.sqrt() / G0)
}

/// Nozzle thrust coefficient, so that F = C_F * p_c * A_t.
///
/// Momentum term plus the pressure-difference term
/// (pe/pc - pa/pc) * Ae/At. The exit must be supersonic: pe/pc may not
/// exceed the critical pressure ratio.
pub fn thrust_coefficient(
    gamma: f64,
    pressure_ratio: f64,
    ambient_ratio: f64,
    expansion_ratio: f64,
) -> Result<f64> {
    validate_gamma(gamma)?;
    if !(pressure_ratio > 0.0 && pressure_ratio < 1.0) {
        return Err(Error::validation(format!(
            "exit pressure ratio must lie in (0, 1), got {pressure_ratio}"
        )));
    }
    if !(0.0..1.0).contains(&ambient_ratio) {
        return Err(Error::validation(format!(
            "ambient pressure ratio must lie in [0, 1), got {ambient_ratio}"
        )));
    }
    if !(expansion_ratio >= 1.0) {
        return Err(Error::validation(format!(
            "expansion ratio must be >= 1, got {expansion_ratio}"
        )));
    }
    // Slack of a few ulps so the exact sonic-orifice boundary passes.
    if pressure_ratio > critical_pressure_ratio(gamma) * (1.0 + 1e-12) {
        return Err(Error::validation(format!(
            "subsonic exit: pressure ratio {pressure_ratio} exceeds the critical ratio {} for gamma = {gamma}",
            critical_pressure_ratio(gamma)
        )));
    }
    let momentum = vandenkerckhove(gamma)
        * (2.0 * gamma / (gamma - 1.0) * (1.0 - pressure_ratio.powf((gamma - 1.0) / gamma)))
            .sqrt();
    Ok(momentum + (pressure_ratio - ambient_ratio) * expansion_ratio)
}

/// Supersonic exit Mach number for an area ratio Ae/At >= 1, by bisection
/// of the isentropic area-Mach relation.
pub fn exit_mach(gamma: f64, expansion_ratio: f64) -> Result<f64> {
    validate_gamma(gamma)?;
    if !(expansion_ratio >= 1.0) {
        return Err(Error::validation(format!(
            "expansion ratio must be >= 1, got {expansion_ratio}"
        )));
    }
    if expansion_ratio == 1.0 {
        return Ok(1.0); // sonic orifice
    }
    let area_ratio = |m: f64| {
        let t = 2.0 / (gamma + 1.0) * (1.0 + 0.5 * (gamma - 1.0) * m * m);
        t.powf((gamma + 1.0) / (2.0 * (gamma - 1.0))) / m
    };
    let (mut lo, mut hi) = (1.0, 100.0);
    if area_ratio(hi) < expansion_ratio {
        return Err(Error::validation(format!(
            "expansion ratio {expansion_ratio} out of solvable range"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if area_ratio(mid) < expansion_ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Exit-to-chamber pressure ratio fixed by the nozzle geometry (supersonic branch).
pub fn exit_pressure_ratio(gamma: f64, expansion_ratio: f64) -> Result<f64> {
    let m = exit_mach(gamma, expansion_ratio)?;
    Ok((1.0 + 0.5 * (gamma - 1.0) * m * m).powf(-gamma / (gamma - 1.0)))
}

/// Flight time sustained by hovering (thrust continuously equal to weight):
/// t = (Isp * g0 / g_local) * ln(m0 / (m0 - mp)).
pub fn hover_flight_time(
    isp: f64,
    initial_mass: f64,
    propellant_mass: f64,
    local_gravity: f64,
) -> Result<f64> {
    if !(isp > 0.0) {
        return Err(Error::validation(format!("isp must be positive, got {isp}")));
    }
    if !(local_gravity > 0.0) {
        return Err(Error::validation(format!(
            "local_gravity must be positive, got {local_gravity}"
        )));
    }
    if !(propellant_mass >= 0.0 && propellant_mass < initial_mass) {
        return Err(Error::validation(format!(
            "need 0 <= propellant_mass < initial_mass, got {propellant_mass} of {initial_mass}"
        )));
    }
    Ok(isp * G0 / local_gravity * (initial_mass / (initial_mass - propellant_mass)).ln())
}

/// Tsiolkovsky delta-v budget: dv = Isp * g0 * ln(m0/mf).
pub fn delta_v(isp: f64, initial_mass: f64, final_mass: f64) -> Result<f64> {
    if !(isp > 0.0) {
        return Err(Error::validation(format!("isp must be positive, got {isp}")));
    }
    if !(final_mass > 0.0 && final_mass <= initial_mass) {
        return Err(Error::validation(format!(
            "mass ordering violated: need 0 < final_mass <= initial_mass, got {final_mass} of {initial_mass}"
        )));
    }
    Ok(isp * G0 * (initial_mass / final_mass).ln())
}
