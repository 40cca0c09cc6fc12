//! Quasi-steady internal ballistics of an internally burning cylindrical
//! grain: the bore regresses outward at a * p^n, chamber pressure follows
//! the quasi-steady balance with the choked throat, and thrust comes from
//! the fixed-geometry nozzle. No chamber-filling transient is modeled.

use serde::{Deserialize, Serialize};

use crate::constants::G0;
use crate::error::{Error, Result};
use crate::propulsion::{exit_pressure_ratio, thrust_coefficient};

use std::f64::consts::PI;

/// Geometry and ballistic parameters of a cylindrical solid motor.
///
/// The grain burns radially on its inner surface only (ends inhibited),
/// so the burning area is 2*pi*r*L and grows with the bore radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolidMotorSpec {
    /// Initial bore radius, m.
    pub grain_inner_radius: f64,
    /// Outer grain radius, m. Burnout when the bore reaches it.
    pub grain_outer_radius: f64,
    /// Grain length, m.
    pub grain_length: f64,
    /// Nozzle throat radius, m.
    pub throat_radius: f64,
    /// Nozzle exit radius, m.
    pub nozzle_exit_radius: f64,
    /// Propellant density, kg/m^3.
    pub propellant_density: f64,
    /// Burn-rate coefficient a in r = a * p^n, (m/s) * Pa^-n.
    pub burn_rate_coefficient: f64,
    /// Burn-rate pressure exponent n.
    pub burn_rate_exponent: f64,
    /// Characteristic velocity c* of the propellant, m/s.
    pub characteristic_velocity: f64,
    /// Specific-heat ratio of the combustion products.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Ambient pressure at the nozzle exit plane, Pa.
    pub ambient_pressure: f64,
}

fn default_gamma() -> f64 {
    1.2
}

impl SolidMotorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.grain_inner_radius > 0.0 && self.grain_inner_radius <= self.grain_outer_radius) {
            return Err(Error::validation(format!(
                "grain_inner_radius: need 0 < inner <= outer, got inner = {} m, outer = {} m",
                self.grain_inner_radius, self.grain_outer_radius
            )));
        }
        if !(self.grain_length > 0.0) {
            return Err(Error::validation("grain_length must be positive"));
        }
        if !(self.throat_radius > 0.0 && self.throat_radius < self.nozzle_exit_radius) {
            return Err(Error::validation(format!(
                "throat_radius: need 0 < throat < exit, got throat = {} m, exit = {} m",
                self.throat_radius, self.nozzle_exit_radius
            )));
        }
        if !(self.burn_rate_exponent > 0.0 && self.burn_rate_exponent < 1.0) {
            return Err(Error::validation(format!(
                "burn_rate_exponent must lie in (0, 1), got {}",
                self.burn_rate_exponent
            )));
        }
        if !(self.burn_rate_coefficient > 0.0) {
            return Err(Error::validation("burn_rate_coefficient must be positive"));
        }
        if !(self.propellant_density > 0.0) {
            return Err(Error::validation("propellant_density must be positive"));
        }
        if !(self.characteristic_velocity > 0.0) {
            return Err(Error::validation("characteristic_velocity must be positive"));
        }
        if !(self.gamma > 1.0 && self.gamma < 2.0) {
            return Err(Error::validation(format!(
                "gamma must lie in (1, 2), got {}",
                self.gamma
            )));
        }
        if !(self.ambient_pressure >= 0.0) {
            return Err(Error::validation("ambient_pressure must be non-negative"));
        }
        Ok(())
    }

    pub fn throat_area(&self) -> f64 {
        PI * self.throat_radius * self.throat_radius
    }

    pub fn exit_area(&self) -> f64 {
        PI * self.nozzle_exit_radius * self.nozzle_exit_radius
    }

    pub fn expansion_ratio(&self) -> f64 {
        self.exit_area() / self.throat_area()
    }

    /// Burnable web thickness, m.
    pub fn web_thickness(&self) -> f64 {
        self.grain_outer_radius - self.grain_inner_radius
    }

    /// Total propellant mass from the grain geometry, kg.
    pub fn propellant_mass(&self) -> f64 {
        self.propellant_density
            * PI
            * (self.grain_outer_radius.powi(2) - self.grain_inner_radius.powi(2))
            * self.grain_length
    }

    /// Quasi-steady chamber pressure for a bore radius r:
    /// pc = (rho * a * c* * Ab/At)^(1/(1-n)).
    pub fn quasi_steady_pressure(&self, bore_radius: f64) -> f64 {
        let burn_area = 2.0 * PI * bore_radius * self.grain_length;
        let k = self.propellant_density
            * self.burn_rate_coefficient
            * self.characteristic_velocity
            * burn_area
            / self.throat_area();
        k.powf(1.0 / (1.0 - self.burn_rate_exponent))
    }

    /// An 8 mm bore / 18 mm OD / 15 mm long pellet with a 2 mm throat,
    /// expanding to 600 Pa ambient. Density and c* are typical for an
    /// ammonium-perchlorate composite; the burn-rate coefficient is
    /// calibrated so the initial chamber pressure is 2 MPa.
    pub fn default_pellet() -> Self {
        let density = 1750.0;
        let cstar = 1470.0;
        let n = 0.3;
        // Initial Ab/At = (2 * 0.008 * 0.015) / 0.002^2 = 60.
        let ab_over_at: f64 = 60.0;
        let a = (2.0e6_f64).powf(1.0 - n) / (density * cstar * ab_over_at);
        Self {
            grain_inner_radius: 0.008,
            grain_outer_radius: 0.018,
            grain_length: 0.015,
            throat_radius: 0.002,
            nozzle_exit_radius: 0.008,
            propellant_density: density,
            burn_rate_coefficient: a,
            burn_rate_exponent: n,
            characteristic_velocity: cstar,
            gamma: 1.2,
            ambient_pressure: 600.0,
        }
    }
}

/// One sample of a burn simulation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BurnSample {
    pub t: f64,
    pub chamber_pressure: f64,
    pub thrust: f64,
    pub isp: f64,
    pub web_burned: f64,
    pub propellant_mass_remaining: f64,
}

/// Time history of a solid burn, from ignition to burnout.
#[derive(Debug, Clone, Serialize)]
pub struct BurnProfile {
    pub samples: Vec<BurnSample>,
    pub burnout_time: f64,
    /// Propellant mass from the grain geometry, kg.
    pub initial_propellant_mass: f64,
    /// Time-integrated nozzle mass flow, kg.
    pub propellant_consumed: f64,
    pub total_impulse: f64,
}

impl BurnProfile {
    pub fn peak_pressure(&self) -> f64 {
        self.samples.iter().map(|s| s.chamber_pressure).fold(0.0, f64::max)
    }

    pub fn peak_thrust(&self) -> f64 {
        self.samples.iter().map(|s| s.thrust).fold(0.0, f64::max)
    }
}

/// Simulate a solid burn at a fixed step dt until the bore reaches the
/// outer grain radius. The final (partial) step lands exactly on burnout
/// and a zero-thrust burnout sample is appended.
///
/// Per-step regression must stay below 1% of the web thickness, otherwise
/// a step-size error is returned.
pub fn simulate_solid_burn(motor: &SolidMotorSpec, dt: f64) -> Result<BurnProfile> {
    motor.validate()?;
    if !(dt > 0.0) {
        return Err(Error::validation(format!("dt must be positive, got {dt}")));
    }

    let web = motor.web_thickness();
    if web == 0.0 {
        // Degenerate grain: no propellant, nothing burns.
        return Ok(BurnProfile {
            samples: vec![BurnSample {
                t: 0.0,
                chamber_pressure: motor.ambient_pressure,
                thrust: 0.0,
                isp: 0.0,
                web_burned: 0.0,
                propellant_mass_remaining: 0.0,
            }],
            burnout_time: 0.0,
            initial_propellant_mass: 0.0,
            propellant_consumed: 0.0,
            total_impulse: 0.0,
        });
    }

    let pressure_ratio = exit_pressure_ratio(motor.gamma, motor.expansion_ratio())?;
    let throat_area = motor.throat_area();
    let cstar = motor.characteristic_velocity;
    let initial_mass = motor.propellant_mass();

    if motor.quasi_steady_pressure(motor.grain_inner_radius) <= motor.ambient_pressure {
        return Err(Error::validation(
            "quasi-steady chamber pressure does not exceed ambient; motor will not sustain flow",
        ));
    }

    let mut samples = Vec::new();
    let mut t = 0.0;
    let mut bore = motor.grain_inner_radius;
    let mut mass = initial_mass;
    let mut impulse = 0.0;

    loop {
        let pc = motor.quasi_steady_pressure(bore);
        let cf = thrust_coefficient(
            motor.gamma,
            pressure_ratio,
            motor.ambient_pressure / pc,
            motor.expansion_ratio(),
        )?;
        let thrust = cf * pc * throat_area;
        let mdot = pc * throat_area / cstar;
        let isp = cf * cstar / G0;

        samples.push(BurnSample {
            t,
            chamber_pressure: pc,
            thrust,
            isp,
            web_burned: bore - motor.grain_inner_radius,
            propellant_mass_remaining: mass,
        });

        let regression_rate =
            motor.burn_rate_coefficient * pc.powf(motor.burn_rate_exponent);
        let dr = regression_rate * dt;

        if bore + dr >= motor.grain_outer_radius {
            // Partial final step up to burnout.
            let dt_last = (motor.grain_outer_radius - bore) / regression_rate;
            mass = (mass - mdot * dt_last).max(0.0);
            impulse += thrust * dt_last;
            t += dt_last;
            break;
        }
        if dr > 0.01 * web {
            return Err(Error::StepSize(format!(
                "regression per step ({dr:.3e} m at t = {t:.4} s) exceeds 1% of the web ({:.3e} m); reduce dt",
                web
            )));
        }

        mass = (mass - mdot * dt).max(0.0);
        impulse += thrust * dt;
        bore += dr;
        t += dt;
    }

    samples.push(BurnSample {
        t,
        chamber_pressure: motor.ambient_pressure,
        thrust: 0.0,
        isp: 0.0,
        web_burned: web,
        propellant_mass_remaining: mass,
    });

    Ok(BurnProfile {
        samples,
        burnout_time: t,
        initial_propellant_mass: initial_mass,
        propellant_consumed: initial_mass - mass,
        total_impulse: impulse,
    })
}
