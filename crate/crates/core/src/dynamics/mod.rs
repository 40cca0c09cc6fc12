//! 6-DOF rigid-body simulation of a ballistic hop under low gravity:
//! four +z thrusters, a 3-axis reaction-wheel set under PD attitude
//! control, fixed-step RK4 integration, and thrust-then-coast hop
//! trajectories with touchdown detection.

mod control;
mod sim;

pub use control::{pd_attitude_torque, thruster_allocation};
pub use sim::{
    mechanical_energy, simulate_attitude_regulation, simulate_hop, state_derivative, step_rk4,
    total_angular_momentum, ControlInputs, StateDerivative,
};

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

/// Full kinematic/dynamic state of one robot. Inertial frame is z-up;
/// the attitude quaternion maps body to inertial coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    /// Position, m, inertial frame.
    pub position: Vector3<f64>,
    /// Velocity, m/s, inertial frame.
    pub velocity: Vector3<f64>,
    /// Attitude, body -> inertial.
    pub attitude: UnitQuaternion<f64>,
    /// Body angular rates, rad/s, body frame.
    pub body_rates: Vector3<f64>,
    /// Reaction wheel speeds about the body axes, rad/s.
    pub wheel_speeds: Vector3<f64>,
    /// Total mass, kg.
    pub mass: f64,
}

impl RobotState {
    /// At rest on the ground with identity attitude.
    pub fn at_rest(mass: f64) -> Self {
        Self {
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
            attitude: UnitQuaternion::identity(),
            body_rates: Vector3::zeros(),
            wheel_speeds: Vector3::zeros(),
            mass,
        }
    }

    /// Roll, pitch, yaw (Z-Y-X convention) of the current attitude, rad.
    pub fn euler_angles(&self) -> Vector3<f64> {
        let (roll, pitch, yaw) = self.attitude.euler_angles();
        Vector3::new(roll, pitch, yaw)
    }

    pub fn validate(&self, params: &VehicleParams) -> Result<()> {
        if !(self.mass > params.dry_mass) {
            return Err(Error::validation(format!(
                "mass {} must exceed the dry mass {}",
                self.mass, params.dry_mass
            )));
        }
        let norm = self.attitude.as_ref().norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "attitude quaternion norm {norm} drifted from 1"
            )));
        }
        Ok(())
    }
}

/// Physical and control parameters of the vehicle.
#[derive(Debug, Clone)]
pub struct VehicleParams {
    /// Body inertia tensor (wheels locked), kg m^2, body frame.
    pub body_inertia: Matrix3<f64>,
    /// Axial inertia of each reaction wheel, kg m^2.
    pub wheel_axial_inertia: f64,
    /// Torque limit per wheel, N m.
    pub wheel_max_torque: f64,
    /// Speed limit per wheel, rad/s.
    pub wheel_max_speed: f64,
    /// Thruster positions in the body frame, m. All thrust along body +z.
    pub thruster_positions: [Vector3<f64>; 4],
    /// Thrust limit per thruster, N.
    pub thruster_max_thrust: f64,
    /// Local gravity, m/s^2.
    pub gravity: f64,
    /// Proportional attitude gains, per axis.
    pub kp: Vector3<f64>,
    /// Derivative attitude gains, per axis.
    pub kd: Vector3<f64>,
    /// Specific impulse of the thrusters, s (sets the mass flow).
    pub isp: f64,
    /// Mass with tanks empty, kg.
    pub dry_mass: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        // 3 kg, 0.15 m sphere: J = (2/5) m r^2 = 0.027 kg m^2 per axis.
        let r = 0.1;
        Self {
            body_inertia: Matrix3::from_diagonal_element(0.027),
            wheel_axial_inertia: 2.0e-5,
            wheel_max_torque: 5.0e-3,
            wheel_max_speed: 1000.0,
            thruster_positions: [
                Vector3::new(r, 0.0, -0.1),
                Vector3::new(-r, 0.0, -0.1),
                Vector3::new(0.0, r, -0.1),
                Vector3::new(0.0, -r, -0.1),
            ],
            thruster_max_thrust: 5.0,
            gravity: 3.71,
            kp: Vector3::new(0.5, 0.5, 0.5),
            kd: Vector3::new(0.3, 0.3, 0.3),
            isp: 333.0,
            dry_mass: 1.905,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        if self.body_inertia.cholesky().is_none() {
            return Err(Error::validation("body_inertia must be positive definite"));
        }
        for (name, v) in [
            ("wheel_axial_inertia", self.wheel_axial_inertia),
            ("wheel_max_torque", self.wheel_max_torque),
            ("wheel_max_speed", self.wheel_max_speed),
            ("thruster_max_thrust", self.thruster_max_thrust),
            ("gravity", self.gravity),
            ("isp", self.isp),
        ] {
            if !(v > 0.0) {
                return Err(Error::validation(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.kp.min() > 0.0 && self.kd.min() > 0.0) {
            return Err(Error::validation("PD gains must be positive on every axis"));
        }
        if !(self.dry_mass >= 0.0) {
            return Err(Error::validation("dry_mass must be non-negative"));
        }
        Ok(())
    }
}

/// Throttle command over the burn, values in [0, 1].
#[derive(Debug, Clone)]
pub enum ThrottleProfile {
    Constant(f64),
    /// Piecewise-linear (t, level) table; clamped outside its span.
    Piecewise(Vec<(f64, f64)>),
}

impl ThrottleProfile {
    pub fn level_at(&self, t: f64) -> f64 {
        match self {
            ThrottleProfile::Constant(level) => *level,
            ThrottleProfile::Piecewise(points) => {
                if points.is_empty() {
                    return 0.0;
                }
                if t <= points[0].0 {
                    return points[0].1;
                }
                for w in points.windows(2) {
                    let ((t0, u0), (t1, u1)) = (w[0], w[1]);
                    if t <= t1 {
                        if t1 == t0 {
                            return u1;
                        }
                        return u0 + (u1 - u0) * (t - t0) / (t1 - t0);
                    }
                }
                points.last().unwrap().1
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |u: f64| {
            if !(0.0..=1.0).contains(&u) {
                Err(Error::validation(format!("throttle {u} outside [0, 1]")))
            } else {
                Ok(())
            }
        };
        match self {
            ThrottleProfile::Constant(u) => check(*u),
            ThrottleProfile::Piecewise(points) => {
                for w in points.windows(2) {
                    if w[1].0 < w[0].0 {
                        return Err(Error::validation("throttle table times must be sorted"));
                    }
                }
                points.iter().try_for_each(|(_, u)| check(*u))
            }
        }
    }
}

/// One planned hop: a powered attitude-slew phase followed by a ballistic
/// coast down to the touchdown altitude.
#[derive(Debug, Clone)]
pub struct HopPlan {
    pub burn_duration: f64,
    /// Commanded roll, pitch, yaw during the burn, rad.
    pub target_attitude: Vector3<f64>,
    pub throttle_profile: ThrottleProfile,
    /// Altitude whose downward crossing ends the trajectory, m.
    pub coast_termination: f64,
}

impl HopPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.burn_duration >= 0.0) {
            return Err(Error::validation(format!(
                "burn_duration must be >= 0, got {}",
                self.burn_duration
            )));
        }
        self.throttle_profile.validate()
    }
}

/// Integrator step sizes for the two hop phases.
#[derive(Debug, Clone, Copy)]
pub struct StepSizes {
    pub burn: f64,
    pub coast: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        Self { burn: 1e-3, coast: 1e-2 }
    }
}

/// One logged instant of a simulated trajectory.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: RobotState,
    pub throttles: [f64; 4],
    /// Torque commanded to the wheels (post-saturation), N m.
    pub wheel_torque: Vector3<f64>,
    /// Total thrust magnitude, N.
    pub thrust: f64,
}

/// Time series of states and control logs for one simulation run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Set when the burn ended early on propellant exhaustion.
    pub burn_truncated: bool,
    pub touchdown_time: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &RobotState {
        &self.samples.last().expect("trajectory is never empty").state
    }

    /// CSV export: `t,x,y,z,vx,vy,vz,roll,pitch,yaw,wx,wy,wz,ww1,ww2,ww3,mass,thrust,tau_x,tau_y,tau_z`,
    /// SI units and radians, one row per sample.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "t,x,y,z,vx,vy,vz,roll,pitch,yaw,wx,wy,wz,ww1,ww2,ww3,mass,thrust,tau_x,tau_y,tau_z"
        )?;
        for s in &self.samples {
            let p = s.state.position;
            let v = s.state.velocity;
            let e = s.state.euler_angles();
            let om = s.state.body_rates;
            let ws = s.state.wheel_speeds;
            let tau = s.wheel_torque;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.t, p.x, p.y, p.z, v.x, v.y, v.z, e.x, e.y, e.z, om.x, om.y, om.z,
                ws.x, ws.y, ws.z, s.state.mass, s.thrust, tau.x, tau.y, tau.z
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}
