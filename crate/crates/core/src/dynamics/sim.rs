//! Equations of motion, the RK4 stepper, and the hop/attitude simulators.

use nalgebra::{Quaternion, UnitQuaternion, Vector2, Vector3};

use crate::constants::G0;
use crate::dynamics::control::{pd_attitude_torque, thruster_allocation};
use crate::dynamics::{
    HopPlan, RobotState, StepSizes, Trajectory, TrajectorySample, VehicleParams,
};
use crate::error::{Error, Result};

/// Controls held constant over one integration step.
#[derive(Debug, Clone, Copy)]
pub struct ControlInputs {
    /// Torque commanded to the wheels, N m (body axes).
    pub wheel_torque: Vector3<f64>,
    /// Thrust force in the body frame, N.
    pub thrust_body: Vector3<f64>,
}

impl ControlInputs {
    pub fn coast() -> Self {
        Self { wheel_torque: Vector3::zeros(), thrust_body: Vector3::zeros() }
    }
}

/// Time derivative of the robot state.
#[derive(Debug, Clone)]
pub struct StateDerivative {
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    /// Quaternion rate, unnormalized: q_dot = (1/2) q (0, omega).
    pub attitude_rate: Quaternion<f64>,
    pub body_angular_acceleration: Vector3<f64>,
    pub wheel_accelerations: Vector3<f64>,
    pub mass_rate: f64,
}

/// Coupled rigid-body/wheel equations of motion.
///
/// Translation: v_dot = R(q) F_body / m + g. Attitude kinematics:
/// q_dot = (1/2) q (0, omega). Body kinetics with wheel momentum h_w:
/// J w_dot = -w x (J w + h_w) - tau_rw, the wheels receiving tau_rw and
/// the body its reaction. Mass flow: m_dot = -|F| / (Isp g0).
pub fn state_derivative(
    state: &RobotState,
    wheel_torque: &Vector3<f64>,
    thrust_body: &Vector3<f64>,
    params: &VehicleParams,
) -> StateDerivative {
    let raw = derivative_raw(
        &pack(state),
        &ControlInputs { wheel_torque: *wheel_torque, thrust_body: *thrust_body },
        params,
    );
    StateDerivative {
        velocity: Vector3::new(raw[0], raw[1], raw[2]),
        acceleration: Vector3::new(raw[3], raw[4], raw[5]),
        attitude_rate: Quaternion::new(raw[6], raw[7], raw[8], raw[9]),
        body_angular_acceleration: Vector3::new(raw[10], raw[11], raw[12]),
        wheel_accelerations: Vector3::new(raw[13], raw[14], raw[15]),
        mass_rate: raw[16],
    }
}

// 17-component flat state for the integrator:
// [pos 0..3, vel 3..6, quat(w,x,y,z) 6..10, omega 10..13, wheels 13..16, mass 16].
const N: usize = 17;
type StateVec = [f64; N];

fn pack(s: &RobotState) -> StateVec {
    let q = s.attitude.as_ref();
    [
        s.position.x,
        s.position.y,
        s.position.z,
        s.velocity.x,
        s.velocity.y,
        s.velocity.z,
        q.w,
        q.i,
        q.j,
        q.k,
        s.body_rates.x,
        s.body_rates.y,
        s.body_rates.z,
        s.wheel_speeds.x,
        s.wheel_speeds.y,
        s.wheel_speeds.z,
        s.mass,
    ]
}

fn derivative_raw(v: &StateVec, controls: &ControlInputs, params: &VehicleParams) -> StateVec {
    let velocity = Vector3::new(v[3], v[4], v[5]);
    let q = Quaternion::new(v[6], v[7], v[8], v[9]);
    let omega = Vector3::new(v[10], v[11], v[12]);
    let wheels = Vector3::new(v[13], v[14], v[15]);
    let mass = v[16];

    // Intermediate RK4 stages may carry a non-unit quaternion; use its
    // normalized form for the rotation only.
    let rot = UnitQuaternion::new_normalize(q);
    let thrust_world = rot * controls.thrust_body;
    let accel = thrust_world / mass + Vector3::new(0.0, 0.0, -params.gravity);

    let q_dot = q * Quaternion::from_parts(0.0, omega) * 0.5;

    let j = params.body_inertia;
    let h_wheels = params.wheel_axial_inertia * wheels;
    let torque_on_body = -(omega.cross(&(j * omega + h_wheels))) - controls.wheel_torque;
    let omega_dot = j
        .try_inverse()
        .expect("inertia validated positive definite")
        * torque_on_body;
    let wheel_accel = controls.wheel_torque / params.wheel_axial_inertia;

    let mass_rate = -controls.thrust_body.norm() / (params.isp * G0);

    [
        velocity.x,
        velocity.y,
        velocity.z,
        accel.x,
        accel.y,
        accel.z,
        q_dot.w,
        q_dot.i,
        q_dot.j,
        q_dot.k,
        omega_dot.x,
        omega_dot.y,
        omega_dot.z,
        wheel_accel.x,
        wheel_accel.y,
        wheel_accel.z,
        mass_rate,
    ]
}

fn axpy(y: &StateVec, a: f64, x: &StateVec) -> StateVec {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * x[i];
    }
    out
}

/// One classical fourth-order Runge-Kutta step with zero-order-hold
/// controls. The quaternion is renormalized and wheel speeds are clamped
/// to the speed limit afterwards; any non-finite component aborts with
/// the offending field named.
pub fn step_rk4(
    state: &RobotState,
    controls: &ControlInputs,
    params: &VehicleParams,
    dt: f64,
) -> Result<RobotState> {
    if !(dt > 0.0) {
        return Err(Error::validation(format!("dt must be positive, got {dt}")));
    }
    let s0 = pack(state);
    let k1 = derivative_raw(&s0, controls, params);
    let k2 = derivative_raw(&axpy(&s0, 0.5 * dt, &k1), controls, params);
    let k3 = derivative_raw(&axpy(&s0, 0.5 * dt, &k2), controls, params);
    let k4 = derivative_raw(&axpy(&s0, dt, &k3), controls, params);

    let mut s = s0;
    for i in 0..N {
        s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    let fields: [(&'static str, std::ops::Range<usize>); 6] = [
        ("position", 0..3),
        ("velocity", 3..6),
        ("attitude", 6..10),
        ("body_rates", 10..13),
        ("wheel_speeds", 13..16),
        ("mass", 16..17),
    ];
    for (field, range) in fields {
        if s[range].iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric { field });
        }
    }

    let q = Quaternion::new(s[6], s[7], s[8], s[9]);
    if q.norm() < 1e-12 {
        return Err(Error::Numeric { field: "attitude" });
    }
    let max_w = params.wheel_max_speed;
    Ok(RobotState {
        position: Vector3::new(s[0], s[1], s[2]),
        velocity: Vector3::new(s[3], s[4], s[5]),
        attitude: UnitQuaternion::new_normalize(q),
        body_rates: Vector3::new(s[10], s[11], s[12]),
        wheel_speeds: Vector3::new(s[13], s[14], s[15]).map(|w| w.clamp(-max_w, max_w)),
        mass: s[16],
    })
}

/// Zero the torque on any wheel already at its speed limit and being
/// pushed further.
fn gate_wheel_torque(
    torque: Vector3<f64>,
    wheel_speeds: &Vector3<f64>,
    params: &VehicleParams,
) -> Vector3<f64> {
    Vector3::from_fn(|i, _| {
        let tau = torque[i];
        let w = wheel_speeds[i];
        if (w >= params.wheel_max_speed && tau > 0.0)
            || (w <= -params.wheel_max_speed && tau < 0.0)
        {
            0.0
        } else {
            tau
        }
    })
}

fn attitude_hold_torque(state: &RobotState, target: &Vector3<f64>, params: &VehicleParams) -> Vector3<f64> {
    let torque = pd_attitude_torque(
        target,
        &state.euler_angles(),
        &Vector3::zeros(),
        &state.body_rates,
        params,
    );
    gate_wheel_torque(torque, &state.wheel_speeds, params)
}

/// Total angular momentum of body plus wheels, inertial frame:
/// R(q) (J w + I_w W).
pub fn total_angular_momentum(state: &RobotState, params: &VehicleParams) -> Vector3<f64> {
    let h_body = params.body_inertia * state.body_rates
        + params.wheel_axial_inertia * state.wheel_speeds;
    state.attitude * h_body
}

/// Mechanical energy: translational plus rotational kinetic energy plus
/// m g z. Conserved during an unforced coast.
pub fn mechanical_energy(state: &RobotState, params: &VehicleParams) -> f64 {
    let v2 = state.velocity.norm_squared();
    let rot = 0.5 * state.body_rates.dot(&(params.body_inertia * state.body_rates));
    let wheels = 0.5 * params.wheel_axial_inertia * state.wheel_speeds.norm_squared();
    0.5 * state.mass * v2 + rot + wheels + state.mass * params.gravity * state.position.z
}

const FUEL_EPS: f64 = 1e-12;
const MAX_COAST_STEPS: usize = 10_000_000;

/// Simulate one hop: a powered phase holding the target attitude under PD
/// wheel control with thrusters at the planned throttle, then a ballistic
/// coast (attitude hold stays active) until the altitude crosses the
/// termination plane from above. The crossing time is located by linear
/// interpolation and the last step is re-integrated to land on it.
///
/// Running out of propellant truncates the burn and is flagged on the
/// returned trajectory.
pub fn simulate_hop(
    initial: &RobotState,
    plan: &HopPlan,
    params: &VehicleParams,
    steps: &StepSizes,
) -> Result<Trajectory> {
    params.validate()?;
    plan.validate()?;
    initial.validate(params)?;
    if !(steps.burn > 0.0 && steps.coast > 0.0) {
        return Err(Error::validation("step sizes must be positive"));
    }

    let mut samples: Vec<TrajectorySample> = Vec::new();
    let mut state = initial.clone();
    let mut t = 0.0;
    let mut burn_truncated = false;

    // Powered phase.
    while t < plan.burn_duration - 1e-12 {
        if state.mass <= params.dry_mass + FUEL_EPS {
            burn_truncated = true;
            break;
        }
        let tau = attitude_hold_torque(&state, &plan.target_attitude, params);
        let level = plan.throttle_profile.level_at(t).clamp(0.0, 1.0);
        let total_thrust = level * 4.0 * params.thruster_max_thrust;
        let throttles = thruster_allocation(total_thrust, &Vector2::zeros(), params)?;

        samples.push(TrajectorySample {
            t,
            state: state.clone(),
            throttles,
            wheel_torque: tau,
            thrust: total_thrust,
        });

        let dt = steps.burn.min(plan.burn_duration - t);
        let controls = ControlInputs {
            wheel_torque: tau,
            thrust_body: Vector3::new(0.0, 0.0, total_thrust),
        };
        state = step_rk4(&state, &controls, params, dt)?;
        t += dt;

        if state.mass < params.dry_mass {
            // The step drained the tank; pin the mass and end the burn.
            state.mass = params.dry_mass;
            burn_truncated = true;
            break;
        }
    }

    // Ballistic coast with attitude hold.
    let floor = plan.coast_termination;
    if state.position.z <= floor + 1e-12 && state.velocity.z <= 0.0 {
        let tau = attitude_hold_torque(&state, &plan.target_attitude, params);
        samples.push(TrajectorySample {
            t,
            state,
            throttles: [0.0; 4],
            wheel_torque: tau,
            thrust: 0.0,
        });
        return Ok(Trajectory { samples, burn_truncated, touchdown_time: Some(t) });
    }

    let mut touchdown_time = None;
    for _ in 0..MAX_COAST_STEPS {
        let tau = attitude_hold_torque(&state, &plan.target_attitude, params);
        samples.push(TrajectorySample {
            t,
            state: state.clone(),
            throttles: [0.0; 4],
            wheel_torque: tau,
            thrust: 0.0,
        });

        let controls = ControlInputs { wheel_torque: tau, thrust_body: Vector3::zeros() };
        let next = step_rk4(&state, &controls, params, steps.coast)?;

        if state.position.z >= floor && next.position.z < floor {
            // Linear interpolation of the crossing time, then land on it.
            let frac = (state.position.z - floor) / (state.position.z - next.position.z);
            let dt_land = (frac * steps.coast).max(f64::MIN_POSITIVE);
            let landed = step_rk4(&state, &controls, params, dt_land)?;
            t += dt_land;
            let tau_land = attitude_hold_torque(&landed, &plan.target_attitude, params);
            samples.push(TrajectorySample {
                t,
                state: landed,
                throttles: [0.0; 4],
                wheel_torque: tau_land,
                thrust: 0.0,
            });
            touchdown_time = Some(t);
            break;
        }

        state = next;
        t += steps.coast;
    }

    if touchdown_time.is_none() {
        return Err(Error::validation(
            "coast never crossed the termination altitude (check coast_termination)",
        ));
    }
    Ok(Trajectory { samples, burn_truncated, touchdown_time })
}

/// Closed-loop attitude regulation from the current state toward a fixed
/// Euler target for a fixed duration. Thrusters stay off; the reaction
/// wheels run the PD law.
pub fn simulate_attitude_regulation(
    initial: &RobotState,
    target: &Vector3<f64>,
    params: &VehicleParams,
    duration: f64,
    dt: f64,
) -> Result<Trajectory> {
    params.validate()?;
    initial.validate(params)?;
    if !(duration >= 0.0) {
        return Err(Error::validation("duration must be non-negative"));
    }
    if !(dt > 0.0) {
        return Err(Error::validation("dt must be positive"));
    }

    let mut samples = Vec::with_capacity((duration / dt).ceil() as usize + 1);
    let mut state = initial.clone();
    let mut t = 0.0;
    loop {
        let tau = attitude_hold_torque(&state, target, params);
        samples.push(TrajectorySample {
            t,
            state: state.clone(),
            throttles: [0.0; 4],
            wheel_torque: tau,
            thrust: 0.0,
        });
        if t >= duration - 1e-12 {
            break;
        }
        let step = dt.min(duration - t);
        let controls = ControlInputs { wheel_torque: tau, thrust_body: Vector3::zeros() };
        state = step_rk4(&state, &controls, params, step)?;
        t += step;
    }
    Ok(Trajectory { samples, burn_truncated: false, touchdown_time: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ThrottleProfile;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::Matrix3;

    fn tumbling_params() -> VehicleParams {
        VehicleParams {
            body_inertia: Matrix3::from_diagonal(&Vector3::new(0.02, 0.03, 0.045)),
            ..VehicleParams::default()
        }
    }

    #[test]
    fn free_fall_derivative() {
        let params = VehicleParams::default();
        let state = RobotState::at_rest(3.0);
        let d = state_derivative(&state, &Vector3::zeros(), &Vector3::zeros(), &params);
        assert_eq!(d.acceleration, Vector3::new(0.0, 0.0, -params.gravity));
        assert_eq!(d.body_angular_acceleration, Vector3::zeros());
        assert_eq!(d.wheel_accelerations, Vector3::zeros());
        assert_eq!(d.mass_rate, 0.0);
        assert_eq!(d.velocity, Vector3::zeros());
        assert_eq!(d.attitude_rate, Quaternion::new(0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn momentum_conservation_is_structural() {
        // With no external wrench, [w]x(Jw + h) + J w_dot + I_w W_dot = 0
        // holds identically, so inertial momentum is constant.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let params = tumbling_params();
        for _ in 0..50 {
            let state = RobotState {
                body_rates: Vector3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ),
                wheel_speeds: Vector3::new(
                    rng.gen_range(-500.0..500.0),
                    rng.gen_range(-500.0..500.0),
                    rng.gen_range(-500.0..500.0),
                ),
                ..RobotState::at_rest(3.0)
            };
            let d = state_derivative(&state, &Vector3::zeros(), &Vector3::zeros(), &params);
            let h = params.body_inertia * state.body_rates
                + params.wheel_axial_inertia * state.wheel_speeds;
            let residual = state.body_rates.cross(&h)
                + params.body_inertia * d.body_angular_acceleration
                + params.wheel_axial_inertia * d.wheel_accelerations;
            assert!(residual.norm() < 1e-12, "residual {residual:?}");
        }
    }

    #[test]
    fn principal_axis_spin_is_torque_free() {
        let params = tumbling_params();
        for axis in 0..3 {
            let mut w = Vector3::zeros();
            w[axis] = 1.4;
            let state = RobotState { body_rates: w, ..RobotState::at_rest(3.0) };
            let d = state_derivative(&state, &Vector3::zeros(), &Vector3::zeros(), &params);
            assert!(d.body_angular_acceleration.norm() < 1e-14);
        }
    }

    #[test]
    fn rk4_exact_on_constant_acceleration() {
        let params = VehicleParams::default();
        let mut state = RobotState::at_rest(3.0);
        state.position.z = 10.0;
        let next = step_rk4(&state, &ControlInputs::coast(), &params, 1.0).unwrap();
        assert_abs_diff_eq!(next.position.z, 10.0 - 0.5 * 3.71, epsilon = 1e-12);
        assert_abs_diff_eq!(next.velocity.z, -3.71, epsilon = 1e-12);
        assert_abs_diff_eq!(next.attitude.as_ref().norm(), 1.0, epsilon = 1e-15);
    }

    fn propagate(
        state: &RobotState,
        params: &VehicleParams,
        dt: f64,
        t_end: f64,
    ) -> RobotState {
        let mut s = state.clone();
        let n = (t_end / dt).round() as usize;
        for _ in 0..n {
            s = step_rk4(&s, &ControlInputs::coast(), params, dt).unwrap();
        }
        s
    }

    fn state_distance(a: &RobotState, b: &RobotState) -> f64 {
        let dq = (a.attitude.as_ref() - b.attitude.as_ref()).norm();
        let dw = (a.body_rates - b.body_rates).norm();
        dq + dw
    }

    #[test]
    fn rk4_fourth_order_self_convergence() {
        let params = tumbling_params();
        let state = RobotState {
            body_rates: Vector3::new(0.9, -1.3, 1.7),
            ..RobotState::at_rest(3.0)
        };
        let t_end = 2.0;
        let reference = propagate(&state, &params, 0.02 / 8.0, t_end);
        let e1 = state_distance(&propagate(&state, &params, 0.02, t_end), &reference);
        let e2 = state_distance(&propagate(&state, &params, 0.01, t_end), &reference);
        let order = (e1 / e2).log2();
        assert!(
            (3.8..=4.2).contains(&order),
            "observed order {order} (errors {e1:.3e}, {e2:.3e})"
        );
    }

    #[test]
    fn halving_steps_changes_result_only_at_high_order() {
        let params = tumbling_params();
        let state = RobotState {
            body_rates: Vector3::new(0.5, 0.8, -0.4),
            ..RobotState::at_rest(3.0)
        };
        let dt = 0.01;
        let one = step_rk4(&state, &ControlInputs::coast(), &params, dt).unwrap();
        let half = step_rk4(&state, &ControlInputs::coast(), &params, dt / 2.0).unwrap();
        let two = step_rk4(&half, &ControlInputs::coast(), &params, dt / 2.0).unwrap();
        let d = state_distance(&one, &two);
        assert!(d > 0.0 && d < 1e-10, "local difference {d:.3e}");
    }

    #[test]
    fn conservation_over_ten_thousand_steps() {
        let params = tumbling_params();
        let state = RobotState {
            velocity: Vector3::new(0.4, -0.2, 2.0),
            body_rates: Vector3::new(0.8, -1.1, 1.4),
            wheel_speeds: Vector3::new(200.0, -150.0, 80.0),
            ..RobotState::at_rest(3.0)
        };
        let h0 = total_angular_momentum(&state, &params);
        let e0 = mechanical_energy(&state, &params);
        let mut s = state;
        for _ in 0..10_000 {
            s = step_rk4(&s, &ControlInputs::coast(), &params, 1e-3).unwrap();
        }
        let h1 = total_angular_momentum(&s, &params);
        let e1 = mechanical_energy(&s, &params);
        assert!((h1 - h0).norm() / h0.norm() < 1e-6, "momentum drift {}", (h1 - h0).norm() / h0.norm());
        assert!((e1 - e0).abs() / e0.abs() < 1e-6, "energy drift {}", (e1 - e0).abs() / e0.abs());
        assert_abs_diff_eq!(s.attitude.as_ref().norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn nan_inputs_name_the_field() {
        let params = VehicleParams::default();
        let mut state = RobotState::at_rest(3.0);
        state.velocity.x = f64::NAN;
        let err = step_rk4(&state, &ControlInputs::coast(), &params, 1e-3).unwrap_err();
        match err {
            Error::Numeric { field } => assert!(field == "position" || field == "velocity"),
            other => panic!("expected numeric failure, got {other:?}"),
        }
    }

    #[test]
    fn wheel_speed_clamps_at_limit() {
        let mut params = VehicleParams::default();
        params.wheel_max_speed = 50.0;
        let mut state = RobotState::at_rest(3.0);
        let controls = ControlInputs {
            wheel_torque: Vector3::new(params.wheel_max_torque, 0.0, 0.0),
            thrust_body: Vector3::zeros(),
        };
        for _ in 0..1000 {
            state = step_rk4(&state, &controls, &params, 1e-2).unwrap();
        }
        assert!(state.wheel_speeds.x <= 50.0 + 1e-12);
        // The gate refuses to push a saturated wheel harder.
        let gated = gate_wheel_torque(controls.wheel_torque, &state.wheel_speeds, &params);
        assert_eq!(gated.x, 0.0);
    }

    #[test]
    fn zero_burn_from_rest_stays_put() {
        let params = VehicleParams::default();
        let plan = HopPlan {
            burn_duration: 0.0,
            target_attitude: Vector3::zeros(),
            throttle_profile: ThrottleProfile::Constant(1.0),
            coast_termination: 0.0,
        };
        let traj = simulate_hop(&RobotState::at_rest(3.0), &plan, &params, &StepSizes::default())
            .unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.touchdown_time, Some(0.0));
        assert_eq!(traj.final_state().position, Vector3::zeros());
        assert!(!traj.burn_truncated);
    }

    #[test]
    fn coast_is_ballistic_projectile() {
        // After burnout at speed v and flight-path angle gamma, the coast
        // must return to the burnout altitude v^2 sin(2 gamma)/g downrange.
        let params = VehicleParams::default();
        let tilt = 0.35;
        let plan = HopPlan {
            burn_duration: 0.3,
            target_attitude: Vector3::new(0.0, tilt, 0.0),
            throttle_profile: ThrottleProfile::Constant(1.0),
            coast_termination: 0.0,
        };
        let initial = RobotState {
            attitude: UnitQuaternion::from_euler_angles(0.0, tilt, 0.0),
            ..RobotState::at_rest(3.0)
        };
        let steps = StepSizes { burn: 1e-3, coast: 1e-3 };
        let traj = simulate_hop(&initial, &plan, &params, &steps).unwrap();
        assert!(!traj.burn_truncated);

        // First coasting sample = burnout.
        let burnout = traj
            .samples
            .iter()
            .find(|s| s.thrust == 0.0)
            .expect("coast phase exists");
        let v = burnout.state.velocity;
        let speed_xy = (v.x * v.x + v.y * v.y).sqrt();
        let gamma = v.z.atan2(speed_xy);
        assert!(v.z > 0.0 && speed_xy > 0.0, "burnout velocity {v:?}");
        let expected_range = v.norm_squared() * (2.0 * gamma).sin() / params.gravity;

        // Find the descending crossing of the burnout altitude.
        let z0 = burnout.state.position.z;
        let mut crossing_x = None;
        for w in traj.samples.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.t >= burnout.t && a.state.position.z >= z0 && b.state.position.z < z0
                && a.state.velocity.z < 0.0
            {
                let f = (a.state.position.z - z0) / (a.state.position.z - b.state.position.z);
                crossing_x = Some(a.state.position.x + f * (b.state.position.x - a.state.position.x));
                break;
            }
        }
        let downrange = crossing_x.expect("descending crossing found") - burnout.state.position.x;
        assert_relative_eq!(downrange, expected_range, max_relative = 0.02);
    }

    #[test]
    fn hop_touchdown_interpolates_termination_plane() {
        let params = VehicleParams::default();
        let plan = HopPlan {
            burn_duration: 0.4,
            target_attitude: Vector3::new(0.0, 0.2, 0.0),
            throttle_profile: ThrottleProfile::Constant(0.9),
            coast_termination: 0.0,
        };
        let traj =
            simulate_hop(&RobotState::at_rest(3.0), &plan, &params, &StepSizes::default()).unwrap();
        let last = traj.final_state();
        assert_abs_diff_eq!(last.position.z, 0.0, epsilon = 1e-4);
        assert!(traj.touchdown_time.unwrap() > 0.4);
        // Apex above ground, monotone time stamps.
        let apex = traj
            .samples
            .iter()
            .map(|s| s.state.position.z)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(apex > 0.0);
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn exhausted_tank_truncates_burn() {
        let mut params = VehicleParams::default();
        params.dry_mass = 2.99;
        let plan = HopPlan {
            burn_duration: 3.0,
            target_attitude: Vector3::zeros(),
            throttle_profile: ThrottleProfile::Constant(1.0),
            coast_termination: 0.0,
        };
        let traj =
            simulate_hop(&RobotState::at_rest(3.0), &plan, &params, &StepSizes::default()).unwrap();
        assert!(traj.burn_truncated);
        // No thrust after the truncation point.
        let last_thrust_t = traj
            .samples
            .iter()
            .filter(|s| s.thrust > 0.0)
            .map(|s| s.t)
            .fold(0.0, f64::max);
        assert!(last_thrust_t < 3.0);
        assert!(traj.final_state().mass >= params.dry_mass - 1e-12);
    }

    #[test]
    fn actuation_stays_within_limits_on_every_sample() {
        let params = VehicleParams::default();
        let plan = HopPlan {
            burn_duration: 0.5,
            target_attitude: Vector3::new(0.27, 0.25, 0.07),
            throttle_profile: ThrottleProfile::Constant(1.0),
            coast_termination: 0.0,
        };
        let traj =
            simulate_hop(&RobotState::at_rest(3.0), &plan, &params, &StepSizes::default()).unwrap();
        for s in &traj.samples {
            for u in s.throttles {
                assert!((0.0..=1.0).contains(&u));
            }
            assert!(s.wheel_torque.amax() <= params.wheel_max_torque + 1e-15);
            assert!(s.state.wheel_speeds.amax() <= params.wheel_max_speed + 1e-12);
        }
    }

    #[test]
    fn attitude_regulation_reaches_commanded_angles() {
        let params = VehicleParams::default();
        let target = Vector3::new(0.27, 0.25, 0.07);
        let traj = simulate_attitude_regulation(
            &RobotState::at_rest(3.0),
            &target,
            &params,
            5.0,
            1e-3,
        )
        .unwrap();
        let final_state = traj.final_state();
        let e = final_state.euler_angles();
        for i in 0..3 {
            let rel = (e[i] - target[i]).abs() / target[i].abs();
            assert!(rel < 0.02, "axis {i}: reached {} of {}", e[i], target[i]);
        }
        assert!(final_state.body_rates.norm() < 1e-3);
    }

    #[test]
    fn pd_equilibrium_is_a_fixed_point() {
        let params = VehicleParams::default();
        let target = Vector3::new(0.27, 0.25, 0.07);
        let state = RobotState {
            attitude: UnitQuaternion::from_euler_angles(target.x, target.y, target.z),
            ..RobotState::at_rest(3.0)
        };
        let tau = attitude_hold_torque(&state, &target, &params);
        assert!(tau.norm() < 1e-12, "torque at equilibrium {tau:?}");
        let d = state_derivative(&state, &tau, &Vector3::zeros(), &params);
        assert!(d.body_angular_acceleration.norm() < 1e-12);
    }

    #[test]
    fn wheel_momentum_bookkeeping_matches_torque_integral() {
        let params = VehicleParams::default();
        let target = Vector3::new(0.2, -0.15, 0.1);
        let dt = 1e-3;
        let traj = simulate_attitude_regulation(
            &RobotState::at_rest(3.0),
            &target,
            &params,
            2.0,
            dt,
        )
        .unwrap();
        // Controls are zero-order-hold: the torque logged at sample k acts
        // over [t_k, t_k+1], so a left rectangle sum is the exact integral.
        let mut integral = Vector3::zeros();
        for w in traj.samples.windows(2) {
            integral += w[0].wheel_torque * (w[1].t - w[0].t);
        }
        let dh = params.wheel_axial_inertia
            * (traj.final_state().wheel_speeds - traj.samples[0].state.wheel_speeds);
        assert!(
            (dh - integral).norm() <= 1e-9 * integral.norm().max(1e-12),
            "wheel momentum {dh:?} vs torque integral {integral:?}"
        );
    }
}
