//! Attitude PD law and thruster allocation.

use nalgebra::{Matrix3, Matrix3x4, Vector2, Vector3};

use crate::dynamics::VehicleParams;
use crate::error::{Error, Result};

/// Wheel torque command from attitude and rate errors:
/// tau_rw = -Kp (e_des - e_act) - Kd (w_des - w_act),
/// saturated per axis to the wheel torque limit.
///
/// The torque is commanded TO the wheels; the body receives the reaction
/// -tau_rw, which drives e_act toward e_des for positive gains.
pub fn pd_attitude_torque(
    e_des: &Vector3<f64>,
    e_act: &Vector3<f64>,
    w_des: &Vector3<f64>,
    w_act: &Vector3<f64>,
    params: &VehicleParams,
) -> Vector3<f64> {
    let raw = -params.kp.component_mul(&(e_des - e_act)) - params.kd.component_mul(&(w_des - w_act));
    raw.map(|t| t.clamp(-params.wheel_max_torque, params.wheel_max_torque))
}

/// Wrench produced by per-thruster forces f (N) along body +z:
/// (total thrust, torque about x, torque about y).
fn wrench_matrix(params: &VehicleParams) -> Matrix3x4<f64> {
    // A thrust f at position p contributes torque p x (0,0,f) = (p_y f, -p_x f, 0).
    Matrix3x4::from_fn(|row, i| {
        let p = params.thruster_positions[i];
        match row {
            0 => 1.0,
            1 => p.y,
            _ => -p.x,
        }
    })
}

/// Split a total-thrust plus x/y-torque command across the four thrusters
/// (differential throttling). Returns throttles in [0, 1].
///
/// The minimum-norm force solution is used; commands that would need a
/// negative or over-limit thruster come back as a saturation error
/// carrying the closest achievable wrench.
pub fn thruster_allocation(
    total_thrust: f64,
    body_torque_xy: &Vector2<f64>,
    params: &VehicleParams,
) -> Result<[f64; 4]> {
    params.validate()?;
    if !total_thrust.is_finite() || !body_torque_xy.x.is_finite() || !body_torque_xy.y.is_finite() {
        return Err(Error::validation("thrust/torque command must be finite"));
    }

    let a = wrench_matrix(params);
    let gram: Matrix3<f64> = a * a.transpose();
    let inv = gram.try_inverse().ok_or_else(|| {
        Error::validation("degenerate thruster geometry: wrench matrix is rank deficient")
    })?;
    let b = Vector3::new(total_thrust, body_torque_xy.x, body_torque_xy.y);
    let forces = a.transpose() * (inv * b);

    let fmax = params.thruster_max_thrust;
    let slack = 1e-9 * fmax.max(1.0);
    let feasible = forces.iter().all(|&f| f >= -slack && f <= fmax + slack);
    if !feasible {
        let clamped = forces.map(|f| f.clamp(0.0, fmax));
        let achieved = a * clamped;
        let throttles = [
            clamped[0] / fmax,
            clamped[1] / fmax,
            clamped[2] / fmax,
            clamped[3] / fmax,
        ];
        return Err(Error::ThrusterSaturation {
            requested_thrust: total_thrust,
            requested_torque_x: body_torque_xy.x,
            requested_torque_y: body_torque_xy.y,
            achieved_thrust: achieved.x,
            achieved_torque_x: achieved.y,
            achieved_torque_y: achieved.z,
            throttles,
        });
    }

    let clamped = forces.map(|f| f.clamp(0.0, fmax));
    Ok([
        clamped[0] / fmax,
        clamped[1] / fmax,
        clamped[2] / fmax,
        clamped[3] / fmax,
    ])
}

/// Wrench realized by a throttle set: (total thrust, torque_x, torque_y).
#[cfg(test)]
fn wrench_from_throttles(throttles: &[f64; 4], params: &VehicleParams) -> Vector3<f64> {
    let a = wrench_matrix(params);
    let f = nalgebra::Vector4::new(
        throttles[0] * params.thruster_max_thrust,
        throttles[1] * params.thruster_max_thrust,
        throttles[2] * params.thruster_max_thrust,
        throttles[3] * params.thruster_max_thrust,
    );
    a * f
}
