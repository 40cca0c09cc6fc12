use thiserror::Error;

/// Errors produced by the simulation and planning routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input violated a precondition or a type invariant.
    #[error("validation: {0}")]
    Validation(String),

    /// A quantity left its physical domain (behind-camera point, point
    /// inside an obstacle, degenerate geometry).
    #[error("domain: {0}")]
    Domain(String),

    /// Integration step size too large for the requested simulation.
    #[error("step size: {0}")]
    StepSize(String),

    /// A NaN or infinity appeared during integration.
    #[error("numeric failure: non-finite value in field `{field}`")]
    Numeric { field: &'static str },

    /// A commanded wrench cannot be realized within actuator limits.
    /// Carries the closest achievable wrench and the saturated throttles.
    #[error("thruster saturation: requested ({requested_thrust} N, [{requested_torque_x}, {requested_torque_y}] N*m), achieved ({achieved_thrust} N, [{achieved_torque_x}, {achieved_torque_y}] N*m)")]
    ThrusterSaturation {
        requested_thrust: f64,
        requested_torque_x: f64,
        requested_torque_y: f64,
        achieved_thrust: f64,
        achieved_torque_x: f64,
        achieved_torque_y: f64,
        throttles: [f64; 4],
    },

    /// Two adjacent relay nodes are farther apart than the radio range.
    #[error("broken relay chain: gap of {gap_m} m between nodes {node_a} and {node_b} exceeds range {range_m} m")]
    BrokenChain {
        node_a: usize,
        node_b: usize,
        gap_m: f64,
        range_m: f64,
    },

    /// Stereo rays are (near-)parallel; the target range is unbounded.
    #[error("infinite range: stereo rays are parallel (disparity too small)")]
    InfiniteRange,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
