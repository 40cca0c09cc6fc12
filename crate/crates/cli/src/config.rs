//! JSON scenario configs: schema, defaults, and invariant checking.
//!
//! Every scenario file is an object with a `kind` discriminator; missing
//! fields take the documented defaults, so `{"kind": "survey"}` is a
//! complete config. `violations` re-checks every invariant and reports
//! all of them with field paths, for the `validate` subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hopsim_core::dynamics::{HopPlan, RobotState, StepSizes, ThrottleProfile, VehicleParams};
use hopsim_core::navigation::{CameraModel, Obstacle, SphereWorld};
use hopsim_core::propulsion::{PropellantSpec, SolidMotorSpec};

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

/// One row of the propellant database: the thermochemical spec plus
/// bookkeeping and published comparison values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropellantRecord {
    #[serde(flatten)]
    pub spec: PropellantSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oxidizer: Option<String>,
    pub family: PropellantFamily,
    #[serde(default)]
    pub isp_reference_s: Option<f64>,
    #[serde(default)]
    pub flight_time_reference_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropellantFamily {
    Solid,
    Bipropellant,
    Monopropellant,
}

impl std::fmt::Display for PropellantFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PropellantFamily::Solid => write!(f, "solid"),
            PropellantFamily::Bipropellant => write!(f, "bipropellant"),
            PropellantFamily::Monopropellant => write!(f, "monopropellant"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioConfig {
    MotorBurn(MotorBurnConfig),
    IspTable(IspTableConfig),
    Hop(HopConfig),
    Attitude(AttitudeConfig),
    PlanPath(PlanPathConfig),
    Survey(SurveyConfig),
    Relay(RelayConfig),
    Tables(TablesConfig),
}

impl ScenarioConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ScenarioConfig::MotorBurn(_) => "motor-burn",
            ScenarioConfig::IspTable(_) => "isp-table",
            ScenarioConfig::Hop(_) => "hop",
            ScenarioConfig::Attitude(_) => "attitude",
            ScenarioConfig::PlanPath(_) => "plan-path",
            ScenarioConfig::Survey(_) => "survey",
            ScenarioConfig::Relay(_) => "relay",
            ScenarioConfig::Tables(_) => "tables",
        }
    }

    pub fn default_for_kind(kind: &str) -> Option<Self> {
        match kind {
            "motor-burn" => Some(ScenarioConfig::MotorBurn(MotorBurnConfig::default())),
            "isp-table" => Some(ScenarioConfig::IspTable(IspTableConfig::default())),
            "hop" => Some(ScenarioConfig::Hop(HopConfig::default())),
            "attitude" => Some(ScenarioConfig::Attitude(AttitudeConfig::default())),
            "plan-path" => Some(ScenarioConfig::PlanPath(PlanPathConfig::default())),
            "survey" => Some(ScenarioConfig::Survey(SurveyConfig::default())),
            "relay" => Some(ScenarioConfig::Relay(RelayConfig::default())),
            "tables" => Some(ScenarioConfig::Tables(TablesConfig::default())),
            _ => None,
        }
    }

    /// Every violated invariant, with field paths. Empty means clean.
    pub fn violations(&self) -> Vec<String> {
        match self {
            ScenarioConfig::MotorBurn(c) => c.violations(),
            ScenarioConfig::IspTable(c) => c.violations(),
            ScenarioConfig::Hop(c) => c.violations(),
            ScenarioConfig::Attitude(c) => c.violations(),
            ScenarioConfig::PlanPath(c) => c.violations(),
            ScenarioConfig::Survey(c) => c.violations(),
            ScenarioConfig::Relay(c) => c.violations(),
            ScenarioConfig::Tables(c) => c.violations(),
        }
    }
}

fn positive(v: f64, path: &str, out: &mut Vec<String>) {
    if !(v > 0.0) {
        out.push(format!("{path}: must be positive, got {v}"));
    }
}

fn non_negative(v: f64, path: &str, out: &mut Vec<String>) {
    if !(v >= 0.0) {
        out.push(format!("{path}: must be non-negative, got {v}"));
    }
}

// ---------------------------------------------------------------------------
// motor-burn
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct MotorBurnConfig {
    pub motor: SolidMotorSpec,
    pub dt_s: f64,
}

impl Default for MotorBurnConfig {
    fn default() -> Self {
        Self { motor: SolidMotorSpec::default_pellet(), dt_s: 1e-3 }
    }
}

impl MotorBurnConfig {
    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let m = &self.motor;
        positive(m.grain_inner_radius, "motor.grain_inner_radius", &mut v);
        if m.grain_inner_radius > m.grain_outer_radius {
            v.push(format!(
                "motor.grain_inner_radius: {} exceeds motor.grain_outer_radius {}",
                m.grain_inner_radius, m.grain_outer_radius
            ));
        }
        positive(m.grain_length, "motor.grain_length", &mut v);
        positive(m.throat_radius, "motor.throat_radius", &mut v);
        if m.throat_radius >= m.nozzle_exit_radius {
            v.push(format!(
                "motor.throat_radius: {} must be below motor.nozzle_exit_radius {}",
                m.throat_radius, m.nozzle_exit_radius
            ));
        }
        positive(m.propellant_density, "motor.propellant_density", &mut v);
        positive(m.burn_rate_coefficient, "motor.burn_rate_coefficient", &mut v);
        if !(m.burn_rate_exponent > 0.0 && m.burn_rate_exponent < 1.0) {
            v.push(format!(
                "motor.burn_rate_exponent: must lie in (0, 1), got {}",
                m.burn_rate_exponent
            ));
        }
        positive(m.characteristic_velocity, "motor.characteristic_velocity", &mut v);
        if !(m.gamma > 1.0 && m.gamma < 2.0) {
            v.push(format!("motor.gamma: must lie in (1, 2), got {}", m.gamma));
        }
        non_negative(m.ambient_pressure, "motor.ambient_pressure", &mut v);
        positive(self.dt_s, "dt_s", &mut v);
        v
    }
}

// ---------------------------------------------------------------------------
// isp-table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct IspTableConfig {
    /// Inline propellant records; when empty, `propellant_db` is loaded.
    pub propellants: Vec<PropellantRecord>,
    /// Path to a propellant database JSON file.
    pub propellant_db: Option<PathBuf>,
    pub chamber_pressure_pa: f64,
    pub exit_pressure_pa: f64,
}

impl Default for IspTableConfig {
    fn default() -> Self {
        Self {
            propellants: Vec::new(),
            propellant_db: None,
            chamber_pressure_pa: crate::reference::REFERENCE_CHAMBER_PRESSURE,
            exit_pressure_pa: crate::reference::REFERENCE_EXIT_PRESSURE,
        }
    }
}

pub fn validate_records(records: &[PropellantRecord], prefix: &str, out: &mut Vec<String>) {
    for (i, r) in records.iter().enumerate() {
        positive(r.spec.molecular_weight, &format!("{prefix}[{i}].molecular_weight"), out);
        positive(
            r.spec.combustion_temperature,
            &format!("{prefix}[{i}].combustion_temperature"),
            out,
        );
        if !(r.spec.gamma > 1.0 && r.spec.gamma < 2.0) {
            out.push(format!(
                "{prefix}[{i}].gamma: must lie in (1, 2), got {}",
                r.spec.gamma
            ));
        }
    }
}

impl IspTableConfig {
    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.exit_pressure_pa > 0.0 && self.exit_pressure_pa < self.chamber_pressure_pa) {
            v.push(format!(
                "exit_pressure_pa: need 0 < exit ({}) < chamber ({})",
                self.exit_pressure_pa, self.chamber_pressure_pa
            ));
        }
        validate_records(&self.propellants, "propellants", &mut v);
        v
    }
}

// ---------------------------------------------------------------------------
// vehicle block shared by hop and attitude
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct VehicleConfig {
    pub mass_kg: f64,
    pub dry_mass_kg: f64,
    /// Diagonal body inertia, kg m^2.
    pub inertia_kg_m2: [f64; 3],
    pub wheel_axial_inertia_kg_m2: f64,
    pub wheel_max_torque_nm: f64,
    pub wheel_max_speed_rad_s: f64,
    /// Ring radius of the four-thruster cross layout, m.
    pub thruster_radius_m: f64,
    pub thruster_max_thrust_n: f64,
    pub gravity_m_s2: f64,
    pub kp: [f64; 3],
    pub kd: [f64; 3],
    pub isp_s: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            mass_kg: 3.0,
            dry_mass_kg: 1.905,
            inertia_kg_m2: [0.027; 3],
            wheel_axial_inertia_kg_m2: 2.0e-5,
            wheel_max_torque_nm: 5.0e-3,
            wheel_max_speed_rad_s: 1000.0,
            thruster_radius_m: 0.1,
            thruster_max_thrust_n: 5.0,
            gravity_m_s2: 3.71,
            kp: [0.5; 3],
            kd: [0.3; 3],
            isp_s: 333.0,
        }
    }
}

impl VehicleConfig {
    pub fn to_params(&self) -> VehicleParams {
        let r = self.thruster_radius_m;
        VehicleParams {
            body_inertia: Matrix3::from_diagonal(&Vector3::from_column_slice(&self.inertia_kg_m2)),
            wheel_axial_inertia: self.wheel_axial_inertia_kg_m2,
            wheel_max_torque: self.wheel_max_torque_nm,
            wheel_max_speed: self.wheel_max_speed_rad_s,
            thruster_positions: [
                Vector3::new(r, 0.0, -0.1),
                Vector3::new(-r, 0.0, -0.1),
                Vector3::new(0.0, r, -0.1),
                Vector3::new(0.0, -r, -0.1),
            ],
            thruster_max_thrust: self.thruster_max_thrust_n,
            gravity: self.gravity_m_s2,
            kp: Vector3::from_column_slice(&self.kp),
            kd: Vector3::from_column_slice(&self.kd),
            isp: self.isp_s,
            dry_mass: self.dry_mass_kg,
        }
    }

    fn violations(&self, out: &mut Vec<String>) {
        positive(self.mass_kg, "vehicle.mass_kg", out);
        non_negative(self.dry_mass_kg, "vehicle.dry_mass_kg", out);
        if self.mass_kg <= self.dry_mass_kg {
            out.push(format!(
                "vehicle.mass_kg: {} must exceed vehicle.dry_mass_kg {}",
                self.mass_kg, self.dry_mass_kg
            ));
        }
        for (i, j) in self.inertia_kg_m2.iter().enumerate() {
            positive(*j, &format!("vehicle.inertia_kg_m2[{i}]"), out);
        }
        positive(self.wheel_axial_inertia_kg_m2, "vehicle.wheel_axial_inertia_kg_m2", out);
        positive(self.wheel_max_torque_nm, "vehicle.wheel_max_torque_nm", out);
        positive(self.wheel_max_speed_rad_s, "vehicle.wheel_max_speed_rad_s", out);
        positive(self.thruster_radius_m, "vehicle.thruster_radius_m", out);
        positive(self.thruster_max_thrust_n, "vehicle.thruster_max_thrust_n", out);
        positive(self.gravity_m_s2, "vehicle.gravity_m_s2", out);
        positive(self.isp_s, "vehicle.isp_s", out);
        for (i, g) in self.kp.iter().enumerate() {
            positive(*g, &format!("vehicle.kp[{i}]"), out);
        }
        for (i, g) in self.kd.iter().enumerate() {
            positive(*g, &format!("vehicle.kd[{i}]"), out);
        }
    }
}

// ---------------------------------------------------------------------------
// hop
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThrottleConfig {
    Constant(f64),
    Piecewise(Vec<(f64, f64)>),
}

impl ThrottleConfig {
    pub fn to_profile(&self) -> ThrottleProfile {
        match self {
            ThrottleConfig::Constant(u) => ThrottleProfile::Constant(*u),
            ThrottleConfig::Piecewise(p) => ThrottleProfile::Piecewise(p.clone()),
        }
    }

    fn violations(&self, out: &mut Vec<String>) {
        match self {
            ThrottleConfig::Constant(u) => {
                if !(0.0..=1.0).contains(u) {
                    out.push(format!("throttle.constant: {u} outside [0, 1]"));
                }
            }
            ThrottleConfig::Piecewise(points) => {
                for (i, (t, u)) in points.iter().enumerate() {
                    if !(0.0..=1.0).contains(u) {
                        out.push(format!("throttle.piecewise[{i}]: level {u} outside [0, 1]"));
                    }
                    if i > 0 && *t < points[i - 1].0 {
                        out.push(format!(
                            "throttle.piecewise[{i}]: time {t} earlier than the previous point"
                        ));
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct HopConfig {
    pub vehicle: VehicleConfig,
    pub burn_duration_s: f64,
    /// Commanded roll, pitch, yaw during the burn, rad.
    pub target_attitude_rad: [f64; 3],
    pub throttle: ThrottleConfig,
    pub coast_termination_m: f64,
    /// Initial attitude as roll, pitch, yaw, rad.
    pub initial_attitude_rad: [f64; 3],
    pub dt_burn_s: f64,
    pub dt_coast_s: f64,
}

impl Default for HopConfig {
    fn default() -> Self {
        Self {
            vehicle: VehicleConfig::default(),
            burn_duration_s: 1.0,
            target_attitude_rad: [0.0, 0.25, 0.0],
            throttle: ThrottleConfig::Constant(1.0),
            coast_termination_m: 0.0,
            initial_attitude_rad: [0.0, 0.25, 0.0],
            dt_burn_s: 1e-3,
            dt_coast_s: 1e-2,
        }
    }
}

impl HopConfig {
    pub fn initial_state(&self) -> RobotState {
        let e = self.initial_attitude_rad;
        RobotState {
            attitude: UnitQuaternion::from_euler_angles(e[0], e[1], e[2]),
            ..RobotState::at_rest(self.vehicle.mass_kg)
        }
    }

    pub fn plan(&self) -> HopPlan {
        let t = self.target_attitude_rad;
        HopPlan {
            burn_duration: self.burn_duration_s,
            target_attitude: Vector3::new(t[0], t[1], t[2]),
            throttle_profile: self.throttle.to_profile(),
            coast_termination: self.coast_termination_m,
        }
    }

    pub fn step_sizes(&self) -> StepSizes {
        StepSizes { burn: self.dt_burn_s, coast: self.dt_coast_s }
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        self.vehicle.violations(&mut v);
        non_negative(self.burn_duration_s, "burn_duration_s", &mut v);
        self.throttle.violations(&mut v);
        positive(self.dt_burn_s, "dt_burn_s", &mut v);
        positive(self.dt_coast_s, "dt_coast_s", &mut v);
        v
    }
}

// ---------------------------------------------------------------------------
// attitude
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct AttitudeConfig {
    pub vehicle: VehicleConfig,
    pub target_attitude_rad: [f64; 3],
    pub duration_s: f64,
    pub dt_s: f64,
}

impl Default for AttitudeConfig {
    fn default() -> Self {
        Self {
            vehicle: VehicleConfig::default(),
            target_attitude_rad: [0.27, 0.25, 0.07],
            duration_s: 5.0,
            dt_s: 1e-3,
        }
    }
}

impl AttitudeConfig {
    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        self.vehicle.violations(&mut v);
        non_negative(self.duration_s, "duration_s", &mut v);
        positive(self.dt_s, "dt_s", &mut v);
        v
    }
}

// ---------------------------------------------------------------------------
// plan-path
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
pub struct ObstacleConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub obstacles: Vec<ObstacleConfig>,
    pub goal: [f64; 2],
    pub workspace_radius: f64,
    pub kappa: u32,
}

impl Default for WorldConfig {
    fn default() -> Self {
        let w = SphereWorld::reference_world();
        Self {
            obstacles: w
                .obstacles
                .iter()
                .map(|o| ObstacleConfig { center: o.center, radius: o.radius })
                .collect(),
            goal: w.goal,
            workspace_radius: w.workspace_radius,
            kappa: w.kappa,
        }
    }
}

impl WorldConfig {
    pub fn to_world(&self) -> SphereWorld {
        SphereWorld {
            obstacles: self
                .obstacles
                .iter()
                .map(|o| Obstacle { center: o.center, radius: o.radius })
                .collect(),
            goal: self.goal,
            workspace_radius: self.workspace_radius,
            kappa: self.kappa,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct PlanPathConfig {
    pub world: WorldConfig,
    pub start: [f64; 2],
    pub step_m: f64,
    pub tolerance_m: f64,
    pub max_iters: usize,
    /// Contour grid resolution (n x n nodes).
    pub grid_n: usize,
    /// Extra random free-space starts for a convergence sweep (0 = skip).
    pub sweep_starts: usize,
    pub sweep_margin_m: f64,
    pub seed: u64,
}

impl Default for PlanPathConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            start: [0.6, 0.73],
            step_m: 0.005,
            tolerance_m: 0.01,
            max_iters: 20_000,
            grid_n: 200,
            sweep_starts: 0,
            sweep_margin_m: 0.005,
            seed: 0,
        }
    }
}

impl PlanPathConfig {
    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let w = &self.world;
        if w.kappa < 2 {
            v.push(format!("world.kappa: must be >= 2, got {}", w.kappa));
        }
        positive(w.workspace_radius, "world.workspace_radius", &mut v);
        for (i, o) in w.obstacles.iter().enumerate() {
            positive(o.radius, &format!("world.obstacles[{i}].radius"), &mut v);
        }
        for i in 0..w.obstacles.len() {
            for j in (i + 1)..w.obstacles.len() {
                let (a, b) = (&w.obstacles[i], &w.obstacles[j]);
                let dx = a.center[0] - b.center[0];
                let dy = a.center[1] - b.center[1];
                let dist = (dx * dx + dy * dy).sqrt();
                if dist <= a.radius + b.radius {
                    v.push(format!(
                        "world.obstacles[{i}]/world.obstacles[{j}]: overlapping (center distance {dist:.4} <= radius sum {:.4})",
                        a.radius + b.radius
                    ));
                }
            }
        }
        let inside = |p: [f64; 2], o: &ObstacleConfig| {
            let dx = p[0] - o.center[0];
            let dy = p[1] - o.center[1];
            (dx * dx + dy * dy).sqrt() <= o.radius
        };
        for (i, o) in w.obstacles.iter().enumerate() {
            if inside(w.goal, o) {
                v.push(format!("world.goal: lies inside world.obstacles[{i}]"));
            }
            if inside(self.start, o) {
                v.push(format!("start: lies inside world.obstacles[{i}]"));
            }
        }
        positive(self.step_m, "step_m", &mut v);
        positive(self.tolerance_m, "tolerance_m", &mut v);
        if self.grid_n < 2 {
            v.push(format!("grid_n: must be >= 2, got {}", self.grid_n));
        }
        v
    }
}

// ---------------------------------------------------------------------------
// survey
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub pixels: [u32; 2],
    pub focal_length_mm: f64,
    pub fov_h_deg: f64,
    pub fov_v_deg: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self { pixels: [1280, 800], focal_length_mm: 2.5, fov_h_deg: 75.0, fov_v_deg: 47.0 }
    }
}

impl CameraConfig {
    pub fn to_camera(&self) -> Result<CameraModel, hopsim_core::Error> {
        CameraModel::from_fov(
            self.pixels[0],
            self.pixels[1],
            self.focal_length_mm * 1e-3,
            self.fov_h_deg.to_radians(),
            self.fov_v_deg.to_radians(),
        )
    }

    fn violations(&self, out: &mut Vec<String>) {
        if self.pixels[0] == 0 || self.pixels[1] == 0 {
            out.push(format!(
                "camera.pixels: counts must be positive, got {:?}",
                self.pixels
            ));
        }
        positive(self.focal_length_mm, "camera.focal_length_mm", out);
        if !(self.fov_h_deg > 0.0 && self.fov_h_deg < 180.0) {
            out.push(format!("camera.fov_h_deg: must lie in (0, 180), got {}", self.fov_h_deg));
        }
        if !(self.fov_v_deg > 0.0 && self.fov_v_deg < 180.0) {
            out.push(format!("camera.fov_v_deg: must lie in (0, 180), got {}", self.fov_v_deg));
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct CaveConfig {
    pub length_m: f64,
    pub height_m: f64,
    pub width_m: f64,
    pub comm_range_m: f64,
}

impl Default for CaveConfig {
    fn default() -> Self {
        Self { length_m: 1000.0, height_m: 3.0, width_m: 4.0, comm_range_m: 30.0 }
    }
}

impl CaveConfig {
    pub fn to_cave(&self) -> hopsim_core::mission::CaveSpec {
        hopsim_core::mission::CaveSpec {
            length: self.length_m,
            height: self.height_m,
            width: self.width_m,
            comm_range: self.comm_range_m,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct TimingConfig {
    pub transit_hop_min: f64,
    pub scan_hop_min: f64,
    pub include_hop_count_term: bool,
}

impl Default for TimingConfig {
    fn default() -> Self {
        let t = hopsim_core::mission::HopTiming::default();
        Self {
            transit_hop_min: t.transit_hop_min,
            scan_hop_min: t.scan_hop_min,
            include_hop_count_term: t.include_hop_count_term,
        }
    }
}

impl TimingConfig {
    pub fn to_timing(&self) -> hopsim_core::mission::HopTiming {
        hopsim_core::mission::HopTiming {
            transit_hop_min: self.transit_hop_min,
            scan_hop_min: self.scan_hop_min,
            include_hop_count_term: self.include_hop_count_term,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct SurveyConfig {
    pub cave: CaveConfig,
    pub camera: CameraConfig,
    pub target_resolution: f64,
    pub timing: TimingConfig,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        Self {
            cave: CaveConfig::default(),
            camera: CameraConfig::default(),
            target_resolution: 5.0,
            timing: TimingConfig::default(),
        }
    }
}

impl SurveyConfig {
    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        positive(self.cave.length_m, "cave.length_m", &mut v);
        positive(self.cave.height_m, "cave.height_m", &mut v);
        positive(self.cave.width_m, "cave.width_m", &mut v);
        positive(self.cave.comm_range_m, "cave.comm_range_m", &mut v);
        self.camera.violations(&mut v);
        positive(self.target_resolution, "target_resolution", &mut v);
        non_negative(self.timing.transit_hop_min, "timing.transit_hop_min", &mut v);
        non_negative(self.timing.scan_hop_min, "timing.scan_hop_min", &mut v);
        v
    }
}

// ---------------------------------------------------------------------------
// relay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct RelayConfig {
    pub robots: usize,
    pub cave_length_m: f64,
    pub comm_range_m: f64,
    pub link_rate_bps: f64,
    pub per_link_latency_s: f64,
    /// Explicit node positions override the evenly spaced layout.
    pub node_positions_m: Option<Vec<f64>>,
    pub payload_bits: f64,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            robots: 36,
            cave_length_m: 1000.0,
            comm_range_m: 30.0,
            link_rate_bps: 1.0e6,
            per_link_latency_s: 5.0e-3,
            node_positions_m: None,
            payload_bits: 1.0e6,
        }
    }
}

impl RelayConfig {
    pub fn to_chain(&self) -> hopsim_core::mission::RelayChain {
        let mut chain = hopsim_core::mission::RelayChain::evenly_spaced(
            self.robots,
            self.cave_length_m,
            self.comm_range_m,
        );
        chain.link_rate = self.link_rate_bps;
        chain.per_link_latency = self.per_link_latency_s;
        if let Some(pos) = &self.node_positions_m {
            chain.node_positions = pos.clone();
        }
        chain
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.robots < 2 && self.node_positions_m.is_none() {
            v.push(format!("robots: need at least 2 relay nodes, got {}", self.robots));
        }
        positive(self.cave_length_m, "cave_length_m", &mut v);
        positive(self.comm_range_m, "comm_range_m", &mut v);
        positive(self.link_rate_bps, "link_rate_bps", &mut v);
        non_negative(self.per_link_latency_s, "per_link_latency_s", &mut v);
        non_negative(self.payload_bits, "payload_bits", &mut v);
        if let Some(pos) = &self.node_positions_m {
            for (i, w) in pos.windows(2).enumerate() {
                let gap = (w[1] - w[0]).abs();
                if gap > self.comm_range_m {
                    v.push(format!(
                        "node_positions_m[{i}]/node_positions_m[{}]: gap {gap} m exceeds comm_range_m {}",
                        i + 1,
                        self.comm_range_m
                    ));
                }
            }
        } else {
            let hops = self.robots.saturating_sub(1).max(1) as f64;
            if self.cave_length_m / hops > self.comm_range_m {
                v.push(format!(
                    "robots: {} nodes spaced over {} m exceed comm_range_m {}",
                    self.robots, self.cave_length_m, self.comm_range_m
                ));
            }
        }
        v
    }
}

// ---------------------------------------------------------------------------
// tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct TablesConfig {
    /// Which table to emit: "2", "3", "4" or "all".
    pub which: String,
    pub propellant_db: Option<PathBuf>,
    pub timing: TimingConfig,
}

impl Default for TablesConfig {
    fn default() -> Self {
        Self { which: "all".to_string(), propellant_db: None, timing: TimingConfig::default() }
    }
}

impl TablesConfig {
    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !matches!(self.which.as_str(), "2" | "3" | "4" | "all") {
            v.push(format!("which: expected one of 2, 3, 4, all; got {:?}", self.which));
        }
        v
    }
}

/// Locate the propellant database: an explicit path wins, then
/// `propellants.json` next to the current directory, then the copy
/// shipped at the repository root relative to the installed binary's
/// source tree.
pub fn resolve_propellant_db(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    let cwd = PathBuf::from("propellants.json");
    if cwd.exists() {
        return cwd;
    }
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../propellants.json"))
}

pub fn load_propellant_db(path: &Path) -> Result<Vec<PropellantRecord>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}
