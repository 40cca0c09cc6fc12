//! Scenario execution: each runner computes everything in memory and
//! returns the artifact set, so nothing touches the filesystem until the
//! whole scenario has succeeded.

use std::fmt::Write as _;

use nalgebra::Vector2;
use serde_json::{json, Value};

use hopsim_core::constants::MARS_GRAVITY;
use hopsim_core::mission::{plan_survey, simulate_relay};
use hopsim_core::navigation::{
    evaluate_grid, multi_start_sweep, navigation_potential, plan_path, range_for_resolution,
    sample_free_points, PlannerOptions,
};
use hopsim_core::propulsion::{hover_flight_time, ideal_isp, simulate_solid_burn};
use hopsim_core::dynamics::{simulate_attitude_regulation, simulate_hop};
use hopsim_core::Error as CoreError;

use crate::config::{
    load_propellant_db, resolve_propellant_db, AttitudeConfig, HopConfig, IspTableConfig,
    MotorBurnConfig, PlanPathConfig, PropellantFamily, PropellantRecord, RelayConfig,
    ScenarioConfig, SurveyConfig, TablesConfig,
};
use crate::reference;

/// Files produced by a successful scenario run, plus the headline lines
/// printed to stdout. `summary` is always written as `summary.json`.
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Value,
    pub headline: String,
}

impl Artifacts {
    fn new(headline: String, summary: Value) -> Self {
        Self { files: Vec::new(), summary, headline }
    }

    fn push_text(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }
}

#[derive(Debug)]
pub enum RunError {
    /// Unreadable or unparseable input (exit 2).
    Parse(String),
    /// Invariant or precondition violation (exit 3).
    Validation(String),
    /// NaN/Inf during computation (exit 4).
    Numeric(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) => 2,
            RunError::Validation(_) => 3,
            RunError::Numeric(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Parse(m) | RunError::Validation(m) | RunError::Numeric(m) => m,
        }
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Numeric { .. } => RunError::Numeric(e.to_string()),
            other => RunError::Validation(other.to_string()),
        }
    }
}

pub fn run_scenario(config: &ScenarioConfig, seed: Option<u64>) -> Result<Artifacts, RunError> {
    match config {
        ScenarioConfig::MotorBurn(c) => run_motor_burn(c),
        ScenarioConfig::IspTable(c) => run_isp_table(c),
        ScenarioConfig::Hop(c) => run_hop(c),
        ScenarioConfig::Attitude(c) => run_attitude(c),
        ScenarioConfig::PlanPath(c) => run_plan_path(c, seed),
        ScenarioConfig::Survey(c) => run_survey(c),
        ScenarioConfig::Relay(c) => run_relay(c),
        ScenarioConfig::Tables(c) => run_tables(c),
    }
}

fn run_motor_burn(cfg: &MotorBurnConfig) -> Result<Artifacts, RunError> {
    let profile = simulate_solid_burn(&cfg.motor, cfg.dt_s)?;

    let mut csv = String::from("t,chamber_pressure,thrust,isp,web_burned,propellant_mass_remaining\n");
    for s in &profile.samples {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            s.t, s.chamber_pressure, s.thrust, s.isp, s.web_burned, s.propellant_mass_remaining
        )
        .unwrap();
    }

    let summary = json!({
        "scenario": "motor-burn",
        "burn_time_s": profile.burnout_time,
        "peak_chamber_pressure_pa": profile.peak_pressure(),
        "peak_thrust_n": profile.peak_thrust(),
        "total_impulse_n_s": profile.total_impulse,
        "initial_propellant_mass_kg": profile.initial_propellant_mass,
        "propellant_consumed_kg": profile.propellant_consumed,
        "samples": profile.samples.len(),
    });
    let headline = format!(
        "motor-burn: {:.3} s burn, peak {:.3} MPa / {:.2} N, total impulse {:.2} N s",
        profile.burnout_time,
        profile.peak_pressure() / 1e6,
        profile.peak_thrust(),
        profile.total_impulse
    );
    let mut artifacts = Artifacts::new(headline, summary);
    artifacts.push_text("burn.csv", csv);
    Ok(artifacts)
}

fn load_records(
    inline: &[PropellantRecord],
    db: Option<&std::path::Path>,
) -> Result<Vec<PropellantRecord>, RunError> {
    if !inline.is_empty() {
        return Ok(inline.to_vec());
    }
    let path = resolve_propellant_db(db);
    load_propellant_db(&path).map_err(RunError::Parse)
}

fn run_isp_table(cfg: &IspTableConfig) -> Result<Artifacts, RunError> {
    let records = load_records(&cfg.propellants, cfg.propellant_db.as_deref())?;
    let mut csv = String::from(
        "name,oxidizer,family,molecular_weight_kg_kmol,combustion_temperature_k,gamma,isp_s,isp_reference_s,relative_error\n",
    );
    let mut worst: f64 = 0.0;
    for r in &records {
        let isp = ideal_isp(&r.spec, cfg.chamber_pressure_pa, cfg.exit_pressure_pa)?;
        let (reference, rel) = match r.isp_reference_s {
            Some(re) => {
                let rel = (isp - re) / re;
                worst = worst.max(rel.abs());
                (re.to_string(), rel.to_string())
            }
            None => (String::new(), String::new()),
        };
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.spec.name,
            r.oxidizer.as_deref().unwrap_or(""),
            r.family,
            r.spec.molecular_weight,
            r.spec.combustion_temperature,
            r.spec.gamma,
            isp,
            reference,
            rel
        )
        .unwrap();
    }

    let summary = json!({
        "scenario": "isp-table",
        "rows": records.len(),
        "chamber_pressure_pa": cfg.chamber_pressure_pa,
        "exit_pressure_pa": cfg.exit_pressure_pa,
        "max_abs_relative_error": worst,
    });
    let headline = format!(
        "isp-table: {} propellants at {:.1} MPa -> {:.0} Pa, worst reference error {:.2}%",
        records.len(),
        cfg.chamber_pressure_pa / 1e6,
        cfg.exit_pressure_pa,
        worst * 100.0
    );
    let mut artifacts = Artifacts::new(headline, summary);
    artifacts.push_text("isp.csv", csv);
    Ok(artifacts)
}

fn run_hop(cfg: &HopConfig) -> Result<Artifacts, RunError> {
    let params = cfg.vehicle.to_params();
    let traj = simulate_hop(&cfg.initial_state(), &cfg.plan(), &params, &cfg.step_sizes())?;

    let first = &traj.samples[0].state;
    let last = traj.final_state();
    let downrange = ((last.position.x - first.position.x).powi(2)
        + (last.position.y - first.position.y).powi(2))
    .sqrt();
    let apex = traj
        .samples
        .iter()
        .map(|s| s.state.position.z)
        .fold(f64::NEG_INFINITY, f64::max);

    let summary = json!({
        "scenario": "hop",
        "touchdown_time_s": traj.touchdown_time,
        "downrange_m": downrange,
        "apex_m": apex,
        "propellant_used_kg": first.mass - last.mass,
        "burn_truncated": traj.burn_truncated,
        "samples": traj.samples.len(),
    });
    let headline = format!(
        "hop: {:.2} m downrange, apex {:.2} m, touchdown at {:.2} s{}",
        downrange,
        apex,
        traj.touchdown_time.unwrap_or(f64::NAN),
        if traj.burn_truncated { " (burn truncated: propellant exhausted)" } else { "" }
    );
    let mut artifacts = Artifacts::new(headline, summary);
    artifacts.push_text("trajectory.csv", traj.to_csv_string());
    Ok(artifacts)
}

fn run_attitude(cfg: &AttitudeConfig) -> Result<Artifacts, RunError> {
    let params = cfg.vehicle.to_params();
    let initial = hopsim_core::dynamics::RobotState::at_rest(cfg.vehicle.mass_kg);
    let target = nalgebra::Vector3::from_column_slice(&cfg.target_attitude_rad);
    let traj = simulate_attitude_regulation(&initial, &target, &params, cfg.duration_s, cfg.dt_s)?;

    let last = traj.final_state();
    let euler = last.euler_angles();
    let rel_errors: Vec<f64> = (0..3)
        .map(|i| {
            if cfg.target_attitude_rad[i] == 0.0 {
                euler[i].abs()
            } else {
                ((euler[i] - cfg.target_attitude_rad[i]) / cfg.target_attitude_rad[i]).abs()
            }
        })
        .collect();
    let rate = last.body_rates.norm();
    let converged = rel_errors.iter().all(|&e| e < 0.02) && rate < 1e-3;
    let max_torque = traj
        .samples
        .iter()
        .map(|s| s.wheel_torque.amax())
        .fold(0.0, f64::max);
    let max_wheel_speed = traj
        .samples
        .iter()
        .map(|s| s.state.wheel_speeds.amax())
        .fold(0.0, f64::max);

    let summary = json!({
        "scenario": "attitude",
        "target_rad": cfg.target_attitude_rad,
        "final_euler_rad": [euler.x, euler.y, euler.z],
        "relative_errors": rel_errors,
        "final_rate_rad_s": rate,
        "converged": converged,
        "max_wheel_torque_nm": max_torque,
        "max_wheel_speed_rad_s": max_wheel_speed,
        "samples": traj.samples.len(),
    });
    let headline = format!(
        "attitude: reached ({:.4}, {:.4}, {:.4}) rad, |w| = {:.2e} rad/s, converged = {}",
        euler.x, euler.y, euler.z, rate, converged
    );
    let mut artifacts = Artifacts::new(headline, summary);
    artifacts.push_text("trajectory.csv", traj.to_csv_string());
    Ok(artifacts)
}

fn run_plan_path(cfg: &PlanPathConfig, seed: Option<u64>) -> Result<Artifacts, RunError> {
    let world = cfg.world.to_world();
    let start = Vector2::new(cfg.start[0], cfg.start[1]);
    let result = plan_path(&start, &world, cfg.step_m, cfg.tolerance_m, cfg.max_iters)?;

    let grid = evaluate_grid(&world, cfg.grid_n)?;
    let mut contour = String::from("x,y,phi\n");
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            writeln!(contour, "{},{},{}", grid.x(ix), grid.y(iy), grid.value(ix, iy)).unwrap();
        }
    }

    let mut path_csv = String::from("step,x,y,phi,clearance\n");
    for (i, w) in result.waypoints.iter().enumerate() {
        let q = Vector2::new(w[0], w[1]);
        let phi = navigation_potential(&q, &world).unwrap_or(f64::NAN);
        let clearance = world
            .obstacles
            .iter()
            .map(|o| o.clearance(&q))
            .fold(f64::INFINITY, f64::min);
        writeln!(path_csv, "{},{},{},{},{}", i, w[0], w[1], phi, clearance).unwrap();
    }

    let sweep_summary = if cfg.sweep_starts > 0 {
        let starts = sample_free_points(
            &world,
            cfg.sweep_starts,
            seed.unwrap_or(cfg.seed),
            cfg.sweep_margin_m,
        );
        let opts = PlannerOptions {
            step: cfg.step_m,
            tolerance: cfg.tolerance_m,
            max_iters: cfg.max_iters,
        };
        let results = multi_start_sweep(&starts, &world, &opts)?;
        let converged = results.iter().filter(|r| r.converged).count();
        json!({ "starts": cfg.sweep_starts, "converged": converged })
    } else {
        Value::Null
    };

    let summary = json!({
        "scenario": "plan-path",
        "converged": result.converged,
        "iterations": result.iterations,
        "waypoints": result.waypoints.len(),
        "closest_obstacle_clearance_m": result.closest_obstacle_clearance,
        "grid_n": cfg.grid_n,
        "sweep": sweep_summary,
    });
    let headline = format!(
        "plan-path: converged = {} in {} steps, min clearance {:.4} m",
        result.converged, result.iterations, result.closest_obstacle_clearance
    );
    let mut artifacts = Artifacts::new(headline, summary);
    artifacts.push_text("contour.csv", contour);
    artifacts.push_text("path.csv", path_csv);
    Ok(artifacts)
}

fn run_survey(cfg: &SurveyConfig) -> Result<Artifacts, RunError> {
    let camera = cfg.camera.to_camera()?;
    let plan = plan_survey(
        &cfg.cave.to_cave(),
        &camera,
        cfg.target_resolution,
        &cfg.timing.to_timing(),
    )?;

    let mut csv = String::from(
        "resolution,camera_range_m,cave_length_m,robots,transit_hops,scan_stops,total_hops,map_time_min\n",
    );
    writeln!(
        csv,
        "{},{},{},{},{},{},{},{}",
        plan.target_resolution,
        plan.camera_range,
        cfg.cave.length_m,
        plan.robots_required,
        plan.transit_hops,
        plan.scan_stops,
        plan.total_hops,
        plan.mapping_time_min
    )
    .unwrap();

    let summary = json!({
        "scenario": "survey",
        "cave_length_m": cfg.cave.length_m,
        "target_resolution": plan.target_resolution,
        "camera_range_m": plan.camera_range,
        "robots_required": plan.robots_required,
        "transit_hops": plan.transit_hops,
        "scan_stops": plan.scan_stops,
        "total_hops": plan.total_hops,
        "mapping_time_min": plan.mapping_time_min,
    });
    let headline = format!(
        "survey: {:.0} m cave at resolution {} -> {} robots, camera range {:.2} m, {:.0} min",
        cfg.cave.length_m,
        plan.target_resolution,
        plan.robots_required,
        plan.camera_range,
        plan.mapping_time_min
    );
    let mut artifacts = Artifacts::new(headline, summary);
    artifacts.push_text("survey.csv", csv);
    Ok(artifacts)
}

fn run_relay(cfg: &RelayConfig) -> Result<Artifacts, RunError> {
    let chain = cfg.to_chain();
    let outcome = simulate_relay(&chain, cfg.payload_bits)?;

    let mut csv = String::from("node,position_m,received_s,forwarded_s\n");
    for ev in &outcome.timeline {
        writeln!(
            csv,
            "{},{},{},{}",
            ev.node,
            chain.node_positions[ev.node],
            ev.received_at,
            ev.forwarded_at.map(|t| t.to_string()).unwrap_or_default()
        )
        .unwrap();
    }

    let summary = json!({
        "scenario": "relay",
        "nodes": chain.node_positions.len(),
        "hops": chain.hops(),
        "payload_bits": cfg.payload_bits,
        "link_rate_bps": chain.link_rate,
        "per_link_latency_s": chain.per_link_latency,
        "end_to_end_latency_s": outcome.end_to_end_latency,
    });
    let headline = format!(
        "relay: {} nodes / {} hops, {:.0} bit payload -> {:.3} s end to end",
        chain.node_positions.len(),
        chain.hops(),
        cfg.payload_bits,
        outcome.end_to_end_latency
    );
    let mut artifacts = Artifacts::new(headline, summary);
    artifacts.push_text("timeline.csv", csv);
    Ok(artifacts)
}

fn propellant_table_csv(records: &[PropellantRecord]) -> Result<(String, f64, f64), RunError> {
    let mut csv = String::from(
        "name,oxidizer,family,molecular_weight_kg_kmol,combustion_temperature_k,isp_s,isp_reference_s,isp_relative_error,flight_time_s,flight_time_reference_s,flight_time_relative_error\n",
    );
    let mut worst_isp: f64 = 0.0;
    let mut worst_time: f64 = 0.0;
    for r in records {
        let isp = ideal_isp(
            &r.spec,
            reference::REFERENCE_CHAMBER_PRESSURE,
            reference::REFERENCE_EXIT_PRESSURE,
        )?;
        let isp_ref = r.isp_reference_s.unwrap_or(f64::NAN);
        let isp_rel = (isp - isp_ref) / isp_ref;
        worst_isp = worst_isp.max(isp_rel.abs());

        // Flight time from the published Isp with the single fitted tank
        // load, so the two comparisons stay independent.
        let time = hover_flight_time(
            isp_ref,
            reference::REFERENCE_INITIAL_MASS,
            reference::REFERENCE_PROPELLANT_MASS,
            MARS_GRAVITY,
        )?;
        let time_ref = r.flight_time_reference_s.unwrap_or(f64::NAN);
        let time_rel = (time - time_ref) / time_ref;
        worst_time = worst_time.max(time_rel.abs());

        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.spec.name,
            r.oxidizer.as_deref().unwrap_or(""),
            r.family,
            r.spec.molecular_weight,
            r.spec.combustion_temperature,
            isp,
            isp_ref,
            isp_rel,
            time,
            time_ref,
            time_rel
        )
        .unwrap();
    }
    Ok((csv, worst_isp, worst_time))
}

struct SurveyTable {
    csv: String,
    worst_time_error: f64,
    worst_range_error: f64,
    robots_match: bool,
}

fn survey_table_csv(cfg: &TablesConfig) -> Result<SurveyTable, RunError> {
    let camera = crate::config::CameraConfig::default().to_camera()?;
    let timing = cfg.timing.to_timing();
    let mut csv = String::from(
        "resolution,camera_range_m,cave_length_m,robots,map_time_min,paper_time_min,relative_error\n",
    );
    let mut worst_time_error: f64 = 0.0;
    let mut worst_range_error: f64 = 0.0;
    let mut robots_match = true;
    for (i, &res) in reference::TABLE4_RESOLUTIONS.iter().enumerate() {
        let range = range_for_resolution(&camera, res)?;
        worst_range_error = worst_range_error
            .max((range - reference::TABLE4_RANGES_M[i]).abs() / reference::TABLE4_RANGES_M[i]);
        for (j, &length) in reference::TABLE4_CAVE_LENGTHS_M.iter().enumerate() {
            let cave = hopsim_core::mission::CaveSpec::new(length);
            let plan = plan_survey(&cave, &camera, res, &timing)?;
            robots_match &= plan.robots_required == reference::TABLE4_ROBOTS[j];
            let published = reference::TABLE4_TIMES_MIN[i][j];
            let rel = (plan.mapping_time_min - published) / published;
            worst_time_error = worst_time_error.max(rel.abs());
            writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                res, range, length, plan.robots_required, plan.mapping_time_min, published, rel
            )
            .unwrap();
        }
    }
    Ok(SurveyTable { csv, worst_time_error, worst_range_error, robots_match })
}

fn run_tables(cfg: &TablesConfig) -> Result<Artifacts, RunError> {
    let records = load_records(&[], cfg.propellant_db.as_deref())?;
    let solids: Vec<PropellantRecord> = records
        .iter()
        .filter(|r| r.family == PropellantFamily::Solid)
        .cloned()
        .collect();
    let liquids: Vec<PropellantRecord> = records
        .iter()
        .filter(|r| r.family != PropellantFamily::Solid)
        .cloned()
        .collect();

    let mut summary_fields = serde_json::Map::new();
    summary_fields.insert("scenario".into(), json!("tables"));
    summary_fields.insert("which".into(), json!(cfg.which));
    let mut lines = Vec::new();
    let mut artifacts_files: Vec<(String, Vec<u8>)> = Vec::new();

    if matches!(cfg.which.as_str(), "2" | "all") {
        let (csv, worst_isp, worst_time) = propellant_table_csv(&solids)?;
        artifacts_files.push(("table2.csv".into(), csv.into_bytes()));
        summary_fields.insert(
            "table2".into(),
            json!({"rows": solids.len(), "worst_isp_error": worst_isp, "worst_flight_time_error": worst_time}),
        );
        lines.push(format!(
            "table 2 (solids): worst Isp error {:.1}%, worst flight-time error {:.1}%",
            worst_isp * 100.0,
            worst_time * 100.0
        ));
    }
    if matches!(cfg.which.as_str(), "3" | "all") {
        let (csv, worst_isp, worst_time) = propellant_table_csv(&liquids)?;
        artifacts_files.push(("table3.csv".into(), csv.into_bytes()));
        summary_fields.insert(
            "table3".into(),
            json!({"rows": liquids.len(), "worst_isp_error": worst_isp, "worst_flight_time_error": worst_time}),
        );
        lines.push(format!(
            "table 3 (liquids): worst Isp error {:.1}%, worst flight-time error {:.1}%",
            worst_isp * 100.0,
            worst_time * 100.0
        ));
    }
    if matches!(cfg.which.as_str(), "4" | "all") {
        let table = survey_table_csv(cfg)?;
        artifacts_files.push(("table4.csv".into(), table.csv.into_bytes()));
        summary_fields.insert(
            "table4".into(),
            json!({
                "cells": 24,
                "worst_time_error": table.worst_time_error,
                "worst_camera_range_error": table.worst_range_error,
                "robot_counts_match": table.robots_match,
            }),
        );
        lines.push(format!(
            "table 4 (survey sizing): robots match = {}, worst range error {:.2}%, worst mapping-time error {:.1}%",
            table.robots_match,
            table.worst_range_error * 100.0,
            table.worst_time_error * 100.0
        ));
    }
    if lines.is_empty() {
        return Err(RunError::Validation(format!(
            "which: expected one of 2, 3, 4, all; got {:?}",
            cfg.which
        )));
    }

    let mut artifacts = Artifacts::new(lines.join("\n"), Value::Object(summary_fields));
    artifacts.files = artifacts_files;
    Ok(artifacts)
}
