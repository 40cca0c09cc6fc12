//! Mission-level feasibility: relay-chain sizing, hop-count and
//! mapping-time estimates for cave surveys, and a deterministic
//! store-and-forward relay simulation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navigation::{range_for_resolution, CameraModel};

/// Cave under survey. Lengths in meters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaveSpec {
    pub length: f64,
    #[serde(default = "default_height")]
    pub height: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    /// Radio range between adjacent relay robots, m.
    #[serde(default = "default_comm_range")]
    pub comm_range: f64,
}

fn default_height() -> f64 {
    3.0
}

fn default_width() -> f64 {
    4.0
}

fn default_comm_range() -> f64 {
    30.0
}

impl CaveSpec {
    pub fn new(length: f64) -> Self {
        Self {
            length,
            height: default_height(),
            width: default_width(),
            comm_range: default_comm_range(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("height", self.height),
            ("width", self.width),
            ("comm_range", self.comm_range),
        ] {
            if !(v > 0.0) {
                return Err(Error::validation(format!(
                    "cave.{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Hop budget split into relay-advance transits and mapping stops.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HopBudget {
    pub transit: f64,
    pub scan: f64,
    pub total: f64,
}

/// Per-hop timing constants, minutes. Fitted so the survey-time model
/// reproduces the published quarter-kilometer column to within a minute.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HopTiming {
    /// Time per 30 m relay-advance hop, min.
    pub transit_hop_min: f64,
    /// Time per 2R mapping hop, min (excluding the 1-minute panorama).
    pub scan_hop_min: f64,
    /// Restore the literal published formula, which adds the raw hop
    /// count as extra minutes. Off by default: with it on, matching the
    /// published table requires a negative per-scan hop time.
    pub include_hop_count_term: bool,
}

impl Default for HopTiming {
    fn default() -> Self {
        Self {
            transit_hop_min: 1.35,
            scan_hop_min: 0.125,
            include_hop_count_term: false,
        }
    }
}

/// Robots needed to cover a cave of length d: one relay per comm-range
/// segment (rounded up) plus the two base robots.
pub fn robots_required(d: f64, comm_range: f64) -> Result<u32> {
    if !(d >= 0.0) {
        return Err(Error::validation(format!("cave length must be >= 0, got {d}")));
    }
    if !(comm_range > 0.0) {
        return Err(Error::validation(format!(
            "comm_range must be positive, got {comm_range}"
        )));
    }
    Ok((d / comm_range).ceil() as u32 + 2)
}

/// Hop counts to survey a cave: d/comm_range relay advances plus d/(2R)
/// mapping stops, one per camera-range diameter. Fractional values are
/// retained for the time model.
pub fn hops_required(d: f64, camera_range: f64, comm_range: f64) -> Result<HopBudget> {
    if !(d >= 0.0) {
        return Err(Error::validation(format!("cave length must be >= 0, got {d}")));
    }
    if !(camera_range > 0.0) {
        return Err(Error::validation(format!(
            "camera_range must be positive, got {camera_range}"
        )));
    }
    if !(comm_range > 0.0) {
        return Err(Error::validation(format!(
            "comm_range must be positive, got {comm_range}"
        )));
    }
    let transit = d / comm_range;
    let scan = d / (2.0 * camera_range);
    Ok(HopBudget { transit, scan, total: transit + scan })
}

/// Shortest time to map a cave, minutes:
/// (d/comm_range) * t_h1 + (d/2R) * (t_h2 + 1), the "+1" being the
/// one-minute turret panorama at each mapping stop.
pub fn mapping_time(
    d: f64,
    camera_range: f64,
    timing: &HopTiming,
    comm_range: f64,
) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::validation(format!("cave length must be positive, got {d}")));
    }
    if !(timing.transit_hop_min >= 0.0 && timing.scan_hop_min >= 0.0) {
        return Err(Error::validation("hop times must be non-negative"));
    }
    let hops = hops_required(d, camera_range, comm_range)?;
    let mut total = hops.transit * timing.transit_hop_min + hops.scan * (timing.scan_hop_min + 1.0);
    if timing.include_hop_count_term {
        total += hops.total;
    }
    Ok(total)
}

/// Sized survey: robot team, hop budget and mapping time for a cave at a
/// target resolution.
#[derive(Debug, Clone, Serialize)]
pub struct SurveyPlan {
    pub robots_required: u32,
    pub transit_hops: f64,
    pub scan_stops: f64,
    pub total_hops: f64,
    pub mapping_time_min: f64,
    pub target_resolution: f64,
    pub camera_range: f64,
}

/// Compose the sizing chain: camera range from the resolution target,
/// then robots, hops and time.
pub fn plan_survey(
    cave: &CaveSpec,
    camera: &CameraModel,
    target_resolution: f64,
    timing: &HopTiming,
) -> Result<SurveyPlan> {
    cave.validate()?;
    let camera_range = range_for_resolution(camera, target_resolution)?;
    let robots = robots_required(cave.length, cave.comm_range)?;
    let hops = hops_required(cave.length, camera_range, cave.comm_range)?;
    let time = mapping_time(cave.length, camera_range, timing, cave.comm_range)?;
    Ok(SurveyPlan {
        robots_required: robots,
        transit_hops: hops.transit,
        scan_stops: hops.scan,
        total_hops: hops.total,
        mapping_time_min: time,
        target_resolution,
        camera_range,
    })
}

/// A bucket-brigade relay chain: robots strung along the cave, each
/// forwarding the full payload to the next.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelayChain {
    /// Node positions along the cave, m, in transmission order.
    pub node_positions: Vec<f64>,
    /// Maximum link span, m.
    pub comm_range: f64,
    /// Link rate, bits/s.
    pub link_rate: f64,
    /// Fixed per-link latency (propagation + turnaround), s.
    pub per_link_latency: f64,
}

impl RelayChain {
    /// Evenly spaced chain of `nodes` robots across `length` meters.
    pub fn evenly_spaced(nodes: usize, length: f64, comm_range: f64) -> Self {
        let positions = if nodes <= 1 {
            vec![0.0; nodes]
        } else {
            (0..nodes)
                .map(|i| length * i as f64 / (nodes - 1) as f64)
                .collect()
        };
        Self {
            node_positions: positions,
            comm_range,
            link_rate: 1.0e6,
            per_link_latency: 5.0e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_positions.len() < 2 {
            return Err(Error::validation("relay chain needs at least two nodes"));
        }
        if !(self.comm_range > 0.0) {
            return Err(Error::validation("comm_range must be positive"));
        }
        if !(self.link_rate > 0.0) {
            return Err(Error::validation("link_rate must be positive"));
        }
        if !(self.per_link_latency >= 0.0) {
            return Err(Error::validation("per_link_latency must be non-negative"));
        }
        for (i, w) in self.node_positions.windows(2).enumerate() {
            let gap = (w[1] - w[0]).abs();
            if gap > self.comm_range {
                return Err(Error::BrokenChain {
                    node_a: i,
                    node_b: i + 1,
                    gap_m: gap,
                    range_m: self.comm_range,
                });
            }
        }
        Ok(())
    }

    pub fn hops(&self) -> usize {
        self.node_positions.len() - 1
    }
}

/// Receive/forward instants of one relay node.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RelayEvent {
    pub node: usize,
    /// When the node finishes receiving the payload, s. Zero at the source.
    pub received_at: f64,
    /// When the node finishes transmitting downstream, s. Absent at the sink.
    pub forwarded_at: Option<f64>,
}

/// Outcome of pushing one payload through the chain.
#[derive(Debug, Clone, Serialize)]
pub struct RelayOutcome {
    pub end_to_end_latency: f64,
    pub timeline: Vec<RelayEvent>,
}

/// Store-and-forward relay: each node receives the whole payload before
/// retransmitting, so the end-to-end latency is
/// hops * (payload/rate + per-link latency).
pub fn simulate_relay(chain: &RelayChain, payload_bits: f64) -> Result<RelayOutcome> {
    chain.validate()?;
    if !(payload_bits >= 0.0) {
        return Err(Error::validation("payload size must be non-negative"));
    }
    let per_hop = payload_bits / chain.link_rate + chain.per_link_latency;
    let n = chain.node_positions.len();
    let mut timeline = Vec::with_capacity(n);
    let mut t = 0.0;
    for node in 0..n {
        let received_at = t;
        let forwarded_at = if node + 1 < n {
            t += per_hop;
            Some(t)
        } else {
            None
        };
        timeline.push(RelayEvent { node, received_at, forwarded_at });
    }
    Ok(RelayOutcome { end_to_end_latency: t, timeline })
}
