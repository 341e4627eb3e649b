//! Value types, unit conventions and planar geometry.
//!
//! Units are fixed across the crate: meters, seconds, watt-hours, megabytes
//! (8 megabits each), million instructions (MI) and MIPS. The monitoring
//! region is the axis-aligned square `[0, side]²` with `side = sqrt(area)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Megabits per megabyte.
pub const MEGABITS_PER_MEGABYTE: f64 = 8.0;

const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        distance(self, other)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Point at fraction `t` of the way from `self` to `other`.
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Point, b: Point) -> f64 {
    libm::hypot(a.x - b.x, a.y - b.y)
}

/// Per-period service request of a sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RequestProfile {
    /// Data volume uploaded per period (MB).
    pub data_size_mb: f64,
    /// Compute demand per period (MI).
    pub compute_mi: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sensor {
    pub id: usize,
    pub pos: Point,
    /// Number of recorded fires near the sensor.
    pub fire_history: u32,
    pub request: RequestProfile,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeNode {
    pub id: usize,
    pub pos: Point,
    pub capacity_mips: f64,
}

/// Physical and operational parameters of a deployment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalParams {
    pub area_km2: f64,
    /// Sensor radio range (m).
    pub r_s: f64,
    /// UAV radio range (m).
    pub r_g: f64,
    /// Edge node radio range (m).
    pub r_e: f64,
    pub data_rate_mbps: f64,
    /// UAV cruise speed (m/s).
    pub v_g: f64,
    pub p_fly_w: f64,
    pub p_comm_w: f64,
    /// Battery capacity (Wh).
    pub e_max_wh: f64,
    /// Maximum revisit period (s).
    pub t_max_s: f64,
    /// Monitoring period over which each sensor issues one request (s).
    pub t_period_s: f64,
    /// Deadline for urgent requests (s).
    pub t_urgent_s: f64,
    /// Fleet size cap.
    pub m_max: usize,
    /// Latency per radio hop (s).
    pub per_hop_latency_s: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            area_km2: 100.0,
            r_s: 500.0,
            r_g: 1000.0,
            r_e: 2000.0,
            data_rate_mbps: 10.0,
            v_g: 15.0,
            p_fly_w: 100.0,
            p_comm_w: 5.0,
            e_max_wh: 500.0,
            t_max_s: 3600.0,
            t_period_s: 3600.0,
            t_urgent_s: 300.0,
            m_max: 20,
            per_hop_latency_s: 0.0,
        }
    }
}

impl PhysicalParams {
    /// Side length of the monitoring square (m).
    pub fn side_m(&self) -> f64 {
        libm::sqrt(self.area_km2 * 1.0e6)
    }

    /// Diagonal of the monitoring square (m), used to normalize distances.
    pub fn diagonal_m(&self) -> f64 {
        self.side_m() * core::f64::consts::SQRT_2
    }

    pub fn contains(&self, p: Point) -> bool {
        let side = self.side_m();
        p.is_finite() && (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y)
    }

    pub fn link_ranges(&self) -> LinkRanges {
        link_ranges(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("area_km2", self.area_km2),
            ("r_s", self.r_s),
            ("r_g", self.r_g),
            ("r_e", self.r_e),
            ("data_rate_mbps", self.data_rate_mbps),
            ("v_g", self.v_g),
            ("p_fly_w", self.p_fly_w),
            ("p_comm_w", self.p_comm_w),
            ("e_max_wh", self.e_max_wh),
            ("t_max_s", self.t_max_s),
            ("t_period_s", self.t_period_s),
            ("t_urgent_s", self.t_urgent_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.m_max == 0 {
            return Err(Error::param("m_max", "must be at least 1"));
        }
        if !(self.per_hop_latency_s.is_finite() && self.per_hop_latency_s >= 0.0) {
            return Err(Error::param("per_hop_latency_s", "must be finite and >= 0"));
        }
        if self.t_urgent_s > self.t_max_s {
            return Err(Error::param("t_urgent_s", "must not exceed t_max_s"));
        }
        Ok(())
    }

    /// Seconds needed to move `mb` megabytes over one link.
    pub fn transfer_seconds(&self, mb: f64) -> f64 {
        mb * MEGABITS_PER_MEGABYTE / self.data_rate_mbps
    }

    pub(crate) fn watt_seconds_to_wh(ws: f64) -> f64 {
        ws / SECONDS_PER_HOUR
    }
}

/// Starting fleet size for the sizing loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FleetInitMode {
    /// Start from a single UAV.
    #[default]
    One,
    /// Start from `ceil(area / (pi * r_sg^2))`, clamped to `[1, m_max]`.
    Coverage,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlgoParams {
    /// Fire-history weight coefficient.
    pub omega_h: f64,
    /// Distance weight in edge placement scores.
    pub omega_d: f64,
    /// Load weight in edge placement scores.
    pub omega_l: f64,
    /// Trade-off between route length and processing time in the objective.
    pub lambda: f64,
    /// K-means stops once every center moves less than this (m).
    pub epsilon_m: f64,
    /// Maximum edge utilization accepted for emergency delivery.
    pub theta_max: f64,
    pub max_kmeans_iters: usize,
    pub seed: u64,
    pub fleet_init_mode: FleetInitMode,
}

impl Default for AlgoParams {
    fn default() -> Self {
        AlgoParams {
            omega_h: 1.5,
            omega_d: 0.7,
            omega_l: 0.3,
            lambda: 0.1,
            epsilon_m: 10.0,
            theta_max: 0.8,
            max_kmeans_iters: 300,
            seed: 0,
            fleet_init_mode: FleetInitMode::One,
        }
    }
}

impl AlgoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_h.is_finite() && self.omega_h >= 0.0) {
            return Err(Error::param("omega_h", "must be finite and >= 0"));
        }
        for (name, v) in [("omega_d", self.omega_d), ("omega_l", self.omega_l)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        if libm::fabs(self.omega_d + self.omega_l - 1.0) > 1e-9 {
            return Err(Error::param("omega_l", "omega_d + omega_l must equal 1"));
        }
        if !(self.theta_max > 0.0 && self.theta_max <= 1.0) {
            return Err(Error::param("theta_max", "must lie in (0, 1]"));
        }
        if !(self.epsilon_m.is_finite() && self.epsilon_m > 0.0) {
            return Err(Error::param("epsilon_m", "must be finite and > 0"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::param("lambda", "must be finite and >= 0"));
        }
        if self.max_kmeans_iters == 0 {
            return Err(Error::param("max_kmeans_iters", "must be at least 1"));
        }
        Ok(())
    }
}

/// Effective link ranges, each limited by its shorter-range endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRanges {
    /// Sensor to UAV.
    pub r_sg: f64,
    /// UAV to edge.
    pub r_ge: f64,
    /// Sensor to edge.
    pub r_se: f64,
}

pub fn link_ranges(p: &PhysicalParams) -> LinkRanges {
    LinkRanges {
        r_sg: p.r_g.min(p.r_s),
        r_ge: p.r_g.min(p.r_e),
        r_se: p.r_s.min(p.r_e),
    }
}

/// Sensor ids split by whether any edge node is within direct range.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Partition {
    /// Sensors with at least one edge within `r_se` (inclusive), ascending id.
    pub direct: Vec<usize>,
    /// Everything else, ascending id.
    pub uav: Vec<usize>,
}

pub fn partition_sensors(sensors: &[Sensor], edges: &[EdgeNode], p: &PhysicalParams) -> Partition {
    let r_se = link_ranges(p).r_se;
    let mut part = Partition::default();
    for s in sensors {
        if edges.iter().any(|e| distance(s.pos, e.pos) <= r_se) {
            part.direct.push(s.id);
        } else {
            part.uav.push(s.id);
        }
    }
    part.direct.sort_unstable();
    part.uav.sort_unstable();
    part
}
