//! Synthetic wildfire-monitoring scenarios.
//!
//! Sensors are drawn from a mixture: a `hotspot_fraction` share is scattered
//! around a few high-risk centers with an isotropic Gaussian and carries a
//! heavy fire history, the rest is uniform over the square with a light
//! history. Edge nodes are placed uniformly at random.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::domain::{EdgeNode, PhysicalParams, Point, RequestProfile, Sensor};
use crate::error::{Error, Result};
use crate::rng;

/// Schema version written into scenario files.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hotspot {
    pub center: Point,
    pub sigma_m: f64,
}

/// Provenance of a generated scenario.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioMeta {
    pub seed: u64,
    pub hotspots: Vec<Hotspot>,
    /// Ids of the sensors drawn from a hotspot component.
    pub hotspot_sensors: Vec<usize>,
    /// How edge nodes were placed, e.g. `"uniform"`.
    pub edge_placement: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub physical: PhysicalParams,
    pub sensors: Vec<Sensor>,
    pub edges: Vec<EdgeNode>,
    pub meta: ScenarioMeta,
}

/// Where a scenario invariant is violated, as a path into the document
/// (`sensors[3].pos`) plus a reason.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub reason: String,
}

impl Scenario {
    pub fn sensor(&self, id: usize) -> Result<&Sensor> {
        self.sensors.get(id).ok_or(Error::UnknownSensor(id))
    }

    /// First invariant violation, if any.
    pub fn check(&self) -> core::result::Result<(), Violation> {
        let v = |path: String, reason: &str| Violation {
            path,
            reason: reason.into(),
        };
        if let Err(Error::InvalidParameter { name, reason }) = self.physical.validate() {
            return Err(Violation {
                path: format!("physical.{name}"),
                reason,
            });
        }
        if self.sensors.is_empty() {
            return Err(v("sensors".into(), "at least one sensor is required"));
        }
        if self.edges.is_empty() {
            return Err(v("edges".into(), "at least one edge node is required"));
        }
        let side = self.physical.side_m();
        for (i, s) in self.sensors.iter().enumerate() {
            if s.id != i {
                return Err(v(format!("sensors[{i}].id"), "ids must be contiguous from 0"));
            }
            if !self.physical.contains(s.pos) {
                return Err(Violation {
                    path: format!("sensors[{i}].pos"),
                    reason: format!("({}, {}) lies outside [0, {side}]^2", s.pos.x, s.pos.y),
                });
            }
            if !(s.request.data_size_mb.is_finite() && s.request.data_size_mb > 0.0) {
                return Err(v(format!("sensors[{i}].request.data_size_mb"), "must be > 0"));
            }
            if !(s.request.compute_mi.is_finite() && s.request.compute_mi > 0.0) {
                return Err(v(format!("sensors[{i}].request.compute_mi"), "must be > 0"));
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.id != k {
                return Err(v(format!("edges[{k}].id"), "ids must be contiguous from 0"));
            }
            if !self.physical.contains(e.pos) {
                return Err(v(format!("edges[{k}].pos"), "lies outside the monitoring square"));
            }
            if !(e.capacity_mips.is_finite() && e.capacity_mips > 0.0) {
                return Err(v(format!("edges[{k}].capacity_mips"), "must be > 0"));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|v| Error::InvalidParameter {
            name: "scenario",
            reason: format!("{}: {}", v.path, v.reason),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenConfig {
    pub n_sensors: usize,
    pub n_edges: usize,
    pub n_hotspots: usize,
    pub hotspot_fraction: f64,
    pub hotspot_sigma_m: f64,
    pub fire_history_max: u32,
    pub alpha_range_mb: (f64, f64),
    pub beta_range_mi: (f64, f64),
    pub edge_capacity_range_mips: (f64, f64),
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_sensors: 200,
            n_edges: 5,
            n_hotspots: 3,
            hotspot_fraction: 0.6,
            hotspot_sigma_m: 800.0,
            fire_history_max: 100,
            alpha_range_mb: (1.0, 5.0),
            beta_range_mi: (100.0, 500.0),
            edge_capacity_range_mips: (5000.0, 10000.0),
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sensors == 0 {
            return Err(Error::param("n_sensors", "must be at least 1"));
        }
        if self.n_edges == 0 {
            return Err(Error::param("n_edges", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.hotspot_fraction) {
            return Err(Error::param("hotspot_fraction", "must lie in [0, 1]"));
        }
        if self.hotspot_fraction > 0.0 && self.n_hotspots == 0 {
            return Err(Error::param("n_hotspots", "must be >= 1 when hotspot_fraction > 0"));
        }
        if !(self.hotspot_sigma_m.is_finite() && self.hotspot_sigma_m > 0.0) {
            return Err(Error::param("hotspot_sigma_m", "must be > 0"));
        }
        for (name, (lo, hi)) in [
            ("alpha_range_mb", self.alpha_range_mb),
            ("beta_range_mi", self.beta_range_mi),
            ("edge_capacity_range_mips", self.edge_capacity_range_mips),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::param(name, format!("need 0 < lo <= hi, got ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

fn uniform_in(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Builds a scenario. Pure function of `(cfg, physical)`.
///
/// Draw order (one stream per concern, so changing e.g. the edge count does
/// not move any sensor): hotspot centers, hotspot membership shuffle, sensor
/// attributes in id order, edge nodes in id order.
pub fn generate(cfg: &GenConfig, physical: &PhysicalParams) -> Result<Scenario> {
    cfg.validate()?;
    physical.validate()?;
    let side = physical.side_m();
    let clip = |v: f64| v.clamp(0.0, side);

    let mut hot_rng = rng::stream(cfg.seed, "scenario-hotspots", 0);
    let hotspots: Vec<Hotspot> = (0..cfg.n_hotspots)
        .map(|_| Hotspot {
            center: Point::new(hot_rng.random_range(0.0..=side), hot_rng.random_range(0.0..=side)),
            sigma_m: cfg.hotspot_sigma_m,
        })
        .collect();

    let n_hot = if hotspots.is_empty() {
        0
    } else {
        libm::round(cfg.hotspot_fraction * cfg.n_sensors as f64) as usize
    };
    let mut in_hotspot: Vec<bool> = (0..cfg.n_sensors).map(|i| i < n_hot).collect();
    in_hotspot.shuffle(&mut rng::stream(cfg.seed, "scenario-membership", 0));

    let normal = Normal::new(0.0, cfg.hotspot_sigma_m)
        .map_err(|_| Error::param("hotspot_sigma_m", "invalid standard deviation"))?;
    let h_max = cfg.fire_history_max;
    let mut srng = rng::stream(cfg.seed, "scenario-sensors", 0);
    let mut sensors = Vec::with_capacity(cfg.n_sensors);
    let mut hotspot_sensors = Vec::new();
    for (id, &hot) in in_hotspot.iter().enumerate() {
        let (pos, fire_history) = if hot {
            let h = &hotspots[srng.random_range(0..hotspots.len())];
            let pos = Point::new(
                clip(h.center.x + normal.sample(&mut srng)),
                clip(h.center.y + normal.sample(&mut srng)),
            );
            hotspot_sensors.push(id);
            (pos, srng.random_range(h_max / 2..=h_max))
        } else {
            let pos = Point::new(srng.random_range(0.0..=side), srng.random_range(0.0..=side));
            (pos, srng.random_range(0..=h_max / 10))
        };
        let request = RequestProfile {
            data_size_mb: uniform_in(&mut srng, cfg.alpha_range_mb),
            compute_mi: uniform_in(&mut srng, cfg.beta_range_mi),
        };
        sensors.push(Sensor {
            id,
            pos,
            fire_history,
            request,
        });
    }

    let mut erng = rng::stream(cfg.seed, "scenario-edges", 0);
    let edges = (0..cfg.n_edges)
        .map(|id| EdgeNode {
            id,
            pos: Point::new(erng.random_range(0.0..=side), erng.random_range(0.0..=side)),
            capacity_mips: uniform_in(&mut erng, cfg.edge_capacity_range_mips),
        })
        .collect();

    Ok(Scenario {
        physical: physical.clone(),
        sensors,
        edges,
        meta: ScenarioMeta {
            seed: cfg.seed,
            hotspots,
            hotspot_sensors,
            edge_placement: "uniform".into(),
        },
    })
}
