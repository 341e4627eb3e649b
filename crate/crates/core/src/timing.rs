//! Response-time model and planning objective.
//!
//! A request's end-to-end time is `latency + transmission + execution +
//! waiting + moving`. Direct sensors talk to their edge in one hop and never
//! wait for a UAV; relayed sensors pay two hops, the expected wait for their
//! UAV to come into range, and the UAV's flight to the edge, measured from
//! the cluster center.

use alloc::vec::Vec;

use crate::domain::{distance, link_ranges, PhysicalParams};
use crate::error::{Error, Result};
use crate::planner::Plan;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PathKind {
    Direct,
    UavMediated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResponseBreakdown {
    pub t_lat: f64,
    pub t_tra: f64,
    pub t_exe: f64,
    pub t_wait: f64,
    pub t_moving: f64,
    pub t_total: f64,
    pub path_kind: PathKind,
}

impl ResponseBreakdown {
    fn new(path_kind: PathKind, t_lat: f64, t_tra: f64, t_exe: f64, t_wait: f64, t_moving: f64) -> Self {
        ResponseBreakdown {
            t_lat,
            t_tra,
            t_exe,
            t_wait,
            t_moving,
            t_total: t_lat + t_tra + t_exe + t_wait + t_moving,
            path_kind,
        }
    }
}

/// Upload time (s) of `alpha_mb` at `dr_mbps`.
pub fn transmission_time(alpha_mb: f64, dr_mbps: f64) -> Result<f64> {
    if dr_mbps.is_nan() || dr_mbps <= 0.0 {
        return Err(Error::param("data_rate_mbps", "must be > 0"));
    }
    Ok(alpha_mb * crate::domain::MEGABITS_PER_MEGABYTE / dr_mbps)
}

/// Execution time (s) of `beta_mi` on an edge of `c_mips`.
pub fn execution_time(beta_mi: f64, c_mips: f64) -> Result<f64> {
    if c_mips.is_nan() || c_mips <= 0.0 {
        return Err(Error::param("capacity_mips", "must be > 0"));
    }
    Ok(beta_mi / c_mips)
}

/// Expected wait (s) for a patrol of `route_length_m`: half of the part of
/// the revisit period not covered by the communication window, never
/// negative.
pub fn expected_wait(route_length_m: f64, p: &PhysicalParams) -> f64 {
    wait_for_period(route_length_m / p.v_g, p)
}

/// Same as [`expected_wait`] for an explicit revisit period.
pub fn wait_for_period(revisit_s: f64, p: &PhysicalParams) -> f64 {
    let t_comm = 2.0 * link_ranges(p).r_sg / p.v_g;
    ((revisit_s - t_comm) / 2.0).max(0.0)
}

pub fn moving_time(d_uav_edge_m: f64, v_g: f64) -> f64 {
    d_uav_edge_m / v_g
}

/// Breakdown for one sensor under `plan`, with the relayed sensors' wait
/// computed from `revisit_override(cluster)` when given.
pub(crate) fn response_with_revisit(
    sensor_id: usize,
    plan: &Plan,
    scenario: &Scenario,
    labels: &[Option<usize>],
    revisit_of: &dyn Fn(usize) -> f64,
) -> Result<ResponseBreakdown> {
    let p = &scenario.physical;
    let s = scenario.sensor(sensor_id)?;
    let t_tra = transmission_time(s.request.data_size_mb, p.data_rate_mbps)?;
    if let Some(&k) = plan.assignment.direct_map.get(&sensor_id) {
        let t_exe = execution_time(s.request.compute_mi, scenario.edges[k].capacity_mips)?;
        return Ok(ResponseBreakdown::new(PathKind::Direct, p.per_hop_latency_s, t_tra, t_exe, 0.0, 0.0));
    }
    let j = labels
        .get(sensor_id)
        .copied()
        .flatten()
        .ok_or(Error::SensorUnassigned(sensor_id))?;
    let edge = &scenario.edges[plan.assignment.cluster_map[j]];
    let t_exe = execution_time(s.request.compute_mi, edge.capacity_mips)?;
    let t_wait = wait_for_period(revisit_of(j), p);
    let t_moving = moving_time(distance(plan.clustering.centers[j], edge.pos), p.v_g);
    Ok(ResponseBreakdown::new(
        PathKind::UavMediated,
        2.0 * p.per_hop_latency_s,
        t_tra,
        t_exe,
        t_wait,
        t_moving,
    ))
}

pub fn response_time(sensor_id: usize, plan: &Plan, scenario: &Scenario) -> Result<ResponseBreakdown> {
    let labels = plan.clustering.labels(scenario.sensors.len());
    response_with_revisit(sensor_id, plan, scenario, &labels, &|j| plan.routes[j].revisit_s)
}

/// Breakdowns for every sensor, in id order.
pub fn all_response_times(plan: &Plan, scenario: &Scenario) -> Result<Vec<ResponseBreakdown>> {
    let labels = plan.clustering.labels(scenario.sensors.len());
    let revisit = |j: usize| plan.routes[j].revisit_s;
    scenario
        .sensors
        .iter()
        .map(|s| response_with_revisit(s.id, plan, scenario, &labels, &revisit))
        .collect()
}

pub fn mean_response_time(plan: &Plan, scenario: &Scenario) -> Result<f64> {
    let all = all_response_times(plan, scenario)?;
    Ok(all.iter().map(|r| r.t_total).sum::<f64>() / all.len().max(1) as f64)
}

/// Total route length plus `lambda` times the summed transmission and
/// execution time of every request (direct ones included).
pub fn objective(plan: &Plan, scenario: &Scenario, lambda: f64) -> Result<f64> {
    let lengths: f64 = plan.routes.iter().map(|r| r.length_m).sum();
    if lambda == 0.0 {
        return Ok(lengths);
    }
    let processing: f64 = all_response_times(plan, scenario)?
        .iter()
        .map(|r| r.t_tra + r.t_exe)
        .sum();
    Ok(lengths + lambda * processing)
}
