//! Closed patrol tours anchored at an edge node.
//!
//! A tour is `depot -> w_1 -> ... -> w_k -> depot`. Construction is nearest
//! neighbor from the depot; improvement is first-improvement 2-opt over the
//! closed tour, depot legs included, with the depot itself pinned.

use alloc::vec::Vec;

use crate::domain::{distance, EdgeNode, PhysicalParams, Point, Sensor};

/// Minimum gain (m) for a 2-opt move to count as improving. Keeps the
/// strict-decrease argument valid under floating point rounding.
const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Route {
    pub uav_id: usize,
    /// Edge node where the tour starts and ends.
    pub depot: usize,
    /// Sensor ids in visiting order.
    pub waypoints: Vec<usize>,
    pub length_m: f64,
    pub revisit_s: f64,
    pub energy_wh: f64,
}

/// Greedy tour over `points` starting from `depot`; returns indices into
/// `points`. Ties go to the lower index.
pub fn nearest_neighbor_tour(depot: Point, points: &[Point]) -> Vec<usize> {
    let mut visited = alloc::vec![false; points.len()];
    let mut order = Vec::with_capacity(points.len());
    let mut here = depot;
    for _ in 0..points.len() {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, &p) in points.iter().enumerate() {
            if visited[i] {
                continue;
            }
            // Squared distance orders the same and skips the square root.
            let (dx, dy) = (p.x - here.x, p.y - here.y);
            let d = dx * dx + dy * dy;
            if d < best.1 {
                best = (i, d);
            }
        }
        visited[best.0] = true;
        order.push(best.0);
        here = points[best.0];
    }
    order
}

/// Length of the closed tour `depot -> order... -> depot`.
pub fn tour_length(depot: Point, points: &[Point], order: &[usize]) -> f64 {
    let mut here = depot;
    let mut total = 0.0;
    for &i in order {
        total += distance(here, points[i]);
        here = points[i];
    }
    total + distance(here, depot)
}

/// First-improvement 2-opt. Node 0 of the closed tour is the depot and is
/// never moved; after every applied reversal the scan restarts.
pub fn two_opt(order: &[usize], depot: Point, points: &[Point]) -> Vec<usize> {
    // nodes[0] is the depot; nodes[1..] are the waypoints.
    let mut nodes: Vec<Point> = core::iter::once(depot)
        .chain(order.iter().map(|&i| points[i]))
        .collect();
    let mut ids: Vec<usize> = core::iter::once(usize::MAX).chain(order.iter().copied()).collect();
    let n = nodes.len();
    if n < 4 {
        return order.to_vec();
    }
    'scan: loop {
        for i in 0..n - 2 {
            for k in i + 2..n {
                // Edges (i, i+1) and (k, k+1 mod n) share node 0 when i = 0, k = n - 1.
                if i == 0 && k == n - 1 {
                    continue;
                }
                let (a, b) = (nodes[i], nodes[i + 1]);
                let (c, d) = (nodes[k], nodes[(k + 1) % n]);
                let before = distance(a, b) + distance(c, d);
                let after = distance(a, c) + distance(b, d);
                if after + IMPROVEMENT_EPS < before {
                    nodes[i + 1..=k].reverse();
                    ids[i + 1..=k].reverse();
                    continue 'scan;
                }
            }
        }
        break;
    }
    ids.into_iter().skip(1).collect()
}

/// Flight plus communication energy of one tour (Wh).
pub fn route_energy(length_m: f64, total_alpha_mb: f64, p: &PhysicalParams) -> f64 {
    let flight_s = length_m / p.v_g;
    let comm_s = p.transfer_seconds(total_alpha_mb);
    PhysicalParams::watt_seconds_to_wh(p.p_fly_w * flight_s)
        + PhysicalParams::watt_seconds_to_wh(p.p_comm_w * comm_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TourBuild {
    NearestNeighbor,
    TwoOpt,
}

/// Route for one cluster, built from its UAV-served members.
pub fn build_route(
    uav_id: usize,
    depot: &EdgeNode,
    members: &[usize],
    sensors: &[Sensor],
    p: &PhysicalParams,
    build: TourBuild,
) -> Route {
    let points: Vec<Point> = members.iter().map(|&id| sensors[id].pos).collect();
    let mut order = nearest_neighbor_tour(depot.pos, &points);
    if build == TourBuild::TwoOpt {
        order = two_opt(&order, depot.pos, &points);
    }
    let waypoints: Vec<usize> = order.iter().map(|&i| members[i]).collect();
    route_from_order(uav_id, depot, waypoints, sensors, p)
}

/// Route with a caller-chosen visiting order.
pub fn route_from_order(
    uav_id: usize,
    depot: &EdgeNode,
    waypoints: Vec<usize>,
    sensors: &[Sensor],
    p: &PhysicalParams,
) -> Route {
    let length_m = waypoint_length(depot.pos, &waypoints, sensors);
    let alpha: f64 = waypoints.iter().map(|&id| sensors[id].request.data_size_mb).sum();
    Route {
        uav_id,
        depot: depot.id,
        revisit_s: length_m / p.v_g,
        energy_wh: route_energy(length_m, alpha, p),
        waypoints,
        length_m,
    }
}

/// Closed-tour length through sensor ids.
pub fn waypoint_length(depot: Point, waypoints: &[usize], sensors: &[Sensor]) -> f64 {
    let mut here = depot;
    let mut total = 0.0;
    for &id in waypoints {
        total += distance(here, sensors[id].pos);
        here = sensors[id].pos;
    }
    total + distance(here, depot)
}
