//! Two-phase mapping of sensors to edge nodes.
//!
//! Phase one pins every direct-range sensor to its nearest reachable edge.
//! Phase two places UAV clusters one at a time (ascending cluster id) on the
//! edge with the lowest placement score
//! `omega_d * mean_dist / diagonal + omega_l * (load + demand) / capacity`,
//! updating loads as it goes. Overloads are then repaired by moving the
//! cheapest cluster off the worst edge.
//!
//! Loads are MIPS-equivalent rates: a request of `beta` MI per period adds
//! `beta / t_period`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{distance, link_ranges, EdgeNode, PhysicalParams, Sensor};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeLoadState {
    pub load: Vec<f64>,
    pub capacity: Vec<f64>,
}

impl EdgeLoadState {
    pub fn empty(edges: &[EdgeNode]) -> Self {
        EdgeLoadState {
            load: vec![0.0; edges.len()],
            capacity: edges.iter().map(|e| e.capacity_mips).collect(),
        }
    }

    pub fn utilization(&self, k: usize) -> f64 {
        self.load[k] / self.capacity[k]
    }

    pub fn overload(&self, k: usize) -> f64 {
        (self.load[k] - self.capacity[k]).max(0.0)
    }

    pub fn total_overload(&self) -> f64 {
        (0..self.load.len()).map(|k| self.overload(k)).sum()
    }

    pub fn is_overloaded(&self) -> bool {
        (0..self.load.len()).any(|k| self.load[k] > self.capacity[k])
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assignment {
    /// Direct sensor id -> edge id.
    pub direct_map: BTreeMap<usize, usize>,
    /// Cluster id -> edge id.
    pub cluster_map: Vec<usize>,
    pub loads: EdgeLoadState,
}

/// Weights of the placement score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    pub omega_d: f64,
    pub omega_l: f64,
    /// Distance normalizer (m), the diagonal of the monitoring square.
    pub d_norm: f64,
}

impl ScoreWeights {
    pub fn score(&self, mean_dist: f64, load_after: f64, capacity: f64) -> f64 {
        self.omega_d * (mean_dist / self.d_norm) + self.omega_l * (load_after / capacity)
    }
}

/// Nearest reachable edge for each direct sensor (ties by lower edge id),
/// charging `beta / t_period` to it.
pub fn assign_direct(
    sensors: &[Sensor],
    direct_ids: &[usize],
    edges: &[EdgeNode],
    p: &PhysicalParams,
) -> (BTreeMap<usize, usize>, EdgeLoadState) {
    let r_se = link_ranges(p).r_se;
    let mut loads = EdgeLoadState::empty(edges);
    let mut map = BTreeMap::new();
    for &id in direct_ids {
        let s = &sensors[id];
        let mut best: Option<(usize, f64)> = None;
        for (k, e) in edges.iter().enumerate() {
            let d = distance(s.pos, e.pos);
            if d <= r_se && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        if let Some((k, _)) = best {
            map.insert(id, k);
            loads.load[k] += s.request.compute_mi / p.t_period_s;
        }
    }
    (map, loads)
}

/// Aggregate compute rate of a cluster (MIPS).
pub fn cluster_demand(members: &[usize], sensors: &[Sensor], t_period_s: f64) -> f64 {
    members.iter().map(|&id| sensors[id].request.compute_mi).sum::<f64>() / t_period_s
}

/// Mean member-to-edge distance; 0 for an empty cluster.
pub fn mean_distance(members: &[usize], sensors: &[Sensor], edge: &EdgeNode) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    members
        .iter()
        .map(|&id| distance(sensors[id].pos, edge.pos))
        .sum::<f64>()
        / members.len() as f64
}

/// Precomputed per-cluster quantities used by phase two and repair.
#[derive(Debug, Clone)]
pub struct ClusterProfile {
    pub demand: f64,
    /// Mean member distance to every edge.
    pub mean_dist: Vec<f64>,
}

pub fn profile_clusters(
    clusters: &[Vec<usize>],
    sensors: &[Sensor],
    edges: &[EdgeNode],
    t_period_s: f64,
) -> Vec<ClusterProfile> {
    clusters
        .iter()
        .map(|ms| ClusterProfile {
            demand: cluster_demand(ms, sensors, t_period_s),
            mean_dist: edges.iter().map(|e| mean_distance(ms, sensors, e)).collect(),
        })
        .collect()
}

/// Phase two: clusters in ascending id order, each to its lowest-score edge
/// (ties by lower edge id), loads updated after every placement.
pub fn assign_clusters(
    profiles: &[ClusterProfile],
    loads: &mut EdgeLoadState,
    w: &ScoreWeights,
) -> Vec<usize> {
    let mut map = Vec::with_capacity(profiles.len());
    for c in profiles {
        let mut best = (0usize, f64::INFINITY);
        for k in 0..loads.load.len() {
            let s = w.score(c.mean_dist[k], loads.load[k] + c.demand, loads.capacity[k]);
            if s < best.1 {
                best = (k, s);
            }
        }
        loads.load[best.0] += c.demand;
        map.push(best.0);
    }
    map
}

/// Greedy overload repair could not find room for any movable cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairFailure {
    pub edge: usize,
}

/// One repair move: take the most overloaded edge and move its least
/// demanding movable cluster to the lowest-score edge with enough slack.
/// Returns `Ok(false)` when nothing is overloaded.
pub fn repair_step(
    cluster_map: &mut [usize],
    profiles: &[ClusterProfile],
    loads: &mut EdgeLoadState,
    w: &ScoreWeights,
) -> Result<bool, RepairFailure> {
    let worst = (0..loads.load.len())
        .filter(|&k| loads.load[k] > loads.capacity[k])
        .max_by(|&a, &b| loads.overload(a).total_cmp(&loads.overload(b)).then(b.cmp(&a)));
    let Some(worst) = worst else {
        return Ok(false);
    };

    let mut on_edge: Vec<usize> = (0..cluster_map.len())
        .filter(|&j| cluster_map[j] == worst && profiles[j].demand > 0.0)
        .collect();
    on_edge.sort_by(|&a, &b| profiles[a].demand.total_cmp(&profiles[b].demand).then(a.cmp(&b)));

    for j in on_edge {
        let c = &profiles[j];
        let target = (0..loads.load.len())
            .filter(|&k| k != worst && loads.load[k] + c.demand <= loads.capacity[k])
            .map(|k| (k, w.score(c.mean_dist[k], loads.load[k] + c.demand, loads.capacity[k])))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((k, _)) = target {
            loads.load[worst] -= c.demand;
            loads.load[k] += c.demand;
            cluster_map[j] = k;
            return Ok(true);
        }
    }
    Err(RepairFailure { edge: worst })
}

/// Applies [`repair_step`] until no edge is overloaded. Each move lowers the
/// total overload (the target keeps slack, the source sheds a positive
/// demand), so the loop terminates. Returns the number of moves.
pub fn repair_overload(
    cluster_map: &mut [usize],
    profiles: &[ClusterProfile],
    loads: &mut EdgeLoadState,
    w: &ScoreWeights,
) -> Result<usize, RepairFailure> {
    let mut moves = 0;
    while repair_step(cluster_map, profiles, loads, w)? {
        moves += 1;
    }
    Ok(moves)
}

/// Both phases plus repair.
pub fn assign_edges(
    sensors: &[Sensor],
    direct_ids: &[usize],
    clusters: &[Vec<usize>],
    edges: &[EdgeNode],
    p: &PhysicalParams,
    w: &ScoreWeights,
) -> Result<Assignment, RepairFailure> {
    let (direct_map, mut loads) = assign_direct(sensors, direct_ids, edges, p);
    let profiles = profile_clusters(clusters, sensors, edges, p.t_period_s);
    let mut cluster_map = assign_clusters(&profiles, &mut loads, w);
    repair_overload(&mut cluster_map, &profiles, &mut loads, w)?;
    Ok(Assignment {
        direct_map,
        cluster_map,
        loads,
    })
}
