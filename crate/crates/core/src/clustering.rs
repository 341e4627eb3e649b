//! Fire-history-weighted K-means over the UAV-served sensors.
//!
//! Each sensor gets weight `1 + omega_h * h`. Assignment uses the distance
//! scaled by `2 - w / w_max`, centers are weight-averaged positions, and the
//! initial centers sit on edge nodes (then on the heaviest sensors when there
//! are more clusters than edges).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::domain::{distance, EdgeNode, Point, Sensor};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Clustering {
    pub m: usize,
    /// Member sensor ids per cluster, ascending.
    pub members: Vec<Vec<usize>>,
    pub centers: Vec<Point>,
    pub iterations_run: usize,
}

impl Clustering {
    /// Cluster index of a sensor, if it is clustered at all.
    pub fn cluster_of(&self, sensor_id: usize) -> Option<usize> {
        self.members
            .iter()
            .position(|m| m.binary_search(&sensor_id).is_ok())
    }

    /// `sensor id -> cluster id` lookup table sized for `n_sensors`.
    pub fn labels(&self, n_sensors: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_sensors];
        for (j, ms) in self.members.iter().enumerate() {
            for &id in ms {
                if let Some(slot) = out.get_mut(id) {
                    *slot = Some(j);
                }
            }
        }
        out
    }
}

pub fn sensor_weight(fire_history: u32, omega_h: f64) -> f64 {
    1.0 + omega_h * f64::from(fire_history)
}

/// Distance seen by a sensor of weight `w`; the factor runs from 1 for the
/// heaviest sensor up to (almost) 2 for sensors without history.
pub fn weighted_distance(d: f64, w: f64, w_max: f64) -> f64 {
    d * (2.0 - w / w_max)
}

/// Eq. 14 style weighted centroid; `None` for an empty member list.
pub fn weighted_centroid(members: &[usize], sensors: &[Sensor], omega_h: f64) -> Option<Point> {
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sw = 0.0;
    for &id in members {
        let s = &sensors[id];
        let w = sensor_weight(s.fire_history, omega_h);
        sx += w * s.pos.x;
        sy += w * s.pos.y;
        sw += w;
    }
    (sw > 0.0).then(|| Point::new(sx / sw, sy / sw))
}

/// Sensor prepared for clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSensor {
    pub id: usize,
    pub pos: Point,
    pub weight: f64,
}

pub fn weigh(sensors: &[Sensor], ids: &[usize], omega_h: f64) -> Vec<WeightedSensor> {
    ids.iter()
        .map(|&id| {
            let s = &sensors[id];
            WeightedSensor {
                id,
                pos: s.pos,
                weight: sensor_weight(s.fire_history, omega_h),
            }
        })
        .collect()
}

/// Initial centers: `m` distinct random edges when `m <= p`, otherwise every
/// edge followed by the `m - p` heaviest sensors (ties by lower id).
///
/// Consumes exactly one `index::sample` draw when `m <= p` and nothing
/// otherwise.
pub fn init_centers(
    m: usize,
    edges: &[EdgeNode],
    weighted: &[WeightedSensor],
    rng: &mut impl Rng,
) -> Result<Vec<Point>> {
    if m == 0 {
        return Err(Error::param("m", "need at least one cluster"));
    }
    let p = edges.len();
    if m > p + weighted.len() {
        return Err(Error::NotEnoughSeeds {
            m,
            edges: p,
            sensors: weighted.len(),
        });
    }
    if m <= p {
        return Ok(rand::seq::index::sample(rng, p, m)
            .into_iter()
            .map(|k| edges[k].pos)
            .collect());
    }
    let mut by_weight: Vec<&WeightedSensor> = weighted.iter().collect();
    by_weight.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.id.cmp(&b.id)));
    Ok(edges
        .iter()
        .map(|e| e.pos)
        .chain(by_weight.iter().take(m - p).map(|s| s.pos))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub epsilon_m: f64,
    pub max_iters: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            epsilon_m: 10.0,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

fn nearest_center(s: &WeightedSensor, centers: &[Point], w_max: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, &c) in centers.iter().enumerate() {
        let d = weighted_distance(distance(s.pos, c), s.weight, w_max);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Runs the assign/update loop from the given centers.
pub fn kmeans_from(
    weighted: &[WeightedSensor],
    mut centers: Vec<Point>,
    cfg: KMeansConfig,
) -> Result<Clustering> {
    let m = centers.len();
    if m == 0 {
        return Err(Error::param("m", "need at least one cluster"));
    }
    if weighted.len() < m {
        return Err(Error::TooFewSensors {
            m,
            sensors: weighted.len(),
        });
    }
    let w_max = weighted.iter().map(|s| s.weight).fold(f64::MIN, f64::max);
    let mut labels = vec![0usize; weighted.len()];
    let mut iterations_run = 0;

    for _ in 0..cfg.max_iters {
        iterations_run += 1;
        let mut counts = vec![0usize; m];
        let mut cost = vec![0.0f64; weighted.len()];
        for (i, s) in weighted.iter().enumerate() {
            let (j, d) = nearest_center(s, &centers, w_max);
            labels[i] = j;
            cost[i] = d;
            counts[j] += 1;
        }

        if counts.contains(&0) {
            reseed_empty(weighted, &mut centers, &labels, &counts, &cost);
            continue;
        }

        let mut moved = 0.0f64;
        for (j, c) in centers.iter_mut().enumerate() {
            let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
            for (s, _) in weighted.iter().zip(&labels).filter(|(_, &l)| l == j) {
                sx += s.weight * s.pos.x;
                sy += s.weight * s.pos.y;
                sw += s.weight;
            }
            let next = Point::new(sx / sw, sy / sw);
            moved = moved.max(distance(*c, next));
            *c = next;
        }
        if moved < cfg.epsilon_m {
            break;
        }
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (s, &l) in weighted.iter().zip(&labels) {
        members[l].push(s.id);
    }
    force_nonempty(weighted, &mut members, &mut centers, &labels, w_max);
    for ms in &mut members {
        ms.sort_unstable();
    }
    Ok(Clustering {
        m,
        members,
        centers,
        iterations_run,
    })
}

/// Moves each empty center onto the sensor with the largest weighted
/// distance to its current center (ties by lower id), skipping sensors
/// already used as a reseed point in this pass.
fn reseed_empty(
    weighted: &[WeightedSensor],
    centers: &mut [Point],
    labels: &[usize],
    counts: &[usize],
    cost: &[f64],
) {
    let mut order: Vec<usize> = (0..weighted.len()).collect();
    order.sort_by(|&a, &b| cost[b].total_cmp(&cost[a]).then(weighted[a].id.cmp(&weighted[b].id)));
    let mut remaining = counts.to_vec();
    let mut cursor = order.iter();
    for j in 0..centers.len() {
        if counts[j] != 0 {
            continue;
        }
        // Never strip the last member from a cluster.
        for &i in cursor.by_ref() {
            let from = labels[i];
            if remaining[from] > 1 {
                remaining[from] -= 1;
                centers[j] = weighted[i].pos;
                break;
            }
        }
    }
}

/// Last-resort repair after the iteration cap (e.g. coincident sensors keep
/// a reseeded center tied with another one): hand each empty cluster the
/// farthest member of a cluster that can spare one.
fn force_nonempty(
    weighted: &[WeightedSensor],
    members: &mut [Vec<usize>],
    centers: &mut [Point],
    labels: &[usize],
    w_max: f64,
) {
    let index_of = |id: usize| weighted.iter().position(|s| s.id == id).unwrap_or(0);
    for j in 0..members.len() {
        if !members[j].is_empty() {
            continue;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, s) in weighted.iter().enumerate() {
            let from = members
                .iter()
                .position(|ms| ms.contains(&s.id))
                .unwrap_or(labels[i]);
            if members[from].len() < 2 {
                continue;
            }
            let d = weighted_distance(distance(s.pos, centers[from]), s.weight, w_max);
            if best.is_none_or(|(bd, bid, _)| d > bd || (d == bd && s.id < bid)) {
                best = Some((d, s.id, from));
            }
        }
        if let Some((_, id, from)) = best {
            members[from].retain(|&x| x != id);
            members[j].push(id);
            centers[j] = weighted[index_of(id)].pos;
        }
    }
}

/// Weighted K-means on `uav_ids` with edge-anchored initialization.
pub fn weighted_kmeans(
    sensors: &[Sensor],
    uav_ids: &[usize],
    m: usize,
    edges: &[EdgeNode],
    omega_h: f64,
    cfg: KMeansConfig,
    rng: &mut impl Rng,
) -> Result<Clustering> {
    if uav_ids.len() < m {
        return Err(Error::TooFewSensors {
            m,
            sensors: uav_ids.len(),
        });
    }
    let weighted = weigh(sensors, uav_ids, omega_h);
    let centers = init_centers(m, edges, &weighted, rng)?;
    kmeans_from(&weighted, centers, cfg)
}

/// Largest member-to-center distance per cluster.
pub fn cluster_radius(clustering: &Clustering, sensors: &[Sensor]) -> Vec<f64> {
    clustering
        .members
        .iter()
        .zip(&clustering.centers)
        .map(|(ms, &c)| {
            ms.iter()
                .map(|&id| distance(sensors[id].pos, c))
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Outcome of comparing weighted against unweighted clustering for the
/// sensors with fire history.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCheck {
    /// Mean radius seen by high-risk sensors, weighted clustering, averaged over seeds.
    pub lhs: f64,
    /// `factor * ` the same mean under unweighted clustering.
    pub rhs: f64,
    pub holds: bool,
    /// `2 / (1 + mean_high_risk_weight / w_max)`.
    pub factor: f64,
    pub weighted_per_seed: Vec<f64>,
    pub unweighted_per_seed: Vec<f64>,
}

fn mean_radius_seen(clustering: &Clustering, sensors: &[Sensor], high_risk: &[usize]) -> f64 {
    let radii = cluster_radius(clustering, sensors);
    let labels = clustering.labels(sensors.len());
    let total: f64 = high_risk
        .iter()
        .map(|&id| labels[id].map_or(0.0, |j| radii[j]))
        .sum();
    total / high_risk.len() as f64
}

/// Empirical check of the risk-aware radius bound: both arms start from the
/// same centers (drawn with the weighted sensor list) for every seed.
pub fn theorem1_check(
    sensors: &[Sensor],
    uav_ids: &[usize],
    edges: &[EdgeNode],
    m: usize,
    omega_h: f64,
    cfg: KMeansConfig,
    seeds: &[u64],
) -> Result<CoverageCheck> {
    let high_risk: Vec<usize> = uav_ids
        .iter()
        .copied()
        .filter(|&id| sensors[id].fire_history > 0)
        .collect();
    if high_risk.is_empty() {
        return Err(Error::NoHighRiskSensors);
    }
    if seeds.is_empty() {
        return Err(Error::param("seeds", "need at least one seed"));
    }
    let weighted = weigh(sensors, uav_ids, omega_h);
    let flat = weigh(sensors, uav_ids, 0.0);
    let w_max = weighted.iter().map(|s| s.weight).fold(f64::MIN, f64::max);
    let w_bar = high_risk
        .iter()
        .map(|&id| sensor_weight(sensors[id].fire_history, omega_h))
        .sum::<f64>()
        / high_risk.len() as f64;
    let factor = 2.0 / (1.0 + w_bar / w_max);

    let mut weighted_per_seed = Vec::with_capacity(seeds.len());
    let mut unweighted_per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut rng = crate::rng::stream(seed, "kmeans-init", m as u64);
        let centers = init_centers(m, edges, &weighted, &mut rng)?;
        let w = kmeans_from(&weighted, centers.clone(), cfg)?;
        let u = kmeans_from(&flat, centers, cfg)?;
        weighted_per_seed.push(mean_radius_seen(&w, sensors, &high_risk));
        unweighted_per_seed.push(mean_radius_seen(&u, sensors, &high_risk));
    }
    let n = seeds.len() as f64;
    let lhs = weighted_per_seed.iter().sum::<f64>() / n;
    let rhs = factor * unweighted_per_seed.iter().sum::<f64>() / n;
    Ok(CoverageCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
        factor,
        weighted_per_seed,
        unweighted_per_seed,
    })
}

/// Factor of the radius bound for a given mean-weight ratio.
pub fn coverage_bound_factor(w_bar_over_w_max: f64) -> f64 {
    2.0 / (1.0 + w_bar_over_w_max)
}
