//! Integrated planning: the fleet-sizing loop around clustering, edge
//! assignment and routing, plus from-scratch constraint validation.
//!
//! For each candidate fleet size `m` (starting from
//! [`initial_fleet_size`]) the loop clusters the relay sensors, maps sensors
//! and clusters onto edges, repairs overloads, builds one tour per cluster
//! and checks the revisit and energy limits of every tour. The first `m`
//! that passes is returned; anything above `m_max` is infeasible.
//!
//! The baselines plug their own cluster construction into the same loop via
//! [`fleet_loop`] and [`realize`], so edge assignment, routing and
//! validation are shared.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::assignment::{self, Assignment, ScoreWeights};
use crate::clustering::{self, Clustering, KMeansConfig};
use crate::domain::{distance, link_ranges, partition_sensors, AlgoParams, FleetInitMode, Partition, Point};
use crate::error::{Binding, Error, Result};
use crate::rng;
use crate::routing::{self, Route, TourBuild};
use crate::scenario::Scenario;

/// Ablation arm of the proposed planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Variant {
    /// Weighted K-means and 2-opt.
    Full,
    /// Weighted K-means, nearest-neighbor tours only.
    No2Opt,
    /// Uniform random clusters, 2-opt tours.
    NoKMeans,
    /// Uniform random clusters, nearest-neighbor tours only.
    NoBoth,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Full, Variant::No2Opt, Variant::NoKMeans, Variant::NoBoth];

    pub fn uses_kmeans(self) -> bool {
        matches!(self, Variant::Full | Variant::No2Opt)
    }

    pub fn tour_build(self) -> TourBuild {
        match self {
            Variant::Full | Variant::NoKMeans => TourBuild::TwoOpt,
            Variant::No2Opt | Variant::NoBoth => TourBuild::NearestNeighbor,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::No2Opt => "no-2opt",
            Variant::NoKMeans => "no-kmeans",
            Variant::NoBoth => "no-both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Plan {
    /// Fleet size; equals `routes.len()`.
    pub m: usize,
    pub clustering: Clustering,
    pub assignment: Assignment,
    /// One closed tour per UAV, index = cluster id = UAV id.
    pub routes: Vec<Route>,
    /// Wall-clock planning time; stamped by callers that own a clock.
    pub planning_time_s: f64,
}

impl Plan {
    pub fn total_length_m(&self) -> f64 {
        self.routes.iter().map(|r| r.length_m).sum()
    }

    pub fn total_energy_wh(&self) -> f64 {
        self.routes.iter().map(|r| r.energy_wh).sum()
    }
}

/// Pass flag plus the tightest signed margin (positive = slack).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub pass: bool,
    pub margin: f64,
}

impl Check {
    fn from_margin(margin: f64) -> Self {
        Check {
            pass: margin >= 0.0,
            margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintReport {
    /// `t_max - revisit` over the worst route (s).
    pub revisit: Check,
    /// `e_max - energy` over the worst route (Wh).
    pub energy: Check,
    /// `capacity - load` over the worst edge (MIPS).
    pub capacity: Check,
    /// Urgent deadline; filled in by the emergency simulator, `None` here.
    pub deadline: Option<Check>,
    /// `m_max - m`.
    pub fleet: Check,
    /// Every sensor served exactly once, routes consistent with the
    /// clustering and assignment; margin is minus the number of defects.
    pub coverage: Check,
    pub route_lengths_m: Vec<f64>,
    pub route_revisits_s: Vec<f64>,
    pub route_energies_wh: Vec<f64>,
    pub edge_loads: Vec<f64>,
}

impl ConstraintReport {
    pub fn all_pass(&self) -> bool {
        self.revisit.pass
            && self.energy.pass
            && self.capacity.pass
            && self.fleet.pass
            && self.coverage.pass
            && self.deadline.is_none_or(|d| d.pass)
    }

    pub fn binding(&self) -> Vec<Binding> {
        let mut out = Vec::new();
        if !self.revisit.pass {
            out.push(Binding::Revisit);
        }
        if !self.energy.pass {
            out.push(Binding::Energy);
        }
        if !self.capacity.pass {
            out.push(Binding::Capacity);
        }
        if !self.fleet.pass {
            out.push(Binding::Fleet);
        }
        out
    }
}

/// Starting fleet size of the sizing loop.
pub fn initial_fleet_size(scenario: &Scenario, mode: FleetInitMode) -> usize {
    match mode {
        FleetInitMode::One => 1,
        FleetInitMode::Coverage => {
            let p = &scenario.physical;
            let r_sg = link_ranges(p).r_sg;
            let disk = core::f64::consts::PI * r_sg * r_sg;
            let m = libm::ceil(p.area_km2 * 1.0e6 / disk);
            (m as usize).clamp(1, p.m_max)
        }
    }
}

/// Shared inputs of one planning run.
#[derive(Debug, Clone)]
pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub algo: &'a AlgoParams,
    pub partition: Partition,
    pub weights: ScoreWeights,
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a Scenario, algo: &'a AlgoParams) -> Result<Self> {
        scenario.validate()?;
        algo.validate()?;
        let partition = partition_sensors(&scenario.sensors, &scenario.edges, &scenario.physical);
        Ok(Context {
            scenario,
            algo,
            partition,
            weights: ScoreWeights {
                omega_d: algo.omega_d,
                omega_l: algo.omega_l,
                d_norm: scenario.physical.diagonal_m(),
            },
        })
    }
}

/// How to order the sensors of each cluster.
#[derive(Debug, Clone, Copy)]
pub enum Tours<'a> {
    Build(TourBuild),
    /// Caller-provided visiting order per cluster (must be a permutation of
    /// the cluster's members).
    Given(&'a [Vec<usize>]),
}

/// A concrete plan for one fleet size plus its constraint violations.
#[derive(Debug, Clone)]
pub struct Realized {
    pub plan: Plan,
    /// Number of violated per-route revisit/energy limits plus overloaded edges.
    pub violations: usize,
    pub binding: Vec<Binding>,
}

impl Realized {
    pub fn is_feasible(&self) -> bool {
        self.violations == 0
    }
}

/// Edge assignment, routing and constraint accounting for a given cluster
/// structure. `centers[j] = None` falls back to the weighted centroid of the
/// members, or the depot for an empty cluster.
pub fn realize(
    ctx: &Context<'_>,
    members: Vec<Vec<usize>>,
    centers: Vec<Option<Point>>,
    iterations_run: usize,
    tours: Tours<'_>,
) -> Realized {
    let sc = ctx.scenario;
    let p = &sc.physical;
    let mut binding = Vec::new();
    let mut violations = 0;

    let (direct_map, mut loads) = assignment::assign_direct(&sc.sensors, &ctx.partition.direct, &sc.edges, p);
    let profiles = assignment::profile_clusters(&members, &sc.sensors, &sc.edges, p.t_period_s);
    let mut cluster_map = assignment::assign_clusters(&profiles, &mut loads, &ctx.weights);
    if assignment::repair_overload(&mut cluster_map, &profiles, &mut loads, &ctx.weights).is_err() {
        binding.push(Binding::Capacity);
        violations += (0..loads.load.len()).filter(|&k| loads.load[k] > loads.capacity[k]).count();
    }

    let mut routes = Vec::with_capacity(members.len());
    for (j, ms) in members.iter().enumerate() {
        let depot = &sc.edges[cluster_map[j]];
        let route = match tours {
            Tours::Build(b) => routing::build_route(j, depot, ms, &sc.sensors, p, b),
            Tours::Given(orders) => routing::route_from_order(j, depot, orders[j].clone(), &sc.sensors, p),
        };
        if route.revisit_s > p.t_max_s {
            violations += 1;
            if !binding.contains(&Binding::Revisit) {
                binding.push(Binding::Revisit);
            }
        }
        if route.energy_wh > p.e_max_wh {
            violations += 1;
            if !binding.contains(&Binding::Energy) {
                binding.push(Binding::Energy);
            }
        }
        routes.push(route);
    }

    let centers = centers
        .into_iter()
        .zip(&members)
        .enumerate()
        .map(|(j, (c, ms))| {
            c.or_else(|| clustering::weighted_centroid(ms, &sc.sensors, ctx.algo.omega_h))
                .unwrap_or(sc.edges[cluster_map[j]].pos)
        })
        .collect();

    Realized {
        plan: Plan {
            m: members.len(),
            clustering: Clustering {
                m: members.len(),
                members,
                centers,
                iterations_run,
            },
            assignment: Assignment {
                direct_map,
                cluster_map,
                loads,
            },
            routes,
            planning_time_s: 0.0,
        },
        violations,
        binding,
    }
}

/// Result of trying one fleet size.
#[derive(Debug, Clone)]
pub enum Attempt {
    Feasible(Plan),
    Infeasible(Vec<Binding>),
}

/// Increments `m` from the initial size until `attempt` yields a feasible
/// plan or `m_max` is exceeded.
pub fn fleet_loop(
    ctx: &Context<'_>,
    mut attempt: impl FnMut(&Context<'_>, usize) -> Result<Attempt>,
) -> Result<Plan> {
    let p = &ctx.scenario.physical;
    let mut m = initial_fleet_size(ctx.scenario, ctx.algo.fleet_init_mode);
    let mut last = Vec::new();
    while m <= p.m_max {
        if ctx.partition.uav.is_empty() {
            // Nothing to patrol: every UAV idles at its depot.
            let r = realize(ctx, vec![Vec::new(); m], vec![None; m], 0, Tours::Build(TourBuild::NearestNeighbor));
            if r.is_feasible() {
                return Ok(r.plan);
            }
            last = r.binding;
        } else {
            match attempt(ctx, m)? {
                Attempt::Feasible(plan) => return Ok(plan),
                Attempt::Infeasible(b) => last = b,
            }
        }
        m += 1;
    }
    last.push(Binding::Fleet);
    last.sort_unstable();
    last.dedup();
    Err(Error::Infeasible {
        m_max: p.m_max,
        binding: last,
    })
}

/// Cluster count actually formed for `m` UAVs; extra UAVs stay idle.
pub(crate) fn active_clusters(ctx: &Context<'_>, m: usize) -> usize {
    m.min(ctx.partition.uav.len())
}

/// Uniform random sensor-to-cluster assignment. A draw that leaves a cluster
/// empty is re-rolled once, then accepted as is.
pub fn random_clusters(uav_ids: &[usize], m: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let roll = |rng: &mut dyn rand::RngCore| {
        let mut members = vec![Vec::new(); m];
        for &id in uav_ids {
            members[rng.random_range(0..m)].push(id);
        }
        members
    };
    let first = roll(rng);
    if first.iter().all(|c| !c.is_empty()) {
        first
    } else {
        roll(rng)
    }
}

fn attempt_proposed(ctx: &Context<'_>, m: usize, variant: Variant) -> Result<Attempt> {
    let k = active_clusters(ctx, m);
    let sc = ctx.scenario;
    let (mut members, mut centers, iters) = if variant.uses_kmeans() {
        let mut r = rng::stream(ctx.algo.seed, "kmeans-init", m as u64);
        let cfg = KMeansConfig {
            epsilon_m: ctx.algo.epsilon_m,
            max_iters: ctx.algo.max_kmeans_iters,
        };
        let c = clustering::weighted_kmeans(&sc.sensors, &ctx.partition.uav, k, &sc.edges, ctx.algo.omega_h, cfg, &mut r)?;
        let centers: Vec<Option<Point>> = c.centers.into_iter().map(Some).collect();
        (c.members, centers, c.iterations_run)
    } else {
        let mut r = rng::stream(ctx.algo.seed, "random-clusters", m as u64);
        (random_clusters(&ctx.partition.uav, k, &mut r), vec![None; k], 0)
    };
    members.resize(m, Vec::new());
    centers.resize(m, None);
    let r = realize(ctx, members, centers, iters, Tours::Build(variant.tour_build()));
    Ok(if r.is_feasible() {
        Attempt::Feasible(r.plan)
    } else {
        Attempt::Infeasible(r.binding)
    })
}

/// Plans the fleet with the proposed method (or one of its ablation arms).
pub fn plan(scenario: &Scenario, algo: &AlgoParams, variant: Variant) -> Result<Plan> {
    let ctx = Context::new(scenario, algo)?;
    fleet_loop(&ctx, |ctx, m| attempt_proposed(ctx, m, variant))
}

/// Checks a single fleet size without the loop.
pub fn plan_at(scenario: &Scenario, algo: &AlgoParams, variant: Variant, m: usize) -> Result<Attempt> {
    let ctx = Context::new(scenario, algo)?;
    if m == 0 {
        return Err(Error::param("m", "need at least one UAV"));
    }
    if ctx.partition.uav.is_empty() {
        let r = realize(&ctx, vec![Vec::new(); m], vec![None; m], 0, Tours::Build(TourBuild::NearestNeighbor));
        return Ok(if r.is_feasible() { Attempt::Feasible(r.plan) } else { Attempt::Infeasible(r.binding) });
    }
    attempt_proposed(&ctx, m, variant)
}

/// Recomputes every constraint of `plan` from the scenario alone.
pub fn validate(plan: &Plan, scenario: &Scenario) -> ConstraintReport {
    let p = &scenario.physical;
    let sensors = &scenario.sensors;
    let mut defects = 0i64;

    let mut route_lengths_m = Vec::with_capacity(plan.routes.len());
    let mut route_revisits_s = Vec::with_capacity(plan.routes.len());
    let mut route_energies_wh = Vec::with_capacity(plan.routes.len());
    let mut revisit_margin = f64::INFINITY;
    let mut energy_margin = f64::INFINITY;
    let mut served = vec![0usize; sensors.len()];

    if plan.routes.len() != plan.m || plan.clustering.members.len() != plan.m {
        defects += 1;
    }
    for (j, r) in plan.routes.iter().enumerate() {
        let Some(depot) = scenario.edges.get(r.depot) else {
            defects += 1;
            continue;
        };
        if plan.assignment.cluster_map.get(j) != Some(&r.depot) {
            defects += 1;
        }
        let mut ok_ids = true;
        for &id in &r.waypoints {
            match served.get_mut(id) {
                Some(n) => *n += 1,
                None => ok_ids = false,
            }
        }
        if !ok_ids {
            defects += 1;
            continue;
        }
        let in_route: BTreeSet<usize> = r.waypoints.iter().copied().collect();
        let in_cluster: BTreeSet<usize> = plan
            .clustering
            .members
            .get(j)
            .map(|ms| ms.iter().copied().collect())
            .unwrap_or_default();
        if in_route != in_cluster {
            defects += 1;
        }
        let length = routing::waypoint_length(depot.pos, &r.waypoints, sensors);
        let revisit = length / p.v_g;
        let alpha: f64 = r.waypoints.iter().map(|&id| sensors[id].request.data_size_mb).sum();
        let energy = routing::route_energy(length, alpha, p);
        revisit_margin = revisit_margin.min(p.t_max_s - revisit);
        energy_margin = energy_margin.min(p.e_max_wh - energy);
        route_lengths_m.push(length);
        route_revisits_s.push(revisit);
        route_energies_wh.push(energy);
    }

    let r_se = link_ranges(p).r_se;
    let mut loads = vec![0.0; scenario.edges.len()];
    for (&sid, &k) in &plan.assignment.direct_map {
        match (sensors.get(sid), scenario.edges.get(k)) {
            (Some(s), Some(e)) => {
                if distance(s.pos, e.pos) > r_se {
                    defects += 1;
                }
                served[sid] += 1;
                loads[k] += s.request.compute_mi / p.t_period_s;
            }
            _ => defects += 1,
        }
    }
    for (j, ms) in plan.clustering.members.iter().enumerate() {
        let Some(&k) = plan.assignment.cluster_map.get(j) else {
            defects += 1;
            continue;
        };
        if k >= loads.len() {
            defects += 1;
            continue;
        }
        loads[k] += ms.iter().filter_map(|&id| sensors.get(id)).map(|s| s.request.compute_mi).sum::<f64>() / p.t_period_s;
    }
    defects += served.iter().filter(|&&n| n != 1).count() as i64;
    let capacity_margin = scenario
        .edges
        .iter()
        .zip(&loads)
        .map(|(e, l)| e.capacity_mips - l)
        .fold(f64::INFINITY, f64::min);

    ConstraintReport {
        revisit: Check::from_margin(revisit_margin),
        energy: Check::from_margin(energy_margin),
        capacity: Check::from_margin(capacity_margin),
        deadline: None,
        fleet: Check::from_margin(p.m_max as f64 - plan.m as f64),
        coverage: Check::from_margin(-(defects as f64)),
        route_lengths_m,
        route_revisits_s,
        route_energies_wh,
        edge_loads: loads,
    }
}
