//! Comparison planners: genetic algorithm, particle swarm and a greedy
//! nearest-UAV heuristic.
//!
//! All three run inside the same fleet-sizing loop as the proposed planner
//! and share its edge assignment, routing primitives and validation; only
//! the way sensors are grouped into clusters differs.

mod ga;
mod greedy;
mod pso;

use alloc::vec::Vec;

pub use ga::{ga_plan, ga_run, GaConfig, GaRouting, GaRun};
pub use greedy::{greedy_clusters, greedy_plan};
pub use pso::{decode_position, pso_plan, pso_run, pso_run_from, PsoConfig, PsoRun, PsoTours};

use crate::domain::AlgoParams;
use crate::error::Result;
use crate::planner::{self, Context, Plan, Realized, Tours, Variant};
use crate::routing::TourBuild;
use crate::scenario::Scenario;
use crate::timing;

/// Added to the objective once per violated revisit, energy or capacity
/// limit.
pub const VIOLATION_PENALTY: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    Proposed,
    Ga,
    Pso,
    Greedy,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Proposed, Method::Ga, Method::Pso, Method::Greedy];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Ga => "ga",
            Method::Pso => "pso",
            Method::Greedy => "greedy",
        }
    }
}

/// Knobs for every method; the seeds inside `ga`/`pso` are overridden by the
/// run seed in [`plan_with`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MethodConfig {
    pub variant: Option<Variant>,
    pub ga: GaConfig,
    pub pso: PsoConfig,
}

/// Runs `method` with the run seed from `algo`.
pub fn plan_with(method: Method, scenario: &Scenario, algo: &AlgoParams, cfg: &MethodConfig) -> Result<Plan> {
    match method {
        Method::Proposed => planner::plan(scenario, algo, cfg.variant.unwrap_or(Variant::Full)),
        Method::Ga => ga_plan(scenario, algo, &GaConfig { seed: algo.seed, ..cfg.ga.clone() }),
        Method::Pso => pso_plan(scenario, algo, &PsoConfig { seed: algo.seed, ..cfg.pso.clone() }),
        Method::Greedy => greedy_plan(scenario, algo),
    }
}

/// Planning objective plus the violation penalty.
pub fn penalized_fitness(ctx: &Context<'_>, r: &Realized) -> f64 {
    let base = timing::objective(&r.plan, ctx.scenario, ctx.algo.lambda).unwrap_or(f64::INFINITY);
    base + VIOLATION_PENALTY * r.violations as f64
}

/// Decodes a per-sensor cluster label vector (aligned with the relay
/// sensor list) into member lists and realizes the plan.
pub(crate) fn realize_labels(ctx: &Context<'_>, labels: &[usize], m: usize, tours: TourBuild) -> Realized {
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); m];
    for (&id, &j) in ctx.partition.uav.iter().zip(labels) {
        members[j].push(id);
    }
    planner::realize(ctx, members, alloc::vec![None; m], 0, Tours::Build(tours))
}
