use alloc::vec::Vec;

use crate::domain::{distance, AlgoParams, Point};
use crate::error::Result;
use crate::planner::{self, Attempt, Context, Plan, Tours};
use crate::routing::TourBuild;
use crate::scenario::Scenario;

/// Nearest-UAV clustering: `m` UAVs start at the edges (cycling when there
/// are more UAVs than edges); each relay sensor, in id order, joins the UAV
/// whose last-visited point is closest (ties by lower UAV id).
pub fn greedy_clusters(ctx: &Context<'_>, m: usize) -> Vec<Vec<usize>> {
    let sc = ctx.scenario;
    let mut ends: Vec<Point> = (0..m).map(|j| sc.edges[j % sc.edges.len()].pos).collect();
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); m];
    let mut ids = ctx.partition.uav.clone();
    ids.sort_unstable();
    for id in ids {
        let pos = sc.sensors[id].pos;
        let mut best = (0usize, f64::INFINITY);
        for (j, &e) in ends.iter().enumerate() {
            let d = distance(e, pos);
            if d < best.1 {
                best = (j, d);
            }
        }
        members[best.0].push(id);
        ends[best.0] = pos;
    }
    members
}

pub fn greedy_plan(scenario: &Scenario, algo: &AlgoParams) -> Result<Plan> {
    let ctx = Context::new(scenario, algo)?;
    planner::fleet_loop(&ctx, |ctx, m| {
        let members = greedy_clusters(ctx, m);
        let r = planner::realize(ctx, members, alloc::vec![None; m], 0, Tours::Build(TourBuild::NearestNeighbor));
        Ok(if r.is_feasible() { Attempt::Feasible(r.plan) } else { Attempt::Infeasible(r.binding) })
    })
}
