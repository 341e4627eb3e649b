use alloc::vec::Vec;

use rand::Rng;

use super::{penalized_fitness, realize_labels};
use crate::domain::AlgoParams;
use crate::error::{Error, Result};
use crate::planner::{self, Attempt, Context, Plan, Realized};
use crate::rng;
use crate::routing::TourBuild;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PsoConfig {
    pub swarm: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub tours: PsoTours,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PsoTours {
    #[default]
    NearestNeighbor,
    TwoOpt,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm: 30,
            iterations: 100,
            inertia: 0.7,
            c1: 1.5,
            c2: 1.5,
            tours: PsoTours::NearestNeighbor,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm < 2 {
            return Err(Error::param("swarm", "must be >= 2"));
        }
        for (name, c) in [("inertia", self.inertia), ("c1", self.c1), ("c2", self.c2)] {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::param(name, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    fn tour_build(&self) -> TourBuild {
        match self.tours {
            PsoTours::NearestNeighbor => TourBuild::NearestNeighbor,
            PsoTours::TwoOpt => TourBuild::TwoOpt,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PsoRun {
    pub best: Realized,
    pub best_fitness: f64,
    /// Global best fitness after initialization and after every iteration.
    pub history: Vec<f64>,
}

/// Round-half-up of a position in `[1, m]` to a 0-based cluster index.
pub fn decode_position(x: f64, m: usize) -> usize {
    let k = libm::floor(x.clamp(1.0, m as f64) + 0.5) as usize;
    k.clamp(1, m) - 1
}

fn decode(x: &[f64], m: usize) -> Vec<usize> {
    x.iter().map(|&v| decode_position(v, m)).collect()
}

/// Runs the swarm from random positions in `[1, m]` and zero velocity.
pub fn pso_run(ctx: &Context<'_>, m: usize, cfg: &PsoConfig) -> Result<PsoRun> {
    let n = ctx.partition.uav.len();
    let mut rng = rng::stream(cfg.seed, "pso", m as u64);
    let hi = m as f64;
    let xs: Vec<Vec<f64>> = (0..cfg.swarm)
        .map(|_| (0..n).map(|_| 1.0 + rng.random::<f64>() * (hi - 1.0)).collect())
        .collect();
    let vs = alloc::vec![alloc::vec![0.0; n]; cfg.swarm];
    pso_loop(ctx, m, cfg, xs, vs, &mut rng)
}

/// Runs the swarm from caller-provided positions and velocities.
pub fn pso_run_from(ctx: &Context<'_>, m: usize, cfg: &PsoConfig, xs: Vec<Vec<f64>>, vs: Vec<Vec<f64>>) -> Result<PsoRun> {
    let mut rng = rng::stream(cfg.seed, "pso", m as u64);
    pso_loop(ctx, m, cfg, xs, vs, &mut rng)
}

fn pso_loop(
    ctx: &Context<'_>,
    m: usize,
    cfg: &PsoConfig,
    mut xs: Vec<Vec<f64>>,
    mut vs: Vec<Vec<f64>>,
    rng: &mut impl Rng,
) -> Result<PsoRun> {
    cfg.validate()?;
    if m == 0 {
        return Err(Error::param("m", "need at least one UAV"));
    }
    let n = ctx.partition.uav.len();
    if xs.is_empty() || xs.len() != vs.len() || xs.iter().chain(&vs).any(|v| v.len() != n) {
        return Err(Error::param("swarm", "positions and velocities must match the relay sensor count"));
    }
    let (lo, hi) = (1.0, m as f64);
    let v_max = (hi - lo).max(1.0);
    let build = cfg.tour_build();

    let mut pbest = xs.clone();
    let mut pbest_f = Vec::with_capacity(xs.len());
    let mut gbest: Option<(usize, f64, Realized)> = None;
    for (i, x) in xs.iter().enumerate() {
        let r = realize_labels(ctx, &decode(x, m), m, build);
        let f = penalized_fitness(ctx, &r);
        pbest_f.push(f);
        if gbest.as_ref().is_none_or(|g| f < g.1) {
            gbest = Some((i, f, r));
        }
    }
    let (gi, mut g_f, mut g_r) = gbest.expect("swarm is non-empty");
    let mut g_x = xs[gi].clone();
    let mut history = alloc::vec![g_f];

    for _ in 0..cfg.iterations {
        for i in 0..xs.len() {
            for d in 0..n {
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                let v = cfg.inertia * vs[i][d] + cfg.c1 * r1 * (pbest[i][d] - xs[i][d]) + cfg.c2 * r2 * (g_x[d] - xs[i][d]);
                vs[i][d] = v.clamp(-v_max, v_max);
                xs[i][d] = (xs[i][d] + vs[i][d]).clamp(lo, hi);
            }
            let r = realize_labels(ctx, &decode(&xs[i], m), m, build);
            let f = penalized_fitness(ctx, &r);
            if f < pbest_f[i] {
                pbest_f[i] = f;
                pbest[i].clone_from(&xs[i]);
            }
            if f < g_f {
                g_f = f;
                g_x.clone_from(&xs[i]);
                g_r = r;
            }
        }
        history.push(g_f);
    }
    Ok(PsoRun {
        best: g_r,
        best_fitness: g_f,
        history,
    })
}

pub fn pso_plan(scenario: &Scenario, algo: &AlgoParams, cfg: &PsoConfig) -> Result<Plan> {
    cfg.validate()?;
    let ctx = Context::new(scenario, algo)?;
    planner::fleet_loop(&ctx, |ctx, m| {
        let run = pso_run(ctx, m, cfg)?;
        Ok(if run.best.is_feasible() {
            Attempt::Feasible(run.best.plan)
        } else {
            Attempt::Infeasible(run.best.binding)
        })
    })
}
