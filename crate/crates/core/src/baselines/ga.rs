use alloc::vec::Vec;

use rand::Rng;

use super::{penalized_fitness, realize_labels};
use crate::domain::AlgoParams;
use crate::error::{Error, Result};
use crate::planner::{self, Attempt, Context, Plan, Realized, Tours};
use crate::rng;
use crate::routing::TourBuild;
use crate::scenario::Scenario;

/// How a chromosome's clusters are turned into tours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GaRouting {
    /// Nearest neighbor from the depot; the priority genes are carried but
    /// do not affect the tour.
    #[default]
    NearestNeighbor,
    /// Nearest neighbor followed by 2-opt.
    TwoOpt,
    /// Visit in ascending priority-gene order.
    Priority,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub routing: GaRouting,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 50,
            generations: 100,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            tournament_size: 3,
            routing: GaRouting::NearestNeighbor,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::param("population", "must be >= 2"));
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::param(name, "must be in [0, 1]"));
            }
        }
        if self.tournament_size == 0 {
            return Err(Error::param("tournament_size", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Individual {
    assign: Vec<usize>,
    prio: Vec<f64>,
    fitness: f64,
}

/// Outcome of one GA run at a fixed fleet size.
#[derive(Debug, Clone)]
pub struct GaRun {
    pub best: Realized,
    pub best_fitness: f64,
    /// Best fitness after initialization and after every generation.
    pub history: Vec<f64>,
}

fn decode(ctx: &Context<'_>, ind: &Individual, m: usize, routing: GaRouting) -> Realized {
    match routing {
        GaRouting::NearestNeighbor => realize_labels(ctx, &ind.assign, m, TourBuild::NearestNeighbor),
        GaRouting::TwoOpt => realize_labels(ctx, &ind.assign, m, TourBuild::TwoOpt),
        GaRouting::Priority => {
            let mut orders: Vec<Vec<(f64, usize)>> = alloc::vec![Vec::new(); m];
            for (g, &id) in ctx.partition.uav.iter().enumerate() {
                orders[ind.assign[g]].push((ind.prio[g], id));
            }
            let orders: Vec<Vec<usize>> = orders
                .into_iter()
                .map(|mut o| {
                    o.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    o.into_iter().map(|(_, id)| id).collect()
                })
                .collect();
            let members = orders.clone();
            planner::realize(ctx, members, alloc::vec![None; m], 0, Tours::Given(&orders))
        }
    }
}

fn evaluate(ctx: &Context<'_>, ind: &mut Individual, m: usize, routing: GaRouting) -> Realized {
    let r = decode(ctx, ind, m, routing);
    ind.fitness = penalized_fitness(ctx, &r);
    r
}

fn tournament<'p>(pop: &'p [Individual], k: usize, rng: &mut impl Rng) -> &'p Individual {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..k {
        let c = &pop[rng.random_range(0..pop.len())];
        if c.fitness < best.fitness {
            best = c;
        }
    }
    best
}

/// Evolves assignment-plus-priority chromosomes for `m` UAVs.
pub fn ga_run(ctx: &Context<'_>, m: usize, cfg: &GaConfig) -> Result<GaRun> {
    cfg.validate()?;
    if m == 0 {
        return Err(Error::param("m", "need at least one UAV"));
    }
    let n = ctx.partition.uav.len();
    let mut rng = rng::stream(cfg.seed, "ga", m as u64);

    let mut pop: Vec<Individual> = (0..cfg.population)
        .map(|_| Individual {
            assign: (0..n).map(|_| rng.random_range(0..m)).collect(),
            prio: (0..n).map(|_| rng.random::<f64>()).collect(),
            fitness: f64::INFINITY,
        })
        .collect();
    let mut best: Option<(Individual, Realized)> = None;
    for ind in &mut pop {
        let r = evaluate(ctx, ind, m, cfg.routing);
        if best.as_ref().is_none_or(|(b, _)| ind.fitness < b.fitness) {
            best = Some((ind.clone(), r));
        }
    }
    let (mut best_ind, mut best_r) = best.expect("population is non-empty");
    let mut history = alloc::vec![best_ind.fitness];

    for _ in 0..cfg.generations {
        let mut next = Vec::with_capacity(cfg.population);
        next.push(best_ind.clone());
        while next.len() < cfg.population {
            let a = tournament(&pop, cfg.tournament_size, &mut rng).clone();
            let b = tournament(&pop, cfg.tournament_size, &mut rng).clone();
            let (mut c1, mut c2) = (a, b);
            if 2 * n > 1 && rng.random::<f64>() < cfg.crossover_rate {
                // Single cut on the concatenated (assignment ++ priority) genome.
                let cut = rng.random_range(1..2 * n);
                for g in cut..2 * n {
                    if g < n {
                        core::mem::swap(&mut c1.assign[g], &mut c2.assign[g]);
                    } else {
                        core::mem::swap(&mut c1.prio[g - n], &mut c2.prio[g - n]);
                    }
                }
            }
            for c in [&mut c1, &mut c2] {
                for g in 0..n {
                    if rng.random::<f64>() < cfg.mutation_rate {
                        c.assign[g] = rng.random_range(0..m);
                    }
                }
                for g in 0..n {
                    if rng.random::<f64>() < cfg.mutation_rate {
                        c.prio[g] = rng.random::<f64>();
                    }
                }
            }
            next.push(c1);
            if next.len() < cfg.population {
                next.push(c2);
            }
        }
        for ind in next.iter_mut().skip(1) {
            let r = evaluate(ctx, ind, m, cfg.routing);
            if ind.fitness < best_ind.fitness {
                best_ind = ind.clone();
                best_r = r;
            }
        }
        pop = next;
        history.push(best_ind.fitness);
    }
    Ok(GaRun {
        best: best_r,
        best_fitness: best_ind.fitness,
        history,
    })
}

/// GA inside the shared fleet-sizing loop; a fleet size is accepted once the
/// best individual is feasible.
pub fn ga_plan(scenario: &Scenario, algo: &AlgoParams, cfg: &GaConfig) -> Result<Plan> {
    cfg.validate()?;
    let ctx = Context::new(scenario, algo)?;
    planner::fleet_loop(&ctx, |ctx, m| {
        let run = ga_run(ctx, m, cfg)?;
        Ok(if run.best.is_feasible() {
            Attempt::Feasible(run.best.plan)
        } else {
            Attempt::Infeasible(run.best.binding)
        })
    })
}
