//! Multi-method, multi-seed experiment harness.
//!
//! Every (sensor count, arm, seed) cell is an independent deterministic run:
//! the scenario is generated from the seed, planned by the arm, and scored.
//! Cells fan out over a rayon pool (capped by `FW_THREADS`); aggregation is
//! sequential and ordered, so reports are byte-stable across thread counts.
//! Wall-clock planning times go to a separate `timing.csv`.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use wildpatrol_core::baselines::{self, Method, MethodConfig};
use wildpatrol_core::scenario::generate;
use wildpatrol_core::{timing, GenConfig, Variant};

use crate::config::RunConfig;
use crate::files::{self, FileError};

/// One planner configuration under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Arm {
    pub method: Method,
    pub variant: Variant,
}

impl Arm {
    pub fn method(method: Method) -> Self {
        Arm {
            method,
            variant: Variant::Full,
        }
    }

    pub fn ablation(variant: Variant) -> Self {
        Arm {
            method: Method::Proposed,
            variant,
        }
    }

    pub fn label(&self) -> String {
        match (self.method, self.variant) {
            (Method::Proposed, Variant::Full) => "proposed".into(),
            (Method::Proposed, v) => format!("proposed:{}", v.name()),
            (m, _) => m.name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub fleet: usize,
    pub total_length_m: f64,
    pub total_energy_wh: f64,
    pub mean_response_s: f64,
    /// Per-sensor response times in sensor id order.
    pub responses: Vec<f64>,
    pub planning_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub n_sensors: usize,
    pub arm: Arm,
    pub seed: u64,
    pub outcome: Result<CellMetrics, String>,
}

/// Runs one cell.
pub fn run_cell(cfg: &RunConfig, n_sensors: usize, arm: Arm, seed: u64) -> Cell {
    let outcome = (|| {
        let gen = GenConfig {
            n_sensors,
            seed,
            ..cfg.gen.clone()
        };
        let scenario = generate(&gen, &cfg.physical).map_err(|e| e.to_string())?;
        let algo = wildpatrol_core::AlgoParams {
            seed,
            ..cfg.algo.clone()
        };
        let mc = MethodConfig {
            variant: Some(arm.variant),
            ga: cfg.ga.clone(),
            pso: cfg.pso.clone(),
        };
        let t0 = Instant::now();
        let plan = baselines::plan_with(arm.method, &scenario, &algo, &mc).map_err(|e| e.to_string())?;
        let planning_time_s = t0.elapsed().as_secs_f64();
        let responses: Vec<f64> = timing::all_response_times(&plan, &scenario)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|r| r.t_total)
            .collect();
        Ok(CellMetrics {
            fleet: plan.m,
            total_length_m: plan.total_length_m(),
            total_energy_wh: plan.total_energy_wh(),
            mean_response_s: responses.iter().sum::<f64>() / responses.len() as f64,
            responses,
            planning_time_s,
        })
    })();
    Cell {
        n_sensors,
        arm,
        seed,
        outcome,
    }
}

/// Worker count from `FW_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("FW_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every cell, in parallel, returning them in (size, arm, seed) order.
pub fn run_grid(cfg: &RunConfig, sizes: &[usize], arms: &[Arm], seeds: &[u64], threads: Option<usize>) -> Vec<Cell> {
    let jobs: Vec<(usize, Arm, u64)> = sizes
        .iter()
        .flat_map(|&n| arms.iter().flat_map(move |&a| seeds.iter().map(move |&s| (n, a, s))))
        .collect();
    let run = || jobs.par_iter().map(|&(n, a, s)| run_cell(cfg, n, a, s)).collect();
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(|pool| pool.install(run))
            .unwrap_or_else(|_| run()),
        None => run(),
    }
}

/// Sample mean with a two-sided 95% Student-t half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    /// `None` with fewer than two samples.
    pub ci95: Option<f64>,
}

pub fn stat(xs: &[f64]) -> Stat {
    let n = xs.len();
    if n == 0 {
        return Stat {
            n,
            mean: f64::NAN,
            ci95: None,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ci95 = (n >= 2).then(|| {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        t * (var / n as f64).sqrt()
    });
    Stat { n, mean, ci95 }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupSummary {
    pub n_sensors: usize,
    pub arm: String,
    pub seeds_ok: usize,
    pub failures: Vec<(u64, String)>,
    pub mean_response_s: Stat,
    pub total_energy_wh: Stat,
    pub fleet: Stat,
    pub total_length_m: Stat,
}

/// Per-seed `arm - reference` differences for one metric.
#[derive(Debug, Clone, Serialize)]
pub struct Paired {
    pub n_sensors: usize,
    pub arm: String,
    pub reference: String,
    pub metric: &'static str,
    pub diff: Stat,
    pub per_seed: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub seeds: Vec<u64>,
    pub sizes: Vec<usize>,
    pub groups: Vec<GroupSummary>,
    pub paired: Vec<Paired>,
    pub warnings: Vec<String>,
}

type Metric = (&'static str, fn(&CellMetrics) -> f64);

const METRICS: [Metric; 4] = [
    ("mean_response_s", |c| c.mean_response_s),
    ("total_energy_wh", |c| c.total_energy_wh),
    ("fleet", |c| c.fleet as f64),
    ("total_length_m", |c| c.total_length_m),
];

pub fn summarize(cells: &[Cell], sizes: &[usize], arms: &[Arm], seeds: &[u64]) -> Summary {
    let mut warnings = Vec::new();
    if seeds.len() < 2 {
        warnings.push("fewer than two seeds: confidence intervals omitted".to_string());
    }
    let ok = |n: usize, a: Arm| -> Vec<(u64, &CellMetrics)> {
        cells
            .iter()
            .filter(|c| c.n_sensors == n && c.arm == a)
            .filter_map(|c| c.outcome.as_ref().ok().map(|m| (c.seed, m)))
            .collect()
    };
    let mut groups = Vec::new();
    let mut paired = Vec::new();
    for &n in sizes {
        for &a in arms {
            let good = ok(n, a);
            let col = |f: fn(&CellMetrics) -> f64| stat(&good.iter().map(|(_, m)| f(m)).collect::<Vec<_>>());
            groups.push(GroupSummary {
                n_sensors: n,
                arm: a.label(),
                seeds_ok: good.len(),
                failures: cells
                    .iter()
                    .filter(|c| c.n_sensors == n && c.arm == a)
                    .filter_map(|c| c.outcome.as_ref().err().map(|e| (c.seed, e.clone())))
                    .collect(),
                mean_response_s: col(METRICS[0].1),
                total_energy_wh: col(METRICS[1].1),
                fleet: col(METRICS[2].1),
                total_length_m: col(METRICS[3].1),
            });
        }
        let Some(&reference) = arms.first() else { continue };
        let base = ok(n, reference);
        for &a in &arms[1..] {
            let other = ok(n, a);
            for (name, f) in METRICS {
                let per_seed: Vec<(u64, f64)> = other
                    .iter()
                    .filter_map(|(s, m)| base.iter().find(|(bs, _)| bs == s).map(|(_, b)| (*s, f(m) - f(b))))
                    .collect();
                paired.push(Paired {
                    n_sensors: n,
                    arm: a.label(),
                    reference: reference.label(),
                    metric: name,
                    diff: stat(&per_seed.iter().map(|(_, d)| *d).collect::<Vec<_>>()),
                    per_seed,
                });
            }
        }
    }
    Summary {
        seeds: seeds.to_vec(),
        sizes: sizes.to_vec(),
        groups,
        paired,
        warnings,
    }
}

/// `(size, seed)` cells where no arm produced a plan.
pub fn empty_cells(cells: &[Cell], sizes: &[usize], seeds: &[u64]) -> Vec<(usize, u64)> {
    let mut out = Vec::new();
    for &n in sizes {
        for &s in seeds {
            if !cells.iter().any(|c| c.n_sensors == n && c.seed == s && c.outcome.is_ok()) {
                out.push((n, s));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct CellRow<'a> {
    n_sensors: usize,
    arm: &'a str,
    seed: u64,
    status: &'a str,
    fleet: Option<usize>,
    total_length_m: Option<f64>,
    total_energy_wh: Option<f64>,
    mean_response_s: Option<f64>,
    error: &'a str,
}

#[derive(Serialize)]
struct CdfRow<'a> {
    n_sensors: usize,
    method: &'a str,
    response_s: f64,
    cum_fraction: f64,
}

#[derive(Serialize)]
struct PairedRow<'a> {
    n_sensors: usize,
    arm: &'a str,
    reference: &'a str,
    metric: &'a str,
    seed: u64,
    diff: f64,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    n_sensors: usize,
    arm: &'a str,
    seed: u64,
    planning_time_s: f64,
}

/// Writes `cells.csv`, `cdf.csv`, `paired.csv`, `summary.json` and
/// `timing.csv` into `dir`.
pub fn write_report(dir: &Path, cells: &[Cell], summary: &Summary, arms: &[Arm]) -> Result<(), FileError> {
    let labels: Vec<(Arm, String)> = arms.iter().map(|a| (*a, a.label())).collect();
    let label = |a: Arm| labels.iter().find(|(x, _)| *x == a).map(|(_, l)| l.as_str()).unwrap_or("?");

    files::write_csv(
        &dir.join("cells.csv"),
        cells.iter().map(|c| {
            let m = c.outcome.as_ref().ok();
            CellRow {
                n_sensors: c.n_sensors,
                arm: label(c.arm),
                seed: c.seed,
                status: if m.is_some() { "ok" } else { "failed" },
                fleet: m.map(|m| m.fleet),
                total_length_m: m.map(|m| m.total_length_m),
                total_energy_wh: m.map(|m| m.total_energy_wh),
                mean_response_s: m.map(|m| m.mean_response_s),
                error: c.outcome.as_ref().err().map(String::as_str).unwrap_or(""),
            }
        }),
    )?;

    let mut cdf_rows = Vec::new();
    for &n in &summary.sizes {
        for &a in arms {
            let mut all: Vec<f64> = cells
                .iter()
                .filter(|c| c.n_sensors == n && c.arm == a)
                .filter_map(|c| c.outcome.as_ref().ok())
                .flat_map(|m| m.responses.iter().copied())
                .collect();
            all.sort_by(f64::total_cmp);
            let total = all.len() as f64;
            cdf_rows.extend(all.into_iter().enumerate().map(|(i, r)| CdfRow {
                n_sensors: n,
                method: label(a),
                response_s: r,
                cum_fraction: (i + 1) as f64 / total,
            }));
        }
    }
    files::write_csv(&dir.join("cdf.csv"), cdf_rows)?;

    files::write_csv(
        &dir.join("paired.csv"),
        summary.paired.iter().flat_map(|p| {
            p.per_seed.iter().map(move |&(seed, diff)| PairedRow {
                n_sensors: p.n_sensors,
                arm: &p.arm,
                reference: &p.reference,
                metric: p.metric,
                seed,
                diff,
            })
        }),
    )?;
    files::save_json(summary, &dir.join("summary.json"))?;
    files::write_csv(
        &dir.join("timing.csv"),
        cells.iter().filter_map(|c| {
            c.outcome.as_ref().ok().map(|m| TimingRow {
                n_sensors: c.n_sensors,
                arm: label(c.arm),
                seed: c.seed,
                planning_time_s: m.planning_time_s,
            })
        }),
    )
}
