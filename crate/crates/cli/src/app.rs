//! Subcommand implementations, callable without going through the binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use wildpatrol_core::baselines::{self, Method, MethodConfig};
use wildpatrol_core::emergency::{self, SimConfig};
use wildpatrol_core::scenario::generate;
use wildpatrol_core::{planner, rng, timing, Variant};

use crate::compare::{self, Arm};
use crate::config::{ConfigError, RunConfig};
use crate::files::{self, FileError, PlanDoc, SimSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("infeasible: {0}")]
    Infeasible(wildpatrol_core::Error),
    #[error("{0}")]
    Experiment(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::File(FileError::Config(..)) => 2,
            CliError::File(_) => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Experiment(_) => 4,
        }
    }
}

fn core_err(e: wildpatrol_core::Error) -> CliError {
    match e {
        wildpatrol_core::Error::Infeasible { .. } => CliError::Infeasible(e),
        other => CliError::Usage(other.to_string()),
    }
}

pub struct GenerateOutcome {
    pub path: PathBuf,
    pub summary: String,
}

pub fn generate_cmd(cfg: &RunConfig, out: &Path) -> Result<GenerateOutcome, CliError> {
    cfg.validate()?;
    let s = generate(&cfg.gen, &cfg.physical).map_err(core_err)?;
    files::save_scenario(&s, out)?;
    Ok(GenerateOutcome {
        path: out.to_path_buf(),
        summary: format!(
            "sensors={} edges={} hotspots={} hotspot_sensors={} seed={}",
            s.sensors.len(),
            s.edges.len(),
            s.meta.hotspots.len(),
            s.meta.hotspot_sensors.len(),
            s.meta.seed
        ),
    })
}

/// Row of `metrics.csv`; `planning_time_s` is the only wall-clock field.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub method: String,
    pub variant: String,
    pub seed: u64,
    pub fleet: usize,
    pub total_length_m: f64,
    pub total_energy_wh: f64,
    pub mean_response_s: f64,
    pub planning_time_s: f64,
}

pub fn plan_cmd(cfg: &RunConfig, scenario_path: &Path, out_dir: &Path) -> Result<MetricsRow, CliError> {
    cfg.validate()?;
    let scenario = files::load_scenario(scenario_path)?;
    let mc = MethodConfig {
        variant: Some(cfg.variant),
        ga: cfg.ga.clone(),
        pso: cfg.pso.clone(),
    };
    let t0 = Instant::now();
    let mut plan = baselines::plan_with(cfg.method, &scenario, &cfg.algo, &mc).map_err(core_err)?;
    plan.planning_time_s = t0.elapsed().as_secs_f64();

    let report = planner::validate(&plan, &scenario);
    if !report.all_pass() {
        // Never hand out a plan that fails its own constraints.
        return Err(CliError::Infeasible(wildpatrol_core::Error::Infeasible {
            m_max: scenario.physical.m_max,
            binding: report.binding(),
        }));
    }
    let label = if cfg.method == Method::Proposed && cfg.variant != Variant::Full {
        format!("proposed:{}", cfg.variant.name())
    } else {
        cfg.method.name().to_string()
    };
    let doc = PlanDoc::new(&plan, &scenario, &label, cfg.algo.seed);
    files::save_plan(&doc, &out_dir.join("plan.json"))?;
    files::write_route_geometry(&doc, &out_dir.join("routes.csv"))?;
    let row = MetricsRow {
        method: cfg.method.name().into(),
        variant: cfg.variant.name().into(),
        seed: cfg.algo.seed,
        fleet: plan.m,
        total_length_m: plan.total_length_m(),
        total_energy_wh: plan.total_energy_wh(),
        mean_response_s: timing::mean_response_time(&plan, &scenario).map_err(core_err)?,
        planning_time_s: plan.planning_time_s,
    };
    files::write_csv(&out_dir.join("metrics.csv"), [row.clone()])?;
    Ok(row)
}

pub struct SimulateArgs<'a> {
    pub scenario: &'a Path,
    pub plan: &'a Path,
    pub events: Option<&'a Path>,
    pub force_own_cluster: bool,
    pub edges_down: Vec<usize>,
    pub n_events: usize,
    pub min_history: u32,
}

pub struct SimulateOutcome {
    pub events: usize,
    pub mean_response_s: Option<f64>,
    pub deadline_hit_rate: Option<f64>,
    pub relative_impact: f64,
}

pub fn simulate_cmd(cfg: &RunConfig, args: &SimulateArgs<'_>, out_dir: &Path) -> Result<SimulateOutcome, CliError> {
    cfg.validate()?;
    let scenario = files::load_scenario(args.scenario)?;
    let plan = files::load_plan(args.plan)?.to_plan();
    if !planner::validate(&plan, &scenario).coverage.pass {
        return Err(CliError::Usage(format!(
            "{} does not match {}",
            args.plan.display(),
            args.scenario.display()
        )));
    }
    let events = match args.events {
        Some(p) => files::load_events(p)?,
        None => emergency::default_events(&scenario, args.n_events, args.min_history, cfg.horizon_s).map_err(|_| {
            CliError::Experiment(format!(
                "no relay sensor with fire history above {} and no event file given",
                args.min_history
            ))
        })?,
    };
    let sim = SimConfig {
        horizon_s: cfg.horizon_s,
        force_own_cluster: args.force_own_cluster,
        unavailable_edges: args.edges_down.clone(),
        ..SimConfig::from_algo(&cfg.algo)
    };
    let mut r = rng::stream(cfg.algo.seed, "sim-phase", 0);
    let out = emergency::simulate(&plan, &scenario, &events, &sim, &mut r).map_err(|e| CliError::Experiment(e.to_string()))?;
    files::save_events(&events, &out_dir.join("events.json"))?;
    files::write_traces(&out.traces, &out_dir.join("trace.csv"))?;
    files::save_sim_summary(
        &SimSummary {
            seed: cfg.algo.seed,
            events: out.traces.len(),
            mean_response_s: out.mean_response_s(),
            deadline_hit_rate: out.deadline_hit_rate(),
            t_urgent_s: scenario.physical.t_urgent_s,
            normal_impact: &out.impact,
        },
        &out_dir.join("impact.json"),
    )?;
    Ok(SimulateOutcome {
        events: out.traces.len(),
        mean_response_s: out.mean_response_s(),
        deadline_hit_rate: out.deadline_hit_rate(),
        relative_impact: out.impact.relative_delta,
    })
}

pub struct CompareOutcome {
    pub summary: compare::Summary,
    pub cells: Vec<compare::Cell>,
}

pub fn compare_cmd(cfg: &RunConfig, arms: &[Arm], out_dir: &Path, threads: Option<usize>) -> Result<CompareOutcome, CliError> {
    cfg.validate()?;
    if arms.is_empty() {
        return Err(CliError::Experiment("no methods selected".into()));
    }
    let seeds = cfg.seed_list();
    let sizes = cfg.sweep_sensors.clone().unwrap_or_else(|| vec![cfg.gen.n_sensors]);
    let cells = compare::run_grid(cfg, &sizes, arms, &seeds, threads);
    let summary = compare::summarize(&cells, &sizes, arms, &seeds);
    compare::write_report(out_dir, &cells, &summary, arms)?;
    let empty = compare::empty_cells(&cells, &sizes, &seeds);
    if !empty.is_empty() {
        return Err(CliError::Infeasible(wildpatrol_core::Error::Infeasible {
            m_max: cfg.physical.m_max,
            binding: vec![wildpatrol_core::Binding::Fleet],
        }));
    }
    Ok(CompareOutcome { summary, cells })
}
