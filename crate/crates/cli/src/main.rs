use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wildpatrol::app::{self, CliError, SimulateArgs};
use wildpatrol::compare::{self, Arm};
use wildpatrol::config::{self, RunConfig};
use wildpatrol_core::baselines::Method;
use wildpatrol_core::Variant;

#[derive(Parser)]
#[command(name = "wildpatrol", version, about = "UAV patrol planning for wildfire sensor networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Options shared by every subcommand.
#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set omega_h=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Base seed for everything random.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic scenario.
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sensors: Option<usize>,
        #[arg(long)]
        edges: Option<usize>,
        #[arg(long)]
        hotspots: Option<usize>,
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    /// Plan a patrol fleet for a scenario.
    Plan {
        #[command(flatten)]
        common: Common,
        #[arg(long, short = 's')]
        scenario: PathBuf,
        /// proposed, ga, pso or greedy.
        #[arg(long)]
        method: Option<String>,
        /// Ablation arm of the proposed method: full, no-2opt, no-kmeans, no-both.
        #[arg(long)]
        variant: Option<String>,
        /// Output directory for plan.json, routes.csv and metrics.csv;
        /// defaults to `out_dir` from the config.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
    /// Simulate patrols with urgent alerts.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, short = 's')]
        scenario: PathBuf,
        #[arg(long, short = 'p')]
        plan: PathBuf,
        /// Event list; defaults to the highest-risk relay sensors.
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Only the alerting sensor's own cluster UAV may respond.
        #[arg(long)]
        force_own_cluster: bool,
        /// Mark an edge as unable to take deliveries. Repeatable.
        #[arg(long = "edge-down", value_name = "EDGE_ID")]
        edges_down: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        n_events: usize,
        #[arg(long, default_value_t = 50)]
        min_history: u32,
        /// Output directory; defaults to `out_dir` from the config.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
    /// Compare methods (or ablation arms) over many seeds.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Number of seeds, a range `a..b` or a list `1,2,3`.
        #[arg(long)]
        seeds: Option<String>,
        /// Sensor-count sweep `start:stop:step`.
        #[arg(long)]
        sweep_sensors: Option<String>,
        /// Comma-separated subset of proposed, ga, pso, greedy.
        #[arg(long)]
        methods: Option<String>,
        /// Compare the four ablation arms of the proposed method instead.
        #[arg(long)]
        ablation: bool,
        /// Output directory; defaults to `out_dir` from the config.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
}

fn load_config(common: &Common, extra: &[(&str, Option<String>)]) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    cfg.apply_overrides(&common.sets)?;
    if let Some(seed) = common.seed {
        cfg.set("seed", &seed.to_string(), "--seed")?;
    }
    for (key, value) in extra {
        if let Some(v) = value {
            cfg.set(key, v, &format!("--{}", key.replace('_', "-")))?;
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Generate {
            common,
            sensors,
            edges,
            hotspots,
            output,
        } => {
            let cfg = load_config(
                &common,
                &[
                    ("sensors", sensors.map(|v| v.to_string())),
                    ("edges", edges.map(|v| v.to_string())),
                    ("hotspots", hotspots.map(|v| v.to_string())),
                ],
            )?;
            let out = app::generate_cmd(&cfg, &output)?;
            println!("wrote {}: {}", out.path.display(), out.summary);
        }
        Cmd::Plan {
            common,
            scenario,
            method,
            variant,
            output,
        } => {
            let cfg = load_config(&common, &[("method", method), ("variant", variant)])?;
            let output = output.unwrap_or_else(|| cfg.out_dir.clone());
            let row = app::plan_cmd(&cfg, &scenario, &output)?;
            println!(
                "{} ({}): fleet={} length={:.0} m energy={:.1} Wh mean_response={:.1} s planning_time={:.3} s",
                row.method, row.variant, row.fleet, row.total_length_m, row.total_energy_wh, row.mean_response_s, row.planning_time_s
            );
        }
        Cmd::Simulate {
            common,
            scenario,
            plan,
            events,
            horizon,
            force_own_cluster,
            edges_down,
            n_events,
            min_history,
            output,
        } => {
            let cfg = load_config(&common, &[("horizon_s", horizon.map(|h| h.to_string()))])?;
            let output = output.unwrap_or_else(|| cfg.out_dir.clone());
            let out = app::simulate_cmd(
                &cfg,
                &SimulateArgs {
                    scenario: &scenario,
                    plan: &plan,
                    events: events.as_deref(),
                    force_own_cluster,
                    edges_down,
                    n_events,
                    min_history,
                },
                &output,
            )?;
            match (out.mean_response_s, out.deadline_hit_rate) {
                (Some(m), Some(h)) => println!(
                    "{} events: mean response {:.1} s, deadline hit rate {:.0}%, normal impact {:+.2}%",
                    out.events,
                    m,
                    100.0 * h,
                    100.0 * out.relative_impact
                ),
                _ => println!("no events: normal impact {:+.2}%", 100.0 * out.relative_impact),
            }
        }
        Cmd::Compare {
            common,
            seeds,
            sweep_sensors,
            methods,
            ablation,
            output,
        } => {
            let cfg = load_config(&common, &[("seeds", seeds), ("sweep_sensors", sweep_sensors)])
                .map_err(|e| match e {
                    // A malformed seed list or sweep is a bad experiment spec, not a usage error.
                    CliError::Config(c @ config::ConfigError::BadValue { .. })
                        if matches!(&c, config::ConfigError::BadValue { key, .. } if key == "seeds" || key == "sweep_sensors") =>
                    {
                        CliError::Experiment(c.to_string())
                    }
                    other => other,
                })?;
            let output = output.unwrap_or_else(|| cfg.out_dir.clone());
            let arms: Vec<Arm> = if ablation {
                Variant::ALL.into_iter().map(Arm::ablation).collect()
            } else {
                match methods {
                    None => Method::ALL.into_iter().map(Arm::method).collect(),
                    Some(list) => list
                        .split(',')
                        .map(|m| {
                            config::parse_method(m.trim())
                                .map(Arm::method)
                                .ok_or_else(|| CliError::Experiment(format!("unknown method `{m}`")))
                        })
                        .collect::<Result<_, _>>()?,
                }
            };
            let out = app::compare_cmd(&cfg, &arms, &output, compare::threads_from_env())?;
            for w in &out.summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("{:>8} {:<20} {:>5} {:>18} {:>18} {:>12}", "sensors", "arm", "ok", "response_s", "energy_wh", "fleet");
            for g in &out.summary.groups {
                let fmt = |s: &compare::Stat| match s.ci95 {
                    Some(ci) => format!("{:.1} ± {:.1}", s.mean, ci),
                    None => format!("{:.1}", s.mean),
                };
                println!(
                    "{:>8} {:<20} {:>5} {:>18} {:>18} {:>12}",
                    g.n_sensors,
                    g.arm,
                    g.seeds_ok,
                    fmt(&g.mean_response_s),
                    fmt(&g.total_energy_wh),
                    fmt(&g.fleet)
                );
            }
            println!("report written to {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
