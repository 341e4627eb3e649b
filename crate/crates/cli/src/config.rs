//! Flat `key = value` run configuration.
//!
//! One key per line, `#` starts a comment. Values are layered: built-in
//! defaults, then a config file, then command-line overrides. Unknown keys
//! are rejected so that a typo never silently falls back to a default.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use wildpatrol_core::baselines::{GaConfig, GaRouting, Method, PsoConfig, PsoTours};
use wildpatrol_core::emergency::DEFAULT_HORIZON_S;
use wildpatrol_core::{AlgoParams, FleetInitMode, GenConfig, PhysicalParams, Variant};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { key: String, origin: String },
    #[error("{origin}: bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
        origin: String,
    },
    #[error("{origin}:{line}: expected `key = value`")]
    Syntax { origin: String, line: usize },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub physical: PhysicalParams,
    pub algo: AlgoParams,
    pub gen: GenConfig,
    pub method: Method,
    pub variant: Variant,
    pub ga: GaConfig,
    pub pso: PsoConfig,
    /// Seeds of a multi-seed run; see [`RunConfig::seed_list`].
    pub seeds: SeedSpec,
    pub out_dir: PathBuf,
    pub horizon_s: f64,
    /// Sensor counts of a scaling sweep.
    pub sweep_sensors: Option<Vec<usize>>,
}

pub const DEFAULT_SEED_COUNT: u64 = 20;

/// Either a count relative to the base seed or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            physical: PhysicalParams::default(),
            algo: AlgoParams::default(),
            gen: GenConfig::default(),
            method: Method::Proposed,
            variant: Variant::Full,
            ga: GaConfig::default(),
            pso: PsoConfig::default(),
            seeds: SeedSpec::Count(DEFAULT_SEED_COUNT),
            out_dir: PathBuf::from("out"),
            horizon_s: DEFAULT_HORIZON_S,
            sweep_sensors: None,
        }
    }
}

/// Every accepted key, in the order [`RunConfig::to_text`] writes them.
pub const KEYS: &[&str] = &[
    "area_km2",
    "r_s",
    "r_g",
    "r_e",
    "data_rate_mbps",
    "v_g",
    "p_fly_w",
    "p_comm_w",
    "e_max_wh",
    "t_max_s",
    "t_period_s",
    "t_urgent_s",
    "m_max",
    "per_hop_latency_s",
    "omega_h",
    "omega_d",
    "omega_l",
    "lambda",
    "epsilon_m",
    "theta_max",
    "max_kmeans_iters",
    "fleet_init_mode",
    "seed",
    "sensors",
    "edges",
    "hotspots",
    "hotspot_fraction",
    "hotspot_sigma_m",
    "fire_history_max",
    "alpha_min_mb",
    "alpha_max_mb",
    "beta_min_mi",
    "beta_max_mi",
    "capacity_min_mips",
    "capacity_max_mips",
    "method",
    "variant",
    "ga_population",
    "ga_generations",
    "ga_crossover_rate",
    "ga_mutation_rate",
    "ga_tournament_size",
    "ga_routing",
    "pso_swarm",
    "pso_iterations",
    "pso_inertia",
    "pso_c1",
    "pso_c2",
    "pso_tours",
    "seeds",
    "out_dir",
    "horizon_s",
    "sweep_sensors",
];

pub fn parse_method(s: &str) -> Option<Method> {
    Method::ALL.into_iter().find(|m| m.name() == s)
}

pub fn parse_variant(s: &str) -> Option<Variant> {
    Variant::ALL.into_iter().find(|v| v.name() == s)
}

/// `start:stop:step` (inclusive of `stop` when it lands on the grid) or a
/// comma-separated list.
pub fn parse_sweep(s: &str) -> Result<Vec<usize>, String> {
    if s.contains(',') {
        let v: Vec<usize> = s
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}")))
            .collect::<Result<_, _>>()?;
        if v.contains(&0) {
            return Err("sensor counts must be positive".into());
        }
        return Ok(v);
    }
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err("expected start:stop:step".into());
    };
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
    if start == 0 || step == 0 || stop < start {
        return Err("need 0 < start <= stop and step > 0".into());
    }
    Ok((start..=stop).step_by(step).collect())
}

/// A count `N` (meaning `seed..seed+N`), a range `a..b`, or a list `1,5,9`.
pub fn parse_seeds(s: &str) -> Result<SeedSpec, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?;
        if b <= a {
            return Err("empty seed range".into());
        }
        return Ok(SeedSpec::List((a..b).collect()));
    }
    if s.contains(',') {
        return s
            .split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|e| format!("`{x}`: {e}")))
            .collect::<Result<_, _>>()
            .map(SeedSpec::List);
    }
    let n: u64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if n == 0 {
        return Err("need at least one seed".into());
    }
    Ok(SeedSpec::Count(n))
}

impl RunConfig {
    /// Sets one key. `origin` names where the value came from, for errors.
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        let bad = |reason: String| ConfigError::BadValue {
            key: key.into(),
            value: value.into(),
            reason,
            origin: origin.into(),
        };
        let f = || value.parse::<f64>().map_err(|e| bad(e.to_string()));
        let u = || value.parse::<usize>().map_err(|e| bad(e.to_string()));
        let p = &mut self.physical;
        let a = &mut self.algo;
        let g = &mut self.gen;
        match key {
            "area_km2" => p.area_km2 = f()?,
            "r_s" => p.r_s = f()?,
            "r_g" => p.r_g = f()?,
            "r_e" => p.r_e = f()?,
            "data_rate_mbps" => p.data_rate_mbps = f()?,
            "v_g" => p.v_g = f()?,
            "p_fly_w" => p.p_fly_w = f()?,
            "p_comm_w" => p.p_comm_w = f()?,
            "e_max_wh" => p.e_max_wh = f()?,
            "t_max_s" => p.t_max_s = f()?,
            "t_period_s" => p.t_period_s = f()?,
            "t_urgent_s" => p.t_urgent_s = f()?,
            "m_max" => p.m_max = u()?,
            "per_hop_latency_s" => p.per_hop_latency_s = f()?,
            "omega_h" => a.omega_h = f()?,
            "omega_d" => a.omega_d = f()?,
            "omega_l" => a.omega_l = f()?,
            "lambda" => a.lambda = f()?,
            "epsilon_m" => a.epsilon_m = f()?,
            "theta_max" => a.theta_max = f()?,
            "max_kmeans_iters" => a.max_kmeans_iters = u()?,
            "fleet_init_mode" => {
                a.fleet_init_mode = match value {
                    "one" => FleetInitMode::One,
                    "coverage" => FleetInitMode::Coverage,
                    _ => return Err(bad("expected `one` or `coverage`".into())),
                }
            }
            "seed" => {
                let s: u64 = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
                a.seed = s;
                g.seed = s;
            }
            "sensors" => g.n_sensors = u()?,
            "edges" => g.n_edges = u()?,
            "hotspots" => g.n_hotspots = u()?,
            "hotspot_fraction" => g.hotspot_fraction = f()?,
            "hotspot_sigma_m" => g.hotspot_sigma_m = f()?,
            "fire_history_max" => g.fire_history_max = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            "alpha_min_mb" => g.alpha_range_mb.0 = f()?,
            "alpha_max_mb" => g.alpha_range_mb.1 = f()?,
            "beta_min_mi" => g.beta_range_mi.0 = f()?,
            "beta_max_mi" => g.beta_range_mi.1 = f()?,
            "capacity_min_mips" => g.edge_capacity_range_mips.0 = f()?,
            "capacity_max_mips" => g.edge_capacity_range_mips.1 = f()?,
            "method" => self.method = parse_method(value).ok_or_else(|| bad("expected proposed, ga, pso or greedy".into()))?,
            "variant" => {
                self.variant = parse_variant(value).ok_or_else(|| bad("expected full, no-2opt, no-kmeans or no-both".into()))?
            }
            "ga_population" => self.ga.population = u()?,
            "ga_generations" => self.ga.generations = u()?,
            "ga_crossover_rate" => self.ga.crossover_rate = f()?,
            "ga_mutation_rate" => self.ga.mutation_rate = f()?,
            "ga_tournament_size" => self.ga.tournament_size = u()?,
            "ga_routing" => {
                self.ga.routing = match value {
                    "nearest_neighbor" => GaRouting::NearestNeighbor,
                    "two_opt" => GaRouting::TwoOpt,
                    "priority" => GaRouting::Priority,
                    _ => return Err(bad("expected nearest_neighbor, two_opt or priority".into())),
                }
            }
            "pso_swarm" => self.pso.swarm = u()?,
            "pso_iterations" => self.pso.iterations = u()?,
            "pso_inertia" => self.pso.inertia = f()?,
            "pso_c1" => self.pso.c1 = f()?,
            "pso_c2" => self.pso.c2 = f()?,
            "pso_tours" => {
                self.pso.tours = match value {
                    "nearest_neighbor" => PsoTours::NearestNeighbor,
                    "two_opt" => PsoTours::TwoOpt,
                    _ => return Err(bad("expected nearest_neighbor or two_opt".into())),
                }
            }
            "seeds" => self.seeds = parse_seeds(value).map_err(bad)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "horizon_s" => self.horizon_s = f()?,
            "sweep_sensors" => self.sweep_sensors = Some(parse_sweep(value).map_err(bad)?),
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.into(),
                    origin: origin.into(),
                })
            }
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    origin: origin.into(),
                    line: i + 1,
                });
            };
            self.set(k.trim(), v.trim(), &format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), crate::files::FileError> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::files::FileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text, &path.display().to_string())
            .map_err(|e| crate::files::FileError::Config(path.to_path_buf(), e))
    }

    /// Applies `key=value` override strings.
    pub fn apply_overrides(&mut self, sets: &[String]) -> Result<(), ConfigError> {
        for s in sets {
            let (k, v) = s.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: format!("--set {s}"),
                line: 1,
            })?;
            self.set(k.trim(), v.trim(), "--set")?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |e: wildpatrol_core::Error| ConfigError::Invalid(e.to_string());
        self.physical.validate().map_err(inv)?;
        self.algo.validate().map_err(inv)?;
        self.gen.validate().map_err(inv)?;
        self.ga.validate().map_err(inv)?;
        self.pso.validate().map_err(inv)?;
        if self.seed_list().is_empty() {
            return Err(ConfigError::Invalid("need at least one seed".into()));
        }
        if !(self.horizon_s.is_finite() && self.horizon_s > 0.0) {
            return Err(ConfigError::Invalid("horizon_s must be > 0".into()));
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            SeedSpec::Count(n) => (self.algo.seed..self.algo.seed + n).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }

    /// Full configuration in the file format; reloading it reproduces `self`.
    pub fn to_text(&self) -> String {
        let p = &self.physical;
        let a = &self.algo;
        let g = &self.gen;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("area_km2", p.area_km2.to_string());
        kv("r_s", p.r_s.to_string());
        kv("r_g", p.r_g.to_string());
        kv("r_e", p.r_e.to_string());
        kv("data_rate_mbps", p.data_rate_mbps.to_string());
        kv("v_g", p.v_g.to_string());
        kv("p_fly_w", p.p_fly_w.to_string());
        kv("p_comm_w", p.p_comm_w.to_string());
        kv("e_max_wh", p.e_max_wh.to_string());
        kv("t_max_s", p.t_max_s.to_string());
        kv("t_period_s", p.t_period_s.to_string());
        kv("t_urgent_s", p.t_urgent_s.to_string());
        kv("m_max", p.m_max.to_string());
        kv("per_hop_latency_s", p.per_hop_latency_s.to_string());
        kv("omega_h", a.omega_h.to_string());
        kv("omega_d", a.omega_d.to_string());
        kv("omega_l", a.omega_l.to_string());
        kv("lambda", a.lambda.to_string());
        kv("epsilon_m", a.epsilon_m.to_string());
        kv("theta_max", a.theta_max.to_string());
        kv("max_kmeans_iters", a.max_kmeans_iters.to_string());
        kv(
            "fleet_init_mode",
            match a.fleet_init_mode {
                FleetInitMode::One => "one",
                FleetInitMode::Coverage => "coverage",
            }
            .into(),
        );
        kv("seed", a.seed.to_string());
        kv("sensors", g.n_sensors.to_string());
        kv("edges", g.n_edges.to_string());
        kv("hotspots", g.n_hotspots.to_string());
        kv("hotspot_fraction", g.hotspot_fraction.to_string());
        kv("hotspot_sigma_m", g.hotspot_sigma_m.to_string());
        kv("fire_history_max", g.fire_history_max.to_string());
        kv("alpha_min_mb", g.alpha_range_mb.0.to_string());
        kv("alpha_max_mb", g.alpha_range_mb.1.to_string());
        kv("beta_min_mi", g.beta_range_mi.0.to_string());
        kv("beta_max_mi", g.beta_range_mi.1.to_string());
        kv("capacity_min_mips", g.edge_capacity_range_mips.0.to_string());
        kv("capacity_max_mips", g.edge_capacity_range_mips.1.to_string());
        kv("method", self.method.name().into());
        kv("variant", self.variant.name().into());
        kv("ga_population", self.ga.population.to_string());
        kv("ga_generations", self.ga.generations.to_string());
        kv("ga_crossover_rate", self.ga.crossover_rate.to_string());
        kv("ga_mutation_rate", self.ga.mutation_rate.to_string());
        kv("ga_tournament_size", self.ga.tournament_size.to_string());
        kv(
            "ga_routing",
            match self.ga.routing {
                GaRouting::NearestNeighbor => "nearest_neighbor",
                GaRouting::TwoOpt => "two_opt",
                GaRouting::Priority => "priority",
            }
            .into(),
        );
        kv("pso_swarm", self.pso.swarm.to_string());
        kv("pso_iterations", self.pso.iterations.to_string());
        kv("pso_inertia", self.pso.inertia.to_string());
        kv("pso_c1", self.pso.c1.to_string());
        kv("pso_c2", self.pso.c2.to_string());
        kv(
            "pso_tours",
            match self.pso.tours {
                PsoTours::NearestNeighbor => "nearest_neighbor",
                PsoTours::TwoOpt => "two_opt",
            }
            .into(),
        );
        kv(
            "seeds",
            match &self.seeds {
                SeedSpec::Count(n) => n.to_string(),
                SeedSpec::List(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            },
        );
        kv("out_dir", self.out_dir.display().to_string());
        kv("horizon_s", self.horizon_s.to_string());
        if let Some(s) = &self.sweep_sensors {
            kv("sweep_sensors", s.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut c = RunConfig::default();
        c.apply_text("# demo\nsensors = 150\nomega_h=2.0 # trailing\n\nmethod = ga\n", "f.cfg").unwrap();
        c.apply_overrides(&["sensors=120".into()]).unwrap();
        assert_eq!(c.gen.n_sensors, 120);
        assert_eq!(c.algo.omega_h, 2.0);
        assert_eq!(c.method, Method::Ga);
    }

    #[test]
    fn unknown_and_malformed() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_text("senors = 3", "f"), Err(ConfigError::UnknownKey { .. })));
        assert_eq!(c.apply_text("\nsensors 3", "f"), Err(ConfigError::Syntax { origin: "f".into(), line: 2 }));
        assert!(matches!(c.set("v_g", "fast", "cli"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn seeds_and_sweeps() {
        assert_eq!(parse_seeds("3").unwrap(), SeedSpec::Count(3));
        assert_eq!(parse_seeds("2..5").unwrap(), SeedSpec::List(vec![2, 3, 4]));
        assert_eq!(parse_seeds("7, 1").unwrap(), SeedSpec::List(vec![7, 1]));
        assert!(parse_seeds("0").is_err());
        assert_eq!(parse_sweep("100, 200").unwrap(), vec![100, 200]);
        let mut c = RunConfig::default();
        c.apply_text("seeds = 3\nseed = 10", "f").unwrap();
        assert_eq!(c.seed_list(), vec![10, 11, 12]);
        assert_eq!(parse_sweep("100:300:50").unwrap(), vec![100, 150, 200, 250, 300]);
        assert!(parse_sweep("100:300").is_err());
        assert!(parse_sweep("300:100:50").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.apply_text("seed = 4\nsweep_sensors = 100:200:50\nga_routing = priority\nfleet_init_mode = coverage", "f")
            .unwrap();
        let mut d = RunConfig::default();
        d.apply_text(&c.to_text(), "dump").unwrap();
        assert_eq!(c, d);
        for k in KEYS {
            assert!(c.to_text().contains(&format!("{k} = ")), "{k} missing from dump");
        }
    }
}
