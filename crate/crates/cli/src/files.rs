//! On-disk formats: scenario, plan and event JSON; route, metric and trace
//! CSV.
//!
//! Every JSON document carries a `schema_version`. Load errors name the
//! offending field path (`sensors[3].fire_history`) and its line.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use wildpatrol_core::assignment::Assignment;
use wildpatrol_core::clustering::Clustering;
use wildpatrol_core::emergency::{EmergencyEvent, EmergencyTrace, NormalImpactReport};
use wildpatrol_core::routing::Route;
use wildpatrol_core::scenario::{ScenarioMeta, SCHEMA_VERSION};
use wildpatrol_core::{EdgeNode, PhysicalParams, Plan, Scenario, Sensor};

use crate::config::ConfigError;

pub const PLAN_SCHEMA_VERSION: u32 = 1;
pub const EVENTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}:{column}: `{field}`: {message}", file.display())]
    Parse {
        file: PathBuf,
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}:{line}: `{field}`: {message}", file.display())]
    Invalid {
        file: PathBuf,
        field: String,
        line: usize,
        message: String,
    },
    #[error("{}: unsupported schema_version {found} (this build reads {expected})", file.display())]
    Schema { file: PathBuf, found: u32, expected: u32 },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {err}", path = .0.display(), err = .1)]
    Config(PathBuf, ConfigError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FileError + '_ {
    move |source| FileError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), FileError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    write_text(path, &text)
}

/// Deserializes `text`, mapping failures to the field path and position.
fn parse_json<T: DeserializeOwned>(file: &Path, text: &str) -> Result<T, FileError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        json_error(file, field, &inner)
    })?;
    de.end().map_err(|e| json_error(file, ".".into(), &e))?;
    Ok(value)
}

fn json_error(file: &Path, field: String, e: &serde_json::Error) -> FileError {
    let full = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    FileError::Parse {
        file: file.to_path_buf(),
        field,
        line: e.line(),
        column: e.column(),
        message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
    }
}

fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn check_schema(file: &Path, found: u32, expected: u32) -> Result<(), FileError> {
    if found != expected {
        return Err(FileError::Schema {
            file: file.to_path_buf(),
            found,
            expected,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------- scenario

#[derive(Serialize)]
struct ScenarioOut<'a> {
    schema_version: u32,
    physical: &'a PhysicalParams,
    sensors: &'a [Sensor],
    edges: &'a [EdgeNode],
    meta: &'a ScenarioMeta,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioIn {
    schema_version: u32,
    physical: PhysicalParams,
    sensors: Vec<Sensor>,
    edges: Vec<EdgeNode>,
    meta: ScenarioMeta,
}

pub fn scenario_to_string(s: &Scenario) -> String {
    let mut text = serde_json::to_string_pretty(&ScenarioOut {
        schema_version: SCHEMA_VERSION,
        physical: &s.physical,
        sensors: &s.sensors,
        edges: &s.edges,
        meta: &s.meta,
    })
    .expect("plain data serializes");
    text.push('\n');
    text
}

pub fn save_scenario(s: &Scenario, path: &Path) -> Result<(), FileError> {
    write_text(path, &scenario_to_string(s))
}

/// Parses and validates a scenario document; `file` is only used in errors.
pub fn scenario_from_str(text: &str, file: &Path) -> Result<Scenario, FileError> {
    let doc: ScenarioIn = parse_json(file, text)?;
    check_schema(file, doc.schema_version, SCHEMA_VERSION)?;
    let s = Scenario {
        physical: doc.physical,
        sensors: doc.sensors,
        edges: doc.edges,
        meta: doc.meta,
    };
    s.check().map_err(|v| FileError::Invalid {
        file: file.to_path_buf(),
        line: json_line(text, &v.path).unwrap_or(1),
        field: v.path,
        message: v.reason,
    })?;
    Ok(s)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, FileError> {
    scenario_from_str(&read(path)?, path)
}

// -------------------------------------------------------------------- plan

/// Route as exported: waypoint ids plus their coordinates, depot first and last.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RouteDoc {
    pub uav_id: usize,
    pub depot: usize,
    pub waypoints: Vec<usize>,
    pub coordinates: Vec<[f64; 2]>,
    pub length_m: f64,
    pub revisit_s: f64,
    pub energy_wh: f64,
}

/// Plan file. Wall-clock planning time is deliberately not part of it so
/// the file is a pure function of its inputs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlanDoc {
    pub schema_version: u32,
    pub method: String,
    pub seed: u64,
    pub m: usize,
    pub clustering: Clustering,
    pub assignment: Assignment,
    pub routes: Vec<RouteDoc>,
}

impl PlanDoc {
    pub fn new(plan: &Plan, scenario: &Scenario, method: &str, seed: u64) -> Self {
        let routes = plan
            .routes
            .iter()
            .map(|r| {
                let depot = scenario.edges[r.depot].pos;
                let mut coordinates = vec![[depot.x, depot.y]];
                coordinates.extend(r.waypoints.iter().map(|&id| {
                    let p = scenario.sensors[id].pos;
                    [p.x, p.y]
                }));
                coordinates.push([depot.x, depot.y]);
                RouteDoc {
                    uav_id: r.uav_id,
                    depot: r.depot,
                    waypoints: r.waypoints.clone(),
                    coordinates,
                    length_m: r.length_m,
                    revisit_s: r.revisit_s,
                    energy_wh: r.energy_wh,
                }
            })
            .collect();
        PlanDoc {
            schema_version: PLAN_SCHEMA_VERSION,
            method: method.into(),
            seed,
            m: plan.m,
            clustering: plan.clustering.clone(),
            assignment: plan.assignment.clone(),
            routes,
        }
    }

    pub fn to_plan(&self) -> Plan {
        Plan {
            m: self.m,
            clustering: self.clustering.clone(),
            assignment: self.assignment.clone(),
            routes: self
                .routes
                .iter()
                .map(|r| Route {
                    uav_id: r.uav_id,
                    depot: r.depot,
                    waypoints: r.waypoints.clone(),
                    length_m: r.length_m,
                    revisit_s: r.revisit_s,
                    energy_wh: r.energy_wh,
                })
                .collect(),
            planning_time_s: 0.0,
        }
    }
}

pub fn save_plan(doc: &PlanDoc, path: &Path) -> Result<(), FileError> {
    write_json(path, doc)
}

pub fn load_plan(path: &Path) -> Result<PlanDoc, FileError> {
    let doc: PlanDoc = parse_json(path, &read(path)?)?;
    check_schema(path, doc.schema_version, PLAN_SCHEMA_VERSION)?;
    Ok(doc)
}

/// One CSV row per tour leg, for plotting.
pub fn write_route_geometry(doc: &PlanDoc, path: &Path) -> Result<(), FileError> {
    #[derive(Serialize)]
    struct Row {
        uav_id: usize,
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
    }
    let rows = doc.routes.iter().flat_map(|r| {
        r.coordinates.windows(2).map(move |w| Row {
            uav_id: r.uav_id,
            x1: w[0][0],
            y1: w[0][1],
            x2: w[1][0],
            y2: w[1][1],
        })
    });
    write_csv(path, rows)
}

/// Writes `rows` as CSV with a header derived from the row type.
pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), FileError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let csv_err = |source| FileError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

// ------------------------------------------------------------------ events

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventsDoc {
    schema_version: u32,
    events: Vec<EmergencyEvent>,
}

/// Accepts either a bare list of events or `{schema_version, events}`.
pub fn load_events(path: &Path) -> Result<Vec<EmergencyEvent>, FileError> {
    let text = read(path)?;
    if text.trim_start().starts_with('[') {
        return parse_json(path, &text);
    }
    let doc: EventsDoc = parse_json(path, &text)?;
    check_schema(path, doc.schema_version, EVENTS_SCHEMA_VERSION)?;
    Ok(doc.events)
}

pub fn save_events(events: &[EmergencyEvent], path: &Path) -> Result<(), FileError> {
    write_json(
        path,
        &EventsDoc {
            schema_version: EVENTS_SCHEMA_VERSION,
            events: events.to_vec(),
        },
    )
}

#[derive(Serialize)]
struct TraceRow {
    sensor_id: usize,
    alert_time_s: f64,
    priority: u32,
    uav_id: Option<usize>,
    edge_id: usize,
    t_queue: f64,
    t_lat: f64,
    t_dispatch_travel: f64,
    t_tra: f64,
    t_delivery_travel: f64,
    t_exe: f64,
    response_time_s: f64,
    resume_waypoint: Option<usize>,
    resume_time_s: f64,
    deadline_met: bool,
    fallback: bool,
    direct: bool,
}

pub fn write_traces(traces: &[EmergencyTrace], path: &Path) -> Result<(), FileError> {
    write_csv(
        path,
        traces.iter().map(|t| TraceRow {
            sensor_id: t.sensor_id,
            alert_time_s: t.alert_time_s,
            priority: t.priority,
            uav_id: t.uav_id,
            edge_id: t.edge_id,
            t_queue: t.t_queue,
            t_lat: t.t_lat,
            t_dispatch_travel: t.t_dispatch_travel,
            t_tra: t.t_tra,
            t_delivery_travel: t.t_delivery_travel,
            t_exe: t.t_exe,
            response_time_s: t.response_time_s,
            resume_waypoint: t.resume_waypoint,
            resume_time_s: t.resume_time_s,
            deadline_met: t.deadline_met,
            fallback: t.fallback,
            direct: t.direct,
        }),
    )
}

/// Emergency summary written next to the trace CSV.
#[derive(Debug, Serialize)]
pub struct SimSummary<'a> {
    pub seed: u64,
    pub events: usize,
    pub mean_response_s: Option<f64>,
    pub deadline_hit_rate: Option<f64>,
    pub t_urgent_s: f64,
    pub normal_impact: &'a NormalImpactReport,
}

pub fn save_sim_summary(s: &SimSummary<'_>, path: &Path) -> Result<(), FileError> {
    write_json(path, s)
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), FileError> {
    write_json(path, value)
}

// ---------------------------------------------------------- line locator

enum Seg<'a> {
    Key(&'a str),
    Index(usize),
}

fn split_path(path: &str) -> Vec<Seg<'_>> {
    let mut out = Vec::new();
    for part in path.split('.').filter(|p| !p.is_empty()) {
        let (name, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if !name.is_empty() {
            out.push(Seg::Key(name));
        }
        while let Some(end) = rest.find(']') {
            if let Ok(i) = rest[1..end].parse() {
                out.push(Seg::Index(i));
            }
            rest = &rest[end + 1..];
        }
    }
    out
}

/// 1-based line where the value at `path` (e.g. `sensors[3].pos`) starts,
/// found by walking the raw text. `None` if the path does not resolve.
pub fn json_line(text: &str, path: &str) -> Option<usize> {
    let b = text.as_bytes();
    let mut i = skip_ws(b, 0);
    for seg in split_path(path) {
        match seg {
            Seg::Key(k) => {
                if b.get(i) != Some(&b'{') {
                    return None;
                }
                i = skip_ws(b, i + 1);
                loop {
                    if b.get(i) != Some(&b'"') {
                        return None;
                    }
                    let end = skip_string(b, i)?;
                    let key = &text[i + 1..end - 1];
                    i = skip_ws(b, end);
                    if b.get(i) != Some(&b':') {
                        return None;
                    }
                    i = skip_ws(b, i + 1);
                    if key == k {
                        break;
                    }
                    i = skip_ws(b, skip_value(b, i)?);
                    match b.get(i) {
                        Some(b',') => i = skip_ws(b, i + 1),
                        _ => return None,
                    }
                }
            }
            Seg::Index(n) => {
                if b.get(i) != Some(&b'[') {
                    return None;
                }
                i = skip_ws(b, i + 1);
                for _ in 0..n {
                    i = skip_ws(b, skip_value(b, i)?);
                    match b.get(i) {
                        Some(b',') => i = skip_ws(b, i + 1),
                        _ => return None,
                    }
                }
            }
        }
    }
    Some(text[..i].bytes().filter(|&c| c == b'\n').count() + 1)
}

fn skip_ws(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

/// Index just past the string starting at `b[i] == '"'`.
fn skip_string(b: &[u8], mut i: usize) -> Option<usize> {
    i += 1;
    while i < b.len() {
        match b[i] {
            b'\\' => i += 2,
            b'"' => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

fn skip_value(b: &[u8], i: usize) -> Option<usize> {
    match *b.get(i)? {
        b'"' => skip_string(b, i),
        b'{' | b'[' => {
            let mut depth = 0usize;
            let mut j = i;
            while j < b.len() {
                match b[j] {
                    b'"' => {
                        j = skip_string(b, j)?;
                        continue;
                    }
                    b'{' | b'[' => depth += 1,
                    b'}' | b']' => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(j + 1);
                        }
                    }
                    _ => {}
                }
                j += 1;
            }
            None
        }
        _ => {
            let mut j = i;
            while j < b.len() && !matches!(b[j], b',' | b'}' | b']') && !b[j].is_ascii_whitespace() {
                j += 1;
            }
            Some(j)
        }
    }
}
