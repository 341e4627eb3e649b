use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wildpatrol"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn ok(o: Output) -> String {
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn scenario(dir: &Path, extra: &[&str]) {
    let mut args = vec!["generate", "--sensors", "60", "--seed", "7", "-o", "s.json"];
    args.extend_from_slice(extra);
    ok(wp(&args, dir));
}

#[test]
fn generate_is_deterministic_and_rejects_zero_sensors() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(wp(&["generate", "--sensors", "200", "--edges", "5", "--seed", "7", "-o", "a.json"], d.path()));
    assert!(out.contains("sensors=200") && out.contains("edges=5") && out.contains("seed=7"), "{out}");
    ok(wp(&["generate", "--sensors", "200", "--edges", "5", "--seed", "7", "-o", "b.json"], d.path()));
    assert_eq!(fs::read(d.path().join("a.json")).unwrap(), fs::read(d.path().join("b.json")).unwrap());
    assert_eq!(code(&wp(&["generate", "--sensors", "0", "-o", "c.json"], d.path())), 2);
    assert_eq!(code(&wp(&["generate", "--bogus"], d.path())), 2);
}

#[test]
fn plan_writes_artifacts_for_every_method() {
    let d = tempfile::tempdir().unwrap();
    scenario(d.path(), &[]);
    for (method, variant) in [("proposed", "full"), ("proposed", "no-kmeans"), ("ga", "full"), ("pso", "full"), ("greedy", "full")] {
        let out = d.path().join(format!("{method}-{variant}"));
        let o = out.to_str().unwrap();
        ok(wp(&["plan", "-s", "s.json", "--method", method, "--variant", variant, "--set", "ga_generations=10", "--set", "pso_iterations=10", "-o", o], d.path()));
        for f in ["plan.json", "routes.csv", "metrics.csv"] {
            assert!(out.join(f).exists(), "{method}: missing {f}");
        }
        let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
        let header = metrics.lines().next().unwrap();
        assert!(header.starts_with("method,variant,seed,fleet,total_length_m,total_energy_wh,mean_response_s"));
        assert!(header.ends_with("planning_time_s"));
        assert!(metrics.lines().nth(1).unwrap().starts_with(&format!("{method},{variant},")));
    }
}

#[test]
fn infeasible_plan_exits_3_with_binding_constraint() {
    let d = tempfile::tempdir().unwrap();
    scenario(d.path(), &["--set", "e_max_wh=1", "--set", "m_max=2"]);
    let o = wp(&["plan", "-s", "s.json", "-o", "p"], d.path());
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("infeasible") && err.to_lowercase().contains("energy"), "{err}");
}

#[test]
fn malformed_inputs_exit_1_and_bad_config_exits_2() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("bad.json"), "{\"schema_version\": 1,\n  \"physical\": 3\n}").unwrap();
    let o = wp(&["plan", "-s", "bad.json"], d.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json:2:"));
    assert_eq!(code(&wp(&["plan", "-s", "missing.json"], d.path())), 1);

    scenario(d.path(), &[]);
    fs::write(d.path().join("c.conf"), "omega_h = 2\nwarp = 9\n").unwrap();
    assert_eq!(code(&wp(&["plan", "-s", "s.json", "-c", "c.conf"], d.path())), 2);
    assert_eq!(code(&wp(&["plan", "-s", "s.json", "--method", "annealing"], d.path())), 2);
    assert_eq!(code(&wp(&["plan", "-s", "s.json", "--set", "v_g=-1"], d.path())), 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("c.conf"), "# sizes\nsensors = 30\nseed = 4\n").unwrap();
    let out = ok(wp(&["generate", "-c", "c.conf", "--set", "sensors=35", "-o", "a.json"], d.path()));
    assert!(out.contains("sensors=35") && out.contains("seed=4"), "{out}");
    let out = ok(wp(&["generate", "-c", "c.conf", "--set", "sensors=35", "--sensors", "33", "-o", "b.json"], d.path()));
    assert!(out.contains("sensors=33"), "{out}");

    fs::write(d.path().join("o.conf"), "out_dir = from-config\n").unwrap();
    ok(wp(&["plan", "-s", "a.json", "-c", "o.conf"], d.path()));
    assert!(d.path().join("from-config/plan.json").exists());
    ok(wp(&["plan", "-s", "a.json", "-c", "o.conf", "-o", "from-flag"], d.path()));
    assert!(d.path().join("from-flag/plan.json").exists());
}

#[test]
fn simulate_defaults_events_files_and_horizon() {
    let d = tempfile::tempdir().unwrap();
    scenario(d.path(), &[]);
    ok(wp(&["plan", "-s", "s.json", "-o", "p"], d.path()));
    ok(wp(&["simulate", "-s", "s.json", "-p", "p/plan.json", "-o", "sim"], d.path()));
    let trace = fs::read_to_string(d.path().join("sim/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 6);
    let header: Vec<&str> = trace.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "deadline_met").unwrap();
    for row in trace.lines().skip(1) {
        let v = row.split(',').nth(col).unwrap();
        assert!(v == "true" || v == "false");
    }

    fs::write(d.path().join("none.json"), "[]").unwrap();
    ok(wp(&["simulate", "-s", "s.json", "-p", "p/plan.json", "--events", "none.json", "--horizon", "7200", "-o", "quiet"], d.path()));
    let impact: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("quiet/impact.json")).unwrap()).unwrap();
    assert_eq!(impact["normal_impact"]["delta_s"], 0.0);
    assert_eq!(impact["normal_impact"]["horizon_s"], 7200.0);
    assert_eq!(impact["events"], 0);
}

#[test]
fn simulate_without_high_risk_sensors_exits_4() {
    let d = tempfile::tempdir().unwrap();
    scenario(d.path(), &["--set", "fire_history_max=10"]);
    ok(wp(&["plan", "-s", "s.json", "-o", "p"], d.path()));
    assert_eq!(code(&wp(&["simulate", "-s", "s.json", "-p", "p/plan.json", "-o", "sim"], d.path())), 4);
}

#[test]
fn compare_reports_and_warns_for_single_seed() {
    let d = tempfile::tempdir().unwrap();
    let o = wp(
        &["compare", "--seeds", "1", "--sweep-sensors", "40:60:20", "--methods", "proposed,greedy", "-o", "r"],
        d.path(),
    );
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    ok(o);
    assert!(err.contains("confidence intervals omitted"), "{err}");
    for f in ["cells.csv", "cdf.csv", "paired.csv", "summary.json", "timing.csv"] {
        assert!(d.path().join("r").join(f).exists(), "missing {f}");
    }
    let cdf = fs::read_to_string(d.path().join("r/cdf.csv")).unwrap();
    assert!(cdf.starts_with("n_sensors,method,response_s,cum_fraction"), "{cdf}");
    let mut last = std::collections::HashMap::new();
    for row in cdf.lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        last.insert((f[0].to_string(), f[1].to_string()), f[3].parse::<f64>().unwrap());
    }
    assert_eq!(last.len(), 4);
    assert!(last.values().all(|&v| v == 1.0));

    assert_eq!(code(&wp(&["compare", "--sweep-sensors", "300:100:50", "-o", "x"], d.path())), 4);
    assert_eq!(code(&wp(&["compare", "--methods", "annealing", "-o", "x"], d.path())), 4);
}
