use proptest::prelude::*;

use wildpatrol_core::baselines::{plan_with, Method, MethodConfig};
use wildpatrol_core::emergency::{self, SimConfig};
use wildpatrol_core::scenario::generate;
use wildpatrol_core::*;

fn scenario(n: usize, edges: usize, seed: u64) -> Scenario {
    generate(
        &GenConfig {
            n_sensors: n,
            n_edges: edges,
            seed,
            ..GenConfig::default()
        },
        &PhysicalParams::default(),
    )
    .unwrap()
}

fn algo(seed: u64) -> AlgoParams {
    AlgoParams { seed, ..AlgoParams::default() }
}

fn quick() -> MethodConfig {
    let mut c = MethodConfig::default();
    c.ga.population = 12;
    c.ga.generations = 8;
    c.pso.swarm = 8;
    c.pso.iterations = 8;
    c
}

#[test]
fn greedy_never_beats_proposed_on_length_or_fleet() {
    for seed in 0..20 {
        let sc = scenario(200, 5, seed);
        let p = plan(&sc, &algo(seed), Variant::Full).unwrap();
        let g = plan_with(Method::Greedy, &sc, &algo(seed), &MethodConfig::default()).unwrap();
        assert!(g.total_length_m() >= p.total_length_m(), "seed {seed}");
        assert!(g.m >= p.m, "seed {seed}");
    }
}

#[test]
fn every_sensor_is_served_exactly_once() {
    let sc = scenario(150, 4, 9);
    let p = plan(&sc, &algo(9), Variant::Full).unwrap();
    let a = algo(9);
    let ctx = planner::Context::new(&sc, &a).unwrap();
    let mut seen = vec![0; sc.sensors.len()];
    for r in &p.routes {
        for &w in &r.waypoints {
            seen[w] += 1;
        }
    }
    for &d in &ctx.partition.direct {
        assert_eq!(seen[d], 0, "direct sensor {d} visited by a UAV");
        seen[d] += 1;
    }
    assert!(seen.iter().all(|&c| c == 1));
}

#[test]
fn simulation_respects_deadline_flags_and_resumes_patrol() {
    let sc = scenario(200, 5, 2);
    let p = plan(&sc, &algo(2), Variant::Full).unwrap();
    let events = emergency::default_events(&sc, 5, 50, emergency::DEFAULT_HORIZON_S).unwrap();
    assert_eq!(events.len(), 5);
    let mut r = rng::stream(2, "sim-phase", 0);
    let out = emergency::simulate(&p, &sc, &events, &SimConfig::from_algo(&algo(2)), &mut r).unwrap();
    for t in &out.traces {
        assert_eq!(t.deadline_met, t.response_time_s <= sc.physical.t_urgent_s);
        let parts = t.t_queue + t.t_lat + t.t_dispatch_travel + t.t_tra + t.t_delivery_travel + t.t_exe;
        assert!((parts - t.response_time_s).abs() < 1e-6);
        if let Some(uav) = t.uav_id {
            assert!(t.resume_time_s >= t.alert_time_s + t.response_time_s - t.t_exe - 1e-6);
            let route = &p.routes[uav];
            assert!(t.resume_waypoint.is_none_or(|w| route.waypoints.contains(&w)));
        }
    }
    assert!(out.impact.with_events_mean_s >= out.impact.baseline_mean_s);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn returned_plans_always_validate(
        n in 5usize..80,
        edges in 1usize..6,
        seed in 0u64..10_000,
        method in prop::sample::select(Method::ALL.to_vec()),
    ) {
        let sc = scenario(n, edges, seed);
        match plan_with(method, &sc, &algo(seed), &quick()) {
            Ok(p) => {
                let report = planner::validate(&p, &sc);
                prop_assert!(report.all_pass(), "{:?}", report.binding());
            }
            Err(Error::Infeasible { binding, .. }) => prop_assert!(!binding.is_empty()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn planning_is_a_pure_function_of_the_seed(
        n in 5usize..60,
        seed in 0u64..10_000,
        variant in prop::sample::select(Variant::ALL.to_vec()),
    ) {
        let sc = scenario(n, 3, seed);
        let a = plan(&sc, &algo(seed), variant);
        let b = plan(&sc, &algo(seed), variant);
        match (a, b) {
            (Ok(mut a), Ok(mut b)) => {
                a.planning_time_s = 0.0;
                b.planning_time_s = 0.0;
                prop_assert_eq!(a, b);
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn fleet_is_minimal_for_the_proposed_method(n in 10usize..80, seed in 0u64..10_000) {
        let sc = scenario(n, 4, seed);
        if let Ok(p) = plan(&sc, &algo(seed), Variant::Full) {
            for m in 1..p.m {
                let attempt = planner::plan_at(&sc, &algo(seed), Variant::Full, m).unwrap();
                prop_assert!(matches!(attempt, planner::Attempt::Infeasible(_)), "m={} also feasible", m);
            }
        }
    }
}
