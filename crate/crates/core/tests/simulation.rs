use floorplan_core::dataset::{CaseId, CaseSpec};
use floorplan_core::gen::{generate_dfg, GenParams};
use floorplan_core::sim::{simulate, SimError, validate_schedule, Layout, PlatformConfig, Resource, SchedulerKind};
use floorplan_core::{Dfg, Node, TaskLibrary, TaskMode, TaskTypeSpec};
use proptest::prelude::*;

fn small_graph(seed: u64, index: usize, max_nodes: u32) -> Dfg {
    let params = GenParams {
        node_count_range: (5, max_nodes),
        seed,
        ..GenParams::default()
    };
    generate_dfg(&params, index)
}

/// Longest path where each node weighs `w(node)`, by brute-force relaxation
/// in id-sorted passes until nothing changes.
fn longest_path(dfg: &Dfg, w: impl Fn(&Node) -> u64) -> u64 {
    let nodes = dfg.nodes();
    let pos = |id: u32| nodes.iter().position(|n| n.id == id).unwrap();
    let mut finish: Vec<u64> = nodes.iter().map(&w).collect();
    loop {
        let mut changed = false;
        for &(p, c) in dfg.edges() {
            let (pi, ci) = (pos(p), pos(c));
            let cand = finish[pi] + w(&nodes[ci]);
            if cand > finish[ci] {
                finish[ci] = cand;
                changed = true;
            }
        }
        if !changed {
            return finish.into_iter().max().unwrap_or(0);
        }
    }
}

fn default_candidates() -> Vec<PlatformConfig> {
    CaseId::ALL
        .iter()
        .flat_map(|&c| CaseSpec::default_for(c).unwrap().candidates)
        .chain(
            CaseSpec::default_for(CaseId::III)
                .unwrap()
                .candidates
                .into_iter()
                .map(|c| PlatformConfig {
                    scheduler: SchedulerKind::NoReuse,
                    ..c
                }),
        )
        .collect()
}

fn energy_from_trace(dfg: &Dfg, lib: &TaskLibrary, r: &floorplan_core::SimResult) -> u64 {
    r.schedule
        .iter()
        .map(|p| {
            let t = dfg.nodes().iter().find(|n| n.id == p.node).unwrap().task_type;
            let s = lib.get(t).unwrap();
            let exec = p.finish - p.exec_start;
            let reconf = if p.reconfig_start.is_some() { s.reconfig_time } else { 0 };
            match p.resource {
                Resource::Prr(_) => exec * s.hw_dyn_power + reconf * s.reconfig_power,
                Resource::Gpp(_) => exec * s.sw_dyn_power,
            }
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn schedules_validate_and_respect_bounds(seed in 0u64..1000, index in 0usize..1000) {
        let lib = TaskLibrary::reference();
        let dfg = small_graph(seed, index, 80);
        let lower = longest_path(&dfg, |n| lib.get(n.task_type).unwrap().min_exec());
        for cfg in default_candidates() {
            let r = match simulate(&dfg, &lib, &cfg) {
                Ok(r) => r,
                // Large types fit no region of the small-fabric layouts.
                Err(SimError::Infeasible { .. }) if cfg.gpp_count == 0 => continue,
                Err(e) => panic!("{}: {e}", cfg.name()),
            };
            let report = validate_schedule(&r, &dfg, &lib, &cfg);
            prop_assert!(report.is_valid(), "{}: {:?}", cfg.name(), report.violations);
            prop_assert!(r.makespan >= lower);
            prop_assert_eq!(r.total_energy, energy_from_trace(&dfg, &lib, &r));
            prop_assert_eq!(r.avg_power() * r.makespan, num_rational::Ratio::from_integer(r.total_energy));
            prop_assert_eq!(&r, &simulate(&dfg, &lib, &cfg).unwrap());
        }
    }

    #[test]
    fn unlimited_regions_reach_the_critical_path(seed in 0u64..1000, index in 0usize..1000) {
        let reference = TaskLibrary::reference();
        let lib = TaskLibrary::new(reference.iter().map(|s| TaskTypeSpec { reconfig_time: 0, ..*s })).unwrap();
        let dfg = small_graph(seed, index, 60);
        let n = dfg.node_count();
        let layout = Layout::new(50 * n as u64, vec![50; n]).unwrap();
        let cfg = PlatformConfig::new(layout, 0, SchedulerKind::NoReuse).unwrap();
        let r = simulate(&dfg, &lib, &cfg).unwrap();
        prop_assert_eq!(r.makespan, longest_path(&dfg, |node| lib.get(node.task_type).unwrap().hw_exec));
    }

    #[test]
    fn reuse_never_hurts_a_single_type(seed in 0u64..1000, index in 0usize..1000, prrs in 1usize..5, t in 1u32..=16) {
        let lib = TaskLibrary::reference();
        let g = small_graph(seed, index, 60);
        let nodes = g.nodes().iter().map(|n| Node { id: n.id, task_type: t }).collect();
        let dfg = Dfg::new(g.id(), nodes, g.edges().to_vec()).unwrap();
        let layout = Layout::new(200, vec![200 / prrs as u64; prrs]).unwrap();
        let run = |s| simulate(&dfg, &lib, &PlatformConfig::new(layout.clone(), 0, s).unwrap()).unwrap();
        let (s1, s2) = (run(SchedulerKind::NoReuse), run(SchedulerKind::Reuse));
        prop_assert_eq!(s1.reuses, 0);
        prop_assert!(s2.reuses >= s1.reuses);
        prop_assert!(s2.makespan <= s1.makespan);
    }
}

#[test]
fn software_only_types_run_on_processors() {
    let lib = TaskLibrary::new([TaskTypeSpec {
        type_id: 1,
        mode: TaskMode::Software,
        hw_exec: 0,
        sw_exec: 7,
        hw_area: 0,
        reconfig_time: 0,
        reconfig_power: 0,
        hw_dyn_power: 0,
        sw_dyn_power: 3,
    }])
    .unwrap();
    let dfg = Dfg::new("sw", vec![Node { id: 0, task_type: 1 }, Node { id: 1, task_type: 1 }], vec![(0, 1)]).unwrap();
    let cfg = PlatformConfig::new(Layout::new(10, vec![10]).unwrap(), 1, SchedulerKind::ReuseMigrate).unwrap();
    let r = simulate(&dfg, &lib, &cfg).unwrap();
    assert_eq!((r.makespan, r.total_energy), (14, 42));
    assert!(validate_schedule(&r, &dfg, &lib, &cfg).is_valid());
}
