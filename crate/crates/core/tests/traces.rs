use std::collections::BTreeMap;

use proptest::prelude::*;
use wowsim::generators::{gen_layered, gen_pattern, LayeredSpec, Pattern, PatternSpec};
use wowsim::sim::Trace;
use wowsim::{AbstractGraph, CopState, DfsModel, SimConfig, StrategyKind};

fn config(strategy: StrategyKind, nodes: u32, dfs: DfsModel, seed: u64) -> SimConfig {
    let mut c = SimConfig {
        strategy,
        seed,
        ..SimConfig::default()
    };
    c.cluster.nodes = nodes;
    c.cluster.dfs = dfs;
    c
}

/// Structural checks every finished run must satisfy.
fn check_trace(graph: &AbstractGraph, cfg: &SimConfig, t: &Trace) {
    let plan = graph.instantiate();
    assert_eq!(t.tasks.len(), plan.tasks.len(), "every task runs once");
    let by_id: BTreeMap<_, _> = t.tasks.iter().map(|r| (r.task_id, r)).collect();
    assert_eq!(by_id.len(), plan.tasks.len());

    for r in &t.tasks {
        assert!(r.t_submit <= r.t_start && r.t_start <= r.t_end);
        for p in &plan.preds[r.task_id.index()] {
            assert!(by_id[p].t_end <= r.t_start, "{:?} starts before {:?} ends", r.task_id, p);
        }
        let spec = &plan.tasks[r.task_id.index()];
        let input: u64 = spec.inputs.iter().map(|f| plan.files[f.index()].size).sum();
        assert_eq!(r.bytes_local_read + r.bytes_dfs_read, input);
        assert_eq!(r.bytes_written, plan.files[spec.output.index()].size);
        if cfg.strategy == StrategyKind::Wow && graph.inputs().is_empty() {
            assert_eq!(r.bytes_dfs_read, 0, "WOW reads intermediates locally");
        }
        if cfg.strategy != StrategyKind::Wow {
            assert_eq!(r.bytes_local_read, 0, "baselines read through the DFS");
        }
    }

    // cores in use per node never exceed the node size
    let mut events: Vec<(f64, i64, usize)> = Vec::new();
    for r in &t.tasks {
        if r.t_end > r.t_start {
            events.push((r.t_start, r.cpus as i64, r.node.index()));
            events.push((r.t_end, -(r.cpus as i64), r.node.index()));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut used = vec![0i64; cfg.cluster.node_count()];
    for (_, d, n) in events {
        used[n] += d;
        assert!(used[n] <= cfg.cluster.cores as i64);
    }

    assert!(t.max_utilization <= 1.0 + 1e-9);
    for c in &t.cops {
        assert_eq!(c.state, CopState::Done);
        assert!(c.t_end.unwrap() >= c.t_start);
    }
    if cfg.strategy != StrategyKind::Wow {
        assert!(t.cops.is_empty());
    }
}

#[test]
fn pattern_suite_traces_are_consistent() {
    for p in Pattern::ALL {
        let g = gen_pattern(&PatternSpec::new(p, 50)).unwrap();
        for s in StrategyKind::ALL {
            for dfs in [
                DfsModel::SingleServer {
                    server_link_capacity: 125e6,
                },
                DfsModel::Distributed { replica_factor: 3 },
            ] {
                let cfg = config(s, 5, dfs, 1);
                let t = wowsim::run(&cfg, &g).unwrap();
                check_trace(&g, &cfg, &t);
            }
        }
    }
}

#[test]
fn large_files_scale_both_strategies_alike() {
    let desk = gen_pattern(&PatternSpec::new(Pattern::Group, 30)).unwrap();
    let full = gen_pattern(&PatternSpec::new(Pattern::Group, 30).full_scale()).unwrap();
    let dfs = DfsModel::SingleServer {
        server_link_capacity: 125e6,
    };
    let ms = |g: &AbstractGraph, s| wowsim::run(&config(s, 8, dfs, 0), g).unwrap().end_time;
    let ratio_desk = ms(&desk, StrategyKind::Orig) / ms(&desk, StrategyKind::Wow);
    let ratio_full = ms(&full, StrategyKind::Orig) / ms(&full, StrategyKind::Wow);
    assert!(ratio_desk > 1.0 && ratio_full > 1.0);
    // a hundredfold larger file set scales every transfer alike
    assert!((ratio_desk / ratio_full - 1.0).abs() < 0.25);
}

#[test]
fn workflow_inputs_come_from_the_dfs() {
    let g = gen_layered(&LayeredSpec {
        widths: vec![4, 3, 1],
        input_size: Some(20_000_000),
        ..LayeredSpec::default()
    })
    .unwrap();
    for s in StrategyKind::ALL {
        let cfg = config(s, 3, DfsModel::Distributed { replica_factor: 2 }, 0);
        let t = wowsim::run(&cfg, &g).unwrap();
        check_trace(&g, &cfg, &t);
        assert!(t.tasks.iter().filter(|r| r.bytes_dfs_read >= 20_000_000).count() >= 4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_layered_runs_are_consistent(
        widths in prop::collection::vec(1u32..7, 1..5),
        density in 0.0f64..0.7,
        seed in any::<u64>(),
        nodes in 1u32..6,
        strategy in 0usize..3,
        distributed in any::<bool>(),
    ) {
        let g = gen_layered(&LayeredSpec { widths, edge_density: density, seed, ..LayeredSpec::default() }).unwrap();
        let dfs = if distributed {
            DfsModel::Distributed { replica_factor: 2.min(nodes) }
        } else {
            DfsModel::SingleServer { server_link_capacity: 125e6 }
        };
        let cfg = config(StrategyKind::ALL[strategy], nodes, dfs, seed);
        let t = wowsim::run(&cfg, &g).unwrap();
        check_trace(&g, &cfg, &t);
    }
}
