use super::*;
use crate::units::{GB, GIB};
use proptest::prelude::*;

fn template(id: u32, instances: u32, succ: Vec<(u32, EdgeMapping)>) -> AbstractTask {
    AbstractTask {
        id: AbstractId(id),
        name: format!("T{id}"),
        successors: succ
            .into_iter()
            .map(|(to, mapping)| Edge {
                to: AbstractId(to),
                mapping,
            })
            .collect(),
        instances,
        output: OutputSize::Uniform { min: GB, max: GB },
        compute: ComputeTime::Zero,
        cpus: 1,
        mem: GIB,
        inputs: vec![],
        input_mapping: InputMapping::All,
    }
}

fn all(to: u32) -> (u32, EdgeMapping) {
    (to, EdgeMapping::AllToAll)
}

/// Longest path to a sink by enumerating every path.
fn all_paths_rank(succ: &[Vec<usize>], v: usize) -> u32 {
    succ[v]
        .iter()
        .map(|&w| 1 + all_paths_rank(succ, w))
        .max()
        .unwrap_or(0)
}

#[test]
fn rank_examples() {
    // chain a -> b -> c
    assert_eq!(longest_path_ranks(&[vec![1], vec![2], vec![]]).unwrap(), vec![2, 1, 0]);
    // isolated task
    assert_eq!(longest_path_ranks(&[vec![]]).unwrap(), vec![0]);
    // diamond a -> {b, c}, b -> d, c -> e -> d
    let diamond = vec![vec![1, 2], vec![3], vec![4], vec![], vec![3]];
    let ranks = longest_path_ranks(&diamond).unwrap();
    let oracle: Vec<u32> = (0..5).map(|v| all_paths_rank(&diamond, v)).collect();
    assert_eq!(ranks, oracle);
    assert_eq!(ranks[0], 3);
}

#[test]
fn cycles_rejected() {
    assert!(matches!(
        longest_path_ranks(&[vec![1], vec![0]]),
        Err(WorkflowError::Cycle(_))
    ));
    let g = AbstractGraph::new(vec![template(0, 1, vec![all(1)]), template(1, 1, vec![all(0)])], vec![], 0);
    assert!(matches!(g, Err(WorkflowError::Cycle(_))));
}

#[test]
fn instance_count_mismatch_rejected() {
    let g = AbstractGraph::new(
        vec![template(0, 3, vec![(1, EdgeMapping::OneToOne)]), template(1, 2, vec![])],
        vec![],
        0,
    );
    assert!(matches!(g, Err(WorkflowError::Invalid(_))));
}

fn catalog_for(state: &WorkflowState) -> ReplicaCatalog {
    let mut cat = ReplicaCatalog::new(1);
    let n_inputs = state.graph().inputs().len();
    for f in &state.plan().files[..n_inputs] {
        cat.register_dfs_file(f, &[]).unwrap();
    }
    cat
}

/// Runs `id` to completion, registering its output on node 0.
fn finish(state: &mut WorkflowState, cat: &mut ReplicaCatalog, id: TaskId) -> Vec<TaskId> {
    state.mark_running(id).unwrap();
    let out = state.task(id).unwrap().output;
    let file = state.plan().files[out.index()].clone();
    cat.register_output(&file, crate::ids::NodeId(0)).unwrap();
    state.on_task_finished(id, &[out], cat, 1.0).unwrap()
}

#[test]
fn priority_examples() {
    // A (rank 1) -> B (rank 0); B merges two 1 GB files
    let g = AbstractGraph::new(
        vec![template(0, 2, vec![all(1)]), {
            let mut b = template(1, 1, vec![]);
            b.output = OutputSize::Merge;
            b
        }],
        vec![],
        0,
    )
    .unwrap();
    let mut state = WorkflowState::new(&g);
    let mut cat = catalog_for(&state);
    state.reveal_sources(&cat, 0.0).unwrap();
    assert_eq!(
        state.task(TaskId(0)).unwrap().priority,
        Some(Priority {
            rank: 1,
            input_bytes: 0
        })
    );
    assert!(finish(&mut state, &mut cat, TaskId(0)).is_empty());
    assert_eq!(finish(&mut state, &mut cat, TaskId(1)), vec![TaskId(2)]);
    assert_eq!(
        state.task(TaskId(2)).unwrap().priority,
        Some(Priority {
            rank: 0,
            input_bytes: 2 * GB
        })
    );
    assert_eq!(state.submitted_at(TaskId(2)), Some(1.0));
}

#[test]
fn ready_tasks_sorted() {
    let mut a = template(0, 3, vec![]);
    a.inputs = vec![0];
    a.input_mapping = InputMapping::OneToOne;
    let root = template(1, 1, vec![all(2)]);
    let child = template(2, 1, vec![]);
    let inputs = [5u64, 9, 5]
        .iter()
        .enumerate()
        .map(|(i, &s)| WorkflowInput {
            name: format!("in{i}"),
            size: s,
        })
        .collect();
    let mut tasks = vec![a, root, child];
    tasks[0].inputs = vec![0, 1, 2];
    let g = AbstractGraph::new(tasks, inputs, 0).unwrap();
    let mut state = WorkflowState::new(&g);
    let cat = catalog_for(&state);
    state.reveal_sources(&cat, 0.0).unwrap();
    let ready = state.ready_tasks();
    // oracle: sort by (rank desc, input desc, id asc)
    let mut expected: Vec<(u32, u64, TaskId)> = ready
        .iter()
        .map(|t| {
            let p = state.task(*t).unwrap().priority.unwrap();
            (p.rank, p.input_bytes, *t)
        })
        .collect();
    expected.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    assert_eq!(ready, expected.iter().map(|e| e.2).collect::<Vec<_>>());
    assert_eq!(ready.len(), 4);
    // the rank-1 root leads
    assert_eq!(state.task(ready[0]).unwrap().abstract_id, AbstractId(1));
}

#[test]
fn double_finish_is_an_error() {
    let g = AbstractGraph::new(vec![template(0, 1, vec![])], vec![], 0).unwrap();
    let mut state = WorkflowState::new(&g);
    let mut cat = catalog_for(&state);
    state.reveal_sources(&cat, 0.0).unwrap();
    finish(&mut state, &mut cat, TaskId(0));
    let out = state.task(TaskId(0)).unwrap().output;
    assert!(matches!(
        state.on_task_finished(TaskId(0), &[out], &cat, 2.0),
        Err(WorkflowError::State { .. })
    ));
    assert!(state.is_complete());
}

#[test]
fn definition_round_trip() {
    let text = r#"
seed = 7

[[workflow_inputs]]
name = "reads"
size = 20000000

[[abstract_tasks]]
id = "A"
instances = 6
output_size_min = 8000000
output_size_max = 10000000
compute_time = { kind = "constant", seconds = 0.5 }
inputs = ["reads"]
successors = [{ task = "B", mapping = "group", group_size = 3 }, "C"]

[[abstract_tasks]]
id = "B"
instances = 3
output = "merge"

[[abstract_tasks]]
id = "C"
output = "merge"
"#;
    let g = parse_workflow(text).unwrap();
    assert_eq!(g.physical_task_count(), 10);
    let back = WorkflowDefinition::from(&g).to_toml();
    assert_eq!(parse_workflow(&back).unwrap(), g);
}

#[test]
fn definition_errors() {
    assert!(parse_workflow("[[abstract_tasks]]\nid = \"A\"\n").is_err());
    assert!(parse_workflow("[[abstract_tasks]]\nid = \"A\"\noutput_size_min = 1\nbogus = 2\n").is_err());
    let dangling = "[[abstract_tasks]]\nid = \"A\"\noutput_size_min = 1\nsuccessors = [\"Z\"]\n";
    assert!(matches!(parse_workflow(dangling), Err(WorkflowError::Invalid(_))));
}

fn arb_dag() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..10).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), n), n).prop_map(move |m| {
            (0..n)
                .map(|i| ((i + 1)..n).filter(|&j| m[i][j]).collect())
                .collect()
        })
    })
}

proptest! {
    #[test]
    fn rank_antitone_along_edges(succ in arb_dag()) {
        let ranks = longest_path_ranks(&succ).unwrap();
        for (v, ws) in succ.iter().enumerate() {
            for &w in ws {
                prop_assert!(ranks[v] > ranks[w]);
            }
            prop_assert_eq!(ranks[v], all_paths_rank(&succ, v));
        }
    }

    #[test]
    fn scalar_order_equals_lexicographic(
        ps in prop::collection::vec((0u32..5, 0u64..1_000_000_000_000), 1..30)
    ) {
        let max_in = ps.iter().map(|p| p.1).max().unwrap();
        let pr: Vec<Priority> = ps.iter().map(|&(r, b)| Priority { rank: r, input_bytes: b }).collect();
        for a in &pr {
            for b in &pr {
                let lex = a.cmp(b);
                let sc = a.scalar(max_in).partial_cmp(&b.scalar(max_in)).unwrap();
                // equal scalars are allowed only for lexicographic ties or
                // byte counts too close for f64 to separate
                if sc != lex {
                    prop_assert_eq!(sc, std::cmp::Ordering::Equal);
                    prop_assert_eq!(a.rank, b.rank);
                }
                prop_assert!(a.scalar(max_in) > 0.0);
            }
        }
    }

    #[test]
    fn revelation_is_monotone(order_seed in any::<u64>(), width in 1u32..12) {
        use rand::{seq::SliceRandom, SeedableRng};
        let g = AbstractGraph::new(
            vec![
                template(0, width, vec![(1, EdgeMapping::Group { size: 3 }), all(2)]),
                { let mut t = template(1, EdgeMapping::group_count(width, 3), vec![]); t.output = OutputSize::Merge; t },
                { let mut t = template(2, 1, vec![]); t.output = OutputSize::Merge; t },
            ],
            vec![],
            0,
        )
        .unwrap();
        let mut state = WorkflowState::new(&g);
        let mut cat = catalog_for(&state);
        state.reveal_sources(&cat, 0.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(order_seed);
        let mut revealed = state.revealed_count();
        while !state.is_complete() {
            let mut ready = state.ready_tasks();
            prop_assert!(!ready.is_empty());
            ready.shuffle(&mut rng);
            finish(&mut state, &mut cat, ready[0]);
            let now = state.revealed_count();
            prop_assert!(now >= revealed);
            revealed = now;
            // every revealed task has all predecessors finished
            for t in state.tasks() {
                if t.state != TaskState::Unrevealed {
                    for p in &state.plan().preds[t.id.index()] {
                        prop_assert_eq!(state.task(*p).unwrap().state, TaskState::Finished);
                    }
                }
            }
        }
    }
}
