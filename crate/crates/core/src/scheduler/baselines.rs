//! Data-oblivious baselines. Both move every intermediate file through the
//! DFS and never request COPs.

use rand_chacha::ChaCha8Rng;

use super::{SchedContext, SchedulerDecision, Strategy, StrategyKind};
use crate::cluster::fits;
use crate::ids::TaskId;

/// FIFO queue with round-robin placement. The round-robin pointer persists
/// across iterations; nodes that cannot fit the task are skipped.
#[derive(Debug, Clone, Default)]
pub struct Orig {
    next: usize,
}

impl Strategy for Orig {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Orig
    }

    fn iterate(&mut self, ctx: &SchedContext<'_>, _rng: &mut ChaCha8Rng) -> SchedulerDecision {
        let mut nodes = ctx.nodes.to_vec();
        let mut queue: Vec<TaskId> = ctx.workflow.ready_tasks();
        queue.sort_by_key(|t| ctx.workflow.submission_seq(*t));
        let l = nodes.len();
        let mut starts = Vec::new();
        for id in queue {
            let t = &ctx.workflow.tasks()[id.index()];
            if let Some(i) = (0..l).map(|d| (self.next + d) % l).find(|&i| fits(t, &nodes[i])) {
                nodes[i].reserve(t).expect("checked fit");
                starts.push((id, nodes[i].id));
                self.next = (i + 1) % l;
            }
        }
        SchedulerDecision {
            time: ctx.now,
            starts,
            ..Default::default()
        }
    }
}

/// Rank and input size priority with first-fit placement by node id.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cws;

impl Strategy for Cws {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Cws
    }

    fn iterate(&mut self, ctx: &SchedContext<'_>, _rng: &mut ChaCha8Rng) -> SchedulerDecision {
        let mut nodes = ctx.nodes.to_vec();
        let mut starts = Vec::new();
        for id in ctx.workflow.ready_tasks() {
            let t = &ctx.workflow.tasks()[id.index()];
            if let Some(n) = nodes.iter_mut().find(|n| fits(t, n)) {
                n.reserve(t).expect("checked fit");
                starts.push((id, n.id));
            }
        }
        SchedulerDecision {
            time: ctx.now,
            starts,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{nodes, started};
    use super::*;
    use crate::dps::CopConstraints;
    use crate::ids::NodeId;
    use crate::units::{GB, GIB};
    use crate::workflow::{AbstractGraph, AbstractTask, ComputeTime, InputMapping, OutputSize, WorkflowInput};
    use crate::AbstractId;
    use rand::SeedableRng;

    fn graph(templates: &[(u32, u32)]) -> AbstractGraph {
        let tasks = templates
            .iter()
            .enumerate()
            .map(|(i, &(instances, cpus))| AbstractTask {
                id: AbstractId(i as u32),
                name: format!("T{i}"),
                successors: vec![],
                instances,
                output: OutputSize::Uniform { min: GB, max: GB },
                compute: ComputeTime::Zero,
                cpus,
                mem: GIB,
                inputs: vec![0],
                input_mapping: InputMapping::All,
            })
            .collect();
        AbstractGraph::new(
            tasks,
            vec![WorkflowInput {
                name: "in".into(),
                size: GB,
            }],
            5,
        )
        .unwrap()
    }

    fn decide(s: &mut dyn Strategy, g: &AbstractGraph, n: usize, cores: u32) -> Vec<(TaskId, NodeId)> {
        let (state, cat) = started(g, n);
        let ns = nodes(n, cores);
        let ctx = SchedContext {
            now: 0.0,
            workflow: &state,
            catalog: &cat,
            nodes: &ns,
            constraints: CopConstraints::default(),
        };
        let d = s.iterate(&ctx, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(d.cop_requests.is_empty());
        d.starts
    }

    #[test]
    fn orig_round_robins() {
        let g = graph(&[(5, 1)]);
        let starts = decide(&mut Orig::default(), &g, 3, 4);
        let placed: Vec<u32> = starts.iter().map(|(_, n)| n.0).collect();
        assert_eq!(placed, vec![0, 1, 2, 0, 1]);
    }

    #[test]
    fn orig_pointer_persists_and_skips_full_nodes() {
        let g = graph(&[(2, 1)]);
        let mut s = Orig::default();
        decide(&mut s, &g, 3, 4);
        assert_eq!(s.next, 2);
        // tasks of 3 cores on nodes with 2 cores never fit
        let big = graph(&[(1, 3)]);
        assert!(decide(&mut s, &big, 3, 2).is_empty());
        assert_eq!(s.next, 2);
    }

    #[test]
    fn cws_first_fit_in_priority_order() {
        // equal priorities, so ids decide the order
        let g = graph(&[(3, 2)]);
        let starts = decide(&mut Cws, &g, 2, 4);
        assert_eq!(
            starts,
            vec![(TaskId(0), NodeId(0)), (TaskId(1), NodeId(0)), (TaskId(2), NodeId(1))]
        );
    }
}
