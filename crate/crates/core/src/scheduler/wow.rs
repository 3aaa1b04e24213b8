use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha8Rng;

use super::ilp::{solve_assignment, IlpLimits, IlpNode, IlpTask};
use super::{SchedContext, SchedulerDecision, Strategy, StrategyKind};
use crate::cluster::{fits, prepared_nodes, Node};
use crate::dps::{Cop, CopCounters};
use crate::ids::{NodeId, TaskId};
use crate::workflow::PhysicalTask;

#[derive(Debug, Clone, PartialEq)]
pub struct Step1Outcome {
    pub starts: Vec<(TaskId, NodeId)>,
    pub objective: f64,
    pub proven_optimal: bool,
}

fn task<'a>(ctx: &SchedContext<'a>, id: TaskId) -> &'a PhysicalTask {
    &ctx.workflow.tasks()[id.index()]
}

/// Starts ready tasks on prepared nodes, maximising summed priority.
/// Reserves the chosen resources on `nodes`.
pub fn wow_step1(ctx: &SchedContext<'_>, nodes: &mut [Node], limits: IlpLimits) -> Step1Outcome {
    let mut run = Vec::new();
    for id in ctx.workflow.ready_tasks() {
        let t = task(ctx, id);
        let allowed: Vec<usize> = prepared_nodes(t, ctx.catalog)
            .into_iter()
            .map(|n| n.index())
            .filter(|&l| l < nodes.len() && fits(t, &nodes[l]))
            .collect();
        if !allowed.is_empty() {
            run.push((t, allowed));
        }
    }
    if run.is_empty() {
        return Step1Outcome {
            starts: Vec::new(),
            objective: 0.0,
            proven_optimal: true,
        };
    }
    let max_input = run
        .iter()
        .map(|(t, _)| t.priority.map_or(0, |p| p.input_bytes))
        .max()
        .unwrap_or(0);
    let ilp_tasks: Vec<IlpTask> = run
        .iter()
        .map(|(t, allowed)| IlpTask {
            id: t.id,
            weight: t.priority.expect("ready tasks carry a priority").scalar(max_input),
            cpus: t.cpu_demand,
            mem: t.mem_demand,
            allowed: allowed.clone(),
        })
        .collect();
    let ilp_nodes: Vec<IlpNode> = nodes
        .iter()
        .map(|n| IlpNode {
            cpu_free: n.cpu_free,
            mem_free: n.mem_free,
        })
        .collect();
    let m = solve_assignment(&ilp_tasks, &ilp_nodes, limits);
    let mut starts = Vec::new();
    for (k, a) in m.assignment.iter().enumerate() {
        if let Some(l) = *a {
            nodes[l]
                .reserve(run[k].0)
                .expect("assignment respects free capacity");
            starts.push((run[k].0.id, nodes[l].id));
        }
    }
    Step1Outcome {
        starts,
        objective: m.objective,
        proven_optimal: m.proven_optimal,
    }
}

/// Prepares free nodes for waiting tasks: tasks prepared on fewer nodes go
/// first, and each gets at most one COP, aimed at the fitting node with the
/// fewest bytes to copy.
pub fn wow_step2(
    ctx: &SchedContext<'_>,
    nodes: &[Node],
    skip: &BTreeSet<TaskId>,
    counters: &mut CopCounters,
    rng: &mut ChaCha8Rng,
) -> Vec<Cop> {
    let limits = ctx.constraints;
    let mut pending: Vec<(TaskId, BTreeSet<NodeId>)> = ctx
        .workflow
        .ready_tasks()
        .into_iter()
        .filter(|t| !skip.contains(t))
        .map(|t| (t, prepared_nodes(task(ctx, t), ctx.catalog)))
        .collect();
    // stable: priority order survives as the final tie-break
    pending.sort_by_key(|(t, prep)| (prep.len(), counters.task(*t)));

    let mut out = Vec::new();
    for (id, prepared) in pending {
        if counters.task(id) >= limits.c_task {
            continue;
        }
        let t = task(ctx, id);
        let mut candidates: Vec<(u64, NodeId)> = nodes
            .iter()
            .filter(|n| {
                fits(t, n)
                    && !prepared.contains(&n.id)
                    && !counters.is_target(id, n.id)
                    && counters.node(n.id) < limits.c_node
            })
            .map(|n| (ctx.catalog.estimate_preparation_cost(t, n.id), n.id))
            .collect();
        candidates.sort();
        for (_, target) in candidates {
            if let Ok((cop, _)) = ctx.catalog.plan_cop(t, target, rng) {
                if counters.admits(&cop, limits) {
                    counters.add(&cop);
                    out.push(cop);
                    break;
                }
            }
        }
    }
    out
}

/// Speculatively prepares further nodes, busy ones included, for tasks
/// below their COP limit, cheapest COP first, until nothing more fits the
/// throttles.
pub fn wow_step3(
    ctx: &SchedContext<'_>,
    skip: &BTreeSet<TaskId>,
    counters: &mut CopCounters,
    rng: &mut ChaCha8Rng,
) -> Vec<Cop> {
    let limits = ctx.constraints;
    let n_nodes = ctx.nodes.len();
    let ready: Vec<TaskId> = ctx
        .workflow
        .ready_tasks()
        .into_iter()
        .filter(|t| !skip.contains(t))
        .collect();
    let mut prepared: BTreeMap<TaskId, BTreeSet<NodeId>> = BTreeMap::new();
    let mut out = Vec::new();
    loop {
        let mut added = false;
        for &id in &ready {
            if counters.task(id) >= limits.c_task {
                continue;
            }
            let t = task(ctx, id);
            let prep = prepared
                .entry(id)
                .or_insert_with(|| prepared_nodes(t, ctx.catalog));
            let mut plans: Vec<(f64, NodeId, Cop)> = (0..n_nodes)
                .map(NodeId::from)
                .filter(|n| {
                    !prep.contains(n) && !counters.is_target(id, *n) && counters.node(*n) < limits.c_node
                })
                .filter_map(|n| {
                    ctx.catalog
                        .plan_cop(t, n, rng)
                        .ok()
                        .map(|(cop, price)| (price.value, n, cop))
                })
                .collect();
            plans.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((_, _, cop)) = plans.into_iter().find(|(_, _, c)| counters.admits(c, limits)) {
                counters.add(&cop);
                out.push(cop);
                added = true;
            }
        }
        if !added {
            return out;
        }
    }
}

/// The three-step workflow-aware strategy.
#[derive(Debug, Clone)]
pub struct Wow {
    limits: IlpLimits,
}

impl Wow {
    pub fn new(limits: IlpLimits) -> Self {
        Wow { limits }
    }
}

impl Strategy for Wow {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Wow
    }

    fn iterate(&mut self, ctx: &SchedContext<'_>, rng: &mut ChaCha8Rng) -> SchedulerDecision {
        let mut nodes = ctx.nodes.to_vec();
        let step1 = wow_step1(ctx, &mut nodes, self.limits);
        let started: BTreeSet<TaskId> = step1.starts.iter().map(|(t, _)| *t).collect();
        let mut counters = ctx.catalog.counters().clone();
        let mut cops = wow_step2(ctx, &nodes, &started, &mut counters, rng);
        cops.extend(wow_step3(ctx, &started, &mut counters, rng));
        SchedulerDecision {
            time: ctx.now,
            starts: step1.starts,
            cop_requests: cops,
            ilp_objective: Some(step1.objective),
            proven_optimal: Some(step1.proven_optimal),
        }
    }
}
