//! Deterministic discrete-event engine with a fluid-flow bandwidth model.
//!
//! Tasks go through reading, computing and writing. Reads and writes are
//! flows over node links, local disks and, for a single-server DFS, the
//! server link. Rates are recomputed by max-min fair sharing whenever the
//! flow set changes. A scheduling iteration runs after every instant at
//! which a task was submitted or finished or a COP finished.

mod flows;
mod trace;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use flows::{max_utilization, recompute_rates, Usage};
pub use trace::{CopRecord, TaskRecord, Trace};

use crate::cluster::{fits, prepared_nodes, Cluster, ClusterConfig, ClusterError, DfsModel};
use crate::dps::{CatalogError, Cop, CopConstraints, CopState, ReplicaCatalog};
use crate::ids::{CopId, FileId, NodeId, TaskId};
use crate::scheduler::{make_strategy, IlpLimits, SchedContext, Strategy, StrategyKind};
use crate::workflow::{AbstractGraph, DataFile, WorkflowError, WorkflowState};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("deadlock at t={time:.3}s: {unfinished} tasks unfinished, ready but unplaceable: {blocked:?}")]
    Deadlock {
        time: f64,
        unfinished: usize,
        blocked: Vec<TaskId>,
    },
    #[error("invariant violated at t={time:.6}s: {message}")]
    Invariant { time: f64, message: String },
    #[error("event limit of {0} exceeded")]
    EventLimit(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub cluster: ClusterConfig,
    pub strategy: StrategyKind,
    pub constraints: CopConstraints,
    pub ilp: IlpLimits,
    pub seed: u64,
    /// Delete surplus replicas once all consumers finished.
    pub gc: bool,
    pub gc_keep_min: usize,
    /// Abort on conservation or throttle violations.
    pub check_invariants: bool,
    pub max_events: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            cluster: ClusterConfig::default(),
            strategy: StrategyKind::Wow,
            constraints: CopConstraints::default(),
            ilp: IlpLimits::default(),
            seed: 0,
            gc: false,
            gc_keep_min: 1,
            check_invariants: true,
            max_events: 50_000_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.cluster.validate()?;
        if self.constraints.c_node == 0 || self.constraints.c_task == 0 {
            return Err(SimError::Config("c_node and c_task must be >= 1".into()));
        }
        if !(self.ilp.time_budget > 0.0) || self.ilp.node_limit == 0 {
            return Err(SimError::Config("ILP budget must be positive".into()));
        }
        Ok(())
    }
}

/// Simulates `workflow` under the strategy named in `config`.
pub fn run(config: &SimConfig, workflow: &AbstractGraph) -> Result<Trace, SimError> {
    run_with(config, workflow, make_strategy(config.strategy, config.ilp))
}

/// Simulates `workflow` with an explicit strategy instance.
pub fn run_with(
    config: &SimConfig,
    workflow: &AbstractGraph,
    strategy: Box<dyn Strategy>,
) -> Result<Trace, SimError> {
    config.validate()?;
    Engine::new(config, workflow, strategy)?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Owner {
    Task(TaskId),
    Cop(CopId),
}

#[derive(Debug, Clone)]
struct Flow {
    owner: Owner,
    uses: Vec<Usage>,
    size: f64,
    remaining: f64,
    rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Reading,
    Computing,
    Writing,
}

#[derive(Debug, Clone)]
struct Exec {
    node: NodeId,
    phase: Phase,
    pending: usize,
}

/// Where a read is served from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Source {
    LocalDisk,
    Server,
    Holder(NodeId),
}

const DONE_REL: f64 = 1e-6;

struct Engine<'a> {
    cfg: &'a SimConfig,
    now: f64,
    cluster: Cluster,
    wf: WorkflowState,
    catalog: ReplicaCatalog,
    strategy: Box<dyn Strategy>,
    rng: ChaCha8Rng,
    keep_local: bool,
    capacities: Vec<f64>,
    flows: BTreeMap<u64, Flow>,
    next_flow: u64,
    rates_dirty: bool,
    /// (time bits, task) of compute phases in progress.
    timers: BTreeSet<(u64, TaskId)>,
    execs: BTreeMap<TaskId, Exec>,
    cop_pending: BTreeMap<CopId, usize>,
    cop_records: BTreeMap<CopId, CopRecord>,
    tasks: Vec<Option<TaskRecord>>,
    /// COP that created a replica, for replicas not written by a task.
    origin: BTreeMap<(FileId, NodeId), CopId>,
    dfs_reads: BTreeMap<FileId, usize>,
    triggered: bool,
    decisions: Vec<crate::scheduler::DecisionRecord>,
    events: u64,
    recomputations: u64,
    max_util: f64,
    dfs_bytes_read: u64,
    dfs_bytes_written: u64,
    deleted_replicas: u64,
}

impl<'a> Engine<'a> {
    fn new(
        cfg: &'a SimConfig,
        workflow: &AbstractGraph,
        strategy: Box<dyn Strategy>,
    ) -> Result<Self, SimError> {
        let cluster = Cluster::new(&cfg.cluster)?;
        let n = cluster.nodes.len();
        let mut capacities = Vec::with_capacity(3 * n + 2);
        for node in &cluster.nodes {
            capacities.extend([node.link_capacity, node.link_capacity, 1.0]);
        }
        match cluster.dfs {
            DfsModel::SingleServer {
                server_link_capacity,
            } => capacities.extend([server_link_capacity, server_link_capacity]),
            DfsModel::Distributed { .. } => {}
        }
        let wf = WorkflowState::new(workflow);
        let n_tasks = wf.tasks().len();
        Ok(Engine {
            cfg,
            now: 0.0,
            keep_local: strategy.kind().keeps_data_local(),
            catalog: ReplicaCatalog::new(n),
            cluster,
            wf,
            strategy,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            capacities,
            flows: BTreeMap::new(),
            next_flow: 0,
            rates_dirty: false,
            timers: BTreeSet::new(),
            execs: BTreeMap::new(),
            cop_pending: BTreeMap::new(),
            cop_records: BTreeMap::new(),
            tasks: vec![None; n_tasks],
            origin: BTreeMap::new(),
            dfs_reads: BTreeMap::new(),
            triggered: false,
            decisions: Vec::new(),
            events: 0,
            recomputations: 0,
            max_util: 0.0,
            dfs_bytes_read: 0,
            dfs_bytes_written: 0,
            deleted_replicas: 0,
        })
    }

    fn n_nodes(&self) -> usize {
        self.cluster.nodes.len()
    }

    fn up(n: NodeId) -> usize {
        3 * n.index()
    }

    fn down(n: NodeId) -> usize {
        3 * n.index() + 1
    }

    fn disk(n: NodeId) -> usize {
        3 * n.index() + 2
    }

    fn server_up(&self) -> usize {
        3 * self.n_nodes()
    }

    fn server_down(&self) -> usize {
        3 * self.n_nodes() + 1
    }

    fn read_coef(&self, n: NodeId) -> f64 {
        1.0 / self.cluster.nodes[n.index()].disk.read_rate
    }

    fn write_coef(&self, n: NodeId) -> f64 {
        1.0 / self.cluster.nodes[n.index()].disk.write_rate
    }

    fn link(resource: usize) -> Usage {
        Usage { resource, coef: 1.0 }
    }

    fn invariant(&self, message: String) -> SimError {
        SimError::Invariant {
            time: self.now,
            message,
        }
    }

    /// Nodes storing a DFS file under a distributed DFS.
    fn dfs_holders(&self, file: FileId) -> Vec<NodeId> {
        match self.cluster.dfs {
            DfsModel::SingleServer { .. } => Vec::new(),
            DfsModel::Distributed { replica_factor } => {
                let n = self.n_nodes();
                let copies = (replica_factor as usize).min(n);
                (0..copies).map(|j| NodeId::from((file.index() + j) % n)).collect()
            }
        }
    }

    fn add_flow(&mut self, owner: Owner, uses: Vec<Usage>, bytes: u64) {
        let size = bytes as f64;
        self.flows.insert(
            self.next_flow,
            Flow {
                owner,
                uses,
                size,
                remaining: size,
                rate: 0.0,
            },
        );
        self.next_flow += 1;
        self.rates_dirty = true;
    }

    fn read_route(&self, src: Source, reader: NodeId) -> Vec<Usage> {
        match src {
            Source::LocalDisk => vec![Usage {
                resource: Self::disk(reader),
                coef: self.read_coef(reader),
            }],
            Source::Server => vec![Self::link(self.server_up()), Self::link(Self::down(reader))],
            Source::Holder(h) if h == reader => self.read_route(Source::LocalDisk, reader),
            Source::Holder(h) => vec![
                Usage {
                    resource: Self::disk(h),
                    coef: self.read_coef(h),
                },
                Self::link(Self::up(h)),
                Self::link(Self::down(reader)),
            ],
        }
    }

    fn copy_route(&self, src: NodeId, dst: NodeId) -> Vec<Usage> {
        vec![
            Usage {
                resource: Self::disk(src),
                coef: self.read_coef(src),
            },
            Self::link(Self::up(src)),
            Self::link(Self::down(dst)),
            Usage {
                resource: Self::disk(dst),
                coef: self.write_coef(dst),
            },
        ]
    }

    fn write_routes(&self, file: FileId, writer: NodeId) -> Vec<Vec<Usage>> {
        let local = |n: NodeId| Usage {
            resource: Self::disk(n),
            coef: self.write_coef(n),
        };
        if self.keep_local {
            return vec![vec![local(writer)]];
        }
        match self.cluster.dfs {
            DfsModel::SingleServer { .. } => {
                vec![vec![Self::link(Self::up(writer)), Self::link(self.server_down())]]
            }
            DfsModel::Distributed { .. } => self
                .dfs_holders(file)
                .into_iter()
                .map(|h| {
                    if h == writer {
                        vec![local(h)]
                    } else {
                        vec![Self::link(Self::up(writer)), Self::link(Self::down(h)), local(h)]
                    }
                })
                .collect(),
        }
    }

    fn register_inputs(&mut self) -> Result<(), SimError> {
        let n_inputs = self.wf.graph().inputs().len();
        let files: Vec<DataFile> = self.wf.plan().files[..n_inputs].to_vec();
        for f in files {
            let holders = self.dfs_holders(f.id);
            self.catalog.register_dfs_file(&f, &holders)?;
        }
        Ok(())
    }

    fn start_task(&mut self, id: TaskId, node: NodeId) -> Result<(), SimError> {
        let task = self.wf.task(id)?.clone();
        if !task.is_unassigned() {
            return Err(self.invariant(format!("start of task {id} in state {:?}", task.state)));
        }
        if self.keep_local && !prepared_nodes(&task, &self.catalog).contains(&node) {
            return Err(self.invariant(format!("task {id} started on unprepared node {node}")));
        }
        self.cluster.node_mut(node)?.reserve(&task)?;
        self.wf.mark_running(id)?;

        let mut reads: BTreeMap<Source, u64> = BTreeMap::new();
        let (mut local, mut dfs) = (0u64, 0u64);
        let mut via = BTreeSet::new();
        for &f in &task.inputs {
            let rec = self.catalog.file(f)?;
            let size = rec.size;
            let src = if rec.in_dfs {
                dfs += size;
                if rec.locations.is_empty() {
                    Source::Server
                } else {
                    let holders: Vec<NodeId> = rec.locations.iter().copied().collect();
                    let turn = self.dfs_reads.entry(f).or_insert(0);
                    let h = holders[*turn % holders.len()];
                    *turn += 1;
                    Source::Holder(h)
                }
            } else {
                if !rec.locations.contains(&node) {
                    return Err(self.invariant(format!("task {id} reads {f} absent on {node}")));
                }
                local += size;
                if let Some(c) = self.origin.get(&(f, node)) {
                    via.insert(*c);
                }
                Source::LocalDisk
            };
            *reads.entry(src).or_default() += size;
        }
        self.dfs_bytes_read += dfs;
        let submit = self.wf.submitted_at(id).unwrap_or(0.0);
        self.tasks[id.index()] = Some(TaskRecord {
            task_id: id,
            abstract_id: task.abstract_id,
            node,
            t_submit: submit,
            t_start: self.now,
            t_end: f64::NAN,
            cpus: task.cpu_demand,
            mem: task.mem_demand,
            bytes_local_read: local,
            bytes_dfs_read: dfs,
            bytes_written: 0,
            inputs: task.inputs.clone(),
            via_cops: via.into_iter().collect(),
        });
        let mut pending = 0;
        for (src, bytes) in reads {
            if bytes > 0 {
                let route = self.read_route(src, node);
                self.add_flow(Owner::Task(id), route, bytes);
                pending += 1;
            }
        }
        self.execs.insert(
            id,
            Exec {
                node,
                phase: Phase::Reading,
                pending,
            },
        );
        if pending == 0 {
            self.after_read(id)?;
        }
        Ok(())
    }

    fn after_read(&mut self, id: TaskId) -> Result<(), SimError> {
        let ct = self.wf.task(id)?.compute_time;
        if ct > 0.0 {
            self.execs.get_mut(&id).expect("running").phase = Phase::Computing;
            self.timers.insert(((self.now + ct).to_bits(), id));
            Ok(())
        } else {
            self.start_write(id)
        }
    }

    fn start_write(&mut self, id: TaskId) -> Result<(), SimError> {
        let node = self.execs[&id].node;
        let output = self.wf.task(id)?.output;
        let size = self.wf.plan().files[output.index()].size;
        let routes = self.write_routes(output, node);
        if let Some(r) = self.tasks[id.index()].as_mut() {
            r.bytes_written = size;
        }
        let mut pending = 0;
        if size > 0 {
            for route in routes {
                self.add_flow(Owner::Task(id), route, size);
                pending += 1;
            }
        }
        let exec = self.execs.get_mut(&id).expect("running");
        exec.phase = Phase::Writing;
        exec.pending = pending;
        if pending == 0 {
            self.finish_task(id)?;
        }
        Ok(())
    }

    fn finish_task(&mut self, id: TaskId) -> Result<(), SimError> {
        let exec = self.execs.remove(&id).expect("running");
        let output = self.wf.task(id)?.output;
        let file = self.wf.plan().files[output.index()].clone();
        if self.keep_local {
            self.catalog.register_output(&file, exec.node)?;
        } else {
            let holders = self.dfs_holders(file.id);
            self.catalog.register_dfs_file(&file, &holders)?;
            self.dfs_bytes_written += file.size;
        }
        self.cluster.node_mut(exec.node)?.release(id)?;
        self.wf.on_task_finished(id, &[output], &self.catalog, self.now)?;
        if let Some(r) = self.tasks[id.index()].as_mut() {
            r.t_end = self.now;
        }
        self.triggered = true;
        if self.cfg.gc {
            for (f, n) in self.catalog.gc_replicas(&self.wf, self.cfg.gc_keep_min) {
                self.origin.remove(&(f, n));
                self.deleted_replicas += 1;
            }
        }
        Ok(())
    }

    fn start_cop(&mut self, cop: Cop) -> Result<(), SimError> {
        if !self.catalog.can_start_cop(&cop, self.cfg.constraints) {
            return Err(self.invariant(format!(
                "COP for task {} to {} exceeds the throttles",
                cop.task, cop.target
            )));
        }
        for (f, src) in &cop.assignments {
            if !self.catalog.has_replica(*f, *src) {
                return Err(self.invariant(format!("COP source {src} lacks {f}")));
            }
        }
        let record_base = (
            cop.task,
            cop.target,
            cop.files().collect::<Vec<_>>(),
            cop.sources().collect::<Vec<_>>(),
            cop.total_bytes,
        );
        let per_source: Vec<(NodeId, u64)> =
            cop.per_source_bytes.iter().map(|(n, b)| (*n, *b)).collect();
        let target = cop.target;
        let task = cop.task;
        let id = self.catalog.activate_cop(cop)?;
        self.wf.mark_preparing(task)?;
        let mut pending = 0;
        for (src, bytes) in per_source {
            if bytes > 0 {
                let route = self.copy_route(src, target);
                self.add_flow(Owner::Cop(id), route, bytes);
                pending += 1;
            }
        }
        let (task_id, target, files, sources, total_bytes) = record_base;
        self.cop_records.insert(
            id,
            CopRecord {
                cop_id: id,
                task_id,
                target,
                files,
                sources,
                total_bytes,
                t_start: self.now,
                t_end: None,
                state: CopState::Active,
                used_flag: false,
            },
        );
        self.cop_pending.insert(id, pending);
        if pending == 0 {
            self.finish_cop(id)?;
        }
        Ok(())
    }

    fn finish_cop(&mut self, id: CopId) -> Result<(), SimError> {
        self.cop_pending.remove(&id);
        let target = self.catalog.cop(id)?.target;
        for (f, _) in self.catalog.complete_cop(id)? {
            self.origin.insert((f, target), id);
        }
        let rec = self.cop_records.get_mut(&id).expect("recorded");
        rec.t_end = Some(self.now);
        rec.state = CopState::Done;
        self.triggered = true;
        Ok(())
    }

    fn on_flow_done(&mut self, owner: Owner) -> Result<(), SimError> {
        match owner {
            Owner::Task(id) => {
                let exec = self.execs.get_mut(&id).expect("running");
                exec.pending -= 1;
                if exec.pending == 0 {
                    match exec.phase {
                        Phase::Reading => self.after_read(id)?,
                        Phase::Writing => self.finish_task(id)?,
                        Phase::Computing => unreachable!("no flows while computing"),
                    }
                }
            }
            Owner::Cop(id) => {
                let left = self.cop_pending.get_mut(&id).expect("active cop");
                *left -= 1;
                if *left == 0 {
                    self.finish_cop(id)?;
                }
            }
        }
        Ok(())
    }

    fn schedule(&mut self) -> Result<(), SimError> {
        let ctx = SchedContext {
            now: self.now,
            workflow: &self.wf,
            catalog: &self.catalog,
            nodes: &self.cluster.nodes,
            constraints: self.cfg.constraints,
        };
        let decision = self.strategy.iterate(&ctx, &mut self.rng);
        self.decisions.push(decision.log_record());
        for (t, n) in decision.starts {
            let task = self.wf.task(t)?;
            if !fits(task, self.cluster.node(n)?) {
                return Err(self.invariant(format!("task {t} does not fit {n}")));
            }
            self.start_task(t, n)?;
        }
        for cop in decision.cop_requests {
            self.start_cop(cop)?;
        }
        if self.cfg.check_invariants {
            self.check_throttles()?;
        }
        Ok(())
    }

    fn check_throttles(&self) -> Result<(), SimError> {
        let c = self.catalog.counters();
        if c != &self.catalog.recount() {
            return Err(self.invariant("COP counters drifted".into()));
        }
        let limits = self.cfg.constraints;
        if let Some(n) = (0..self.n_nodes()).find(|&n| c.node(NodeId::from(n)) > limits.c_node) {
            return Err(self.invariant(format!("node n{n} exceeds c_node")));
        }
        if let Some(cop) = self
            .catalog
            .active_cops()
            .find(|cop| c.task(cop.task) > limits.c_task)
        {
            return Err(self.invariant(format!("task {} exceeds c_task", cop.task)));
        }
        Ok(())
    }

    fn recompute(&mut self) -> Result<(), SimError> {
        let uses: Vec<&[Usage]> = self.flows.values().map(|f| f.uses.as_slice()).collect();
        let rates = recompute_rates(&uses, &self.capacities);
        let util = max_utilization(&uses, &rates, &self.capacities);
        self.max_util = self.max_util.max(util);
        self.recomputations += 1;
        if self.cfg.check_invariants && util > 1.0 + 1e-9 {
            return Err(self.invariant(format!("resource load at {util} of capacity")));
        }
        for (f, r) in self.flows.values_mut().zip(rates) {
            if !(r.is_finite() && r > 0.0) {
                return Err(SimError::Invariant {
                    time: self.now,
                    message: format!("flow without a finite positive rate ({r})"),
                });
            }
            f.rate = r;
        }
        self.rates_dirty = false;
        Ok(())
    }

    fn deadlock(&self) -> SimError {
        SimError::Deadlock {
            time: self.now,
            unfinished: self.wf.unfinished().len(),
            blocked: self.wf.ready_tasks(),
        }
    }

    fn advance(&mut self) -> Result<(), SimError> {
        if self.rates_dirty {
            self.recompute()?;
        }
        let flow_next = self
            .flows
            .iter()
            .map(|(id, f)| (f.remaining / f.rate, *id))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let timer_next = self.timers.first().map(|(bits, _)| f64::from_bits(*bits));
        let dt_flow = flow_next.map_or(f64::INFINITY, |(dt, _)| dt);
        let dt_timer = timer_next.map_or(f64::INFINITY, |t| (t - self.now).max(0.0));
        let dt = dt_flow.min(dt_timer);
        if !dt.is_finite() {
            return Err(self.deadlock());
        }
        let use_timer = dt_timer <= dt_flow;
        self.now = if use_timer {
            timer_next.expect("timer present")
        } else {
            self.now + dt
        };

        let mut done = Vec::new();
        for (id, f) in self.flows.iter_mut() {
            f.remaining -= f.rate * dt;
            if f.remaining <= f.size * DONE_REL {
                f.remaining = 0.0;
                done.push(*id);
            }
        }
        if !use_timer {
            let (_, argmin) = flow_next.expect("flow present");
            if !done.contains(&argmin) {
                done.push(argmin);
                done.sort_unstable();
            }
        }
        for id in done {
            let f = self.flows.remove(&id).expect("active flow");
            self.rates_dirty = true;
            self.events += 1;
            self.on_flow_done(f.owner)?;
        }
        while let Some(&(bits, task)) = self.timers.first() {
            if f64::from_bits(bits) > self.now {
                break;
            }
            self.timers.pop_first();
            self.events += 1;
            self.start_write(task)?;
        }
        if self.events > self.cfg.max_events {
            return Err(SimError::EventLimit(self.cfg.max_events));
        }
        Ok(())
    }

    fn run(mut self) -> Result<Trace, SimError> {
        self.register_inputs()?;
        self.wf.reveal_sources(&self.catalog, 0.0)?;
        self.triggered = true;
        loop {
            while self.triggered {
                self.triggered = false;
                self.schedule()?;
            }
            if self.wf.is_complete() {
                break;
            }
            if self.flows.is_empty() && self.timers.is_empty() {
                return Err(self.deadlock());
            }
            self.advance()?;
        }
        self.into_trace()
    }

    fn into_trace(self) -> Result<Trace, SimError> {
        let mut tasks = Vec::with_capacity(self.tasks.len());
        for (i, r) in self.tasks.into_iter().enumerate() {
            tasks.push(r.ok_or_else(|| SimError::Invariant {
                time: self.now,
                message: format!("task t{i} never ran"),
            })?);
        }
        let mut cops: Vec<CopRecord> = self.cop_records.into_values().collect();
        for c in &mut cops {
            c.used_flag = tasks[c.task_id.index()].node == c.target;
        }
        let n_inputs = self.wf.graph().inputs().len();
        let unique_generated_bytes = self.wf.plan().files[n_inputs..].iter().map(|f| f.size).sum();
        let (dfs, replica_factor) = match self.cluster.dfs {
            DfsModel::SingleServer { .. } => (crate::cluster::DfsKind::SingleServer, 1),
            DfsModel::Distributed { replica_factor } => (
                crate::cluster::DfsKind::Distributed,
                replica_factor.min(self.cluster.nodes.len() as u32),
            ),
        };
        Ok(Trace {
            strategy: self.strategy.kind(),
            dfs,
            replica_factor,
            node_count: self.cluster.nodes.len(),
            tasks,
            cops,
            decisions: self.decisions,
            peak_storage: self.catalog.peak_storage().to_vec(),
            cop_replica_bytes: self.catalog.cop_replica_bytes(),
            dfs_bytes_read: self.dfs_bytes_read,
            dfs_bytes_written: self.dfs_bytes_written,
            unique_generated_bytes,
            end_time: self.now,
            events: self.events,
            rate_recomputations: self.recomputations,
            max_utilization: self.max_util,
            deleted_replicas: self.deleted_replicas,
        })
    }
}
