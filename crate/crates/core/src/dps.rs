//! Data placement service: the replica catalog, copy operations (COPs),
//! their pricing and the parallelism throttles.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{CopId, FileId, NodeId, TaskId};
use crate::workflow::{DataFile, PhysicalTask, Producer, WorkflowState};

#[derive(Debug, Error, PartialEq)]
pub enum CatalogError {
    #[error("unknown file {0}")]
    UnknownFile(FileId),
    #[error("file {0} is already registered")]
    Duplicate(FileId),
    #[error("node {node} holds no replica of {file}")]
    NoReplica { file: FileId, node: NodeId },
    #[error("file {0} has no valid replica")]
    Unavailable(FileId),
    #[error("node {target} already holds every input of task {task}")]
    EmptyPlan { task: TaskId, target: NodeId },
    #[error("unknown cop {0}")]
    UnknownCop(CopId),
    #[error("cop cannot move from {from:?} to {to:?}")]
    Transition { from: CopState, to: CopState },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileRecord {
    pub size: u64,
    pub producer: Producer,
    /// Nodes with a valid replica. For DFS files, the nodes storing the
    /// file's DFS blocks (empty under a single server).
    pub locations: BTreeSet<NodeId>,
    /// Served by the shared file system and therefore readable everywhere.
    pub in_dfs: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopState {
    Planned,
    Active,
    Done,
    Failed,
}

impl CopState {
    pub fn as_str(self) -> &'static str {
        match self {
            CopState::Planned => "planned",
            CopState::Active => "active",
            CopState::Done => "done",
            CopState::Failed => "failed",
        }
    }
}

/// Parallel COP limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CopConstraints {
    pub c_node: u32,
    pub c_task: u32,
}

impl Default for CopConstraints {
    fn default() -> Self {
        CopConstraints {
            c_node: 1,
            c_task: 2,
        }
    }
}

const W_TRAFFIC: f64 = 1.0;
const W_MAX_LOAD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Price {
    pub traffic: u64,
    pub max_source_load: u64,
    pub value: f64,
}

impl Price {
    pub fn new(traffic: u64, max_source_load: u64) -> Self {
        Price {
            traffic,
            max_source_load,
            value: W_TRAFFIC * traffic as f64 + W_MAX_LOAD * max_source_load as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cop {
    /// Assigned on activation.
    pub id: Option<CopId>,
    pub task: TaskId,
    pub target: NodeId,
    pub assignments: Vec<(FileId, NodeId)>,
    pub total_bytes: u64,
    pub per_source_bytes: BTreeMap<NodeId, u64>,
    pub state: CopState,
}

impl Cop {
    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.per_source_bytes.keys().copied()
    }

    /// Target plus every source, each once.
    pub fn involved_nodes(&self) -> BTreeSet<NodeId> {
        let mut s: BTreeSet<NodeId> = self.sources().collect();
        s.insert(self.target);
        s
    }

    pub fn files(&self) -> impl Iterator<Item = FileId> + '_ {
        self.assignments.iter().map(|(f, _)| *f)
    }

    /// Price recomputed from the per-source byte counts.
    pub fn price(&self) -> Price {
        Price::new(
            self.per_source_bytes.values().sum(),
            self.per_source_bytes.values().copied().max().unwrap_or(0),
        )
    }
}

/// Active COP counts per node and per prepared task.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CopCounters {
    per_node: Vec<u32>,
    per_task: BTreeMap<TaskId, u32>,
    targets: BTreeMap<TaskId, BTreeSet<NodeId>>,
}

impl CopCounters {
    pub fn new(n_nodes: usize) -> Self {
        CopCounters {
            per_node: vec![0; n_nodes],
            ..Default::default()
        }
    }

    pub fn node(&self, n: NodeId) -> u32 {
        self.per_node.get(n.index()).copied().unwrap_or(0)
    }

    pub fn task(&self, t: TaskId) -> u32 {
        self.per_task.get(&t).copied().unwrap_or(0)
    }

    /// True iff an active COP already prepares `task` on `node`.
    pub fn is_target(&self, task: TaskId, node: NodeId) -> bool {
        self.targets.get(&task).is_some_and(|s| s.contains(&node))
    }

    pub fn admits(&self, cop: &Cop, c: CopConstraints) -> bool {
        !self.is_target(cop.task, cop.target)
            && self.task(cop.task) < c.c_task
            && cop.involved_nodes().iter().all(|n| self.node(*n) < c.c_node)
    }

    pub fn add(&mut self, cop: &Cop) {
        for n in cop.involved_nodes() {
            self.per_node[n.index()] += 1;
        }
        *self.per_task.entry(cop.task).or_default() += 1;
        self.targets.entry(cop.task).or_default().insert(cop.target);
    }

    fn remove(&mut self, cop: &Cop) {
        for n in cop.involved_nodes() {
            self.per_node[n.index()] -= 1;
        }
        if let Some(c) = self.per_task.get_mut(&cop.task) {
            *c -= 1;
            if *c == 0 {
                self.per_task.remove(&cop.task);
            }
        }
        if let Some(s) = self.targets.get_mut(&cop.task) {
            s.remove(&cop.target);
            if s.is_empty() {
                self.targets.remove(&cop.task);
            }
        }
    }
}

/// Files, their valid replicas, per-node storage and the COP registry.
#[derive(Debug, Clone)]
pub struct ReplicaCatalog {
    n_nodes: usize,
    files: BTreeMap<FileId, FileRecord>,
    storage: Vec<u64>,
    peak_storage: Vec<u64>,
    cops: BTreeMap<CopId, Cop>,
    next_cop: u32,
    counters: CopCounters,
    cop_replica_bytes: u64,
}

impl ReplicaCatalog {
    pub fn new(n_nodes: usize) -> Self {
        ReplicaCatalog {
            n_nodes,
            files: BTreeMap::new(),
            storage: vec![0; n_nodes],
            peak_storage: vec![0; n_nodes],
            cops: BTreeMap::new(),
            next_cop: 0,
            counters: CopCounters::new(n_nodes),
            cop_replica_bytes: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n_nodes
    }

    pub fn file(&self, id: FileId) -> Result<&FileRecord, CatalogError> {
        self.files.get(&id).ok_or(CatalogError::UnknownFile(id))
    }

    pub fn files(&self) -> impl Iterator<Item = (FileId, &FileRecord)> {
        self.files.iter().map(|(k, v)| (*k, v))
    }

    pub fn has_replica(&self, file: FileId, node: NodeId) -> bool {
        self.files
            .get(&file)
            .is_some_and(|r| r.locations.contains(&node))
    }

    pub fn storage_used(&self, node: NodeId) -> u64 {
        self.storage[node.index()]
    }

    pub fn peak_storage(&self) -> &[u64] {
        &self.peak_storage
    }

    /// Bytes of replicas created by completed COPs.
    pub fn cop_replica_bytes(&self) -> u64 {
        self.cop_replica_bytes
    }

    pub fn counters(&self) -> &CopCounters {
        &self.counters
    }

    pub fn cop(&self, id: CopId) -> Result<&Cop, CatalogError> {
        self.cops.get(&id).ok_or(CatalogError::UnknownCop(id))
    }

    pub fn active_cops(&self) -> impl Iterator<Item = &Cop> {
        self.cops.values().filter(|c| c.state == CopState::Active)
    }

    pub fn cops(&self) -> impl Iterator<Item = &Cop> {
        self.cops.values()
    }

    fn check_node(&self, node: NodeId) -> Result<(), CatalogError> {
        if node.index() < self.n_nodes {
            Ok(())
        } else {
            Err(CatalogError::UnknownNode(node))
        }
    }

    fn add_storage(&mut self, node: NodeId, bytes: u64) {
        let i = node.index();
        self.storage[i] += bytes;
        self.peak_storage[i] = self.peak_storage[i].max(self.storage[i]);
    }

    fn insert_new(&mut self, file: &DataFile, rec: FileRecord) -> Result<(), CatalogError> {
        if self.files.contains_key(&file.id) {
            return Err(CatalogError::Duplicate(file.id));
        }
        for n in &rec.locations {
            self.check_node(*n)?;
        }
        for n in rec.locations.clone() {
            self.add_storage(n, rec.size);
        }
        self.files.insert(file.id, rec);
        Ok(())
    }

    /// Records a task output left on the node that produced it.
    pub fn register_output(&mut self, file: &DataFile, node: NodeId) -> Result<(), CatalogError> {
        self.insert_new(
            file,
            FileRecord {
                size: file.size,
                producer: file.producer,
                locations: BTreeSet::from([node]),
                in_dfs: false,
            },
        )
    }

    /// Records a file stored in the shared file system, with its blocks on
    /// `holders` (empty for a dedicated server).
    pub fn register_dfs_file(
        &mut self,
        file: &DataFile,
        holders: &[NodeId],
    ) -> Result<(), CatalogError> {
        self.insert_new(
            file,
            FileRecord {
                size: file.size,
                producer: file.producer,
                locations: holders.iter().copied().collect(),
                in_dfs: true,
            },
        )
    }

    /// Adds a replica outside the COP path. Used for set-up and tests.
    pub fn insert_replica(&mut self, file: FileId, node: NodeId) -> Result<bool, CatalogError> {
        self.check_node(node)?;
        let rec = self
            .files
            .get_mut(&file)
            .ok_or(CatalogError::UnknownFile(file))?;
        let size = rec.size;
        let added = rec.locations.insert(node);
        if added {
            self.add_storage(node, size);
        }
        Ok(added)
    }

    /// Node-local inputs of `task` without a valid replica on `target`,
    /// largest first, ties by file id.
    pub fn missing_files(&self, task: &PhysicalTask, target: NodeId) -> Vec<DataFile> {
        let mut missing: Vec<DataFile> = task
            .inputs
            .iter()
            .filter_map(|f| match self.files.get(f) {
                Some(r) if r.in_dfs || r.locations.contains(&target) => None,
                Some(r) => Some(DataFile {
                    id: *f,
                    size: r.size,
                    producer: r.producer,
                }),
                // unregistered inputs surface as unavailable in plan_cop
                None => Some(DataFile {
                    id: *f,
                    size: 0,
                    producer: Producer::WorkflowInput,
                }),
            })
            .collect();
        missing.sort_by(|a, b| b.size.cmp(&a.size).then(a.id.cmp(&b.id)));
        missing.dedup_by_key(|f| f.id);
        missing
    }

    pub fn estimate_preparation_cost(&self, task: &PhysicalTask, target: NodeId) -> u64 {
        self.missing_files(task, target).iter().map(|f| f.size).sum()
    }

    /// Plans a COP copying every missing input of `task` to `target`. Each
    /// file goes to the holder with the least bytes already assigned in this
    /// plan; ties are broken with `rng`.
    pub fn plan_cop<R: Rng + ?Sized>(
        &self,
        task: &PhysicalTask,
        target: NodeId,
        rng: &mut R,
    ) -> Result<(Cop, Price), CatalogError> {
        let missing = self.missing_files(task, target);
        if missing.is_empty() {
            return Err(CatalogError::EmptyPlan {
                task: task.id,
                target,
            });
        }
        let mut per_source: BTreeMap<NodeId, u64> = BTreeMap::new();
        let mut assignments = Vec::with_capacity(missing.len());
        for f in &missing {
            let holders = match self.files.get(&f.id) {
                Some(r) if !r.locations.is_empty() => &r.locations,
                _ => return Err(CatalogError::Unavailable(f.id)),
            };
            let load = |n: &NodeId| per_source.get(n).copied().unwrap_or(0);
            let least = holders.iter().map(load).min().unwrap_or(0);
            let ties: Vec<NodeId> = holders.iter().copied().filter(|n| load(n) == least).collect();
            let src = if ties.len() == 1 {
                ties[0]
            } else {
                ties[rng.random_range(0..ties.len())]
            };
            *per_source.entry(src).or_default() += f.size;
            assignments.push((f.id, src));
        }
        let cop = Cop {
            id: None,
            task: task.id,
            target,
            assignments,
            total_bytes: missing.iter().map(|f| f.size).sum(),
            per_source_bytes: per_source,
            state: CopState::Planned,
        };
        let price = cop.price();
        Ok((cop, price))
    }

    pub fn can_start_cop(&self, cop: &Cop, constraints: CopConstraints) -> bool {
        cop.state == CopState::Planned && self.counters.admits(cop, constraints)
    }

    /// Registers a planned COP as running and returns its id.
    pub fn activate_cop(&mut self, mut cop: Cop) -> Result<CopId, CatalogError> {
        if cop.state != CopState::Planned {
            return Err(CatalogError::Transition {
                from: cop.state,
                to: CopState::Active,
            });
        }
        for n in cop.involved_nodes() {
            self.check_node(n)?;
        }
        let id = CopId(self.next_cop);
        self.next_cop += 1;
        cop.id = Some(id);
        cop.state = CopState::Active;
        self.counters.add(&cop);
        self.cops.insert(id, cop);
        Ok(id)
    }

    fn finish(&mut self, id: CopId, to: CopState) -> Result<&Cop, CatalogError> {
        let cop = self.cops.get_mut(&id).ok_or(CatalogError::UnknownCop(id))?;
        if cop.state != CopState::Active {
            return Err(CatalogError::Transition {
                from: cop.state,
                to,
            });
        }
        cop.state = to;
        let cop = &self.cops[&id];
        self.counters.remove(cop);
        Ok(cop)
    }

    /// Makes every file of the COP visible on its target at once. Returns
    /// the replicas that were new.
    pub fn complete_cop(&mut self, id: CopId) -> Result<Vec<(FileId, u64)>, CatalogError> {
        let cop = self.finish(id, CopState::Done)?;
        let target = cop.target;
        let files: Vec<FileId> = cop.files().collect();
        let mut added = Vec::new();
        for f in files {
            if let Some(rec) = self.files.get_mut(&f) {
                if rec.locations.insert(target) {
                    let size = rec.size;
                    added.push((f, size));
                    self.add_storage(target, size);
                    self.cop_replica_bytes += size;
                }
            }
        }
        Ok(added)
    }

    pub fn fail_cop(&mut self, id: CopId) -> Result<(), CatalogError> {
        self.finish(id, CopState::Failed).map(|_| ())
    }

    /// Leaves `node` as the only valid location of `file`.
    pub fn invalidate_all_but(
        &mut self,
        file: FileId,
        node: NodeId,
    ) -> Result<Vec<NodeId>, CatalogError> {
        let rec = self
            .files
            .get_mut(&file)
            .ok_or(CatalogError::UnknownFile(file))?;
        if !rec.locations.contains(&node) {
            return Err(CatalogError::NoReplica { file, node });
        }
        let size = rec.size;
        let dropped: Vec<NodeId> = rec.locations.iter().copied().filter(|n| *n != node).collect();
        rec.locations = BTreeSet::from([node]);
        for n in &dropped {
            self.storage[n.index()] -= size;
        }
        Ok(dropped)
    }

    /// Deletes surplus replicas of node-local files whose consumers have all
    /// finished, keeping at least `keep_min` (≥ 1) copies. Replicas that an
    /// active COP is reading from are kept. Higher node ids go first.
    pub fn gc_replicas(&mut self, state: &WorkflowState, keep_min: usize) -> Vec<(FileId, NodeId)> {
        let keep_min = keep_min.max(1);
        let busy: BTreeSet<(FileId, NodeId)> = self
            .active_cops()
            .flat_map(|c| c.assignments.iter().copied())
            .collect();
        let mut deleted = Vec::new();
        for (&f, rec) in self.files.iter_mut() {
            if rec.in_dfs || rec.locations.len() <= keep_min || !state.consumers_done(f) {
                continue;
            }
            let candidates: Vec<NodeId> = rec
                .locations
                .iter()
                .rev()
                .copied()
                .filter(|n| !busy.contains(&(f, *n)))
                .collect();
            for n in candidates {
                if rec.locations.len() <= keep_min {
                    break;
                }
                rec.locations.remove(&n);
                self.storage[n.index()] -= rec.size;
                deleted.push((f, n));
            }
        }
        deleted
    }

    /// Recounts active COPs from scratch; equals [`Self::counters`] whenever
    /// the catalog is consistent.
    pub fn recount(&self) -> CopCounters {
        let mut c = CopCounters::new(self.n_nodes);
        for cop in self.active_cops() {
            c.add(cop);
        }
        c
    }
}
