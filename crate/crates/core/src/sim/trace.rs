use serde::Serialize;

use crate::cluster::DfsKind;
use crate::dps::CopState;
use crate::ids::{AbstractId, CopId, FileId, NodeId, TaskId};
use crate::scheduler::{DecisionRecord, StrategyKind};

/// One executed task.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord {
    pub task_id: TaskId,
    pub abstract_id: AbstractId,
    pub node: NodeId,
    pub t_submit: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub cpus: u32,
    pub mem: u64,
    pub bytes_local_read: u64,
    pub bytes_dfs_read: u64,
    pub bytes_written: u64,
    #[serde(skip)]
    pub inputs: Vec<FileId>,
    /// COPs that created the local replicas this task read.
    #[serde(skip)]
    pub via_cops: Vec<CopId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopRecord {
    pub cop_id: CopId,
    pub task_id: TaskId,
    pub target: NodeId,
    pub files: Vec<FileId>,
    pub sources: Vec<NodeId>,
    pub total_bytes: u64,
    pub t_start: f64,
    pub t_end: Option<f64>,
    pub state: CopState,
    /// The prepared task ran on the target.
    pub used_flag: bool,
}

/// Everything a run produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub strategy: StrategyKind,
    pub dfs: DfsKind,
    /// DFS copies per file; 1 for a single server.
    pub replica_factor: u32,
    pub node_count: usize,
    pub tasks: Vec<TaskRecord>,
    pub cops: Vec<CopRecord>,
    #[serde(skip)]
    pub decisions: Vec<DecisionRecord>,
    /// Peak bytes of replicas held per node.
    pub peak_storage: Vec<u64>,
    pub cop_replica_bytes: u64,
    pub dfs_bytes_read: u64,
    pub dfs_bytes_written: u64,
    /// Total size of task outputs.
    pub unique_generated_bytes: u64,
    pub end_time: f64,
    pub events: u64,
    pub rate_recomputations: u64,
    /// Largest load/capacity seen over all resources and recomputations.
    pub max_utilization: f64,
    pub deleted_replicas: u64,
}
