//! Abstract and physical workflow structure, dynamic task revelation,
//! readiness and task prioritization.

mod definition;
mod graph;
mod state;

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

pub use definition::{parse_workflow, InputDef, SuccessorDef, TaskDef, WorkflowDefinition};
pub use graph::{
    longest_path_ranks, AbstractGraph, AbstractTask, ComputeTime, Edge, EdgeMapping,
    InputMapping, OutputSize, PhysicalPlan, TaskSpec, WorkflowInput,
};
pub use state::WorkflowState;

use crate::dps::{CatalogError, ReplicaCatalog};
use crate::ids::{AbstractId, FileId, TaskId};

#[derive(Debug, Error, PartialEq)]
pub enum WorkflowError {
    #[error("unknown abstract task {0}")]
    UnknownAbstract(AbstractId),
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("abstract graph contains a cycle through {0}")]
    Cycle(AbstractId),
    #[error("invalid workflow: {0}")]
    Invalid(String),
    #[error("task {task} is {state:?}, cannot {action}")]
    State {
        task: TaskId,
        state: TaskState,
        action: &'static str,
    },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Who wrote a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Producer {
    WorkflowInput,
    Task(TaskId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFile {
    pub id: FileId,
    pub size: u64,
    pub producer: Producer,
}

/// Lifecycle of a physical task. Transitions only move forward; `Preparing`
/// may be skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum TaskState {
    Unrevealed,
    Ready,
    Preparing,
    Running,
    Finished,
}

/// Task priority: rank first, total input size second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Priority {
    pub rank: u32,
    pub input_bytes: u64,
}

impl Ord for Priority {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then(self.input_bytes.cmp(&other.input_bytes))
    }
}

impl PartialOrd for Priority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Priority {
    /// Strictly positive scalar used in the assignment objective.
    ///
    /// `max_ready_input` is the largest `input_bytes` among the tasks compared
    /// together; within such a set the scalar order equals the lexicographic
    /// order.
    pub fn scalar(&self, max_ready_input: u64) -> f64 {
        let frac = self.input_bytes as f64 / (1.0 + max_ready_input as f64);
        (self.rank as f64 + 1.0) * 2.0 + frac.min(1.0 - f64::EPSILON)
    }
}

/// Schedulable unit.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalTask {
    pub id: TaskId,
    pub abstract_id: AbstractId,
    pub mem_demand: u64,
    pub cpu_demand: u32,
    /// Set when the task is submitted.
    pub priority: Option<Priority>,
    pub inputs: Vec<FileId>,
    pub output: FileId,
    pub compute_time: f64,
    pub state: TaskState,
}

impl PhysicalTask {
    pub fn is_unassigned(&self) -> bool {
        matches!(self.state, TaskState::Ready | TaskState::Preparing)
    }
}

/// Priority of a task at submission: rank of its template, summed input sizes.
pub fn compute_priority(
    task: &PhysicalTask,
    graph: &AbstractGraph,
    catalog: &ReplicaCatalog,
) -> Result<Priority, WorkflowError> {
    let rank = graph.rank(task.abstract_id)?;
    let mut input_bytes = 0u64;
    for f in &task.inputs {
        input_bytes += catalog.file(*f)?.size;
    }
    Ok(Priority { rank, input_bytes })
}

/// Orders tasks by priority descending, then by ascending id.
pub fn priority_order(a: (Priority, TaskId), b: (Priority, TaskId)) -> Ordering {
    b.0.cmp(&a.0).then(a.1.cmp(&b.1))
}

#[cfg(test)]
mod tests;
