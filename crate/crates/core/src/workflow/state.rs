use super::{
    compute_priority, priority_order, AbstractGraph, PhysicalPlan, PhysicalTask, TaskState,
    WorkflowError,
};
use crate::dps::ReplicaCatalog;
use crate::ids::{FileId, TaskId};

/// Runtime view of one workflow execution: which physical tasks have been
/// revealed, their states and submission order.
///
/// All physical tasks are instantiated up front, but a task only becomes
/// visible once every physical predecessor mapped to it has finished.
#[derive(Debug, Clone)]
pub struct WorkflowState {
    graph: AbstractGraph,
    plan: PhysicalPlan,
    tasks: Vec<PhysicalTask>,
    waiting_on: Vec<usize>,
    submitted_at: Vec<Option<f64>>,
    submission_seq: Vec<Option<u64>>,
    next_seq: u64,
    unfinished: usize,
}

impl WorkflowState {
    pub fn new(graph: &AbstractGraph) -> Self {
        let plan = graph.instantiate();
        let tasks: Vec<PhysicalTask> = plan
            .tasks
            .iter()
            .map(|s| PhysicalTask {
                id: s.id,
                abstract_id: s.abstract_id,
                mem_demand: s.mem,
                cpu_demand: s.cpus,
                priority: None,
                inputs: s.inputs.clone(),
                output: s.output,
                compute_time: s.compute_time,
                state: TaskState::Unrevealed,
            })
            .collect();
        let waiting_on = plan.preds.iter().map(Vec::len).collect();
        let n = tasks.len();
        WorkflowState {
            graph: graph.clone(),
            plan,
            tasks,
            waiting_on,
            submitted_at: vec![None; n],
            submission_seq: vec![None; n],
            next_seq: 0,
            unfinished: n,
        }
    }

    pub fn graph(&self) -> &AbstractGraph {
        &self.graph
    }

    pub fn plan(&self) -> &PhysicalPlan {
        &self.plan
    }

    pub fn tasks(&self) -> &[PhysicalTask] {
        &self.tasks
    }

    pub fn task(&self, id: TaskId) -> Result<&PhysicalTask, WorkflowError> {
        self.tasks
            .get(id.index())
            .ok_or(WorkflowError::UnknownTask(id))
    }

    pub fn submitted_at(&self, id: TaskId) -> Option<f64> {
        self.submitted_at.get(id.index()).copied().flatten()
    }

    /// FIFO position of the task in the job queue.
    pub fn submission_seq(&self, id: TaskId) -> Option<u64> {
        self.submission_seq.get(id.index()).copied().flatten()
    }

    pub fn is_complete(&self) -> bool {
        self.unfinished == 0
    }

    pub fn unfinished(&self) -> Vec<TaskId> {
        self.tasks
            .iter()
            .filter(|t| t.state != TaskState::Finished)
            .map(|t| t.id)
            .collect()
    }

    pub fn revealed_count(&self) -> usize {
        self.tasks
            .iter()
            .filter(|t| t.state != TaskState::Unrevealed)
            .count()
    }

    /// True once every consumer of `file` has finished.
    pub fn consumers_done(&self, file: FileId) -> bool {
        self.plan
            .consumers
            .get(file.index())
            .is_some_and(|c| c.iter().all(|t| self.tasks[t.index()].state == TaskState::Finished))
    }

    /// Reveals tasks without physical predecessors. Idempotent.
    pub fn reveal_sources(
        &mut self,
        catalog: &ReplicaCatalog,
        now: f64,
    ) -> Result<Vec<TaskId>, WorkflowError> {
        let sources: Vec<TaskId> = (0..self.tasks.len())
            .filter(|&i| self.waiting_on[i] == 0 && self.tasks[i].state == TaskState::Unrevealed)
            .map(TaskId::from)
            .collect();
        for &t in &sources {
            self.submit(t, catalog, now)?;
        }
        Ok(sources)
    }

    fn submit(
        &mut self,
        id: TaskId,
        catalog: &ReplicaCatalog,
        now: f64,
    ) -> Result<(), WorkflowError> {
        let priority = compute_priority(&self.tasks[id.index()], &self.graph, catalog)?;
        let task = &mut self.tasks[id.index()];
        task.priority = Some(priority);
        task.state = TaskState::Ready;
        self.submitted_at[id.index()] = Some(now);
        self.submission_seq[id.index()] = Some(self.next_seq);
        self.next_seq += 1;
        Ok(())
    }

    /// Every revealed, unfinished, unassigned task, priority descending with
    /// ascending id as final tie-break.
    pub fn ready_tasks(&self) -> Vec<TaskId> {
        let mut ready: Vec<_> = self
            .tasks
            .iter()
            .filter(|t| t.is_unassigned())
            .map(|t| (t.priority.expect("submitted tasks carry a priority"), t.id))
            .collect();
        ready.sort_by(|a, b| priority_order(*a, *b));
        ready.into_iter().map(|(_, id)| id).collect()
    }

    pub fn mark_preparing(&mut self, id: TaskId) -> Result<(), WorkflowError> {
        let task = self
            .tasks
            .get_mut(id.index())
            .ok_or(WorkflowError::UnknownTask(id))?;
        match task.state {
            TaskState::Ready => {
                task.state = TaskState::Preparing;
                Ok(())
            }
            // speculative copies may outlive the task's start
            TaskState::Preparing | TaskState::Running | TaskState::Finished => Ok(()),
            state => Err(WorkflowError::State {
                task: id,
                state,
                action: "prepare",
            }),
        }
    }

    pub fn mark_running(&mut self, id: TaskId) -> Result<(), WorkflowError> {
        let task = self
            .tasks
            .get_mut(id.index())
            .ok_or(WorkflowError::UnknownTask(id))?;
        if !task.is_unassigned() {
            return Err(WorkflowError::State {
                task: id,
                state: task.state,
                action: "start",
            });
        }
        task.state = TaskState::Running;
        Ok(())
    }

    /// Records that a running task finished with `outputs` and reveals the
    /// successors whose predecessors have now all finished. The outputs must
    /// already be registered in `catalog` so successor priorities can be
    /// computed.
    pub fn on_task_finished(
        &mut self,
        id: TaskId,
        outputs: &[FileId],
        catalog: &ReplicaCatalog,
        now: f64,
    ) -> Result<Vec<TaskId>, WorkflowError> {
        let task = self
            .tasks
            .get_mut(id.index())
            .ok_or(WorkflowError::UnknownTask(id))?;
        if task.state != TaskState::Running {
            return Err(WorkflowError::State {
                task: id,
                state: task.state,
                action: "finish",
            });
        }
        if outputs != [task.output] {
            return Err(WorkflowError::Invalid(format!(
                "task {id} reported outputs {outputs:?}, expected [{}]",
                task.output
            )));
        }
        task.state = TaskState::Finished;
        self.unfinished -= 1;

        let mut revealed = Vec::new();
        for s in self.plan.succs[id.index()].clone() {
            self.waiting_on[s.index()] -= 1;
            if self.waiting_on[s.index()] == 0 {
                self.submit(s, catalog, now)?;
                revealed.push(s);
            }
        }
        Ok(revealed)
    }
}
