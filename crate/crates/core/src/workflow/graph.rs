use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataFile, Producer, WorkflowError};
use crate::ids::{AbstractId, FileId, TaskId};

/// Pure CPU time of a task instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComputeTime {
    Zero,
    Constant { seconds: f64 },
    Uniform { min: f64, max: f64 },
}

impl ComputeTime {
    fn validate(&self) -> Result<(), String> {
        match *self {
            ComputeTime::Zero => Ok(()),
            ComputeTime::Constant { seconds } if seconds.is_finite() && seconds >= 0.0 => Ok(()),
            ComputeTime::Uniform { min, max }
                if min.is_finite() && max.is_finite() && 0.0 <= min && min <= max =>
            {
                Ok(())
            }
            other => Err(format!("invalid compute time {other:?}")),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ComputeTime::Zero => 0.0,
            ComputeTime::Constant { seconds } => seconds,
            ComputeTime::Uniform { min, max } if min == max => min,
            ComputeTime::Uniform { min, max } => rng.random_range(min..=max),
        }
    }
}

/// Size of the single output file each task instance writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputSize {
    /// Drawn uniformly from `[min, max]` bytes.
    Uniform { min: u64, max: u64 },
    /// Sum of the instance's input sizes ("read all inputs and merge them").
    Merge,
}

/// Which predecessor instances feed which successor instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMapping {
    /// Successor instance `i` consumes predecessor instance `i`.
    OneToOne,
    /// Every successor instance consumes every predecessor instance.
    AllToAll,
    /// Predecessor instance with 1-based index `i` feeds group `floor(i / size)`;
    /// one successor instance exists per distinct group.
    Group { size: u32 },
}

impl EdgeMapping {
    /// Number of successor instances a grouping over `pred_instances` yields.
    pub fn group_count(pred_instances: u32, size: u32) -> u32 {
        pred_instances / size - 1 / size + 1
    }

    fn group_of(pred_instance: u32, size: u32) -> u32 {
        (pred_instance + 1) / size - 1 / size
    }
}

/// Which workflow input files each instance reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputMapping {
    #[default]
    All,
    /// Instance `i` reads the `i`-th listed input.
    OneToOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub to: AbstractId,
    pub mapping: EdgeMapping,
}

/// A workflow step together with its instantiation rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractTask {
    pub id: AbstractId,
    pub name: String,
    pub successors: Vec<Edge>,
    pub instances: u32,
    pub output: OutputSize,
    pub compute: ComputeTime,
    pub cpus: u32,
    pub mem: u64,
    /// Indices into [`AbstractGraph::inputs`].
    pub inputs: Vec<usize>,
    pub input_mapping: InputMapping,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowInput {
    pub name: String,
    pub size: u64,
}

/// Validated abstract workflow DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractGraph {
    tasks: Vec<AbstractTask>,
    inputs: Vec<WorkflowInput>,
    seed: u64,
    ranks: Vec<u32>,
    topo: Vec<AbstractId>,
}

/// Longest path (in edges) from every vertex to any sink.
///
/// Fails with [`WorkflowError::Cycle`] when the successor lists contain a cycle.
pub fn longest_path_ranks(successors: &[Vec<usize>]) -> Result<Vec<u32>, WorkflowError> {
    let order = topological_order(successors)?;
    let mut rank = vec![0u32; successors.len()];
    for &v in order.iter().rev() {
        rank[v] = successors[v]
            .iter()
            .map(|&s| rank[s] + 1)
            .max()
            .unwrap_or(0);
    }
    Ok(rank)
}

fn topological_order(successors: &[Vec<usize>]) -> Result<Vec<usize>, WorkflowError> {
    let n = successors.len();
    let mut indegree = vec![0usize; n];
    for succ in successors {
        for &s in succ {
            if s >= n {
                return Err(WorkflowError::Invalid(format!("edge to unknown vertex {s}")));
            }
            indegree[s] += 1;
        }
    }
    // lowest index first, for a stable order
    let mut stack: Vec<usize> = (0..n).rev().filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = stack.pop() {
        order.push(v);
        for &s in successors[v].iter().rev() {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                stack.push(s);
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n).find(|&v| indegree[v] > 0).unwrap_or(0);
        return Err(WorkflowError::Cycle(AbstractId::from(stuck)));
    }
    Ok(order)
}

impl AbstractGraph {
    pub fn new(
        tasks: Vec<AbstractTask>,
        inputs: Vec<WorkflowInput>,
        seed: u64,
    ) -> Result<Self, WorkflowError> {
        if tasks.is_empty() {
            return Err(WorkflowError::Invalid("workflow has no tasks".into()));
        }
        for (i, t) in tasks.iter().enumerate() {
            if t.id.index() != i {
                return Err(WorkflowError::Invalid(format!(
                    "abstract task {} stored at position {i}",
                    t.id
                )));
            }
        }
        let succ: Vec<Vec<usize>> = tasks
            .iter()
            .map(|t| t.successors.iter().map(|e| e.to.index()).collect())
            .collect();
        let ranks = longest_path_ranks(&succ)?;
        let topo = topological_order(&succ)?
            .into_iter()
            .map(AbstractId::from)
            .collect();
        let graph = AbstractGraph {
            tasks,
            inputs,
            seed,
            ranks,
            topo,
        };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<(), WorkflowError> {
        let invalid = |msg: String| Err(WorkflowError::Invalid(msg));
        for input in &self.inputs {
            if input.size == 0 {
                return invalid(format!("workflow input '{}' has zero size", input.name));
            }
        }
        let mut has_pred = vec![false; self.tasks.len()];
        for t in &self.tasks {
            let name = &t.name;
            if t.instances == 0 {
                return invalid(format!("task '{name}' has zero instances"));
            }
            if t.cpus == 0 || t.mem == 0 {
                return invalid(format!("task '{name}' needs mem > 0 and cpus >= 1"));
            }
            if let OutputSize::Uniform { min, max } = t.output {
                if min == 0 || min > max {
                    return invalid(format!("task '{name}' has output range [{min}, {max}]"));
                }
            }
            t.compute
                .validate()
                .or_else(|e| invalid(format!("task '{name}': {e}")))?;
            if let Some(&bad) = t.inputs.iter().find(|&&i| i >= self.inputs.len()) {
                return invalid(format!("task '{name}' reads unknown workflow input #{bad}"));
            }
            if t.input_mapping == InputMapping::OneToOne && t.inputs.len() != t.instances as usize
            {
                return invalid(format!(
                    "task '{name}' maps {} inputs one-to-one onto {} instances",
                    t.inputs.len(),
                    t.instances
                ));
            }
            let mut seen = Vec::new();
            for e in &t.successors {
                if seen.contains(&e.to) {
                    return invalid(format!("duplicate edge {} -> {}", t.id, e.to));
                }
                seen.push(e.to);
                has_pred[e.to.index()] = true;
                let target = &self.tasks[e.to.index()];
                let expected = match e.mapping {
                    EdgeMapping::OneToOne => t.instances,
                    EdgeMapping::AllToAll => target.instances,
                    EdgeMapping::Group { size: 0 } => {
                        return invalid(format!("group size 0 on edge {} -> {}", t.id, e.to))
                    }
                    EdgeMapping::Group { size } => EdgeMapping::group_count(t.instances, size),
                };
                if expected != target.instances {
                    return invalid(format!(
                        "edge '{name}' -> '{}' ({:?}) implies {expected} instances, found {}",
                        target.name, e.mapping, target.instances
                    ));
                }
            }
        }
        for t in &self.tasks {
            if t.output == OutputSize::Merge && !has_pred[t.id.index()] && t.inputs.is_empty() {
                return invalid(format!("merge task '{}' has nothing to merge", t.name));
            }
        }
        Ok(())
    }

    pub fn tasks(&self) -> &[AbstractTask] {
        &self.tasks
    }

    pub fn inputs(&self) -> &[WorkflowInput] {
        &self.inputs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn task(&self, id: AbstractId) -> Result<&AbstractTask, WorkflowError> {
        self.tasks
            .get(id.index())
            .ok_or(WorkflowError::UnknownAbstract(id))
    }

    pub fn find(&self, name: &str) -> Option<AbstractId> {
        self.tasks.iter().find(|t| t.name == name).map(|t| t.id)
    }

    /// Number of edges on the longest path from `task` to any sink.
    pub fn rank(&self, task: AbstractId) -> Result<u32, WorkflowError> {
        self.ranks
            .get(task.index())
            .copied()
            .ok_or(WorkflowError::UnknownAbstract(task))
    }

    pub fn topological_order(&self) -> &[AbstractId] {
        &self.topo
    }

    /// Total physical task count without instantiating.
    pub fn physical_task_count(&self) -> usize {
        self.tasks.iter().map(|t| t.instances as usize).sum()
    }

    /// Expands the abstract graph into the full physical plan. Output sizes and
    /// compute times are drawn from the graph's seed, in task-id order.
    pub fn instantiate(&self) -> PhysicalPlan {
        let n_inputs = self.inputs.len();
        // first physical id of every abstract task, in topological order
        let mut first = vec![0usize; self.tasks.len()];
        let mut next = 0usize;
        for a in &self.topo {
            first[a.index()] = next;
            next += self.tasks[a.index()].instances as usize;
        }
        let total = next;
        let mut preds: Vec<Vec<TaskId>> = vec![Vec::new(); total];
        for a in &self.topo {
            let t = &self.tasks[a.index()];
            for e in &t.successors {
                let succ_first = first[e.to.index()];
                let succ_n = self.tasks[e.to.index()].instances;
                for i in 0..t.instances {
                    let p = TaskId::from(first[a.index()] + i as usize);
                    match e.mapping {
                        EdgeMapping::OneToOne => preds[succ_first + i as usize].push(p),
                        EdgeMapping::AllToAll => {
                            for j in 0..succ_n {
                                preds[succ_first + j as usize].push(p);
                            }
                        }
                        EdgeMapping::Group { size } => {
                            let g = EdgeMapping::group_of(i, size);
                            preds[succ_first + g as usize].push(p);
                        }
                    }
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut files: Vec<DataFile> = self
            .inputs
            .iter()
            .enumerate()
            .map(|(i, inp)| DataFile {
                id: FileId::from(i),
                size: inp.size,
                producer: Producer::WorkflowInput,
            })
            .collect();
        let mut tasks = Vec::with_capacity(total);
        for a in &self.topo {
            let t = &self.tasks[a.index()];
            for i in 0..t.instances {
                let id = TaskId::from(first[a.index()] + i as usize);
                let mut inputs: Vec<FileId> = match t.input_mapping {
                    InputMapping::All => t.inputs.iter().map(|&k| FileId::from(k)).collect(),
                    InputMapping::OneToOne => vec![FileId::from(t.inputs[i as usize])],
                };
                inputs.extend(preds[id.index()].iter().map(|p| output_file(*p, n_inputs)));
                let size = match t.output {
                    OutputSize::Uniform { min, max } if min == max => min,
                    OutputSize::Uniform { min, max } => rng.random_range(min..=max),
                    OutputSize::Merge => inputs.iter().map(|f| files[f.index()].size).sum(),
                };
                let compute_time = t.compute.draw(&mut rng);
                let output = output_file(id, n_inputs);
                debug_assert_eq!(output.index(), files.len());
                files.push(DataFile {
                    id: output,
                    size,
                    producer: Producer::Task(id),
                });
                tasks.push(TaskSpec {
                    id,
                    abstract_id: t.id,
                    instance: i,
                    inputs,
                    output,
                    mem: t.mem,
                    cpus: t.cpus,
                    compute_time,
                });
            }
        }

        let mut succs: Vec<Vec<TaskId>> = vec![Vec::new(); total];
        for (s, ps) in preds.iter().enumerate() {
            for p in ps {
                succs[p.index()].push(TaskId::from(s));
            }
        }
        let mut consumers: Vec<Vec<TaskId>> = vec![Vec::new(); files.len()];
        for t in &tasks {
            for f in &t.inputs {
                consumers[f.index()].push(t.id);
            }
        }
        PhysicalPlan {
            tasks,
            files,
            preds,
            succs,
            consumers,
        }
    }
}

fn output_file(task: TaskId, n_inputs: usize) -> FileId {
    FileId::from(n_inputs + task.index())
}

/// Static description of one physical task instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: TaskId,
    pub abstract_id: AbstractId,
    pub instance: u32,
    pub inputs: Vec<FileId>,
    pub output: FileId,
    pub mem: u64,
    pub cpus: u32,
    pub compute_time: f64,
}

/// Every physical task and file the workflow will produce. The simulator
/// reveals tasks from it gradually.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalPlan {
    pub tasks: Vec<TaskSpec>,
    pub files: Vec<DataFile>,
    pub preds: Vec<Vec<TaskId>>,
    pub succs: Vec<Vec<TaskId>>,
    /// Consumers per file, indexed by file id.
    pub consumers: Vec<Vec<TaskId>>,
}

impl PhysicalPlan {
    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }
}
