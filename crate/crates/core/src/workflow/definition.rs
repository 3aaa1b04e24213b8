//! Workflow definition file (TOML).
//!
//! ```toml
//! seed = 7
//!
//! [[workflow_inputs]]
//! name = "reads"
//! size = 20000000
//!
//! [[abstract_tasks]]
//! id = "A"
//! instances = 100
//! output_size_min = 8000000
//! output_size_max = 10000000
//! compute_time = { kind = "constant", seconds = 0.5 }
//! inputs = ["reads"]
//! successors = [{ task = "B", mapping = "group", group_size = 3 }]
//!
//! [[abstract_tasks]]
//! id = "B"
//! instances = 34
//! output = "merge"
//! ```
//!
//! A successor given as a bare string uses the `all_to_all` mapping.

use serde::{Deserialize, Serialize};

use super::{
    AbstractGraph, AbstractTask, ComputeTime, Edge, EdgeMapping, InputMapping, OutputSize,
    WorkflowError, WorkflowInput,
};
use crate::ids::AbstractId;
use crate::units::GIB;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowDefinition {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub workflow_inputs: Vec<InputDef>,
    pub abstract_tasks: Vec<TaskDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDef {
    pub name: String,
    pub size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SuccessorDef {
    Name(String),
    Mapped {
        task: String,
        mapping: MappingDef,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group_size: Option<u32>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingDef {
    OneToOne,
    AllToAll,
    Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputDef {
    Uniform,
    Merge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMappingDef {
    #[default]
    All,
    OneToOne,
}

fn one() -> u32 {
    1
}

fn default_mem() -> u64 {
    GIB
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDef {
    pub id: String,
    #[serde(default = "one")]
    pub instances: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_size_min: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_size_max: Option<u64>,
    #[serde(default = "zero_compute")]
    pub compute_time: ComputeTime,
    #[serde(default = "one")]
    pub cpus: u32,
    #[serde(default = "default_mem")]
    pub mem: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub input_mapping: InputMappingDef,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub successors: Vec<SuccessorDef>,
}

fn zero_compute() -> ComputeTime {
    ComputeTime::Zero
}

/// Parses and validates a workflow definition document.
pub fn parse_workflow(text: &str) -> Result<AbstractGraph, WorkflowError> {
    let def: WorkflowDefinition =
        toml::from_str(text).map_err(|e| WorkflowError::Invalid(e.to_string()))?;
    def.into_graph()
}

impl WorkflowDefinition {
    pub fn into_graph(self) -> Result<AbstractGraph, WorkflowError> {
        let invalid = |m: String| WorkflowError::Invalid(m);
        let lookup = |name: &str| -> Result<AbstractId, WorkflowError> {
            self.abstract_tasks
                .iter()
                .position(|t| t.id == name)
                .map(AbstractId::from)
                .ok_or_else(|| invalid(format!("unknown abstract task '{name}'")))
        };
        let input_index = |name: &str| -> Result<usize, WorkflowError> {
            self.workflow_inputs
                .iter()
                .position(|i| i.name == name)
                .ok_or_else(|| invalid(format!("unknown workflow input '{name}'")))
        };
        for (i, t) in self.abstract_tasks.iter().enumerate() {
            if self.abstract_tasks[..i].iter().any(|o| o.id == t.id) {
                return Err(invalid(format!("duplicate abstract task '{}'", t.id)));
            }
        }

        let mut tasks = Vec::with_capacity(self.abstract_tasks.len());
        for (i, t) in self.abstract_tasks.iter().enumerate() {
            let output = match (t.output, t.output_size_min, t.output_size_max) {
                (Some(OutputDef::Merge), None, None) => OutputSize::Merge,
                (Some(OutputDef::Merge), _, _) => {
                    return Err(invalid(format!(
                        "task '{}' mixes output = \"merge\" with explicit sizes",
                        t.id
                    )))
                }
                (_, Some(min), Some(max)) => OutputSize::Uniform { min, max },
                (_, Some(v), None) | (_, None, Some(v)) => OutputSize::Uniform { min: v, max: v },
                (_, None, None) => {
                    return Err(invalid(format!("task '{}' declares no output size", t.id)))
                }
            };
            let successors = t
                .successors
                .iter()
                .map(|s| {
                    Ok(match s {
                        SuccessorDef::Name(name) => Edge {
                            to: lookup(name)?,
                            mapping: EdgeMapping::AllToAll,
                        },
                        SuccessorDef::Mapped {
                            task,
                            mapping,
                            group_size,
                        } => Edge {
                            to: lookup(task)?,
                            mapping: match (mapping, group_size) {
                                (MappingDef::OneToOne, None) => EdgeMapping::OneToOne,
                                (MappingDef::AllToAll, None) => EdgeMapping::AllToAll,
                                (MappingDef::Group, Some(size)) => {
                                    EdgeMapping::Group { size: *size }
                                }
                                (MappingDef::Group, None) => {
                                    return Err(invalid(format!(
                                        "group edge to '{task}' needs group_size"
                                    )))
                                }
                                (_, Some(_)) => {
                                    return Err(invalid(format!(
                                        "group_size on non-group edge to '{task}'"
                                    )))
                                }
                            },
                        },
                    })
                })
                .collect::<Result<Vec<_>, WorkflowError>>()?;
            let inputs = t
                .inputs
                .iter()
                .map(|n| input_index(n))
                .collect::<Result<Vec<_>, _>>()?;
            tasks.push(AbstractTask {
                id: AbstractId::from(i),
                name: t.id.clone(),
                successors,
                instances: t.instances,
                output,
                compute: t.compute_time,
                cpus: t.cpus,
                mem: t.mem,
                inputs,
                input_mapping: match t.input_mapping {
                    InputMappingDef::All => InputMapping::All,
                    InputMappingDef::OneToOne => InputMapping::OneToOne,
                },
            });
        }
        let inputs = self
            .workflow_inputs
            .iter()
            .map(|i| WorkflowInput {
                name: i.name.clone(),
                size: i.size,
            })
            .collect();
        AbstractGraph::new(tasks, inputs, self.seed)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("workflow definitions always serialize")
    }
}

impl From<&AbstractGraph> for WorkflowDefinition {
    fn from(graph: &AbstractGraph) -> Self {
        let name_of = |id: AbstractId| graph.tasks()[id.index()].name.clone();
        let abstract_tasks = graph
            .tasks()
            .iter()
            .map(|t| {
                let (output, output_size_min, output_size_max) = match t.output {
                    OutputSize::Merge => (Some(OutputDef::Merge), None, None),
                    OutputSize::Uniform { min, max } => (None, Some(min), Some(max)),
                };
                TaskDef {
                    id: t.name.clone(),
                    instances: t.instances,
                    output,
                    output_size_min,
                    output_size_max,
                    compute_time: t.compute,
                    cpus: t.cpus,
                    mem: t.mem,
                    inputs: t
                        .inputs
                        .iter()
                        .map(|&i| graph.inputs()[i].name.clone())
                        .collect(),
                    input_mapping: match t.input_mapping {
                        InputMapping::All => InputMappingDef::All,
                        InputMapping::OneToOne => InputMappingDef::OneToOne,
                    },
                    successors: t
                        .successors
                        .iter()
                        .map(|e| {
                            let task = name_of(e.to);
                            match e.mapping {
                                EdgeMapping::AllToAll => SuccessorDef::Name(task),
                                EdgeMapping::OneToOne => SuccessorDef::Mapped {
                                    task,
                                    mapping: MappingDef::OneToOne,
                                    group_size: None,
                                },
                                EdgeMapping::Group { size } => SuccessorDef::Mapped {
                                    task,
                                    mapping: MappingDef::Group,
                                    group_size: Some(size),
                                },
                            }
                        })
                        .collect(),
                }
            })
            .collect();
        WorkflowDefinition {
            seed: graph.seed(),
            workflow_inputs: graph
                .inputs()
                .iter()
                .map(|i| InputDef {
                    name: i.name.clone(),
                    size: i.size,
                })
                .collect(),
            abstract_tasks,
        }
    }
}
