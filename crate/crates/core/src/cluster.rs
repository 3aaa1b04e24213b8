//! Nodes, their free resources and links, and the two DFS flavours.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dps::ReplicaCatalog;
use crate::ids::{NodeId, TaskId};
use crate::units::{GBIT, GIB};
use crate::workflow::PhysicalTask;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("task {task} does not fit on node {node}")]
    Capacity { task: TaskId, node: NodeId },
    #[error("task {task} is already reserved on node {node}")]
    AlreadyReserved { task: TaskId, node: NodeId },
    #[error("release of task {task} on node {node} without a matching reserve")]
    UnmatchedRelease { task: TaskId, node: NodeId },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid cluster: {0}")]
    Invalid(String),
}

/// Sequential local disk throughput in bytes per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalDisk {
    pub read_rate: f64,
    pub write_rate: f64,
}

impl Default for LocalDisk {
    fn default() -> Self {
        LocalDisk {
            read_rate: 537e6,
            write_rate: 402e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfsKind {
    SingleServer,
    Distributed,
}

impl DfsKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DfsKind::SingleServer => "single_server",
            DfsKind::Distributed => "distributed",
        }
    }
}

/// Shared file system used for workflow inputs and, under the baselines, for
/// all intermediate data.
///
/// A single server exposes one full-duplex link. A distributed DFS stores
/// `replica_factor` copies of every file on the cluster nodes themselves:
/// reads are served round-robin from the holders' uplinks and writes leave
/// the writer once per replica.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DfsModel {
    SingleServer { server_link_capacity: f64 },
    Distributed { replica_factor: u32 },
}

impl DfsModel {
    pub fn kind(&self) -> DfsKind {
        match self {
            DfsModel::SingleServer { .. } => DfsKind::SingleServer,
            DfsModel::Distributed { .. } => DfsKind::Distributed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub mem_total: u64,
    pub cpu_total: u32,
    pub mem_free: u64,
    pub cpu_free: u32,
    /// Per direction; uplink and downlink are independent.
    pub link_capacity: f64,
    pub disk: LocalDisk,
    reservations: BTreeMap<TaskId, (u64, u32)>,
}

impl Node {
    pub fn new(id: NodeId, mem: u64, cpus: u32, link_capacity: f64, disk: LocalDisk) -> Self {
        Node {
            id,
            mem_total: mem,
            cpu_total: cpus,
            mem_free: mem,
            cpu_free: cpus,
            link_capacity,
            disk,
            reservations: BTreeMap::new(),
        }
    }

    pub fn fits_demand(&self, mem: u64, cpus: u32) -> bool {
        mem <= self.mem_free && cpus <= self.cpu_free
    }

    pub fn has_free_resources(&self) -> bool {
        self.cpu_free > 0 && self.mem_free > 0
    }

    pub fn reserve(&mut self, task: &PhysicalTask) -> Result<(), ClusterError> {
        if self.reservations.contains_key(&task.id) {
            return Err(ClusterError::AlreadyReserved {
                task: task.id,
                node: self.id,
            });
        }
        if !fits(task, self) {
            return Err(ClusterError::Capacity {
                task: task.id,
                node: self.id,
            });
        }
        self.mem_free -= task.mem_demand;
        self.cpu_free -= task.cpu_demand;
        self.reservations
            .insert(task.id, (task.mem_demand, task.cpu_demand));
        Ok(())
    }

    pub fn release(&mut self, task: TaskId) -> Result<(), ClusterError> {
        let (mem, cpus) = self
            .reservations
            .remove(&task)
            .ok_or(ClusterError::UnmatchedRelease {
                task,
                node: self.id,
            })?;
        self.mem_free += mem;
        self.cpu_free += cpus;
        Ok(())
    }

    pub fn running(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.reservations.keys().copied()
    }
}

/// True iff the task's demands fit the node's free resources.
pub fn fits(task: &PhysicalTask, node: &Node) -> bool {
    node.fits_demand(task.mem_demand, task.cpu_demand)
}

/// Nodes holding a valid replica of every node-local input of `task`.
/// Files served by the DFS are reachable from everywhere and do not
/// constrain the set; a task without local inputs is prepared everywhere.
pub fn prepared_nodes(task: &PhysicalTask, catalog: &ReplicaCatalog) -> BTreeSet<NodeId> {
    let mut prepared: BTreeSet<NodeId> = (0..catalog.node_count()).map(NodeId::from).collect();
    for f in &task.inputs {
        match catalog.file(*f) {
            Ok(rec) if rec.in_dfs => {}
            Ok(rec) => prepared.retain(|n| rec.locations.contains(n)),
            Err(_) => prepared.clear(),
        }
        if prepared.is_empty() {
            break;
        }
    }
    prepared
}

/// Per-node capacity override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub cores: u32,
    pub mem: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    pub nodes: u32,
    pub cores: u32,
    pub mem: u64,
    pub link_capacity: f64,
    pub disk: LocalDisk,
    pub dfs: DfsModel,
    /// When non-empty, replaces the homogeneous `nodes`/`cores`/`mem` layout.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub node_specs: Vec<NodeSpec>,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            nodes: 8,
            cores: 16,
            mem: 128 * GIB,
            link_capacity: GBIT,
            disk: LocalDisk::default(),
            dfs: DfsModel::SingleServer {
                server_link_capacity: GBIT,
            },
            node_specs: Vec::new(),
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        let bad = |m: &str| Err(ClusterError::Invalid(m.to_string()));
        let count = if self.node_specs.is_empty() {
            if self.cores == 0 || self.mem == 0 {
                return bad("nodes need at least one core and some memory");
            }
            self.nodes as usize
        } else {
            if self.node_specs.iter().any(|s| s.cores == 0 || s.mem == 0) {
                return bad("nodes need at least one core and some memory");
            }
            self.node_specs.len()
        };
        if count == 0 {
            return bad("cluster has no nodes");
        }
        if !(self.link_capacity.is_finite() && self.link_capacity > 0.0) {
            return bad("link capacity must be positive");
        }
        if !(self.disk.read_rate > 0.0 && self.disk.write_rate > 0.0) {
            return bad("disk rates must be positive");
        }
        match self.dfs {
            DfsModel::SingleServer {
                server_link_capacity,
            } if !(server_link_capacity.is_finite() && server_link_capacity > 0.0) => {
                bad("server link capacity must be positive")
            }
            DfsModel::Distributed { replica_factor: 0 } => bad("replica factor must be >= 1"),
            DfsModel::Distributed { replica_factor } if replica_factor as usize > count => {
                bad("replica factor exceeds the node count")
            }
            _ => Ok(()),
        }
    }

    pub fn node_count(&self) -> usize {
        if self.node_specs.is_empty() {
            self.nodes as usize
        } else {
            self.node_specs.len()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub nodes: Vec<Node>,
    pub dfs: DfsModel,
}

impl Cluster {
    pub fn new(config: &ClusterConfig) -> Result<Self, ClusterError> {
        config.validate()?;
        let specs: Vec<NodeSpec> = if config.node_specs.is_empty() {
            vec![
                NodeSpec {
                    cores: config.cores,
                    mem: config.mem,
                };
                config.nodes as usize
            ]
        } else {
            config.node_specs.clone()
        };
        let nodes = specs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Node::new(
                    NodeId::from(i),
                    s.mem,
                    s.cores,
                    config.link_capacity,
                    config.disk,
                )
            })
            .collect();
        Ok(Cluster {
            nodes,
            dfs: config.dfs,
        })
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, ClusterError> {
        self.nodes.get(id.index()).ok_or(ClusterError::UnknownNode(id))
    }

    pub fn node_mut(&mut self, id: NodeId) -> Result<&mut Node, ClusterError> {
        self.nodes
            .get_mut(id.index())
            .ok_or(ClusterError::UnknownNode(id))
    }
}
