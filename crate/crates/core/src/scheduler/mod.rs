//! Scheduling strategies. Each iteration reads a snapshot of the workflow,
//! catalog and nodes and returns task starts plus COP requests; the engine
//! applies them.

mod baselines;
pub mod ilp;
mod wow;

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use baselines::{Cws, Orig};
pub use ilp::{solve_assignment, AssignmentMatrix, IlpLimits, IlpNode, IlpTask};
pub use wow::{wow_step1, wow_step2, wow_step3, Step1Outcome, Wow};

use crate::cluster::Node;
use crate::dps::{Cop, CopConstraints, ReplicaCatalog};
use crate::ids::{NodeId, TaskId};
use crate::workflow::WorkflowState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Orig,
    Cws,
    Wow,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::Orig, StrategyKind::Cws, StrategyKind::Wow];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Orig => "orig",
            StrategyKind::Cws => "cws",
            StrategyKind::Wow => "wow",
        }
    }

    /// Whether intermediate data stays on the producing node.
    pub fn keeps_data_local(self) -> bool {
        self == StrategyKind::Wow
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "orig" => Ok(StrategyKind::Orig),
            "cws" => Ok(StrategyKind::Cws),
            "wow" => Ok(StrategyKind::Wow),
            other => Err(format!("unknown strategy '{other}' (expected orig, cws or wow)")),
        }
    }
}

/// Read-only inputs of one scheduling iteration.
#[derive(Debug, Clone, Copy)]
pub struct SchedContext<'a> {
    pub now: f64,
    pub workflow: &'a WorkflowState,
    pub catalog: &'a ReplicaCatalog,
    pub nodes: &'a [Node],
    pub constraints: CopConstraints,
}

/// Compact COP description for the decision log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopRequest {
    pub task: TaskId,
    pub target: NodeId,
    pub total_bytes: u64,
    pub sources: Vec<NodeId>,
    pub price: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchedulerDecision {
    pub time: f64,
    pub starts: Vec<(TaskId, NodeId)>,
    pub cop_requests: Vec<Cop>,
    pub ilp_objective: Option<f64>,
    pub proven_optimal: Option<bool>,
}

impl SchedulerDecision {
    pub fn is_empty(&self) -> bool {
        self.starts.is_empty() && self.cop_requests.is_empty()
    }

    pub fn log_record(&self) -> DecisionRecord {
        DecisionRecord {
            time: self.time,
            starts: self.starts.clone(),
            cop_requests: self
                .cop_requests
                .iter()
                .map(|c| CopRequest {
                    task: c.task,
                    target: c.target,
                    total_bytes: c.total_bytes,
                    sources: c.sources().collect(),
                    price: c.price().value,
                })
                .collect(),
            ilp_objective: self.ilp_objective,
            proven_optimal: self.proven_optimal,
        }
    }
}

/// One line of the decision log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionRecord {
    pub time: f64,
    pub starts: Vec<(TaskId, NodeId)>,
    pub cop_requests: Vec<CopRequest>,
    pub ilp_objective: Option<f64>,
    pub proven_optimal: Option<bool>,
}

pub trait Strategy: Send {
    fn kind(&self) -> StrategyKind;

    fn iterate(&mut self, ctx: &SchedContext<'_>, rng: &mut ChaCha8Rng) -> SchedulerDecision;
}

pub fn make_strategy(kind: StrategyKind, ilp: IlpLimits) -> Box<dyn Strategy> {
    match kind {
        StrategyKind::Orig => Box::new(Orig::default()),
        StrategyKind::Cws => Box::new(Cws),
        StrategyKind::Wow => Box::new(Wow::new(ilp)),
    }
}
