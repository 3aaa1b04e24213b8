//! Discrete-event simulation of workflow-aware data placement and task
//! scheduling on a commodity cluster.
//!
//! The crate is organised bottom-up:
//!
//! * [`workflow`] holds abstract/physical workflow structure, readiness and
//!   task priorities.
//! * [`cluster`] models nodes, their free resources and the DFS flavour.
//! * [`dps`] is the data placement service: replica catalog, copy operation
//!   (COP) planning, pricing and throttling.
//! * [`scheduler`] implements the three-step WOW strategy and the `Orig` and
//!   `CWS` baselines behind one [`scheduler::Strategy`] trait.
//! * [`sim`] is the deterministic fluid-flow event engine producing a
//!   [`sim::Trace`].
//! * [`generators`] builds the five workflow patterns and random layered DAGs.
//! * [`metrics`] derives the evaluation quantities from traces.

pub mod cluster;
pub mod dps;
pub mod generators;
mod ids;
pub mod metrics;
pub mod scheduler;
pub mod sim;
pub mod units;
pub mod workflow;

pub use cluster::{Cluster, ClusterConfig, DfsKind, DfsModel, LocalDisk, Node};
pub use dps::{Cop, CopConstraints, CopState, Price, ReplicaCatalog};
pub use generators::{gen_layered, gen_pattern, LayeredSpec, Pattern, PatternSpec};
pub use ids::{AbstractId, CopId, FileId, NodeId, TaskId};
pub use metrics::RunSummary;
pub use scheduler::{SchedulerDecision, Strategy, StrategyKind};
pub use sim::{run, SimConfig, SimError, Trace};
pub use workflow::{AbstractGraph, PhysicalTask, Priority, WorkflowState};
