//! Evaluation quantities derived from traces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::DfsKind;
use crate::dps::CopState;
use crate::scheduler::StrategyKind;
use crate::sim::{TaskRecord, Trace};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("trace contains no tasks")]
    EmptyTrace,
    #[error("no values given")]
    NoValues,
    #[error("negative value {0}")]
    Negative(f64),
}

/// Time from the first task start to the last task end.
pub fn makespan(tasks: &[TaskRecord]) -> Result<f64, MetricsError> {
    let start = tasks.iter().map(|t| t.t_start).fold(f64::INFINITY, f64::min);
    let end = tasks.iter().map(|t| t.t_end).fold(f64::NEG_INFINITY, f64::max);
    if tasks.is_empty() {
        return Err(MetricsError::EmptyTrace);
    }
    Ok(end - start)
}

/// Summed runtime times allocated cores, in core-hours.
pub fn cpu_allocated(tasks: &[TaskRecord]) -> f64 {
    tasks
        .iter()
        .map(|t| (t.t_end - t.t_start) * t.cpus as f64)
        .sum::<f64>()
        / 3600.0
}

/// Allocated core-seconds per node.
pub fn cpu_seconds_per_node(tasks: &[TaskRecord], nodes: usize) -> Vec<f64> {
    let mut v = vec![0.0; nodes];
    for t in tasks {
        v[t.node.index()] += (t.t_end - t.t_start) * t.cpus as f64;
    }
    v
}

/// Extra replica bytes relative to unique bytes; 0 when nothing is unique.
pub fn overhead_ratio(extra_bytes: u64, unique_bytes: u64) -> f64 {
    if unique_bytes == 0 {
        0.0
    } else {
        extra_bytes as f64 / unique_bytes as f64
    }
}

/// Bytes beyond the first copy of every generated file: COP replicas plus
/// the additional DFS copies of files written to a distributed DFS.
pub fn extra_replica_bytes(trace: &Trace) -> u64 {
    trace.cop_replica_bytes + (trace.replica_factor.max(1) as u64 - 1) * trace.dfs_bytes_written
}

pub fn data_overhead(trace: &Trace) -> f64 {
    overhead_ratio(extra_replica_bytes(trace), trace.unique_generated_bytes)
}

/// Percentage of tasks that read no COP-delivered replica, and percentage
/// of completed COPs that delivered a replica some task later read.
pub fn cop_stats(trace: &Trace) -> (f64, f64) {
    if trace.tasks.is_empty() {
        return (100.0, 0.0);
    }
    let none = trace.tasks.iter().filter(|t| t.via_cops.is_empty()).count();
    let none_pct = 100.0 * none as f64 / trace.tasks.len() as f64;
    let read: BTreeSet<_> = trace.tasks.iter().flat_map(|t| t.via_cops.iter().copied()).collect();
    let done: Vec<_> = trace.cops.iter().filter(|c| c.state == CopState::Done).collect();
    let used_pct = if done.is_empty() {
        0.0
    } else {
        let used = done.iter().filter(|c| read.contains(&c.cop_id)).count();
        100.0 * used as f64 / done.len() as f64
    };
    (none_pct, used_pct)
}

/// Gini coefficient, `Σ_i Σ_j |x_i − x_j| / (2 n² μ)`, via the sorted form.
/// All-zero input gives 0.
pub fn gini(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::NoValues);
    }
    if let Some(&v) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(MetricsError::Negative(v));
    }
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let weighted: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (2.0 * (i as f64 + 1.0) - n - 1.0) * v)
        .sum();
    Ok(weighted / (n * total))
}

/// Scaling efficiency in percent against a base run on `base_nodes` nodes:
/// `makespan_base · base_nodes / (makespan_n · n) · 100`.
pub fn efficiency_from(makespan_base: f64, base_nodes: u32, makespan_n: f64, n: u32) -> f64 {
    makespan_base * base_nodes as f64 / (makespan_n * n as f64) * 100.0
}

/// `makespan(1) / (makespan(n) · n) · 100`.
pub fn efficiency(makespan_1: f64, makespan_n: f64, n: u32) -> f64 {
    efficiency_from(makespan_1, 1, makespan_n, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub strategy: StrategyKind,
    pub dfs: DfsKind,
    pub nodes: usize,
    pub tasks: usize,
    pub makespan: f64,
    /// Core-hours.
    pub cpu_allocated: f64,
    pub data_overhead: f64,
    pub cop_none_pct: f64,
    pub cop_used_pct: f64,
    pub gini_storage: f64,
    pub gini_cpu: f64,
    pub cop_count: usize,
    pub total_cop_bytes: u64,
    pub total_dfs_bytes: u64,
    pub max_utilization: f64,
}

pub fn summarize(trace: &Trace) -> Result<RunSummary, MetricsError> {
    let (cop_none_pct, cop_used_pct) = cop_stats(trace);
    let storage: Vec<f64> = trace.peak_storage.iter().map(|&b| b as f64).collect();
    Ok(RunSummary {
        strategy: trace.strategy,
        dfs: trace.dfs,
        nodes: trace.node_count,
        tasks: trace.tasks.len(),
        makespan: makespan(&trace.tasks)?,
        cpu_allocated: cpu_allocated(&trace.tasks),
        data_overhead: data_overhead(trace),
        cop_none_pct,
        cop_used_pct,
        gini_storage: gini(&storage)?,
        gini_cpu: gini(&cpu_seconds_per_node(&trace.tasks, trace.node_count))?,
        cop_count: trace.cops.len(),
        total_cop_bytes: trace.cops.iter().map(|c| c.total_bytes).sum(),
        total_dfs_bytes: trace.dfs_bytes_read + trace.dfs_bytes_written,
        max_utilization: trace.max_utilization,
    })
}
