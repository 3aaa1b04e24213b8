//! Cross-cell comparison tables written at the output root.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::Serialize;
use wowsim::metrics::efficiency_from;
use wowsim::{DfsKind, StrategyKind};

use crate::runner::CellOutcome;

#[derive(Serialize)]
struct SummaryRow<'a> {
    cell: String,
    workflow: &'a str,
    strategy: StrategyKind,
    dfs: &'a str,
    bandwidth: f64,
    nodes: u32,
    status: &'a str,
    error: &'a str,
    repetition: Option<u32>,
    seed: Option<u64>,
    makespan: Option<f64>,
    cpu_allocated: Option<f64>,
    data_overhead: Option<f64>,
    cop_none_pct: Option<f64>,
    cop_used_pct: Option<f64>,
    gini_storage: Option<f64>,
    gini_cpu: Option<f64>,
    cop_count: Option<usize>,
    total_cop_bytes: Option<u64>,
    total_dfs_bytes: Option<u64>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct DeltaRow {
    pub workflow: String,
    pub dfs: DfsKind,
    pub bandwidth: f64,
    pub nodes: u32,
    pub strategy: StrategyKind,
    pub makespan: f64,
    pub orig_makespan: f64,
    pub makespan_change_pct: f64,
    pub cpu_allocated: f64,
    pub orig_cpu_allocated: f64,
    pub cpu_change_pct: f64,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct BandwidthRow {
    pub workflow: String,
    pub dfs: DfsKind,
    pub nodes: u32,
    pub strategy: StrategyKind,
    pub base_bandwidth: f64,
    pub bandwidth: f64,
    pub base_makespan: f64,
    pub makespan: f64,
    pub makespan_change_pct: f64,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct EfficiencyRow {
    pub workflow: String,
    pub dfs: DfsKind,
    pub bandwidth: f64,
    pub strategy: StrategyKind,
    pub base_nodes: u32,
    pub nodes: u32,
    pub makespan: f64,
    pub efficiency_pct: f64,
}

fn change_pct(new: f64, old: f64) -> f64 {
    (new - old) / old * 100.0
}

type Key = (usize, DfsKind, u64, u32, StrategyKind);
type Group<'a> = Vec<(&'a CellOutcome, f64)>;

/// Successful cells keyed by coordinates; bandwidth is keyed by its bits,
/// which sort like the values for positive rates.
fn index(cells: &[CellOutcome]) -> BTreeMap<Key, (&CellOutcome, f64, f64)> {
    cells
        .iter()
        .filter_map(|c| {
            let r = c.result.as_ref().ok()?;
            let k = (c.cell.workflow, c.cell.dfs, c.cell.bandwidth.to_bits(), c.cell.nodes, c.cell.strategy);
            Some((k, (c, r.summary.makespan, r.summary.cpu_allocated)))
        })
        .collect()
}

/// Relative makespan and CPU change of every strategy against `Orig` in
/// the same cell coordinates.
pub fn deltas(cells: &[CellOutcome]) -> Vec<DeltaRow> {
    let idx = index(cells);
    let mut rows = Vec::new();
    for (&(w, dfs, bw, n, s), &(c, m, cpu)) in &idx {
        if s == StrategyKind::Orig {
            continue;
        }
        if let Some(&(_, om, ocpu)) = idx.get(&(w, dfs, bw, n, StrategyKind::Orig)) {
            rows.push(DeltaRow {
                workflow: c.cell.workflow_label.clone(),
                dfs,
                bandwidth: c.cell.bandwidth,
                nodes: n,
                strategy: s,
                makespan: m,
                orig_makespan: om,
                makespan_change_pct: change_pct(m, om),
                cpu_allocated: cpu,
                orig_cpu_allocated: ocpu,
                cpu_change_pct: change_pct(cpu, ocpu),
            });
        }
    }
    rows
}

/// Makespan change of each bandwidth against the smallest bandwidth.
pub fn bandwidth_changes(cells: &[CellOutcome]) -> Vec<BandwidthRow> {
    let mut groups: BTreeMap<(usize, DfsKind, u32, StrategyKind), Group> = BTreeMap::new();
    for (&(w, dfs, _, n, s), &(c, m, _)) in &index(cells) {
        groups.entry((w, dfs, n, s)).or_default().push((c, m));
    }
    let mut rows = Vec::new();
    for ((_, dfs, n, s), runs) in groups {
        let (base, base_m) = runs[0];
        for &(c, m) in &runs[1..] {
            rows.push(BandwidthRow {
                workflow: c.cell.workflow_label.clone(),
                dfs,
                nodes: n,
                strategy: s,
                base_bandwidth: base.cell.bandwidth,
                bandwidth: c.cell.bandwidth,
                base_makespan: base_m,
                makespan: m,
                makespan_change_pct: change_pct(m, base_m),
            });
        }
    }
    rows
}

/// Scaling efficiency of every node count against the smallest one.
pub fn efficiencies(cells: &[CellOutcome]) -> Vec<EfficiencyRow> {
    let mut groups: BTreeMap<(usize, DfsKind, u64, StrategyKind), Group> = BTreeMap::new();
    for (&(w, dfs, bw, _, s), &(c, m, _)) in &index(cells) {
        groups.entry((w, dfs, bw, s)).or_default().push((c, m));
    }
    let mut rows = Vec::new();
    for ((_, dfs, _, s), runs) in groups {
        let (base, base_m) = runs[0];
        for &(c, m) in &runs {
            rows.push(EfficiencyRow {
                workflow: c.cell.workflow_label.clone(),
                dfs,
                bandwidth: c.cell.bandwidth,
                strategy: s,
                base_nodes: base.cell.nodes,
                nodes: c.cell.nodes,
                makespan: m,
                efficiency_pct: efficiency_from(base_m, base.cell.nodes, m, c.cell.nodes),
            });
        }
    }
    rows
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

/// Writes summary.csv, deltas.csv, bandwidth.csv and efficiency.csv.
pub fn write_reports(out: &Path, cells: &[CellOutcome]) -> io::Result<()> {
    let summary: Vec<SummaryRow> = cells
        .iter()
        .map(|c| {
            let ok = c.result.as_ref().ok();
            let s = ok.map(|r| &r.summary);
            SummaryRow {
                cell: c.cell.name(),
                workflow: &c.cell.workflow_label,
                strategy: c.cell.strategy,
                dfs: c.cell.dfs.as_str(),
                bandwidth: c.cell.bandwidth,
                nodes: c.cell.nodes,
                status: if ok.is_some() { "ok" } else { "failed" },
                error: c.result.as_ref().err().map_or("", String::as_str),
                repetition: ok.map(|r| r.repetition),
                seed: ok.map(|r| r.seed),
                makespan: s.map(|s| s.makespan),
                cpu_allocated: s.map(|s| s.cpu_allocated),
                data_overhead: s.map(|s| s.data_overhead),
                cop_none_pct: s.map(|s| s.cop_none_pct),
                cop_used_pct: s.map(|s| s.cop_used_pct),
                gini_storage: s.map(|s| s.gini_storage),
                gini_cpu: s.map(|s| s.gini_cpu),
                cop_count: s.map(|s| s.cop_count),
                total_cop_bytes: s.map(|s| s.total_cop_bytes),
                total_dfs_bytes: s.map(|s| s.total_dfs_bytes),
            }
        })
        .collect();
    write_rows(&out.join("summary.csv"), &summary, &[])?;
    write_rows(
        &out.join("deltas.csv"),
        &deltas(cells),
        &[
            "workflow",
            "dfs",
            "bandwidth",
            "nodes",
            "strategy",
            "makespan",
            "orig_makespan",
            "makespan_change_pct",
            "cpu_allocated",
            "orig_cpu_allocated",
            "cpu_change_pct",
        ],
    )?;
    write_rows(
        &out.join("bandwidth.csv"),
        &bandwidth_changes(cells),
        &[
            "workflow",
            "dfs",
            "nodes",
            "strategy",
            "base_bandwidth",
            "bandwidth",
            "base_makespan",
            "makespan",
            "makespan_change_pct",
        ],
    )?;
    write_rows(
        &out.join("efficiency.csv"),
        &efficiencies(cells),
        &[
            "workflow",
            "dfs",
            "bandwidth",
            "strategy",
            "base_nodes",
            "nodes",
            "makespan",
            "efficiency_pct",
        ],
    )
}
