//! Exact task-to-node assignment by depth-first branch and bound.
//!
//! Maximises the summed weight of assigned tasks subject to per-node CPU and
//! memory capacity, each task going to at most one of its allowed nodes.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::ids::TaskId;

#[derive(Debug, Clone, PartialEq)]
pub struct IlpTask {
    pub id: TaskId,
    /// Strictly positive objective weight.
    pub weight: f64,
    pub cpus: u32,
    pub mem: u64,
    /// Indices into the node slice this task may run on.
    pub allowed: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IlpNode {
    pub cpu_free: u32,
    pub mem_free: u64,
}

/// Search budget. Hitting either limit returns the incumbent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IlpLimits {
    pub time_budget: f64,
    pub node_limit: u64,
}

impl Default for IlpLimits {
    fn default() -> Self {
        IlpLimits {
            time_budget: 10.0,
            node_limit: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    /// `assignment[k]` is the node of task `k`, if any.
    pub assignment: Vec<Option<usize>>,
    pub objective: f64,
    pub proven_optimal: bool,
    pub explored: u64,
}

impl AssignmentMatrix {
    pub fn entry(&self, task: usize, node: usize) -> bool {
        self.assignment[task] == Some(node)
    }

    pub fn is_feasible(&self, tasks: &[IlpTask], nodes: &[IlpNode]) -> bool {
        let mut cpu: Vec<u64> = nodes.iter().map(|n| n.cpu_free as u64).collect();
        let mut mem: Vec<u64> = nodes.iter().map(|n| n.mem_free).collect();
        for (k, a) in self.assignment.iter().enumerate() {
            if let Some(l) = *a {
                if !tasks[k].allowed.contains(&l) {
                    return false;
                }
                let (c, m) = (tasks[k].cpus as u64, tasks[k].mem);
                if cpu[l] < c || mem[l] < m {
                    return false;
                }
                cpu[l] -= c;
                mem[l] -= m;
            }
        }
        true
    }
}

struct Search<'a> {
    tasks: &'a [IlpTask],
    order: Vec<usize>,
    /// Position `i` holds the same kind of task as position `i - 1`.
    same_as_prev: Vec<bool>,
    by_cpu_density: Vec<usize>,
    by_mem_density: Vec<usize>,
    cpu: Vec<u32>,
    mem: Vec<u64>,
    current: Vec<Option<usize>>,
    value: f64,
    best: Vec<Option<usize>>,
    best_value: f64,
    root_bound: f64,
    explored: u64,
    limits: IlpLimits,
    start: Instant,
    aborted: bool,
}

const EPS: f64 = 1e-9;

impl Search<'_> {
    fn fits(&self, k: usize, l: usize) -> bool {
        let t = &self.tasks[k];
        t.cpus <= self.cpu[l] && t.mem <= self.mem[l]
    }

    fn can_place(&self, k: usize) -> bool {
        self.tasks[k].allowed.iter().any(|&l| self.fits(k, l))
    }

    /// Fractional knapsack over aggregate free capacity, in density order.
    fn knapsack(&self, order: &[usize], pos: &[bool], cap: f64, size: impl Fn(&IlpTask) -> f64) -> f64 {
        let mut left = cap;
        let mut total = 0.0;
        for &k in order {
            if !pos[k] {
                continue;
            }
            let s = size(&self.tasks[k]);
            if s <= left {
                left -= s;
                total += self.tasks[k].weight;
            } else {
                total += self.tasks[k].weight * left / s;
                break;
            }
        }
        total
    }

    /// Upper bound on what tasks at positions `depth..` can still add.
    fn bound(&self, depth: usize) -> f64 {
        let mut open = vec![false; self.tasks.len()];
        let mut sum = 0.0;
        for &k in &self.order[depth..] {
            if self.can_place(k) {
                open[k] = true;
                sum += self.tasks[k].weight;
            }
        }
        if sum == 0.0 {
            return 0.0;
        }
        let cpu_cap: f64 = self.cpu.iter().map(|&c| c as f64).sum();
        let mem_cap: f64 = self.mem.iter().map(|&m| m as f64).sum();
        let by_cpu = self.knapsack(&self.by_cpu_density, &open, cpu_cap, |t| t.cpus as f64);
        let by_mem = self.knapsack(&self.by_mem_density, &open, mem_cap, |t| t.mem as f64);
        sum.min(by_cpu).min(by_mem)
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if self.explored >= self.limits.node_limit
            || (self.explored.is_multiple_of(1024)
                && self.start.elapsed() >= Duration::from_secs_f64(self.limits.time_budget))
        {
            self.aborted = true;
        }
        self.aborted
    }

    fn done(&self) -> bool {
        self.best_value >= self.root_bound - EPS * self.root_bound.max(1.0)
    }

    fn dfs(&mut self, depth: usize, prev_skipped: bool) {
        if self.value > self.best_value + EPS {
            self.best_value = self.value;
            self.best = self.current.clone();
        }
        if depth == self.order.len() || self.done() {
            return;
        }
        self.explored += 1;
        if self.out_of_budget() {
            return;
        }
        if self.value + self.bound(depth) <= self.best_value + EPS {
            return;
        }
        let k = self.order[depth];
        // identical tasks are interchangeable: once one is skipped, later ones are too
        let must_skip = self.same_as_prev[depth] && prev_skipped;
        if !must_skip {
            let mut branches: Vec<usize> = self.tasks[k]
                .allowed
                .iter()
                .copied()
                .filter(|&l| self.fits(k, l))
                .collect();
            branches.sort_by(|&a, &b| {
                self.cpu[b]
                    .cmp(&self.cpu[a])
                    .then(self.mem[b].cmp(&self.mem[a]))
                    .then(a.cmp(&b))
            });
            branches.dedup();
            for l in branches {
                let t = &self.tasks[k];
                self.cpu[l] -= t.cpus;
                self.mem[l] -= t.mem;
                self.value += t.weight;
                self.current[k] = Some(l);
                self.dfs(depth + 1, false);
                let t = &self.tasks[k];
                self.cpu[l] += t.cpus;
                self.mem[l] += t.mem;
                self.value -= t.weight;
                self.current[k] = None;
                if self.aborted || self.done() {
                    return;
                }
            }
        }
        self.dfs(depth + 1, true);
    }
}

/// Maximises `Σ weight` over feasible assignments. Empty input yields an
/// empty, optimal matrix.
pub fn solve_assignment(tasks: &[IlpTask], nodes: &[IlpNode], limits: IlpLimits) -> AssignmentMatrix {
    let n = tasks.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        tasks[b]
            .weight
            .total_cmp(&tasks[a].weight)
            .then(tasks[a].id.cmp(&tasks[b].id))
    });
    let same_as_prev = (0..n)
        .map(|i| {
            i > 0 && {
                let (a, b) = (&tasks[order[i - 1]], &tasks[order[i]]);
                a.weight == b.weight && a.cpus == b.cpus && a.mem == b.mem && a.allowed == b.allowed
            }
        })
        .collect();
    let density = |size: fn(&IlpTask) -> f64| {
        let mut v: Vec<usize> = (0..n).collect();
        v.sort_by(|&a, &b| {
            let da = tasks[a].weight / size(&tasks[a]).max(f64::MIN_POSITIVE);
            let db = tasks[b].weight / size(&tasks[b]).max(f64::MIN_POSITIVE);
            db.total_cmp(&da).then(a.cmp(&b))
        });
        v
    };
    let mut s = Search {
        tasks,
        same_as_prev,
        by_cpu_density: density(|t| t.cpus as f64),
        by_mem_density: density(|t| t.mem as f64),
        order,
        cpu: nodes.iter().map(|x| x.cpu_free).collect(),
        mem: nodes.iter().map(|x| x.mem_free).collect(),
        current: vec![None; n],
        value: 0.0,
        best: vec![None; n],
        best_value: 0.0,
        root_bound: 0.0,
        explored: 0,
        limits,
        start: Instant::now(),
        aborted: false,
    };
    s.root_bound = s.bound(0);
    s.dfs(0, false);
    AssignmentMatrix {
        assignment: s.best,
        objective: s.best_value,
        proven_optimal: !s.aborted,
        explored: s.explored,
    }
}
