//! Workflow generators: the five benchmark patterns and random layered DAGs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ids::AbstractId;
use crate::units::{GIB, MB};
use crate::workflow::{
    AbstractGraph, AbstractTask, ComputeTime, Edge, EdgeMapping, InputMapping, OutputSize,
    WorkflowError, WorkflowInput,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    AllInOne,
    Chain,
    Fork,
    Group,
    GroupMultiple,
}

impl Pattern {
    pub const ALL: [Pattern; 5] = [
        Pattern::AllInOne,
        Pattern::Chain,
        Pattern::Fork,
        Pattern::Group,
        Pattern::GroupMultiple,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::AllInOne => "all_in_one",
            Pattern::Chain => "chain",
            Pattern::Fork => "fork",
            Pattern::Group => "group",
            Pattern::GroupMultiple => "group_multiple",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pattern {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Pattern::ALL
            .into_iter()
            .find(|p| p.as_str() == norm)
            .ok_or_else(|| {
                format!("unknown pattern '{s}' (expected all_in_one, chain, fork, group or group_multiple)")
            })
    }
}

/// Desk-scale file sizes; full scale multiplies them by 100.
pub const DESK_FILE_MIN: u64 = 8 * MB;
pub const DESK_FILE_MAX: u64 = 10 * MB;
pub const FULL_FILE_MIN: u64 = 800 * MB;
pub const FULL_FILE_MAX: u64 = 1000 * MB;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatternSpec {
    pub pattern: Pattern,
    /// Number of A tasks.
    pub width: u32,
    pub file_min: u64,
    pub file_max: u64,
    pub compute: ComputeTime,
    pub cpus: u32,
    pub mem: u64,
    pub seed: u64,
}

impl Default for PatternSpec {
    fn default() -> Self {
        PatternSpec {
            pattern: Pattern::Chain,
            width: 100,
            file_min: DESK_FILE_MIN,
            file_max: DESK_FILE_MAX,
            compute: ComputeTime::Zero,
            cpus: 1,
            mem: GIB,
            seed: 0,
        }
    }
}

impl PatternSpec {
    pub fn new(pattern: Pattern, width: u32) -> Self {
        PatternSpec {
            pattern,
            width,
            ..Default::default()
        }
    }

    pub fn full_scale(mut self) -> Self {
        self.file_min = FULL_FILE_MIN;
        self.file_max = FULL_FILE_MAX;
        self
    }
}

struct Builder<'a> {
    spec: &'a PatternSpec,
    tasks: Vec<AbstractTask>,
}

impl Builder<'_> {
    fn add(&mut self, name: &str, instances: u32, output: OutputSize) -> AbstractId {
        let id = AbstractId::from(self.tasks.len());
        self.tasks.push(AbstractTask {
            id,
            name: name.to_string(),
            successors: Vec::new(),
            instances,
            output,
            compute: self.spec.compute,
            cpus: self.spec.cpus,
            mem: self.spec.mem,
            inputs: Vec::new(),
            input_mapping: InputMapping::All,
        });
        id
    }

    fn edge(&mut self, from: AbstractId, to: AbstractId, mapping: EdgeMapping) {
        self.tasks[from.index()].successors.push(Edge { to, mapping });
    }
}

/// Builds one of the benchmark patterns. Every A task writes one file of
/// uniform random size; B and C tasks merge all their inputs into one file.
pub fn gen_pattern(spec: &PatternSpec) -> Result<AbstractGraph, WorkflowError> {
    let w = spec.width;
    if w == 0 {
        return Err(WorkflowError::Invalid("pattern width must be >= 1".into()));
    }
    if spec.file_min == 0 || spec.file_min > spec.file_max {
        return Err(WorkflowError::Invalid(format!(
            "file size range [{}, {}] is invalid",
            spec.file_min, spec.file_max
        )));
    }
    let file = OutputSize::Uniform {
        min: spec.file_min,
        max: spec.file_max,
    };
    let mut b = Builder {
        spec,
        tasks: Vec::new(),
    };
    match spec.pattern {
        Pattern::AllInOne => {
            let a = b.add("A", w, file);
            let m = b.add("B", 1, OutputSize::Merge);
            b.edge(a, m, EdgeMapping::AllToAll);
        }
        Pattern::Chain => {
            let a = b.add("A", w, file);
            let m = b.add("B", w, OutputSize::Merge);
            b.edge(a, m, EdgeMapping::OneToOne);
        }
        Pattern::Fork => {
            let a = b.add("A", 1, file);
            let m = b.add("B", w, OutputSize::Merge);
            b.edge(a, m, EdgeMapping::AllToAll);
        }
        Pattern::Group => {
            let a = b.add("A", w, file);
            let g = b.add("B", EdgeMapping::group_count(w, 3), OutputSize::Merge);
            b.edge(a, g, EdgeMapping::Group { size: 3 });
        }
        Pattern::GroupMultiple => {
            let a = b.add("A", w, file);
            let g3 = b.add("B", EdgeMapping::group_count(w, 3), OutputSize::Merge);
            let g4 = b.add("C", EdgeMapping::group_count(w, 4), OutputSize::Merge);
            b.edge(a, g3, EdgeMapping::Group { size: 3 });
            b.edge(a, g4, EdgeMapping::Group { size: 4 });
        }
    }
    AbstractGraph::new(b.tasks, Vec::new(), spec.seed)
}

/// Random layered DAG. Each physical task is its own single-instance
/// template so arbitrary edges can be expressed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayeredSpec {
    /// Tasks per layer.
    pub widths: Vec<u32>,
    /// Probability of each extra edge between adjacent layers.
    pub edge_density: f64,
    pub file_min: u64,
    pub file_max: u64,
    pub compute: ComputeTime,
    pub cpus: u32,
    pub mem: u64,
    /// Size of one DFS input read by every first-layer task.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_size: Option<u64>,
    pub seed: u64,
}

impl Default for LayeredSpec {
    fn default() -> Self {
        LayeredSpec {
            widths: vec![4, 8, 4, 1],
            edge_density: 0.3,
            file_min: DESK_FILE_MIN,
            file_max: DESK_FILE_MAX,
            compute: ComputeTime::Zero,
            cpus: 1,
            mem: GIB,
            input_size: None,
            seed: 0,
        }
    }
}

/// Builds a layered DAG: every task past the first layer has a predecessor
/// in the previous layer, and with two or more layers the graph is weakly
/// connected.
pub fn gen_layered(spec: &LayeredSpec) -> Result<AbstractGraph, WorkflowError> {
    let invalid = |m: &str| Err(WorkflowError::Invalid(m.to_string()));
    if spec.widths.is_empty() || spec.widths.contains(&0) {
        return invalid("layered workflows need at least one layer and no empty layer");
    }
    if !(0.0..=1.0).contains(&spec.edge_density) {
        return invalid("edge density must lie in [0, 1]");
    }
    if spec.file_min == 0 || spec.file_min > spec.file_max {
        return invalid("invalid file size range");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut first = Vec::with_capacity(spec.widths.len());
    let mut total = 0usize;
    for &w in &spec.widths {
        first.push(total);
        total += w as usize;
    }
    let id = |layer: usize, j: u32| first[layer] + j as usize;
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); total];
    for k in 1..spec.widths.len() {
        let (prev, cur) = (spec.widths[k - 1], spec.widths[k]);
        for j in 0..cur {
            // stretch mapping keeps (k, 0) attached to (k - 1, 0)
            let anchor = (j as u64 * prev as u64 / cur as u64) as u32;
            for p in 0..prev {
                if p == anchor || rng.random_bool(spec.edge_density) {
                    succ[id(k - 1, p)].push(id(k, j));
                }
            }
        }
    }
    // join every component to the spine through layer 1
    if spec.widths.len() > 1 {
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (u, vs) in succ.iter().enumerate() {
            for &v in vs {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                parent[a] = b;
            }
        }
        let spine = id(1, 0);
        for j in 0..spec.widths[0] {
            let u = id(0, j);
            let (a, b) = (find(&mut parent, u), find(&mut parent, spine));
            if a != b {
                succ[u].push(spine);
                parent[a] = b;
            }
        }
    }

    let mut tasks = Vec::with_capacity(total);
    for (k, &w) in spec.widths.iter().enumerate() {
        for j in 0..w {
            let i = id(k, j);
            let mut successors: Vec<Edge> = succ[i]
                .iter()
                .map(|&s| Edge {
                    to: AbstractId::from(s),
                    mapping: EdgeMapping::AllToAll,
                })
                .collect();
            successors.sort_by_key(|e| e.to);
            successors.dedup_by_key(|e| e.to);
            tasks.push(AbstractTask {
                id: AbstractId::from(i),
                name: format!("L{k}_{j}"),
                successors,
                instances: 1,
                output: OutputSize::Uniform {
                    min: spec.file_min,
                    max: spec.file_max,
                },
                compute: spec.compute,
                cpus: spec.cpus,
                mem: spec.mem,
                inputs: if k == 0 && spec.input_size.is_some() { vec![0] } else { vec![] },
                input_mapping: InputMapping::All,
            });
        }
    }
    let inputs = spec
        .input_size
        .map(|size| {
            vec![WorkflowInput {
                name: "input".into(),
                size,
            }]
        })
        .unwrap_or_default();
    AbstractGraph::new(tasks, inputs, spec.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn count(p: Pattern, w: u32) -> (usize, usize) {
        let g = gen_pattern(&PatternSpec::new(p, w)).unwrap();
        let plan = g.instantiate();
        (plan.tasks.len(), plan.edge_count())
    }

    /// Distinct values of floor(i / size) for i in 1..=w.
    fn groups(w: u32, size: u32) -> usize {
        (1..=w).map(|i| i / size).collect::<BTreeSet<_>>().len()
    }

    #[test]
    fn published_counts() {
        assert_eq!(count(Pattern::AllInOne, 100).0, 101);
        assert_eq!(count(Pattern::Chain, 100).0, 200);
        assert_eq!(count(Pattern::Fork, 100).0, 101);
        assert_eq!(count(Pattern::Group, 100).0, 134);
        assert_eq!(count(Pattern::GroupMultiple, 100).0, 160);
    }

    #[test]
    fn minimal_chain() {
        assert_eq!(count(Pattern::Chain, 1), (2, 1));
    }

    #[test]
    fn counts_match_enumeration() {
        for w in 1..=120u32 {
            let wu = w as usize;
            assert_eq!(count(Pattern::AllInOne, w), (wu + 1, wu));
            assert_eq!(count(Pattern::Chain, w), (2 * wu, wu));
            assert_eq!(count(Pattern::Fork, w), (wu + 1, wu));
            assert_eq!(count(Pattern::Group, w), (wu + groups(w, 3), wu));
            assert_eq!(
                count(Pattern::GroupMultiple, w),
                (wu + groups(w, 3) + groups(w, 4), 2 * wu)
            );
        }
    }

    #[test]
    fn group_members_follow_floor_rule() {
        let g = gen_pattern(&PatternSpec::new(Pattern::Group, 10)).unwrap();
        let plan = g.instantiate();
        // A tasks are ids 0..10 with 1-based index i = id + 1
        for b in 10..plan.tasks.len() {
            let members: Vec<u32> = plan.preds[b].iter().map(|p| p.0 + 1).collect();
            let gid = members[0] / 3;
            assert!(members.iter().all(|i| i / 3 == gid));
        }
        assert_eq!(plan.preds[10].len(), 2); // i = 1, 2
    }

    #[test]
    fn sizes_in_range_and_merges_sum() {
        let g = gen_pattern(&PatternSpec::new(Pattern::AllInOne, 20)).unwrap();
        let plan = g.instantiate();
        let a: u64 = plan.files[..20].iter().map(|f| f.size).sum();
        assert!(plan.files[..20]
            .iter()
            .all(|f| (DESK_FILE_MIN..=DESK_FILE_MAX).contains(&f.size)));
        assert_eq!(plan.files[20].size, a);
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(gen_pattern(&PatternSpec::new(Pattern::Chain, 0)).is_err());
        assert!(gen_layered(&LayeredSpec {
            widths: vec![3, 0],
            ..Default::default()
        })
        .is_err());
        assert!("zigzag".parse::<Pattern>().is_err());
        assert_eq!("group-multiple".parse::<Pattern>(), Ok(Pattern::GroupMultiple));
    }

    fn weakly_connected(succ: &[Vec<usize>]) -> bool {
        let n = succ.len();
        let mut adj = vec![Vec::new(); n];
        for (u, vs) in succ.iter().enumerate() {
            for &v in vs {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    proptest! {
        #[test]
        fn layered_structure(
            widths in prop::collection::vec(1u32..6, 2..6),
            density in 0.0f64..1.0,
            seed in any::<u64>(),
        ) {
            let spec = LayeredSpec { widths: widths.clone(), edge_density: density, seed, ..Default::default() };
            let g = gen_layered(&spec).unwrap();
            let plan = g.instantiate();
            prop_assert_eq!(plan.tasks.len(), widths.iter().sum::<u32>() as usize);
            let succ: Vec<Vec<usize>> = plan.succs.iter().map(|s| s.iter().map(|t| t.index()).collect()).collect();
            prop_assert!(weakly_connected(&succ));
            // every non-first-layer task has a predecessor
            for t in &g.tasks()[widths[0] as usize..] {
                prop_assert!(g.tasks().iter().any(|p| p.successors.iter().any(|e| e.to == t.id)));
            }
            // deterministic per seed
            prop_assert_eq!(gen_layered(&spec).unwrap(), g);
        }

        #[test]
        fn pattern_seed_determinism(seed in any::<u64>(), w in 1u32..30) {
            let spec = PatternSpec { seed, ..PatternSpec::new(Pattern::GroupMultiple, w) };
            prop_assert_eq!(gen_pattern(&spec).unwrap().instantiate().files,
                            gen_pattern(&spec).unwrap().instantiate().files);
        }
    }
}
