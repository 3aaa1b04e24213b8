//! Experiment configuration files.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wowsim::cluster::LocalDisk;
use wowsim::generators::{gen_layered, gen_pattern, LayeredSpec, PatternSpec};
use wowsim::scheduler::ilp::IlpLimits;
use wowsim::units::{GBIT, GIB};
use wowsim::workflow::parse_workflow;
use wowsim::{AbstractGraph, ClusterConfig, CopConstraints, DfsKind, DfsModel, SimConfig, StrategyKind};

/// All problems found in one configuration file.
#[derive(Debug)]
pub struct ConfigError {
    pub path: PathBuf,
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config {}:", self.path.display())?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Where a cell's workflow comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorkflowSource {
    Pattern(PatternSpec),
    Layered(LayeredSpec),
    File { path: PathBuf },
}

impl WorkflowSource {
    /// Short label used in cell names and reports.
    pub fn label(&self, index: usize) -> String {
        match self {
            WorkflowSource::Pattern(p) => format!("{}-w{}", p.pattern, p.width),
            WorkflowSource::Layered(_) => format!("layered{index}"),
            WorkflowSource::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("file{index}")),
        }
    }

    /// Builds the workflow; relative file paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<AbstractGraph, String> {
        match self {
            WorkflowSource::Pattern(p) => gen_pattern(p).map_err(|e| e.to_string()),
            WorkflowSource::Layered(l) => gen_layered(l).map_err(|e| e.to_string()),
            WorkflowSource::File { path } => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| format!("{}: {e}", full.display()))?;
                parse_workflow(&text).map_err(|e| format!("{}: {e}", full.display()))
            }
        }
    }
}

/// Per-node hardware shared by all cells. Node count and link capacity come
/// from the matrix axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HardwareConfig {
    pub cores: u32,
    pub mem: u64,
    pub disk: LocalDisk,
    /// Server link for the single-server DFS; the cell bandwidth when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub server_link_capacity: Option<f64>,
    /// Copies per file for the distributed DFS, capped at the cell's node
    /// count.
    pub replica_factor: u32,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        HardwareConfig {
            cores: 16,
            mem: 128 * GIB,
            disk: LocalDisk::default(),
            server_link_capacity: None,
            replica_factor: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub repetitions: u32,
    pub out: PathBuf,
    /// Parallel cells; 0 means one per available core.
    pub workers: usize,
    pub strategies: Vec<StrategyKind>,
    pub dfs: Vec<DfsKind>,
    /// Link capacities in bytes per second.
    pub bandwidths: Vec<f64>,
    pub nodes: Vec<u32>,
    pub gc: bool,
    pub cluster: HardwareConfig,
    pub cop: CopConstraints,
    pub ilp: IlpLimits,
    pub workflows: Vec<WorkflowSource>,
    /// Directory that relative workflow paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            repetitions: 3,
            out: PathBuf::from("results"),
            workers: 0,
            strategies: StrategyKind::ALL.to_vec(),
            dfs: vec![DfsKind::SingleServer],
            bandwidths: vec![GBIT],
            nodes: vec![8],
            gc: false,
            cluster: HardwareConfig::default(),
            cop: CopConstraints::default(),
            ilp: IlpLimits::default(),
            workflows: vec![WorkflowSource::Pattern(PatternSpec::default())],
            base_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    /// Simulation settings for one matrix cell.
    pub fn sim_config(&self, strategy: StrategyKind, dfs: DfsKind, bandwidth: f64, nodes: u32, seed: u64) -> SimConfig {
        let dfs = match dfs {
            DfsKind::SingleServer => DfsModel::SingleServer {
                server_link_capacity: self.cluster.server_link_capacity.unwrap_or(bandwidth),
            },
            DfsKind::Distributed => DfsModel::Distributed {
                replica_factor: self.cluster.replica_factor.min(nodes),
            },
        };
        SimConfig {
            cluster: ClusterConfig {
                nodes,
                cores: self.cluster.cores,
                mem: self.cluster.mem,
                link_capacity: bandwidth,
                disk: self.cluster.disk,
                dfs,
                node_specs: Vec::new(),
            },
            strategy,
            constraints: self.cop,
            ilp: self.ilp,
            seed,
            gc: self.gc,
            ..SimConfig::default()
        }
    }

    /// Checks every constraint and returns all violations at once.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut set = |name: &str, len: usize, distinct: usize| {
            if len == 0 {
                v.push(format!("{name}: must not be empty"));
            } else if distinct != len {
                v.push(format!("{name}: contains duplicates"));
            }
        };
        set("strategies", self.strategies.len(), self.strategies.iter().collect::<BTreeSet<_>>().len());
        set("dfs", self.dfs.len(), self.dfs.iter().collect::<BTreeSet<_>>().len());
        set("nodes", self.nodes.len(), self.nodes.iter().collect::<BTreeSet<_>>().len());
        set(
            "bandwidths",
            self.bandwidths.len(),
            self.bandwidths.iter().map(|b| b.to_bits()).collect::<BTreeSet<_>>().len(),
        );
        set("workflows", self.workflows.len(), self.workflows.len());
        if self.repetitions == 0 {
            v.push("repetitions: must be >= 1".into());
        }
        for b in &self.bandwidths {
            if !(b.is_finite() && *b > 0.0) {
                v.push(format!("bandwidths: {b} is not a positive rate"));
            }
        }
        if self.nodes.contains(&0) {
            v.push("nodes: node counts must be >= 1".into());
        }
        if self.cop.c_node == 0 {
            v.push("cop.c_node: must be >= 1".into());
        }
        if self.cop.c_task == 0 {
            v.push("cop.c_task: must be >= 1".into());
        }
        if !(self.ilp.time_budget > 0.0) {
            v.push("ilp.time_budget: must be positive".into());
        }
        if self.ilp.node_limit == 0 {
            v.push("ilp.node_limit: must be >= 1".into());
        }
        if self.cluster.cores == 0 {
            v.push("cluster.cores: must be >= 1".into());
        }
        if self.cluster.mem == 0 {
            v.push("cluster.mem: must be positive".into());
        }
        if !(self.cluster.disk.read_rate > 0.0 && self.cluster.disk.write_rate > 0.0) {
            v.push("cluster.disk: rates must be positive".into());
        }
        if let Some(c) = self.cluster.server_link_capacity {
            if !(c.is_finite() && c > 0.0) {
                v.push("cluster.server_link_capacity: must be positive".into());
            }
        }
        if self.dfs.contains(&DfsKind::Distributed) && self.cluster.replica_factor == 0 {
            v.push("cluster.replica_factor: must be >= 1".into());
        }
        for (i, w) in self.workflows.iter().enumerate() {
            if let Err(e) = w.build(&self.base_dir) {
                v.push(format!("workflows[{i}]: {e}"));
            }
        }
        v
    }
}

/// Parses config text; unknown keys, type errors and constraint violations
/// are all reported against `path`.
pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let fail = |violations| ConfigError {
        path: path.to_path_buf(),
        violations,
    };
    let mut unknown = Vec::new();
    let de = toml::Deserializer::parse(text).map_err(|e| fail(vec![e.to_string()]))?;
    let mut cfg: ExperimentConfig =
        serde_ignored::deserialize(de, |p| unknown.push(format!("{p}: unknown key"))).map_err(|e| {
            let mut v = unknown.clone();
            v.push(e.to_string().trim_end().to_string());
            fail(v)
        })?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut violations = unknown;
    violations.extend(cfg.violations());
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(fail(violations))
    }
}

/// Reads and validates a config file, filling in defaults.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        violations: vec![e.to_string()],
    })?;
    parse_config(&text, path)
}

/// Normalized form with every default spelled out.
pub fn to_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use wowsim::Pattern;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        parse_config(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.repetitions, 3);
        assert_eq!(cfg.cop, CopConstraints { c_node: 1, c_task: 2 });
        assert_eq!(cfg.strategies.len(), 3);
        assert!(!cfg.gc);
    }

    #[test]
    fn full_example() {
        let cfg = parse(
            r#"
seed = 5
repetitions = 1
strategies = ["orig", "wow"]
dfs = ["single_server", "distributed"]
bandwidths = [125e6, 250e6]
nodes = [2, 4]

[cluster]
cores = 4
replica_factor = 2

[cop]
c_node = 2

[[workflows]]
kind = "pattern"
pattern = "group_multiple"
width = 12

[[workflows]]
kind = "layered"
widths = [3, 3, 1]
"#,
        )
        .unwrap();
        assert_eq!(cfg.cop, CopConstraints { c_node: 2, c_task: 2 });
        assert_eq!(cfg.workflows.len(), 2);
        assert!(matches!(&cfg.workflows[0], WorkflowSource::Pattern(p) if p.pattern == Pattern::GroupMultiple));
        assert_eq!(cfg.workflows[0].label(0), "group_multiple-w12");
        let back = parse(&to_toml(&cfg)).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn all_violations_listed() {
        let err = parse(
            r#"
repetitions = 0
nodes = []
colour = "red"
dfs = ["distributed"]
bandwidths = [0.0]

[cluster]
replica_factor = 0
speed = 3
"#,
        )
        .unwrap_err();
        let text = err.to_string();
        for needle in ["colour", "cluster.speed", "repetitions", "nodes", "bandwidths"] {
            assert!(text.contains(needle), "{needle} missing from:\n{text}");
        }
        assert!(err.violations.len() >= 5);
    }

    #[test]
    fn replica_factor_capped_per_cell() {
        let cfg = parse("dfs = [\"distributed\"]\nnodes = [1, 4]\n").unwrap();
        let one = cfg.sim_config(StrategyKind::Orig, DfsKind::Distributed, GBIT, 1, 0);
        assert_eq!(one.cluster.dfs, DfsModel::Distributed { replica_factor: 1 });
        let four = cfg.sim_config(StrategyKind::Orig, DfsKind::Distributed, GBIT, 4, 0);
        assert_eq!(four.cluster.dfs, DfsModel::Distributed { replica_factor: 2 });
        let err = parse("dfs = [\"distributed\"]\n[cluster]\nreplica_factor = 0\n").unwrap_err();
        assert_eq!(err.violations.len(), 1);
    }

    #[test]
    fn type_errors_reported() {
        let err = parse("repetitions = \"three\"\n").unwrap_err();
        assert!(err.to_string().contains("test.toml"));
    }

    #[test]
    fn missing_workflow_file() {
        let err = parse("[[workflows]]\nkind = \"file\"\npath = \"nope.toml\"\n").unwrap_err();
        assert!(err.violations[0].starts_with("workflows[0]"));
    }
}
