use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wowsim::generators::{gen_layered, gen_pattern, LayeredSpec, PatternSpec};
use wowsim::units::GBIT;
use wowsim::workflow::WorkflowDefinition;
use wowsim::{DfsKind, Pattern, StrategyKind};
use wowsim_cli::config::{self, ExperimentConfig, WorkflowSource};
use wowsim_cli::run_experiment;

#[derive(Parser)]
#[command(name = "wowsim", version, about = "Simulate workflow-aware scheduling on a cluster")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment matrix from a config file and/or flags.
    Run(RunArgs),
    /// Print a generated workflow definition.
    Gen(GenArgs),
    /// Check a config file and print it with all defaults filled in.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML). Flags override its values.
    config: Option<PathBuf>,
    /// Replace the configured workflows with these patterns.
    #[arg(long, value_delimiter = ',')]
    pattern: Vec<Pattern>,
    /// Width for `--pattern`.
    #[arg(long, default_value_t = 100)]
    width: u32,
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<StrategyKind>,
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<u32>,
    /// Link bandwidths, in bytes/s or with a `gbit`/`mbit` suffix.
    #[arg(long, value_delimiter = ',', value_parser = parse_bandwidth)]
    bandwidth: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_dfs)]
    dfs: Vec<DfsKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Delete replicas no remaining task needs.
    #[arg(long)]
    gc: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, conflicts_with = "layered")]
    pattern: Option<Pattern>,
    #[arg(long, default_value_t = 100)]
    width: u32,
    /// 800-1000 MB files instead of 8-10 MB.
    #[arg(long)]
    full_scale: bool,
    /// Random layered DAG with these layer widths.
    #[arg(long, value_delimiter = ',')]
    layered: Vec<u32>,
    #[arg(long, default_value_t = 0.3)]
    edge_density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_bandwidth(s: &str) -> Result<f64, String> {
    let lower = s.trim().to_ascii_lowercase();
    let (num, scale) = if let Some(n) = lower.strip_suffix("gbit") {
        (n, GBIT)
    } else if let Some(n) = lower.strip_suffix("mbit") {
        (n, GBIT / 1000.0)
    } else {
        (lower.as_str(), 1.0)
    };
    num.trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|e| format!("bad bandwidth {s:?}: {e}"))
}

fn parse_dfs(s: &str) -> Result<DfsKind, String> {
    match s.replace('-', "_").as_str() {
        "single_server" | "nfs" => Ok(DfsKind::SingleServer),
        "distributed" | "ceph" => Ok(DfsKind::Distributed),
        _ => Err(format!("unknown DFS kind {s:?}")),
    }
}

fn run(args: RunArgs) -> Result<bool, String> {
    let mut cfg = match &args.config {
        Some(p) => config::validate_config(p).map_err(|e| e.to_string())?,
        None => ExperimentConfig::default(),
    };
    if !args.pattern.is_empty() {
        cfg.workflows = args
            .pattern
            .iter()
            .map(|&p| {
                WorkflowSource::Pattern(PatternSpec {
                    seed: cfg.seed,
                    ..PatternSpec::new(p, args.width)
                })
            })
            .collect();
    }
    if !args.strategy.is_empty() {
        cfg.strategies = args.strategy;
    }
    if !args.nodes.is_empty() {
        cfg.nodes = args.nodes;
    }
    if !args.bandwidth.is_empty() {
        cfg.bandwidths = args.bandwidth;
    }
    if !args.dfs.is_empty() {
        cfg.dfs = args.dfs;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.repetitions {
        cfg.repetitions = r;
    }
    if let Some(o) = args.out {
        cfg.out = o;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.gc |= args.gc;
    let problems = cfg.violations();
    if !problems.is_empty() {
        return Err(format!("invalid settings:\n  - {}", problems.join("\n  - ")));
    }

    let report = run_experiment(&cfg)?;
    for c in &report.cells {
        match &c.result {
            Ok(r) => println!("{:<60} makespan {:>10.3} s", c.cell.name(), r.summary.makespan),
            Err(e) => eprintln!("{:<60} FAILED: {e}", c.cell.name()),
        }
    }
    println!("reports written to {}", report.out.display());
    Ok(report.failed() == 0)
}

fn gen(args: GenArgs) -> Result<(), String> {
    let graph = if !args.layered.is_empty() {
        gen_layered(&LayeredSpec {
            widths: args.layered,
            edge_density: args.edge_density,
            seed: args.seed,
            ..LayeredSpec::default()
        })
    } else {
        let pattern = args.pattern.ok_or("give --pattern or --layered")?;
        let mut spec = PatternSpec {
            seed: args.seed,
            ..PatternSpec::new(pattern, args.width)
        };
        if args.full_scale {
            spec = spec.full_scale();
        }
        gen_pattern(&spec)
    }
    .map_err(|e| e.to_string())?;
    let text = WorkflowDefinition::from(&graph).to_toml();
    match args.output {
        Some(p) => std::fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Gen(a) => gen(a).map(|()| true),
        Command::Validate { config: path } => config::validate_config(&path)
            .map(|c| {
                print!("{}", config::to_toml(&c));
                true
            })
            .map_err(|e| e.to_string()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
