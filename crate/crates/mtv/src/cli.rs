//! The `mtv` command line.
//!
//! `cluster` and `transduce` write a run directory:
//!
//! | file              | contents                                           |
//! |-------------------|----------------------------------------------------|
//! | `assignments.csv` | `vertex_index,class_index` of the selected trial   |
//! | `solution.csv`    | relaxed assignment matrix of the selected trial    |
//! | `records.csv`     | one row per accepted outer step of that trial      |
//! | `summary.txt`     | `key = value` report with every setting and result |
//! | `labels.txt`      | labels used (`transduce` only)                     |
//!
//! `trace` turns a run directory into per-cluster profiles and a step trace.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use clap::{Args, Parser, Subcommand};
use log::info;

use mtv_core::metrics::{assign_clusters, purity, sharpness};
use mtv_core::solver::SolverConfig;
use mtv_core::{build_knn_graph, Bandwidth, LabelConstraint, SimilarityGraph};

use crate::formats::{self, Summary};
use crate::moons::{generate_moons, MoonsConfig};
use crate::protocol::{self, DeterministicStart, LabelSampling, ProtocolConfig, ProtocolReport};

#[derive(Debug, Parser)]
#[command(name = "mtv", version, about = "Multiclass total variation clustering on weighted graphs")]
#[command(after_help = "Set MTV_LOG (e.g. MTV_LOG=info) for progress and per-step traces.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a k-nearest-neighbor graph from a feature CSV.
    Graph(GraphCmd),
    /// Unsupervised multi-trial clustering.
    Cluster(ClusterCmd),
    /// Clustering with some vertices labeled.
    Transduce(TransduceCmd),
    /// Per-cluster profiles and a step trace from a run directory.
    Trace(TraceCmd),
    /// Generate interleaved half-moons with ground truth.
    Moons(MoonsCmd),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "graph_input")]
pub struct GraphSource {
    /// Edge list: `i j w` per line, 0-based.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Symmetric Matrix Market coordinate file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Feature CSV, one point per row; a k-NN graph is built from it.
    #[arg(long)]
    pub features: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KnnArgs {
    /// Neighbors per point for feature input.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Fixed Gaussian scale instead of self-tuning local scales.
    #[arg(long)]
    pub scale: Option<f64>,
}

impl KnnArgs {
    fn bandwidth(&self) -> Bandwidth {
        self.scale.map_or(Bandwidth::SelfTuning, Bandwidth::Fixed)
    }
}

#[derive(Debug, Args)]
pub struct GraphInput {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub knn: KnnArgs,
}

impl GraphInput {
    pub fn load(&self) -> anyhow::Result<SimilarityGraph> {
        let s = &self.source;
        let graph = if let Some(p) = &s.edges {
            formats::read_edge_list(p)?
        } else if let Some(p) = &s.matrix {
            formats::read_matrix_market(p)?
        } else if let Some(p) = &s.features {
            let points = formats::read_features(p)?;
            build_knn_graph(&points, self.knn.k as usize, self.knn.bandwidth())
                .with_context(|| format!("building the k-NN graph of {}", p.display()))?
        } else {
            bail!("no graph input given");
        };
        info!("graph: {} vertices, {} edges", graph.n_vertices(), graph.n_edges());
        Ok(graph)
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Slack of the inner stopping test.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Stop when the relative energy change drops below this.
    #[arg(long, default_value_t = 1e-4)]
    pub outer_tol: f64,
    /// Outer step cap for every trial [default: 10000 deterministic, 2000 random].
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Inner iteration cap per outer step.
    #[arg(long, default_value_t = 1000)]
    pub max_inner: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Number of clusters R.
    #[arg(long)]
    pub classes: usize,
    /// Balance parameter [default: R - 1].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Base RNG seed; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Ground truth (`vertex_index,class_index`) for reporting purity.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

impl RunArgs {
    fn protocol_config(&self, trials: usize) -> anyhow::Result<ProtocolConfig> {
        ensure!(self.classes >= 2, "--classes must be at least 2");
        let mut cfg = ProtocolConfig::new(self.classes);
        if let Some(l) = self.lambda {
            ensure!(l > 0.0 && l.is_finite(), "--lambda must be positive");
            cfg.lambda = l;
        }
        ensure!(trials >= 1, "--trials must be at least 1");
        cfg.trials = trials;
        cfg.seed = self.seed;
        cfg.jobs = self.jobs;
        cfg.solver = SolverConfig {
            epsilon: self.solver.epsilon,
            outer_tol: self.solver.outer_tol,
            max_inner_per_outer: self.solver.max_inner,
            ..SolverConfig::default()
        };
        if let Some(m) = self.solver.max_outer {
            cfg.max_outer_deterministic = m;
            cfg.max_outer_random = m;
        }
        cfg.solver.validate()?;
        Ok(cfg)
    }

    fn ground_truth(&self, n: usize) -> anyhow::Result<Option<Vec<usize>>> {
        let Some(path) = &self.ground_truth else { return Ok(None) };
        let truth = formats::read_assignments(path)?;
        ensure!(truth.len() == n, "{} covers {} vertices, the graph has {n}", path.display(), truth.len());
        Ok(Some(truth))
    }
}

#[derive(Debug, Args)]
pub struct GraphCmd {
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub knn: KnnArgs,
    /// Output edge list, or Matrix Market when the name ends in `.mtx`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterCmd {
    #[command(flatten)]
    pub run: RunArgs,
    /// Number of trials.
    #[arg(long, default_value_t = 31)]
    pub trials: usize,
    /// Seed vertices for the first trial, one per class: `i1,i2,...`.
    #[arg(long, value_delimiter = ',', conflicts_with = "init")]
    pub seeds: Option<Vec<usize>>,
    /// Relaxed assignment CSV used as the first trial's start.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Rough partition (`vertex_index,class_index`) to draw random seeds from.
    #[arg(long)]
    pub partition_hint: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "label_source")]
pub struct LabelSource {
    /// Label file: `vertex class` per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Sample this fraction of each ground-truth class (at least one each).
    #[arg(long, requires = "ground_truth")]
    pub label_fraction: Option<f64>,
    /// Sample one label per ground-truth class.
    #[arg(long, requires = "ground_truth")]
    pub one_per_class: bool,
}

#[derive(Debug, Args)]
pub struct TransduceCmd {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub labels: LabelSource,
    /// Number of trials.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct TraceCmd {
    /// Directory written by `cluster` or `transduce`.
    #[arg(long)]
    pub run: PathBuf,
    /// Where to write the CSVs [default: the run directory].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MoonsCmd {
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
    #[arg(long, default_value_t = 4)]
    pub moons: usize,
    #[arg(long, default_value_t = MoonsConfig::default().noise)]
    pub noise: f64,
    #[arg(long, default_value_t = MoonsConfig::default().dim)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Feature CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth assignments to write.
    #[arg(long)]
    pub truth: PathBuf,
}

/// Runs a parsed command line. `argv` is recorded in run summaries.
pub fn run(cli: Cli, argv: &[String]) -> anyhow::Result<()> {
    match cli.command {
        Command::Graph(c) => cmd_graph(&c),
        Command::Cluster(c) => cmd_cluster(&c, argv),
        Command::Transduce(c) => cmd_transduce(&c, argv),
        Command::Trace(c) => cmd_trace(&c),
        Command::Moons(c) => cmd_moons(&c),
    }
}

fn cmd_graph(c: &GraphCmd) -> anyhow::Result<()> {
    let points = formats::read_features(&c.features)?;
    let graph = build_knn_graph(&points, c.knn.k as usize, c.knn.bandwidth())?;
    if c.out.extension().is_some_and(|e| e == "mtx") {
        formats::write_matrix_market(&c.out, &graph)?;
    } else {
        formats::write_edge_list(&c.out, &graph)?;
    }
    let components = graph.component_sizes();
    let largest = components.iter().copied().max().unwrap_or(0);
    println!("vertices = {}", graph.n_vertices());
    println!("edges = {}", graph.n_edges());
    println!("components = {}", components.len());
    println!("largest_component_fraction = {}", largest as f64 / graph.n_vertices() as f64);
    Ok(())
}

fn cmd_cluster(c: &ClusterCmd, argv: &[String]) -> anyhow::Result<()> {
    let graph = c.run.input.load()?;
    let n = graph.n_vertices();
    let cfg = c.run.protocol_config(c.trials)?;
    let truth = c.run.ground_truth(n)?;
    let start = match (&c.init, &c.seeds) {
        (Some(p), _) => Some(DeterministicStart::Matrix(formats::load_init(p, n, cfg.n_classes)?)),
        (None, Some(s)) => {
            ensure!(s.len() == cfg.n_classes, "--seeds needs exactly {} vertices", cfg.n_classes);
            Some(DeterministicStart::Seeds(s.clone()))
        }
        (None, None) => None,
    };
    let hint = match &c.partition_hint {
        Some(p) => {
            let h = formats::read_assignments(p)?;
            ensure!(h.len() == n, "{} covers {} vertices, the graph has {n}", p.display(), h.len());
            Some(h)
        }
        None => None,
    };
    let report = protocol::cluster(&graph, &cfg, start.as_ref(), hint.as_deref())?;
    let mut summary = base_summary("cluster", argv, &graph, &cfg);
    summary.set(
        "deterministic_start",
        match &start {
            Some(DeterministicStart::Matrix(_)) => "init",
            Some(DeterministicStart::Seeds(_)) => "seeds",
            None => "none",
        },
    );
    write_run(&c.run.out, &cfg, &report, truth.as_deref(), summary)
}

fn cmd_transduce(c: &TransduceCmd, argv: &[String]) -> anyhow::Result<()> {
    let graph = c.run.input.load()?;
    let n = graph.n_vertices();
    let cfg = c.run.protocol_config(c.trials)?;
    let truth = c.run.ground_truth(n)?;
    let sampling = match (&c.labels.labels, c.labels.label_fraction, c.labels.one_per_class) {
        (Some(_), _, _) => None,
        (None, Some(p), _) => Some(LabelSampling::Fraction(p)),
        (None, None, true) => Some(LabelSampling::OnePerClass),
        (None, None, false) => bail!("give --labels, --label-fraction or --one-per-class"),
    };
    let pairs = match (&c.labels.labels, sampling, &truth) {
        (Some(p), _, _) => formats::read_labels(p)?,
        (None, Some(s), Some(t)) => protocol::sample_labels(t, cfg.n_classes, s, cfg.seed)?,
        _ => bail!("label sampling needs --ground-truth"),
    };
    let labels = LabelConstraint::from_pairs(n, cfg.n_classes, pairs.iter().copied())?;
    let report = protocol::transduce(&graph, &cfg, &labels)?;

    std::fs::create_dir_all(&c.run.out).with_context(|| format!("creating {}", c.run.out.display()))?;
    formats::write_labels(&c.run.out.join("labels.txt"), &pairs)?;
    let mut summary = base_summary("transduce", argv, &graph, &cfg);
    summary.set("labeled_vertices", pairs.len());
    summary.set(
        "label_sampling",
        match sampling {
            None => "file".to_string(),
            Some(LabelSampling::OnePerClass) => "one_per_class".to_string(),
            Some(LabelSampling::Fraction(p)) => format!("fraction:{p}"),
        },
    );
    write_run(&c.run.out, &cfg, &report, truth.as_deref(), summary)
}

fn base_summary(mode: &str, argv: &[String], graph: &SimilarityGraph, cfg: &ProtocolConfig) -> Summary {
    let mut s = Summary::new();
    s.set("mode", mode)
        .set("command", argv.join(" "))
        .set("n_vertices", graph.n_vertices())
        .set("n_edges", graph.n_edges())
        .set("classes", cfg.n_classes)
        .set("lambda", cfg.lambda)
        .set("trials", cfg.trials)
        .set("seed", cfg.seed)
        .set("epsilon", cfg.solver.epsilon)
        .set("outer_tol", cfg.solver.outer_tol)
        .set("max_outer_deterministic", cfg.max_outer_deterministic)
        .set("max_outer_random", cfg.max_outer_random)
        .set("max_inner", cfg.solver.max_inner_per_outer)
        .set("norm_tol", cfg.solver.norm_tol)
        .set("max_restarts", cfg.max_restarts);
    s
}

fn write_run(
    out: &Path,
    cfg: &ProtocolConfig,
    report: &ProtocolReport,
    truth: Option<&[usize]>,
    mut summary: Summary,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let best = report.best();
    let f = &best.output.assignment;
    let assigned = assign_clusters(f);
    formats::write_assignments(&out.join("assignments.csv"), &assigned)?;
    formats::write_matrix(&out.join("solution.csv"), f)?;
    formats::write_records(&out.join("records.csv"), &best.output.records, cfg.n_classes)?;

    let energy = |e: Option<f64>| e.map_or_else(|| "none".to_string(), |e| e.to_string());
    let t = &report.trials;
    summary
        .set_list("trial_energies", t.iter().map(|t| energy(t.discrete_energy())))
        .set_list(
            "trial_seeds",
            t.iter().map(|t| t.seed.map_or_else(|| "none".to_string(), |s| s.to_string())),
        )
        .set_list("trial_attempts", t.iter().map(|t| t.attempts))
        .set_list(
            "trial_outer_steps",
            t.iter().map(|t| t.result.as_ref().map_or(0, |r| r.output.records.len())),
        )
        .set("selected_trial", report.selected)
        .set("discrete_energy", energy(best.discrete_energy))
        .set("initial_energy", best.output.initial_energy)
        .set(
            "relaxed_energy",
            best.output.records.last().map_or(best.output.initial_energy, |r| r.total_energy),
        )
        .set("converged", best.output.converged)
        .set("sharpness", sharpness(f))
        .set("lipschitz", report.lipschitz)
        .set("wall_time", report.wall_time);
    if let Some(truth) = truth {
        let p = purity(&assigned, truth)?;
        let per_trial = t
            .iter()
            .map(|t| match &t.result {
                Ok(r) => purity(&assign_clusters(&r.output.assignment), truth).map(|p| p.to_string()),
                Err(_) => Ok("none".to_string()),
            })
            .collect::<mtv_core::Result<Vec<_>>>()?;
        summary.set("purity", p).set_list("trial_purities", per_trial);
        println!("purity = {p}");
    }
    summary.write(&out.join("summary.txt"))?;
    println!("selected_trial = {}", report.selected);
    println!("discrete_energy = {}", energy(best.discrete_energy));
    println!("sharpness = {}", sharpness(f));
    Ok(())
}

fn cmd_trace(c: &TraceCmd) -> anyhow::Result<()> {
    let run = &c.run;
    let solution = run.join("solution.csv");
    ensure!(solution.is_file(), "{} is not a run directory (no solution.csv)", run.display());
    let f = formats::read_matrix(&solution)?;
    let records = formats::read_records(&run.join("records.csv"))?;
    let summary_path = run.join("summary.txt");
    let initial = if summary_path.is_file() {
        Summary::read(&summary_path)?.parse("initial_energy").ok()
    } else {
        None
    };

    let out = c.out.as_deref().unwrap_or(run);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for r in 0..f.n_classes() {
        formats::write_profile(&out.join(format!("profile_{r}.csv")), &formats::profile_rows(&f.column(r)))?;
    }
    formats::write_trace(&out.join("trace.csv"), &formats::trace_rows(&records, initial), f.n_classes())?;
    println!("profiles = {}", f.n_classes());
    println!("trace_rows = {}", records.len());
    Ok(())
}

fn cmd_moons(c: &MoonsCmd) -> anyhow::Result<()> {
    let data = generate_moons(&MoonsConfig {
        n_points: c.points,
        n_moons: c.moons,
        noise: c.noise,
        dim: c.dim,
        seed: c.seed,
    })?;
    formats::write_features(&c.out, &data.points)?;
    formats::write_assignments(&c.truth, &data.labels)?;
    Ok(())
}
