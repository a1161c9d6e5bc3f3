//! Multi-trial drivers.
//!
//! Unsupervised clustering runs one optional deterministic trial (a given
//! warm start or given seed vertices) followed by seeded-propagation trials
//! whose seed vertices are drawn with RNG seed `base + trial index`. The
//! transductive variant propagates every label; trials after the first
//! perturb that start with a seeded random simplex matrix. A trial whose
//! iterate loses a cluster restarts from a fresh seed. The trial with the
//! lowest discrete energy after rounding is selected.
//!
//! Trials share one prepared [`Problem`] and run on a worker pool; since all
//! randomness is derived from the trial index, results do not depend on the
//! number of workers.

use std::time::Instant;

use log::{info, warn};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use mtv_core::init::{
    label_propagation_init, pick_seeds, random_simplex_init, seeded_propagation_init, CgParams,
};
use mtv_core::metrics::{rounded_energy, select_best_trial, TrialCandidate};
use mtv_core::solver::{run_problem, Clock, Problem, SolveOutput, SolverConfig, StdClock};
use mtv_core::{AssignmentMatrix, LabelConstraint, SimilarityGraph};

use crate::error::{Error, Result};

/// Weight of the random component in perturbed transductive starts.
pub const TRANSDUCTIVE_PERTURBATION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub n_classes: usize,
    pub lambda: f64,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    /// Solver settings; `max_outer` is replaced per trial by the two caps below.
    pub solver: SolverConfig,
    pub max_outer_deterministic: usize,
    pub max_outer_random: usize,
    /// Fresh-seed restarts allowed per trial after a degenerate cluster.
    pub max_restarts: usize,
    pub cg: CgParams,
}

impl ProtocolConfig {
    /// Defaults for `n_classes` clusters: `lambda = R - 1`, 31 trials, caps of
    /// 10000 and 2000 outer steps.
    pub fn new(n_classes: usize) -> Self {
        ProtocolConfig {
            n_classes,
            lambda: n_classes.saturating_sub(1).max(1) as f64,
            trials: 31,
            seed: 0,
            jobs: 0,
            solver: SolverConfig::default(),
            max_outer_deterministic: 10_000,
            max_outer_random: 2_000,
            max_restarts: 5,
            cg: CgParams::default(),
        }
    }

    fn trial_seed(&self, index: usize, attempt: usize) -> u64 {
        self.seed.wrapping_add(index as u64).wrapping_add((attempt as u64).wrapping_mul(self.trials as u64))
    }
}

/// Deterministic starting point for the first unsupervised trial.
#[derive(Debug, Clone, PartialEq)]
pub enum DeterministicStart {
    Matrix(AssignmentMatrix),
    Seeds(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct TrialRun {
    pub output: SolveOutput,
    /// Discrete energy of the rounded output; `None` when a class is empty.
    pub discrete_energy: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub index: usize,
    /// RNG seed of the attempt that produced the result; `None` for the
    /// deterministic start.
    pub seed: Option<u64>,
    pub attempts: usize,
    pub result: std::result::Result<TrialRun, mtv_core::Error>,
}

impl TrialOutcome {
    pub fn discrete_energy(&self) -> Option<f64> {
        self.result.as_ref().ok().and_then(|r| r.discrete_energy)
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub trials: Vec<TrialOutcome>,
    /// Index into `trials` of the selected run.
    pub selected: usize,
    pub lipschitz: f64,
    pub wall_time: f64,
}

impl ProtocolReport {
    pub fn best(&self) -> &TrialRun {
        self.trials[self.selected].result.as_ref().expect("selected trial succeeded")
    }
}

/// Unsupervised multi-trial clustering.
pub fn cluster(
    graph: &SimilarityGraph,
    cfg: &ProtocolConfig,
    deterministic: Option<&DeterministicStart>,
    partition_hint: Option<&[usize]>,
) -> Result<ProtocolReport> {
    let start = Instant::now();
    let problem = prepare(graph, cfg, None)?;
    let outcomes = run_pool(cfg, |index| {
        let first = if index == 0 { deterministic } else { None };
        run_trial(&problem, graph, cfg, index, |attempt, seed| {
            Ok(match (first, attempt) {
                (Some(DeterministicStart::Matrix(f)), 0) => (f.clone(), None),
                (Some(DeterministicStart::Seeds(s)), 0) => (seeded_propagation_init(graph, s, cfg.cg)?, None),
                _ => {
                    let seeds = pick_seeds(graph, cfg.n_classes, seed, partition_hint)?;
                    (seeded_propagation_init(graph, &seeds, cfg.cg)?, Some(seed))
                }
            })
        })
    })?;
    finish(outcomes, graph, cfg.lambda, problem.lipschitz(), start)
}

/// Transductive multi-trial clustering with the given labels.
pub fn transduce(
    graph: &SimilarityGraph,
    cfg: &ProtocolConfig,
    labels: &LabelConstraint,
) -> Result<ProtocolReport> {
    let start = Instant::now();
    for r in 0..cfg.n_classes {
        if labels.members(r).is_empty() {
            return Err(Error::Invalid(format!("class {r} has no labeled vertex")));
        }
    }
    let problem = prepare(graph, cfg, Some(labels.clone()))?;
    let propagated = label_propagation_init(graph, labels, cfg.cg)?;
    let outcomes = run_pool(cfg, |index| {
        run_trial(&problem, graph, cfg, index, |attempt, seed| {
            if index == 0 && attempt == 0 {
                return Ok((propagated.clone(), None));
            }
            let noise = random_simplex_init(graph.n_vertices(), cfg.n_classes, seed)?;
            let mut f = propagated.clone();
            for (x, &z) in f.as_mut_slice().iter_mut().zip(noise.as_slice()) {
                *x = (1.0 - TRANSDUCTIVE_PERTURBATION) * *x + TRANSDUCTIVE_PERTURBATION * z;
            }
            Ok((f, Some(seed)))
        })
    })?;
    finish(outcomes, graph, cfg.lambda, problem.lipschitz(), start)
}

fn prepare(
    graph: &SimilarityGraph,
    cfg: &ProtocolConfig,
    labels: Option<LabelConstraint>,
) -> Result<Problem> {
    if cfg.trials == 0 {
        return Err(Error::Invalid("need at least one trial".into()));
    }
    cfg.solver.validate()?;
    Ok(Problem::new(graph, cfg.n_classes, cfg.lambda, labels, cfg.solver.norm_tol)?)
}

fn run_pool<F>(cfg: &ProtocolConfig, trial: F) -> Result<Vec<TrialOutcome>>
where
    F: Fn(usize) -> TrialOutcome + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..cfg.trials).into_par_iter().map(&trial).collect()))
}

/// Runs one trial, restarting from fresh seeds after degenerate clusters.
/// `start(attempt, seed)` builds the initial matrix and reports the seed it
/// actually used.
fn run_trial<S>(
    problem: &Problem,
    graph: &SimilarityGraph,
    cfg: &ProtocolConfig,
    index: usize,
    start: S,
) -> TrialOutcome
where
    S: Fn(usize, u64) -> std::result::Result<(AssignmentMatrix, Option<u64>), mtv_core::Error>,
{
    let mut attempt = 0;
    loop {
        let clock = StdClock::start();
        let result = start(attempt, cfg.trial_seed(index, attempt)).and_then(|(f0, used_seed)| {
            let solver = SolverConfig {
                max_outer: if used_seed.is_none() {
                    cfg.max_outer_deterministic
                } else {
                    cfg.max_outer_random
                },
                random_seed: used_seed.unwrap_or(cfg.seed),
                ..cfg.solver.clone()
            };
            let output = run_problem(problem, &f0, &solver, &clock, |_| {})?;
            let candidate = TrialCandidate { assignment: &output.assignment, graph, lambda: cfg.lambda };
            let discrete_energy = rounded_energy(&candidate);
            let wall_time = clock.elapsed_secs();
            Ok((TrialRun { output, discrete_energy, wall_time }, used_seed))
        });
        match result {
            Ok((run, seed)) => {
                info!(
                    "trial {index}: discrete energy {:?} after {} outer steps in {:.3}s",
                    run.discrete_energy,
                    run.output.records.len(),
                    run.wall_time
                );
                return TrialOutcome { index, seed, attempts: attempt + 1, result: Ok(run) };
            }
            Err(mtv_core::Error::DegenerateCluster { cluster }) if attempt < cfg.max_restarts => {
                warn!("trial {index}: cluster {cluster} became constant, restarting with a fresh seed");
                attempt += 1;
            }
            Err(e) => {
                warn!("trial {index} failed: {e}");
                return TrialOutcome {
                    index,
                    seed: Some(cfg.trial_seed(index, attempt)),
                    attempts: attempt + 1,
                    result: Err(e),
                };
            }
        }
    }
}

fn finish(
    trials: Vec<TrialOutcome>,
    graph: &SimilarityGraph,
    lambda: f64,
    lipschitz: f64,
    start: Instant,
) -> Result<ProtocolReport> {
    let ok: Vec<(usize, TrialCandidate<'_>)> = trials
        .iter()
        .filter_map(|t| t.result.as_ref().ok().map(|r| (t.index, r)))
        .map(|(i, r)| (i, TrialCandidate { assignment: &r.output.assignment, graph, lambda }))
        .collect();
    let candidates: Vec<TrialCandidate<'_>> = ok.iter().map(|&(_, c)| c).collect();
    let Some(best) = select_best_trial(&candidates) else {
        let first = trials.into_iter().find_map(|t| t.result.err().map(|e| (t.index, e)));
        return Err(match first {
            Some((trial, source)) => Error::Trial { trial, source },
            None => Error::Invalid("no trials ran".into()),
        });
    };
    let selected = ok[best].0;
    Ok(ProtocolReport { trials, selected, lipschitz, wall_time: start.elapsed().as_secs_f64() })
}

/// How many labels to draw per class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelSampling {
    OnePerClass,
    /// `max(1, round(p * class size))` labels per class.
    Fraction(f64),
}

/// Draws labeled vertices from ground truth, independently per class, and
/// returns `(vertex, class)` pairs sorted by vertex.
pub fn sample_labels(
    truth: &[usize],
    n_classes: usize,
    sampling: LabelSampling,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if let LabelSampling::Fraction(p) = sampling {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Invalid(format!("label fraction {p} must lie in (0, 1]")));
        }
    }
    let mut members = vec![Vec::new(); n_classes];
    for (v, &c) in truth.iter().enumerate() {
        members
            .get_mut(c)
            .ok_or_else(|| {
                Error::Invalid(format!("ground truth class {c} out of range for {n_classes} classes"))
            })?
            .push(v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for (c, m) in members.iter().enumerate() {
        if m.is_empty() {
            return Err(Error::Invalid(format!("ground truth has no vertex of class {c}")));
        }
        let k = match sampling {
            LabelSampling::OnePerClass => 1,
            LabelSampling::Fraction(p) => ((p * m.len() as f64).round() as usize).clamp(1, m.len()),
        };
        pairs.extend(sample(&mut rng, m.len(), k).into_iter().map(|i| (m[i], c)));
    }
    pairs.sort_unstable();
    Ok(pairs)
}
