//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not hidden, and do not fail the process so
//! that the full test run still completes. Set `MTV_ACCEPTANCE_STRICT=1` to
//! exit with status 1 when any criterion fails.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mtv::moons::{generate_moons, MoonsConfig};
use mtv::protocol::{self, LabelSampling, ProtocolConfig};
use mtv_core::balance::{balance_term, cluster_energy, subgradient_b};
use mtv_core::init::{pick_seeds, seeded_propagation_init, CgParams};
use mtv_core::metrics::{assign_clusters, purity, sharpness};
use mtv_core::projection::project_simplex_in_place;
use mtv_core::solver::{prox_weighted_tv, run_problem, IterationRecord, NoClock, Problem, SolverConfig};
use mtv_core::{
    build_knn_graph, AssignmentMatrix, Bandwidth, GradientOperator, LabelConstraint, SimilarityGraph,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(checks: &[(&str, bool)], detail: String) -> Self {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
        let detail =
            if failed.is_empty() { detail } else { format!("{detail}; failed: {}", failed.join(", ")) };
        Outcome { pass: failed.is_empty(), detail }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 line graph balanced split", line_graph),
        ("2 indicator energy is the balanced cut", indicator_identity),
        ("3 balance subgradient", subgradient_suite),
        ("4 energy descent", descent_suite),
        ("5 inner prox against exact oracle", prox_oracle),
        ("6 simplex projection against KKT enumeration", simplex_oracle),
        ("7 labeled rows exact", labels_exact),
        ("8 four moons end to end", moons_end_to_end),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        failures += usize::from(!outcome.pass);
        println!("criterion {name}: {status} ({:.2}s) {}", start.elapsed().as_secs_f64(), outcome.detail);
    }
    println!(
        "criterion 9 large benchmark tables: NOT RUN (external datasets, not reproducible at desk scale)"
    );
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures > 0 && std::env::var_os("MTV_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}

/// Error-free sum via an expansion of non-overlapping partials.
fn exact_sum(xs: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &x in xs {
        let mut x = x;
        let mut kept = 0;
        for i in 0..partials.len() {
            let y = partials[i];
            let (hi, lo) = if x.abs() < y.abs() { (y, x) } else { (x, y) };
            let sum = hi + lo;
            let err = lo - (sum - hi);
            if err != 0.0 {
                partials[kept] = err;
                kept += 1;
            }
            x = sum;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    partials.iter().sum()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SimilarityGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j, rng.gen_range(0.1..5.0)));
            }
        }
    }
    SimilarityGraph::new(n, edges).unwrap()
}

/// `r` Gaussian blobs in the plane and their 10-NN graph.
fn blob_graph(rng: &mut ChaCha8Rng, n: usize, r: usize) -> (SimilarityGraph, Vec<usize>) {
    let centers: Vec<(f64, f64)> =
        (0..r).map(|_| (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0))).collect();
    let mut points = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % r;
        let (x, y) = centers[c];
        points.push(vec![x + rng.gen_range(-1.0..1.0), y + rng.gen_range(-1.0..1.0)]);
        truth.push(c);
    }
    (build_knn_graph(&points, 10.min(n - 1), Bandwidth::SelfTuning).unwrap(), truth)
}

fn line_graph() -> Outcome {
    let start = Instant::now();
    let g = SimilarityGraph::path(20);
    let lambda = 1.0;

    // both classes pay for the single cut edge; on a line only contiguous
    // two-class partitions have one cut edge
    let ratio = |a: usize| 1.0 / f64::min(lambda * a as f64, (20 - a) as f64);
    let optimum = (1..20).map(|k| ratio(k) + ratio(20 - k)).fold(f64::INFINITY, f64::min);

    let problem = Problem::new(&g, 2, lambda, None, 1e-6).unwrap();
    let f0 = seeded_propagation_init(&g, &[0, 19], CgParams::default()).unwrap();
    // run to convergence rather than to the protocol's default tolerance
    let cfg = SolverConfig { outer_tol: 1e-8, ..SolverConfig::default() };
    let out = run_problem(&problem, &f0, &cfg, &NoClock, |_| {}).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let f = &out.assignment;
    let labels = assign_clusters(f);
    let split =
        labels[..10].iter().all(|&c| c == labels[0]) && labels[10..].iter().all(|&c| c == 1 - labels[0]);
    let energy = out.records.last().map_or(out.initial_energy, |r| r.total_energy);
    let s = sharpness(f);
    let col = f.column(labels[0]);
    let jump = col[9] - col[10];
    Outcome::new(
        &[
            ("partition", split),
            ("optimum", (optimum - 0.2).abs() < 1e-15),
            ("sharpness", s >= 0.99),
            ("energy", (energy - optimum).abs() <= 1e-3),
            ("runtime", elapsed < 1.0),
        ],
        format!("energy {energy:.6} vs optimum {optimum}, sharpness {s:.4}, jump at 10/11 {jump:.4}, converged {}", out.converged),
    )
}

fn indicator_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let lambdas = [0.5, 1.0, 2.0, 4.0];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for case in 0..200 {
        let n = rng.gen_range(2..=12);
        let p = rng.gen_range(0.2..0.9);
        let g = random_graph(&mut rng, n, p);
        let lambda = lambdas[case % 4];
        let mut vertices: Vec<usize> = (0..n).collect();
        vertices.shuffle(&mut rng);
        let size = rng.gen_range(1..n);
        let a = &vertices[..size];
        let mut f = vec![0.0; n];
        for &v in a {
            f[v] = 1.0;
        }
        let expected = g.cut_value(a).unwrap() / f64::min(lambda * size as f64, (n - size) as f64);
        let got = cluster_energy(&GradientOperator::new(&g), &f, lambda).unwrap();
        let rel = if expected == 0.0 { got.abs() } else { (got - expected).abs() / expected };
        worst = worst.max(rel);
        ok &= rel <= 1e-12;
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome::new(
        &[("identity", ok), ("runtime", elapsed < 1.0)],
        format!("200 cases, worst relative error {worst:e}"),
    )
}

/// Values with frequent ties, so that the median is often shared.
fn tied_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    if rng.gen_bool(0.5) {
        (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
    } else {
        let levels: Vec<f64> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(-2.0..2.0)).collect();
        (0..n).map(|_| levels[rng.gen_range(0..levels.len())]).collect()
    }
}

fn subgradient_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // the balance parameters the tools use: R - 1 for up to ten classes, and halves
    let lambdas = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
    let (mut inequality, mut bounds, mut zero_sum) = (true, true, true);
    let mut worst_gap = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=50);
        let lambda = lambdas[rng.gen_range(0..lambdas.len())];
        let f = tied_vector(&mut rng, n);
        let g = tied_vector(&mut rng, n);
        let v = subgradient_b(&f, lambda);
        let lin: f64 = v.iter().zip(g.iter().zip(&f)).map(|(vi, (gi, fi))| vi * (gi - fi)).sum();
        let gap = balance_term(&g, lambda) - balance_term(&f, lambda) - lin;
        worst_gap = worst_gap.min(gap);
        inequality &= gap >= -1e-10;
        bounds &= v.iter().all(|&x| (-1.0..=lambda).contains(&x));
        zero_sum &= exact_sum(&v) == 0.0;
    }
    let elapsed = start.elapsed().as_secs_f64();

    // not part of the criterion: an arbitrary real lambda can make the shared
    // median value unrepresentable, so only rounding-level sums are possible
    let mut exact = 0;
    let mut largest: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=50);
        let lambda = rng.gen_range(0.1..10.0);
        let v = subgradient_b(&tied_vector(&mut rng, n), lambda);
        let s = exact_sum(&v);
        exact += usize::from(s == 0.0);
        largest = largest.max(s.abs());
    }
    Outcome::new(
        &[("inequality", inequality), ("bounds", bounds), ("exact zero sum", zero_sum), ("runtime", elapsed < 1.0)],
        format!(
            "1000 triples, smallest inequality gap {worst_gap:.3e}; with continuous lambda {exact}/1000 sums exactly zero, largest |sum| {largest:.1e}"
        ),
    )
}

struct DescentRun {
    descent: bool,
    monotone: bool,
    steps: usize,
    flagged: usize,
    degenerate: usize,
    worst_rise: f64,
}

fn descent_run(max_inner: usize) -> DescentRun {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut run =
        DescentRun { descent: true, monotone: true, steps: 0, flagged: 0, degenerate: 0, worst_rise: 0.0 };
    for case in 0..20 {
        let r = 2 + case % 3;
        let n = rng.gen_range(20..=100);
        let (g, _) = blob_graph(&mut rng, n, r);
        let lambda = (r - 1) as f64;
        let problem = Problem::new(&g, r, lambda, None, 1e-6).unwrap();
        let seeds = pick_seeds(&g, r, case as u64, None).unwrap();
        let f0 = seeded_propagation_init(&g, &seeds, CgParams::default()).unwrap();
        let cfg = SolverConfig { max_outer: 2000, max_inner_per_outer: max_inner, ..SolverConfig::default() };
        let mut records: Vec<IterationRecord> = Vec::new();
        let mut initial = None;
        match run_problem(&problem, &f0, &cfg, &NoClock, |rec| records.push(rec.clone())) {
            Ok(out) => initial = Some(out.initial_energy),
            Err(mtv_core::Error::DegenerateCluster { .. }) => run.degenerate += 1,
            Err(e) => panic!("instance {case}: {e}"),
        }
        run.steps += records.len();
        run.flagged += records.iter().filter(|rec| !rec.descent_satisfied).count();
        run.descent &= records.iter().all(|rec| rec.descent_satisfied && rec.descent_lhs >= rec.descent_rhs);
        let energies: Vec<f64> = initial.into_iter().chain(records.iter().map(|r| r.total_energy)).collect();
        for w in energies.windows(2) {
            run.worst_rise = run.worst_rise.max(w[1] - w[0]);
        }
        run.monotone &= energies.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    }
    run
}

fn descent_suite() -> Outcome {
    let start = Instant::now();
    // several instances are disconnected blobs whose energy decays to zero;
    // late steps there need more inner iterations than the default cap
    let run = descent_run(10_000);
    let elapsed = start.elapsed().as_secs_f64();
    let default_cap = descent_run(SolverConfig::default().max_inner_per_outer);
    Outcome::new(
        &[("descent estimate", run.descent), ("non-increasing energy", run.monotone), ("runtime", elapsed < 30.0)],
        format!(
            "20 instances, inner cap 10000, {} accepted steps, largest energy rise {:.2e}, {} runs stopped on a constant column; \
             at the default cap {} of {} steps flagged, largest rise {:.2e}",
            run.steps, run.worst_rise, run.degenerate, default_cap.flagged, default_cap.steps, default_cap.worst_rise
        ),
    )
}

/// Exact `argmin_u c tv(u) + ||u - h||^2`, by the divide-and-conquer scheme
/// for separable objectives plus a submodular term: with `alpha` the best
/// common value of a block, a minimizing set of
/// `S -> c cut(S) + sum_{i in S} (2 (alpha - h_i) + lin_i)` holds the
/// vertices at or above `alpha`. Sets are enumerated exhaustively.
fn tv_denoise_exact(g: &SimilarityGraph, c: f64, h: &[f64]) -> Vec<f64> {
    let n = h.len();
    let mut w = vec![vec![0.0; n]; n];
    for e in g.edges() {
        w[e.i][e.j] += e.w;
        w[e.j][e.i] += e.w;
    }
    let mut u = vec![0.0; n];
    let mut stack = vec![((0..n).collect::<Vec<_>>(), vec![0.0; n])];
    while let Some((block, lin)) = stack.pop() {
        let m = block.len();
        let alpha = block.iter().map(|&i| h[i] - lin[i] / 2.0).sum::<f64>() / m as f64;
        let mut best = (0.0, 0usize);
        for mask in 1..(1usize << m) - 1 {
            let mut value = 0.0;
            for (a, &i) in block.iter().enumerate() {
                if mask >> a & 1 == 1 {
                    value += 2.0 * (alpha - h[i]) + lin[i];
                    for (b, &j) in block.iter().enumerate() {
                        if mask >> b & 1 == 0 {
                            value += c * w[i][j];
                        }
                    }
                }
            }
            if value < best.0 {
                best = (value, mask);
            }
        }
        if best.0 >= -1e-13 {
            for &i in &block {
                u[i] = alpha;
            }
            continue;
        }
        let (mut upper, mut lower) = (Vec::new(), Vec::new());
        for (a, &i) in block.iter().enumerate() {
            if best.1 >> a & 1 == 1 {
                upper.push(i);
            } else {
                lower.push(i);
            }
        }
        let mut lin_upper = lin.clone();
        let mut lin_lower = lin;
        for &i in &upper {
            for &j in &lower {
                lin_upper[i] += c * w[i][j];
                lin_lower[j] -= c * w[i][j];
            }
        }
        stack.push((upper, lin_upper));
        stack.push((lower, lin_lower));
    }
    u
}

fn prox_oracle() -> Outcome {
    const ITERATIONS: usize = 8_000_000;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.gen_range(2..=6);
        let g = random_graph(&mut rng, n, 0.6);
        let problem = Problem::new(&g, 2, 1.0, None, 1e-6).unwrap();
        let weights = [rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0)];
        let gm: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let gm = AssignmentMatrix::from_row_major(n, 2, gm).unwrap();

        // with two classes f_2 = 1 - f_1, which leaves a box-constrained
        // denoising problem in u = f_1; clipping solves the box exactly
        let h: Vec<f64> = (0..n).map(|i| (gm.get(i, 0) + 1.0 - gm.get(i, 1)) / 2.0).collect();
        let u = tv_denoise_exact(&g, weights[0] + weights[1], &h);
        let oracle: Vec<f64> = u.iter().flat_map(|&x| [x.clamp(0.0, 1.0), 1.0 - x.clamp(0.0, 1.0)]).collect();
        let oracle = AssignmentMatrix::from_row_major(n, 2, oracle).unwrap();

        let start_f = AssignmentMatrix::from_row_major(n, 2, vec![0.5; 2 * n]).unwrap();
        let prox = prox_weighted_tv(&problem, &gm, &weights, &start_f, ITERATIONS).unwrap();
        worst = worst.max(prox.dist_sq(&oracle).sqrt());
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome::new(
        &[("distance", worst <= 1e-6), ("runtime", elapsed < 10.0)],
        format!("10 instances, {ITERATIONS} inner iterations each, largest Frobenius distance {worst:.2e}"),
    )
}

/// Euclidean projection onto the simplex by trying every support.
fn simplex_by_supports(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    for mask in 1..1usize << n {
        let support: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let theta = (support.iter().map(|&i| y[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let inside = support.iter().all(|&i| y[i] - theta >= 0.0);
        let outside = (0..n).filter(|i| mask >> i & 1 == 0).all(|i| y[i] - theta <= 0.0);
        if inside && outside {
            return (0..n).map(|i| if mask >> i & 1 == 1 { y[i] - theta } else { 0.0 }).collect();
        }
    }
    unreachable!("some support satisfies the optimality conditions")
}

fn simplex_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let y: Vec<f64> = if case % 4 == 0 {
            // ties and already-feasible rows
            let levels = [0.0, 0.2, 0.5, 1.0, -0.3];
            (0..5).map(|_| levels[rng.gen_range(0..levels.len())]).collect()
        } else {
            (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect()
        };
        let expected = simplex_by_supports(&y);
        let mut got = y.clone();
        project_simplex_in_place(&mut got);
        for (a, b) in got.iter().zip(&expected) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome::new(
        &[("agreement", worst <= 1e-9), ("runtime", elapsed < 1.0)],
        format!("1000 vectors, largest deviation {worst:.2e}"),
    )
}

fn labels_exact() -> Outcome {
    let mut runs = 0;
    let mut rows = 0;
    let mut exact = true;
    let mut check = |f: &AssignmentMatrix, pairs: &[(usize, usize)]| {
        runs += 1;
        for &(v, c) in pairs {
            rows += 1;
            exact &= f
                .row(v)
                .iter()
                .enumerate()
                .all(|(r, x)| x.to_bits() == if r == c { 1.0f64 } else { 0.0 }.to_bits());
        }
    };

    let line = SimilarityGraph::path(20);
    let pairs = [(0, 0), (19, 1)];
    let cfg = ProtocolConfig { trials: 10, ..ProtocolConfig::new(2) };
    let labels = LabelConstraint::from_pairs(20, 2, pairs).unwrap();
    let report = protocol::transduce(&line, &cfg, &labels).unwrap();
    let line_purity =
        purity(&assign_clusters(&report.best().output.assignment), &[[0; 10], [1; 10]].concat()).unwrap();
    for t in &report.trials {
        check(&t.result.as_ref().unwrap().output.assignment, &pairs);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for r in [3, 4] {
        let (g, truth) = blob_graph(&mut rng, 120, r);
        for (i, sampling) in
            [LabelSampling::OnePerClass, LabelSampling::Fraction(0.1)].into_iter().enumerate()
        {
            let pairs = protocol::sample_labels(&truth, r, sampling, i as u64).unwrap();
            let labels = LabelConstraint::from_pairs(120, r, pairs.iter().copied()).unwrap();
            let cfg = ProtocolConfig {
                trials: 4,
                max_outer_random: 500,
                max_outer_deterministic: 500,
                ..ProtocolConfig::new(r)
            };
            for t in &protocol::transduce(&g, &cfg, &labels).unwrap().trials {
                check(&t.result.as_ref().unwrap().output.assignment, &pairs);
            }
        }
    }
    Outcome::new(
        &[("bit-exact rows", exact), ("one label per class on the line", line_purity == 1.0)],
        format!(
            "{runs} runs, {rows} labeled rows checked; line purity with one label per class {line_purity}"
        ),
    )
}

fn moons_end_to_end() -> Outcome {
    let start = Instant::now();
    let data = generate_moons(&MoonsConfig::default()).unwrap();
    let g = build_knn_graph(&data.points, 10, Bandwidth::SelfTuning).unwrap();
    let cfg = ProtocolConfig::new(4);
    let report = protocol::cluster(&g, &cfg, None, None).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let purity_of = |f: &AssignmentMatrix| purity(&assign_clusters(f), &data.labels).unwrap();
    let selected = purity_of(&report.best().output.assignment);
    let mut all: Vec<f64> = report
        .trials
        .iter()
        .filter_map(|t| t.result.as_ref().ok())
        .map(|r| purity_of(&r.output.assignment))
        .collect();
    all.sort_by(f64::total_cmp);
    let median = all[all.len() / 2];

    // paired comparison: 10% of the labels on the same graph
    let pairs = protocol::sample_labels(&data.labels, 4, LabelSampling::Fraction(0.1), 0).unwrap();
    let labels = LabelConstraint::from_pairs(g.n_vertices(), 4, pairs.iter().copied()).unwrap();
    let transductive = protocol::transduce(&g, &ProtocolConfig { trials: 10, ..cfg }, &labels).unwrap();
    let labeled = purity_of(&transductive.best().output.assignment);

    Outcome::new(
        &[
            ("purity", selected >= 0.90),
            ("selected at least median", selected >= median),
            ("labels help", labeled >= selected),
            ("runtime", elapsed < 120.0),
        ],
        format!(
            "N = {}, {} components, selected purity {selected:.4} (trial {}), median trial purity {median:.4}, with 10% labels {labeled:.4}",
            g.n_vertices(),
            g.component_sizes().len(),
            report.selected
        ),
    )
}
