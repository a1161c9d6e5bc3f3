use alloc::vec;
use alloc::vec::Vec;

use crate::balance::{asym_abs, median_in_place, subgradient_b_into};
use crate::error::{Error, Result};
use crate::graph::{GradientOperator, SimilarityGraph};
use crate::matrix::AssignmentMatrix;
use crate::projection::{project_constraint_in_place, LabelConstraint};

/// Fixed data of one clustering problem: the gradient operator, its norm,
/// the balance parameter and the optional label constraint.
#[derive(Debug, Clone)]
pub struct Problem {
    op: GradientOperator,
    lipschitz: f64,
    lambda: f64,
    n_classes: usize,
    labels: Option<LabelConstraint>,
}

impl Problem {
    pub fn new(
        graph: &SimilarityGraph,
        n_classes: usize,
        lambda: f64,
        labels: Option<LabelConstraint>,
        norm_tol: f64,
    ) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::InvalidParameter("need at least two classes"));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be positive"));
        }
        if let Some(l) = &labels {
            if l.n_vertices() != graph.n_vertices() {
                return Err(Error::DimensionMismatch { expected: graph.n_vertices(), found: l.n_vertices() });
            }
            if let Some(&class) = l.entries().iter().flatten().find(|&&c| c >= n_classes) {
                return Err(Error::ClassOutOfRange { class, n_classes });
            }
        }
        let op = GradientOperator::new(graph);
        let lipschitz = op.operator_norm(norm_tol);
        Ok(Problem { op, lipschitz, lambda, n_classes, labels })
    }

    pub fn operator(&self) -> &GradientOperator {
        &self.op
    }

    /// Upper estimate of `||K||_2`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_vertices(&self) -> usize {
        self.op.n_cols()
    }

    pub fn labels(&self) -> Option<&LabelConstraint> {
        self.labels.as_ref()
    }
}

/// Per-cluster balance `B_r`, total variation `T_r` and energy `E_r = T_r / B_r`.
/// A constant column has `B_r = 0` and `E_r = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub balance: Vec<f64>,
    pub tv: Vec<f64>,
    pub energy: Vec<f64>,
}

impl ClusterStats {
    pub fn compute(problem: &Problem, f: &AssignmentMatrix) -> Self {
        let mut scratch = vec![0.0; f.n_vertices()];
        let mut stats = ClusterStats {
            balance: vec![0.0; f.n_classes()],
            tv: vec![0.0; f.n_classes()],
            energy: vec![0.0; f.n_classes()],
        };
        stats.update(problem, f, &mut scratch);
        stats
    }

    pub(crate) fn update(&mut self, problem: &Problem, f: &AssignmentMatrix, scratch: &mut [f64]) {
        let lambda = problem.lambda;
        let r = f.n_classes();
        for c in 0..r {
            f.column_into(c, scratch);
            let med = median_in_place(scratch, lambda);
            // the median pass only permutes scratch, so the sum is unchanged
            let b: f64 = scratch.iter().map(|&t| asym_abs(t - med, lambda)).sum();
            let t = problem.op.tv_norm_column(f.as_slice(), r, c);
            self.balance[c] = b;
            self.tv[c] = t;
            self.energy[c] = if b > 0.0 { t / b } else { f64::INFINITY };
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.energy.iter().sum()
    }

    /// First cluster whose balance term vanished.
    pub fn degenerate_cluster(&self) -> Option<usize> {
        self.balance.iter().position(|&b| !(b > 0.0) || !b.is_finite())
    }
}

/// Iterate of the proximal splitting scheme together with the primal-dual
/// variables of the inner solver.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Current primal iterate, always in the constraint set.
    pub f: AssignmentMatrix,
    /// Dual variable, `M x R` row-major, entries in `[-1, 1]`.
    pub p: Vec<f64>,
    /// Extrapolated primal point.
    pub f_bar: AssignmentMatrix,
    pub tau: f64,
    pub sigma: f64,
    pub theta: f64,
    /// Stats of `f`.
    pub stats: ClusterStats,
    /// `Delta = max_r B_r` of the current outer step.
    pub delta: f64,
    /// `min_r B_r` of the current outer step.
    pub delta0: f64,
    /// Column scaling `Delta / B_r` of the current outer step.
    pub col_scale: Vec<f64>,
    kf: Vec<f64>,
    ktp: Vec<f64>,
    f_old: AssignmentMatrix,
}

impl SolverState {
    /// Projects `f0` onto the constraint set and starts with a zero dual
    /// variable and `tau = 1 / L`.
    pub fn new(problem: &Problem, f0: &AssignmentMatrix) -> Result<Self> {
        let (n, r) = (problem.n_vertices(), problem.n_classes);
        if f0.n_vertices() != n {
            return Err(Error::DimensionMismatch { expected: n, found: f0.n_vertices() });
        }
        if f0.n_classes() != r {
            return Err(Error::DimensionMismatch { expected: r, found: f0.n_classes() });
        }
        let mut f = f0.clone();
        project_constraint_in_place(&mut f, problem.labels())?;
        let stats = ClusterStats::compute(problem, &f);
        let m = problem.op.n_rows();
        let tau = if problem.lipschitz > 0.0 { 1.0 / problem.lipschitz } else { 1.0 };
        Ok(SolverState {
            f_bar: f.clone(),
            f_old: f.clone(),
            f,
            p: vec![0.0; m * r],
            tau,
            sigma: 0.0,
            theta: 1.0,
            stats,
            delta: 0.0,
            delta0: 0.0,
            col_scale: vec![1.0; r],
            kf: vec![0.0; m * r],
            ktp: vec![0.0; n * r],
        })
    }

    /// Sets `Delta`, `Delta_0`, the column scaling and `sigma` for a new outer
    /// step, and resets the extrapolation point to the current iterate.
    pub fn begin_outer_step(&mut self, problem: &Problem, tau_range: (f64, f64)) -> Result<()> {
        if let Some(cluster) = self.stats.degenerate_cluster() {
            return Err(Error::DegenerateCluster { cluster });
        }
        let b = &self.stats.balance;
        self.delta = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.delta0 = b.iter().cloned().fold(f64::INFINITY, f64::min);
        for (s, &br) in self.col_scale.iter_mut().zip(b) {
            *s = self.delta / br;
        }
        self.tau = self.tau.clamp(tau_range.0, tau_range.1);
        let l = problem.lipschitz;
        self.sigma = if l > 0.0 {
            (self.delta0 * self.delta0) / (self.tau * self.delta * self.delta * l * l)
        } else {
            0.0
        };
        self.f_bar.as_mut_slice().copy_from_slice(self.f.as_slice());
        Ok(())
    }
}

/// `G = F + V` with column `r` of `V` equal to `Delta (E_r / B_r) v_r`, where
/// `v_r` is the balance subgradient of column `r`. `Delta = max_r B_r`.
pub fn outer_subgradient_step(state: &SolverState, lambda: f64) -> Result<AssignmentMatrix> {
    if let Some(cluster) = state.stats.degenerate_cluster() {
        return Err(Error::DegenerateCluster { cluster });
    }
    let delta = state.stats.balance.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let f = &state.f;
    let (n, r) = (f.n_vertices(), f.n_classes());
    let mut g = f.clone();
    let mut col = vec![0.0; n];
    let mut v = vec![0.0; n];
    for c in 0..r {
        f.column_into(c, &mut col);
        subgradient_b_into(&col, lambda, &mut v);
        let d = delta * state.stats.energy[c] / state.stats.balance[c];
        for (i, &vi) in v.iter().enumerate() {
            let x = g.get(i, c) + d * vi;
            g.set(i, c, x);
        }
    }
    Ok(g)
}

/// One accelerated primal-dual step towards `prox_{T^k + delta_C}(G)`:
///
/// ```text
/// P <- clip(P + sigma K F_bar D_B)          entrywise onto [-1, 1]
/// F <- proj_C((F - tau K^T P D_B + tau G) / (1 + tau))
/// theta = 1 / sqrt(1 + 2 tau); tau <- theta tau; sigma <- sigma / theta
/// F_bar <- (1 + theta) F - theta F_old
/// ```
///
/// `D_B` is `state.col_scale`.
pub fn inner_primal_dual_iterate(
    state: &mut SolverState,
    g: &AssignmentMatrix,
    problem: &Problem,
) -> Result<()> {
    let r = state.f.n_classes();
    let op = &problem.op;

    op.apply_block(state.f_bar.as_slice(), r, &state.col_scale, &mut state.kf);
    let sigma = state.sigma;
    for (p, &k) in state.p.iter_mut().zip(&state.kf) {
        let z = *p + sigma * k;
        *p = z / libm::fabs(z).max(1.0);
    }

    state.f_old.as_mut_slice().copy_from_slice(state.f.as_slice());
    op.apply_transpose_block(&state.p, r, &state.col_scale, &mut state.ktp);
    let tau = state.tau;
    let denom = 1.0 + tau;
    for ((x, &kt), &gv) in state.f.as_mut_slice().iter_mut().zip(&state.ktp).zip(g.as_slice()) {
        *x = (*x - tau * kt + tau * gv) / denom;
    }
    project_constraint_in_place(&mut state.f, problem.labels())?;

    let theta = 1.0 / libm::sqrt(1.0 + 2.0 * tau);
    state.theta = theta;
    state.tau = theta * tau;
    state.sigma = sigma / theta;
    for ((b, &x), &xo) in
        state.f_bar.as_mut_slice().iter_mut().zip(state.f.as_slice()).zip(state.f_old.as_slice())
    {
        *b = (1.0 + theta) * x - theta * xo;
    }
    Ok(())
}

/// Both sides of the weighted energy-descent estimate
/// `sum_r (B_r^{k+1} / B_r^k)(E_r^k - E_r^{k+1}) >= (1 - eps) ||F^k - F^{k+1}||_F^2 / Delta^k`.
///
/// The left side is evaluated as `sum_r (B_r^{k+1} E_r^k - T_r^{k+1}) / B_r^k`,
/// which stays finite when a column of `F^{k+1}` is constant.
pub fn descent_terms(
    prev_f: &AssignmentMatrix,
    prev: &ClusterStats,
    next_f: &AssignmentMatrix,
    next: &ClusterStats,
    delta: f64,
    eps: f64,
) -> (f64, f64) {
    let lhs = (0..prev.balance.len())
        .map(|r| (next.balance[r] * prev.energy[r] - next.tv[r]) / prev.balance[r])
        .sum();
    let rhs = (1.0 - eps) * prev_f.dist_sq(next_f) / delta;
    (lhs, rhs)
}

/// Whether `next` satisfies the descent estimate relative to `prev`, with
/// `Delta = max_r B_r` taken from `prev`.
pub fn descent_check(prev: &SolverState, next: &SolverState, eps: f64) -> bool {
    let delta = prev.stats.balance.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lhs, rhs) = descent_terms(&prev.f, &prev.stats, &next.f, &next.stats, delta, eps);
    lhs >= rhs
}

/// Runs `iterations` inner steps from `start` with zero dual variable and
/// returns the primal iterate: an approximation of
/// `argmin_{F in C} sum_r weights_r tv(f_r) + 1/2 ||F - G||_F^2`.
pub fn prox_weighted_tv(
    problem: &Problem,
    g: &AssignmentMatrix,
    weights: &[f64],
    start: &AssignmentMatrix,
    iterations: usize,
) -> Result<AssignmentMatrix> {
    let mut state = SolverState::new(problem, start)?;
    if weights.len() != problem.n_classes {
        return Err(Error::DimensionMismatch { expected: problem.n_classes, found: weights.len() });
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidParameter("weights must be positive"));
    }
    state.col_scale.copy_from_slice(weights);
    let wmax = weights.iter().cloned().fold(0.0, f64::max);
    let l = problem.lipschitz * wmax;
    state.tau = if l > 0.0 { 1.0 / l } else { 1.0 };
    state.sigma = if l > 0.0 { 1.0 / (state.tau * l * l) } else { 0.0 };
    for _ in 0..iterations {
        inner_primal_dual_iterate(&mut state, g, problem)?;
    }
    Ok(state.f)
}
