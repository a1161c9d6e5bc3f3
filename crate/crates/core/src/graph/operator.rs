use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, SimilarityGraph};
use crate::error::{Error, Result};

const LANCZOS_MAX_STEPS: usize = 300;
const LANCZOS_SEED: u64 = 0x6d74_765f_6e6f_726d;

/// Sparse `M x N` edge-incidence (gradient) matrix: row `e` for edge
/// `(i, j, w)` holds `+w` at column `i` and `-w` at column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientOperator {
    n_vertices: usize,
    rows: Vec<Edge>,
}

impl GradientOperator {
    pub fn new(graph: &SimilarityGraph) -> Self {
        GradientOperator { n_vertices: graph.n_vertices(), rows: graph.edges().to_vec() }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_vertices
    }

    pub fn rows(&self) -> &[Edge] {
        &self.rows
    }

    /// `out = K f`.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        for (o, e) in out.iter_mut().zip(&self.rows) {
            *o = e.w * (f[e.i] - f[e.j]);
        }
    }

    /// `out = K^T p`.
    pub fn apply_transpose(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (&pe, e) in p.iter().zip(&self.rows) {
            out[e.i] += e.w * pe;
            out[e.j] -= e.w * pe;
        }
    }

    /// Applies `K` to every column of a row-major `N x R` block with a
    /// per-column scale, writing a row-major `M x R` block.
    pub fn apply_block(&self, f: &[f64], n_cols: usize, scale: &[f64], out: &mut [f64]) {
        for (e, row) in self.rows.iter().zip(out.chunks_exact_mut(n_cols)) {
            let fi = &f[e.i * n_cols..][..n_cols];
            let fj = &f[e.j * n_cols..][..n_cols];
            for (((o, &a), &b), &s) in row.iter_mut().zip(fi).zip(fj).zip(scale) {
                *o = s * e.w * (a - b);
            }
        }
    }

    /// Row-major block version of `K^T` with a per-column scale.
    pub fn apply_transpose_block(&self, p: &[f64], n_cols: usize, scale: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (e, row) in self.rows.iter().zip(p.chunks_exact(n_cols)) {
            for ((o, &v), &s) in out[e.i * n_cols..][..n_cols].iter_mut().zip(row).zip(scale) {
                *o += s * e.w * v;
            }
            for ((o, &v), &s) in out[e.j * n_cols..][..n_cols].iter_mut().zip(row).zip(scale) {
                *o -= s * e.w * v;
            }
        }
    }

    /// `||K f||_1`, i.e. the total variation of `f` with every edge counted once.
    pub fn tv_norm(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.n_vertices {
            return Err(Error::DimensionMismatch { expected: self.n_vertices, found: f.len() });
        }
        Ok(self.tv_norm_unchecked(f))
    }

    pub(crate) fn tv_norm_unchecked(&self, f: &[f64]) -> f64 {
        self.rows.iter().map(|e| e.w * libm::fabs(f[e.i] - f[e.j])).sum()
    }

    /// Total variation of column `c` of a row-major block.
    pub(crate) fn tv_norm_column(&self, f: &[f64], n_cols: usize, c: usize) -> f64 {
        self.rows.iter().map(|e| e.w * libm::fabs(f[e.i * n_cols + c] - f[e.j * n_cols + c])).sum()
    }

    /// Largest singular value of `K`, from Lanczos iterations on `K^T K`
    /// with full reorthogonalization.
    ///
    /// The top Ritz value grows towards the top eigenvalue as the Krylov space
    /// expands. Iteration stops once it has moved by less than `tol / 2`
    /// (relative) on two consecutive steps, or when the space becomes
    /// invariant. The result is inflated by `1 + tol` and capped by the
    /// Gershgorin bound `sqrt(2 max_i sum_j w_ij^2)`, which always dominates
    /// the true norm and is also the answer if the iteration does not settle.
    pub fn operator_norm(&self, tol: f64) -> f64 {
        if self.rows.is_empty() || self.n_vertices == 0 {
            return 0.0;
        }
        let n = self.n_vertices;
        let mut sq_degree = vec![0.0; n];
        for e in &self.rows {
            sq_degree[e.i] += e.w * e.w;
            sq_degree[e.j] += e.w * e.w;
        }
        let gershgorin = libm::sqrt(2.0 * sq_degree.iter().cloned().fold(0.0, f64::max));
        let upper = gershgorin * gershgorin;

        let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
        let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        normalize(&mut q);
        let max_steps = n.min(LANCZOS_MAX_STEPS);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
        let mut alpha = Vec::with_capacity(max_steps);
        let mut beta: Vec<f64> = Vec::with_capacity(max_steps);
        let mut kq = vec![0.0; self.rows.len()];
        let mut w = vec![0.0; n];
        let mut ritz = 0.0;
        let mut settled = 0;
        for _ in 0..max_steps {
            self.apply(&q, &mut kq);
            self.apply_transpose(&kq, &mut w);
            let a: f64 = w.iter().zip(&q).map(|(x, y)| x * y).sum();
            basis.push(core::mem::take(&mut q));
            alpha.push(a);
            // two rounds of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for b in &basis {
                    let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let next = top_tridiagonal_eigenvalue(&alpha, &beta, upper);
            let b = normalize(&mut w);
            if b <= 1e-12 * next.max(f64::MIN_POSITIVE) {
                // invariant subspace: the Ritz values are exact eigenvalues
                return (libm::sqrt(next) * (1.0 + tol)).min(gershgorin);
            }
            settled = if next - ritz <= 0.5 * tol * next { settled + 1 } else { 0 };
            ritz = next;
            if settled >= 2 {
                return (libm::sqrt(ritz) * (1.0 + tol)).min(gershgorin);
            }
            beta.push(b);
            q = core::mem::take(&mut w);
            w = vec![0.0; n];
        }
        if basis.len() == n {
            // a full basis spans the whole space
            return (libm::sqrt(ritz) * (1.0 + tol)).min(gershgorin);
        }
        gershgorin
    }
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, by Sturm-sequence bisection on
/// `[0, upper]` (the matrix is a compression of a PSD operator).
fn top_tridiagonal_eigenvalue(alpha: &[f64], beta: &[f64], upper: f64) -> f64 {
    // number of eigenvalues strictly greater than x
    let count_above = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for (k, &a) in alpha.iter().enumerate() {
            let off = if k == 0 { 0.0 } else { beta[k - 1] * beta[k - 1] };
            d = a - x - if k == 0 { 0.0 } else { off / d };
            if d == 0.0 {
                d = -f64::EPSILON * (libm::fabs(a) + libm::fabs(x)).max(f64::MIN_POSITIVE);
            }
            if d > 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (0.0, upper * (1.0 + 1e-12) + f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_above(mid) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = libm::sqrt(x.iter().map(|v| v * v).sum());
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}
