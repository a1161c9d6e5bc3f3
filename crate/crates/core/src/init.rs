//! Starting points for the solver.
//!
//! The seeded procedure puts a unit mass on one vertex per class and diffuses
//! it with `(I + L)^{-1}`, solved by conjugate gradient since `I + L` is
//! symmetric positive definite.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::matrix::AssignmentMatrix;
use crate::projection::{project_simplex_in_place, LabelConstraint};

/// Tolerance and iteration cap for the `(I + L) x = b` solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgParams {
    fn default() -> Self {
        CgParams { tol: 1e-8, max_iter: 5000 }
    }
}

/// Uniform random entries in `[0, 1)`, rows projected onto the simplex.
pub fn random_simplex_init(n_vertices: usize, n_classes: usize, seed: u64) -> Result<AssignmentMatrix> {
    if n_classes < 2 {
        return Err(Error::InvalidParameter("need at least two classes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n_vertices * n_classes).map(|_| rng.gen::<f64>()).collect();
    let mut f = AssignmentMatrix::from_row_major(n_vertices, n_classes, data)?;
    for i in 0..n_vertices {
        project_simplex_in_place(f.row_mut(i));
    }
    Ok(f)
}

/// Solves `A x = b` for symmetric positive definite `A` given as a
/// matrix-vector product. Stops when `||r|| <= tol ||b||`.
pub fn conjugate_gradient<A>(apply: A, b: &[f64], params: CgParams) -> Result<Vec<f64>>
where
    A: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = params.tol * b_norm;
    for _ in 0..params.max_iter {
        if libm::sqrt(rr) <= target {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    if libm::sqrt(rr) <= target {
        return Ok(x);
    }
    Err(Error::NoConvergence { iterations: params.max_iter, residual: libm::sqrt(rr) / b_norm })
}

/// `(I + L)^{-1} b` for the unnormalized Laplacian of `graph`.
pub fn propagate(graph: &SimilarityGraph, b: &[f64], params: CgParams) -> Result<Vec<f64>> {
    let n = graph.n_vertices();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let edges = graph.edges();
    conjugate_gradient(
        |x, out| {
            out.copy_from_slice(x);
            for e in edges {
                let d = e.w * (x[e.i] - x[e.j]);
                out[e.i] += d;
                out[e.j] -= d;
            }
        },
        b,
        params,
    )
}

/// Column `r` is `(I + L)^{-1} 1_{S_r}` for the vertex set `supports[r]`;
/// rows are then projected onto the simplex.
pub fn propagation_init(
    graph: &SimilarityGraph,
    supports: &[Vec<usize>],
    params: CgParams,
) -> Result<AssignmentMatrix> {
    let n = graph.n_vertices();
    if supports.len() < 2 {
        return Err(Error::InvalidParameter("need at least two classes"));
    }
    let mut columns = Vec::with_capacity(supports.len());
    for (r, support) in supports.iter().enumerate() {
        if support.is_empty() {
            return Err(Error::EmptyClass(r));
        }
        let mut b = vec![0.0; n];
        for &v in support {
            if v >= n {
                return Err(Error::VertexOutOfRange { index: v, n_vertices: n });
            }
            b[v] = 1.0;
        }
        columns.push(propagate(graph, &b, params)?);
    }
    let mut f = AssignmentMatrix::from_columns(&columns)?;
    for i in 0..n {
        project_simplex_in_place(f.row_mut(i));
    }
    Ok(f)
}

/// One seed vertex per class, propagated by `(I + L)^{-1}`.
pub fn seeded_propagation_init(
    graph: &SimilarityGraph,
    seeds: &[usize],
    params: CgParams,
) -> Result<AssignmentMatrix> {
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("seed vertices must be distinct"));
    }
    let supports: Vec<Vec<usize>> = seeds.iter().map(|&s| vec![s]).collect();
    propagation_init(graph, &supports, params)
}

/// Transductive variant: every labeled vertex of class `r` seeds column `r`.
pub fn label_propagation_init(
    graph: &SimilarityGraph,
    labels: &LabelConstraint,
    params: CgParams,
) -> Result<AssignmentMatrix> {
    let supports: Vec<Vec<usize>> = (0..labels.n_classes()).map(|r| labels.members(r)).collect();
    propagation_init(graph, &supports, params)
}

/// Picks one seed vertex per class.
///
/// With a partition hint (per-vertex class ids), one vertex is drawn
/// uniformly from each of the first `n_classes` non-empty hinted classes, in
/// increasing class id. Without a hint, `n_classes` distinct vertices are
/// drawn uniformly.
pub fn pick_seeds(
    graph: &SimilarityGraph,
    n_classes: usize,
    seed: u64,
    partition_hint: Option<&[usize]>,
) -> Result<Vec<usize>> {
    let n = graph.n_vertices();
    if n < n_classes {
        return Err(Error::InvalidParameter("fewer vertices than classes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match partition_hint {
        None => Ok(sample(&mut rng, n, n_classes).into_vec()),
        Some(hint) => {
            if hint.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: hint.len() });
            }
            let n_hint = hint.iter().max().map_or(0, |&m| m + 1);
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_hint];
            for (v, &c) in hint.iter().enumerate() {
                members[c].push(v);
            }
            let classes: Vec<&Vec<usize>> =
                members.iter().filter(|m| !m.is_empty()).take(n_classes).collect();
            if classes.len() < n_classes {
                return Err(Error::InvalidParameter("partition hint has fewer classes than requested"));
            }
            Ok(classes.iter().map(|m| m[rng.gen_range(0..m.len())]).collect())
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}
