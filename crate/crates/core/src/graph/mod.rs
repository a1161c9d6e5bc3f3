//! Weighted similarity graphs and the quantities defined on them: cuts,
//! total variation through the edge gradient operator, and the unnormalized
//! Laplacian.
//!
//! Every undirected edge is stored once, with `i < j`, in lexicographic
//! order. All sums over edges therefore count each pair a single time, so
//! `tv(1_A) == cut(A)`.

mod knn;
mod operator;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use knn::{build_knn_graph, Bandwidth};
pub use operator::GradientOperator;

/// One stored undirected edge, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Symmetric non-negative similarity graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    n_vertices: usize,
    edges: Vec<Edge>,
}

impl SimilarityGraph {
    /// Builds a graph from `(i, j, w)` triples. Each unordered pair may appear
    /// once, in either orientation.
    pub fn new<I>(n_vertices: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut stored = Vec::new();
        for (a, b, w) in edges {
            for idx in [a, b] {
                if idx >= n_vertices {
                    return Err(Error::VertexOutOfRange { index: idx, n_vertices });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidWeight { i: a, j: b, w });
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            stored.push(Edge { i, j, w });
        }
        stored.sort_by_key(|e| (e.i, e.j));
        if let Some(pair) = stored.windows(2).find(|p| p[0].i == p[1].i && p[0].j == p[1].j) {
            return Err(Error::DuplicateEdge(pair[0].i, pair[0].j));
        }
        Ok(SimilarityGraph { n_vertices, edges: stored })
    }

    /// Graph without edges.
    pub fn empty(n_vertices: usize) -> Self {
        SimilarityGraph { n_vertices, edges: Vec::new() }
    }

    /// Unit-weight path `0 - 1 - ... - (n-1)`.
    pub fn path(n_vertices: usize) -> Self {
        let edges = (1..n_vertices).map(|j| Edge { i: j - 1, j, w: 1.0 }).collect();
        SimilarityGraph { n_vertices, edges }
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    #[inline]
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weighted degrees `d_i = sum_j w_ij`.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_vertices];
        for e in &self.edges {
            d[e.i] += e.w;
            d[e.j] += e.w;
        }
        d
    }

    /// `Cut(A, A^c)` for the vertex subset given as a list of indices.
    pub fn cut_value(&self, subset: &[usize]) -> Result<f64> {
        let mut inside = vec![false; self.n_vertices];
        for &v in subset {
            if v >= self.n_vertices {
                return Err(Error::VertexOutOfRange { index: v, n_vertices: self.n_vertices });
            }
            inside[v] = true;
        }
        Ok(self.cut_value_mask(&inside))
    }

    /// `Cut(A, A^c)` for a membership mask of length `N`.
    pub fn cut_value_mask(&self, inside: &[bool]) -> f64 {
        self.edges.iter().filter(|e| inside[e.i] != inside[e.j]).map(|e| e.w).sum()
    }

    /// `(D - W) f`.
    pub fn laplacian_apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        let mut out = vec![0.0; self.n_vertices];
        for e in &self.edges {
            let d = e.w * (f[e.i] - f[e.j]);
            out[e.i] += d;
            out[e.j] -= d;
        }
        Ok(out)
    }

    /// `<f, L f> = sum_edges w_ij (f_i - f_j)^2`.
    pub fn laplacian_quadratic(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f.len())?;
        Ok(self
            .edges
            .iter()
            .map(|e| {
                let d = f[e.i] - f[e.j];
                e.w * d * d
            })
            .sum())
    }

    /// Sizes of the connected components (edges of weight zero still connect),
    /// largest first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e.i);
            let b = find(&mut parent, e.j);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut sizes = vec![0usize; self.n_vertices];
        for v in 0..self.n_vertices {
            let root = find(&mut parent, v);
            sizes[root] += 1;
        }
        let mut sizes: Vec<usize> = sizes.into_iter().filter(|&s| s > 0).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_vertices {
            return Err(Error::DimensionMismatch { expected: self.n_vertices, found: len });
        }
        Ok(())
    }
}
