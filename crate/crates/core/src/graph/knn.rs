use alloc::vec::Vec;
use core::cmp::Ordering;

use super::SimilarityGraph;
use crate::error::{Error, Result};

/// Kernel bandwidth for k-NN similarity weights.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// Local scale `sigma_i` = distance from `i` to its `ceil(k/2)`-th neighbor;
    /// `w_ij = exp(-d^2 / (sigma_i sigma_j))`.
    #[default]
    SelfTuning,
    /// Global scale `s`; `w_ij = exp(-d^2 / s^2)`.
    Fixed(f64),
}

/// Symmetrized k-nearest-neighbor graph by exhaustive search.
///
/// An edge `(i, j)` is kept when `j` is among the `k` nearest neighbors of
/// `i` or vice versa. Ties in distance go to the lower point index. Pairs at
/// distance zero get weight 1; edges whose weight underflows to zero are
/// dropped.
pub fn build_knn_graph<P: AsRef<[f64]>>(
    points: &[P],
    k: usize,
    bandwidth: Bandwidth,
) -> Result<SimilarityGraph> {
    let n = points.len();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1"));
    }
    if n < k + 1 {
        return Err(Error::InvalidParameter("need more than k points"));
    }
    if let Bandwidth::Fixed(s) = bandwidth {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter("scale must be positive"));
        }
    }
    let dim = points[0].as_ref().len();
    for p in points {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate"));
        }
    }

    // neighbors[i] = k nearest (squared distance, index), ascending
    let mut neighbors: Vec<Vec<(f64, usize)>> = Vec::with_capacity(n);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    let by_dist = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
    };
    for i in 0..n {
        cand.clear();
        let pi = points[i].as_ref();
        for (j, pj) in points.iter().enumerate() {
            if j != i {
                cand.push((sq_dist(pi, pj.as_ref()), j));
            }
        }
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, by_dist);
            cand.truncate(k);
        }
        cand.sort_unstable_by(by_dist);
        neighbors.push(cand.clone());
    }

    let scale: Vec<f64> = match bandwidth {
        Bandwidth::Fixed(s) => alloc::vec![s; n],
        Bandwidth::SelfTuning => {
            let m = k.div_ceil(2) - 1;
            neighbors
                .iter()
                .map(|nb| {
                    let s = libm::sqrt(nb[m].0);
                    if s > 0.0 {
                        s
                    } else {
                        // duplicates: fall back to the first positive distance
                        nb.iter().map(|x| libm::sqrt(x.0)).find(|&d| d > 0.0).unwrap_or(1.0)
                    }
                })
                .collect()
        }
    };

    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(n * k);
    for (i, nb) in neighbors.iter().enumerate() {
        for &(d2, j) in nb {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            pairs.push((a, b, d2));
        }
    }
    pairs.sort_unstable_by_key(|p| (p.0, p.1));
    pairs.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);

    let edges = pairs.into_iter().filter_map(|(i, j, d2)| {
        let w = if d2 == 0.0 { 1.0 } else { libm::exp(-d2 / (scale[i] * scale[j])) };
        (w > 0.0).then_some((i, j, w))
    });
    SimilarityGraph::new(n, edges)
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
