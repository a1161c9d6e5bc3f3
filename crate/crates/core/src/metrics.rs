use alloc::vec;
use alloc::vec::Vec;

use crate::balance::discrete_energy;
use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::matrix::AssignmentMatrix;

/// Row argmax, lowest class index on ties.
pub fn assign_clusters(f: &AssignmentMatrix) -> Vec<usize> {
    f.rows()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Fraction of vertices whose cluster's majority true class is their own.
pub fn purity(assigned: &[usize], truth: &[usize]) -> Result<f64> {
    if assigned.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: assigned.len() });
    }
    if assigned.is_empty() {
        return Err(Error::Empty);
    }
    let n_clusters = assigned.iter().max().map_or(0, |&m| m + 1);
    let n_truth = truth.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![0usize; n_clusters * n_truth];
    for (&a, &t) in assigned.iter().zip(truth) {
        counts[a * n_truth + t] += 1;
    }
    let hits: usize = counts.chunks(n_truth.max(1)).map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    Ok(hits as f64 / assigned.len() as f64)
}

/// `min_i max_r F_ir`: 1 for a hard assignment, `1/R` for uniform rows.
pub fn sharpness(f: &AssignmentMatrix) -> f64 {
    f.rows().map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).fold(f64::INFINITY, f64::min)
}

/// One finished trial to rank.
#[derive(Debug, Clone, Copy)]
pub struct TrialCandidate<'a> {
    pub assignment: &'a AssignmentMatrix,
    pub graph: &'a SimilarityGraph,
    pub lambda: f64,
}

/// Discrete energy of the rounded assignment, `None` if a class ends up empty.
pub fn rounded_energy(candidate: &TrialCandidate<'_>) -> Option<f64> {
    let labels = assign_clusters(candidate.assignment);
    discrete_energy(candidate.graph, &labels, candidate.assignment.n_classes(), candidate.lambda).ok()
}

/// Index of the trial with the lowest rounded discrete energy. Trials whose
/// rounding empties a class rank last; ties keep the lowest index. `None` only
/// for an empty list.
pub fn select_best_trial(candidates: &[TrialCandidate<'_>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, cand) in candidates.iter().enumerate() {
        let e = rounded_energy(cand).unwrap_or(f64::INFINITY);
        match best {
            Some((_, b)) if !(e < b) => {}
            _ => best = Some((idx, e)),
        }
    }
    best.map(|(idx, _)| idx)
}
