//! Euclidean projections onto the row-simplex set and onto its intersection
//! with hard label constraints.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::AssignmentMatrix;

/// Per-vertex optional class label; labeled rows are pinned to unit vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelConstraint {
    entries: Vec<Option<usize>>,
    n_classes: usize,
}

impl LabelConstraint {
    pub fn new(entries: Vec<Option<usize>>, n_classes: usize) -> Result<Self> {
        if let Some(&class) = entries.iter().flatten().find(|&&c| c >= n_classes) {
            return Err(Error::ClassOutOfRange { class, n_classes });
        }
        Ok(LabelConstraint { entries, n_classes })
    }

    /// Builds the constraint from `(vertex, class)` pairs. Repeating a pair is
    /// allowed; giving one vertex two classes is not.
    pub fn from_pairs(
        n_vertices: usize,
        n_classes: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut entries = vec![None; n_vertices];
        for (v, c) in pairs {
            if v >= n_vertices {
                return Err(Error::VertexOutOfRange { index: v, n_vertices });
            }
            if entries[v].is_some_and(|old| old != c) {
                return Err(Error::InvalidParameter("vertex labeled with two classes"));
            }
            entries[v] = Some(c);
        }
        Self::new(entries, n_classes)
    }

    #[inline]
    pub fn label(&self, i: usize) -> Option<usize> {
        self.entries.get(i).copied().flatten()
    }

    pub fn entries(&self) -> &[Option<usize>] {
        &self.entries
    }

    pub fn n_vertices(&self) -> usize {
        self.entries.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_labeled(&self) -> usize {
        self.entries.iter().flatten().count()
    }

    /// Vertices labeled with `class`, ascending.
    pub fn members(&self, class: usize) -> Vec<usize> {
        self.entries.iter().enumerate().filter_map(|(i, &l)| (l == Some(class)).then_some(i)).collect()
    }
}

/// Projects `y` in place onto `{x >= 0, sum x = 1}` with Michelot's
/// mean-shift-and-clip iteration.
///
/// A row that already lies on the simplex up to rounding is left untouched,
/// which makes the projection idempotent bit for bit.
pub fn project_simplex_in_place(y: &mut [f64]) {
    let r = y.len();
    if r == 0 {
        return;
    }
    let slack = 4.0 * r as f64 * f64::EPSILON;
    if r == 2 {
        if !(y[0] >= 0.0 && y[1] >= 0.0 && libm::fabs(y[0] + y[1] - 1.0) <= slack) {
            let x = ((y[0] - y[1] + 1.0) / 2.0).clamp(0.0, 1.0);
            y[0] = x;
            y[1] = 1.0 - x;
        }
        return;
    }
    // a pass on badly scaled input may land a few ulps off the simplex; the
    // follow-up pass works on values in [0, 1] and settles it
    for _ in 0..4 {
        let sum: f64 = y.iter().sum();
        if y.iter().all(|&v| v >= 0.0) && libm::fabs(sum - 1.0) <= slack {
            return;
        }
        michelot_pass(y);
    }
}

fn michelot_pass(y: &mut [f64]) {
    let r = y.len();
    // active[c] marks coordinates not yet clipped to zero
    let mut active_buf = [true; 64];
    let mut active_vec;
    let active: &mut [bool] = if r <= 64 {
        &mut active_buf[..r]
    } else {
        active_vec = vec![true; r];
        &mut active_vec
    };
    let mut n_active = r;
    let mut shift;
    loop {
        let s: f64 = y.iter().zip(active.iter()).filter(|(_, &a)| a).map(|(v, _)| *v).sum();
        shift = (s - 1.0) / n_active as f64;
        let mut removed = false;
        for (v, a) in y.iter().zip(active.iter_mut()) {
            if *a && *v - shift < 0.0 {
                *a = false;
                n_active -= 1;
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }
    for (v, &a) in y.iter_mut().zip(active.iter()) {
        *v = if a { *v - shift } else { 0.0 };
    }
}

pub fn project_simplex_row(y: &[f64]) -> Vec<f64> {
    let mut x = y.to_vec();
    project_simplex_in_place(&mut x);
    x
}

/// Projection onto `Sigma` (every row on the simplex) or, with labels, onto
/// `Sigma ∩ Lambda` (labeled rows are then exactly `e_r`).
pub fn project_constraint_in_place(f: &mut AssignmentMatrix, labels: Option<&LabelConstraint>) -> Result<()> {
    let (n, r) = (f.n_vertices(), f.n_classes());
    if let Some(l) = labels {
        if l.n_vertices() != n {
            return Err(Error::DimensionMismatch { expected: n, found: l.n_vertices() });
        }
        if l.n_classes() > r {
            if let Some(&class) = l.entries().iter().flatten().find(|&&c| c >= r) {
                return Err(Error::ClassOutOfRange { class, n_classes: r });
            }
        }
    }
    for i in 0..n {
        let row = f.row_mut(i);
        match labels.and_then(|l| l.label(i)) {
            Some(c) => {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[c] = 1.0;
            }
            None => project_simplex_in_place(row),
        }
    }
    Ok(())
}

pub fn project_constraint(
    f: &AssignmentMatrix,
    labels: Option<&LabelConstraint>,
) -> Result<AssignmentMatrix> {
    let mut out = f.clone();
    project_constraint_in_place(&mut out, labels)?;
    Ok(out)
}
