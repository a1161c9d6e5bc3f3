//! Multiclass total variation clustering on weighted graphs.
//!
//! Minimizes `sum_r tv(f_r) / B(f_r)` over relaxed assignment matrices whose
//! rows lie on the probability simplex, optionally with some rows pinned to
//! known labels. `tv` is the weighted l1 norm of edge differences and `B` an
//! asymmetric l1 deviation from a quantile, so that on indicator functions
//! the energy is the multiclass balanced cut
//! `sum_r cut(A_r) / min(lambda |A_r|, |A_r^c|)`.
//!
//! The crate is `no_std` and needs only `alloc`. The `std` feature adds a
//! wall-clock [`solver::StdClock`].

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod balance;
pub mod error;
pub mod graph;
pub mod init;
pub mod matrix;
pub mod metrics;
pub mod projection;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{build_knn_graph, Bandwidth, GradientOperator, SimilarityGraph};
pub use matrix::AssignmentMatrix;
pub use projection::LabelConstraint;
pub use solver::{run, SolverConfig};
