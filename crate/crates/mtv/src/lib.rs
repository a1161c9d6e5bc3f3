//! File formats, a multi-trial driver and the `mtv` command-line tool for
//! multiclass total variation clustering. The numerical core lives in
//! [`mtv_core`].

pub mod cli;
pub mod error;
pub mod formats;
pub mod moons;
pub mod protocol;

pub use error::{Error, Result};
pub use protocol::{
    cluster, sample_labels, transduce, DeterministicStart, LabelSampling, ProtocolConfig, ProtocolReport,
};
