//! Readers and writers for every file the tools consume or produce. Each
//! writer's output reads back through the matching reader unchanged.

mod edge_list;
mod matrix_market;
mod summary;
mod tables;

pub use edge_list::{parse_edge_list, read_edge_list, write_edge_list, write_edge_list_to};
pub use matrix_market::{
    parse_matrix_market, read_matrix_market, write_matrix_market, write_matrix_market_to,
};
pub use summary::Summary;
pub use tables::{
    load_init, profile_rows, read_assignments, read_features, read_labels, read_matrix, read_profile,
    read_records, read_trace, trace_rows, write_assignments, write_features, write_labels, write_matrix,
    write_profile, write_records, write_trace, ProfileRow, TraceRow,
};
