use std::path::Path;

use mtv::formats::*;
use mtv_core::solver::IterationRecord;
use mtv_core::{AssignmentMatrix, SimilarityGraph};
use proptest::prelude::*;
use tempfile::tempdir;

fn graph_strategy() -> impl Strategy<Value = SimilarityGraph> {
    (2usize..12).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 0.001f64..10.0), 0..30).prop_map(move |triples| {
            let mut seen = std::collections::BTreeSet::new();
            let edges: Vec<_> = triples
                .into_iter()
                .filter(|&(i, j, _)| i != j && seen.insert((i.min(j), i.max(j))))
                .collect();
            SimilarityGraph::new(n, edges).unwrap()
        })
    })
}

fn matrix_strategy() -> impl Strategy<Value = AssignmentMatrix> {
    (1usize..10, 2usize..5).prop_flat_map(|(n, r)| {
        prop::collection::vec(-5.0f64..5.0, n * r)
            .prop_map(move |data| AssignmentMatrix::from_row_major(n, r, data).unwrap())
    })
}

fn record_strategy(r: usize) -> impl Strategy<Value = IterationRecord> {
    (
        0usize..5000,
        1usize..1000,
        0.0f64..10.0,
        -1e3f64..1e3,
        -1e3f64..1e3,
        any::<bool>(),
        0.0f64..100.0,
        prop::collection::vec(0.0f64..5.0, r),
    )
        .prop_map(
            |(
                outer_index,
                inner_iterations,
                total_energy,
                descent_lhs,
                descent_rhs,
                descent_satisfied,
                wall_time,
                per_cluster_energy,
            )| {
                IterationRecord {
                    outer_index,
                    inner_iterations,
                    total_energy,
                    per_cluster_energy,
                    descent_lhs,
                    descent_rhs,
                    descent_satisfied,
                    wall_time,
                }
            },
        )
}

proptest! {
    #[test]
    fn edge_list_round_trip(g in graph_strategy()) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("g.txt");
        write_edge_list(&p, &g).unwrap();
        prop_assert_eq!(read_edge_list(&p).unwrap(), g);
    }

    #[test]
    fn matrix_market_round_trip(g in graph_strategy()) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("g.mtx");
        write_matrix_market(&p, &g).unwrap();
        prop_assert_eq!(read_matrix_market(&p).unwrap(), g);
    }

    #[test]
    fn matrix_round_trip(f in matrix_strategy()) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_matrix(&p, &f).unwrap();
        prop_assert_eq!(read_matrix(&p).unwrap(), f);
    }

    #[test]
    fn features_round_trip(f in matrix_strategy()) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let points: Vec<Vec<f64>> = f.rows().map(<[f64]>::to_vec).collect();
        write_features(&p, &points).unwrap();
        prop_assert_eq!(read_features(&p).unwrap(), points);
    }

    #[test]
    fn assignments_round_trip(classes in prop::collection::vec(0usize..7, 1..40)) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_assignments(&p, &classes).unwrap();
        prop_assert_eq!(read_assignments(&p).unwrap(), classes);
    }

    #[test]
    fn labels_round_trip(pairs in prop::collection::vec((0usize..100, 0usize..5), 0..20)) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("l.txt");
        write_labels(&p, &pairs).unwrap();
        prop_assert_eq!(read_labels(&p).unwrap(), pairs);
    }

    #[test]
    fn records_and_trace_round_trip(
        (r, records) in (2usize..5).prop_flat_map(|r| (Just(r), prop::collection::vec(record_strategy(r), 0..8))),
        initial in prop::option::of(0.1f64..10.0),
    ) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("records.csv");
        write_records(&p, &records, r).unwrap();
        prop_assert_eq!(&read_records(&p).unwrap(), &records);

        let rows = trace_rows(&records, initial);
        let p = dir.path().join("trace.csv");
        write_trace(&p, &rows, r).unwrap();
        let back = read_trace(&p).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in back.iter().zip(&rows) {
            prop_assert_eq!(&a.record, &b.record);
            prop_assert_eq!(a.descent_margin, b.descent_margin);
            prop_assert!(a.relative_change == b.relative_change || (a.relative_change.is_nan() && b.relative_change.is_nan()));
        }
    }

    #[test]
    fn profile_round_trip(column in prop::collection::vec(0.0f64..1.0, 1..30)) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("profile_0.csv");
        let rows = profile_rows(&column);
        write_profile(&p, &rows).unwrap();
        prop_assert_eq!(read_profile(&p).unwrap(), rows.clone());
        let sorted: Vec<f64> = rows.iter().map(|r| r.sorted_value).collect();
        prop_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(rows.iter().zip(&column).all(|(r, &v)| r.value == v));
    }

    #[test]
    fn summary_round_trip(entries in prop::collection::btree_map("[a-z_]{1,12}", "[ -~]{0,20}", 0..10)) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("summary.txt");
        let mut s = Summary::new();
        for (k, v) in &entries {
            s.set(k, v.trim());
        }
        s.write(&p).unwrap();
        prop_assert_eq!(Summary::read(&p).unwrap(), s);
    }
}

#[test]
fn trace_starts_from_the_initial_energy() {
    let rec = |e: f64| IterationRecord {
        outer_index: 0,
        inner_iterations: 1,
        total_energy: e,
        per_cluster_energy: vec![e / 2.0; 2],
        descent_lhs: 2.0,
        descent_rhs: 0.5,
        descent_satisfied: true,
        wall_time: 0.0,
    };
    let rows = trace_rows(&[rec(1.0), rec(0.5)], Some(2.0));
    assert_eq!(rows[0].relative_change, 0.5);
    assert_eq!(rows[1].relative_change, 0.5);
    assert_eq!(rows[0].descent_margin, 1.5);
    assert!(trace_rows(&[rec(1.0)], None)[0].relative_change.is_nan());
}

#[test]
fn init_file_is_projected_and_checked() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("f.csv");
    std::fs::write(&p, "1,0\n0,1\n2,0\n").unwrap();
    let f = load_init(&p, 3, 2).unwrap();
    assert_eq!(f.row(0), &[1.0, 0.0]);
    assert_eq!(f.row(1), &[0.0, 1.0]);
    assert_eq!(f.row(2), &[1.0, 0.0]);
    assert!(load_init(&p, 3, 3).is_err());
    assert!(load_init(&p, 4, 2).is_err());
    std::fs::write(&p, "1,0\n0\n").unwrap();
    assert!(read_matrix(&p).is_err());
}

#[test]
fn assignments_must_cover_every_vertex_once() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("a.csv");
    std::fs::write(&p, "vertex_index,class_index\n1,0\n0,1\n").unwrap();
    assert_eq!(read_assignments(&p).unwrap(), vec![1, 0]);
    std::fs::write(&p, "0,0\n0,1\n").unwrap();
    assert!(read_assignments(&p).is_err());
    std::fs::write(&p, "0,0\n2,1\n").unwrap();
    assert!(read_assignments(&p).is_err());
    std::fs::write(&p, "0,x\n").unwrap();
    assert!(read_assignments(&p).is_err());
}

#[test]
fn features_header_is_skipped() {
    let dir = tempdir().unwrap();
    let p = dir.path().join("x.csv");
    std::fs::write(&p, "x,y\n1,2\n3,4\n").unwrap();
    assert_eq!(read_features(&p).unwrap(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    std::fs::write(&p, "x,y\n").unwrap();
    assert!(read_features(&p).is_err());
    assert!(read_features(Path::new("/nonexistent/x.csv")).is_err());
}
