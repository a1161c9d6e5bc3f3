//! Matrix Market coordinate files holding a symmetric similarity matrix.
//!
//! Supported headers: `%%MatrixMarket matrix coordinate {real|integer|pattern}
//! {symmetric|general}`. Symmetric files list one triangle; general files
//! must list both `(i, j)` and `(j, i)` with equal values. Diagonal entries
//! carry no similarity between distinct vertices and are ignored; explicit
//! zeros are dropped.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use mtv_core::SimilarityGraph;

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Pattern,
}

pub fn read_matrix_market(path: &Path) -> Result<SimilarityGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(BufReader::new(file), path)
}

pub fn parse_matrix_market(reader: impl BufRead, source: &Path) -> Result<SimilarityGraph> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(source, 1, "empty file"))?;
    let header = header.map_err(|e| Error::io(source, e))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" || words[2] != "coordinate" {
        return Err(Error::parse(source, 1, "expected a `%%MatrixMarket matrix coordinate` header"));
    }
    let field = match words[3].as_str() {
        "real" | "integer" => Field::Real,
        "pattern" => Field::Pattern,
        other => return Err(Error::parse(source, 1, format!("unsupported field `{other}`"))),
    };
    let symmetric = match words[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(Error::parse(source, 1, format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize)> = None;
    // (min, max) -> (weight, seen as (min, max), seen as (max, min))
    let mut entries: BTreeMap<(usize, usize), (f64, bool, bool)> = BTreeMap::new();
    let mut n_read = 0;
    let mut declared_nnz = 0;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let int = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::parse(source, line_no, format!("bad integer `{s}`")))
        };
        let Some((n_rows, _)) = size else {
            if fields.len() != 3 {
                return Err(Error::parse(source, line_no, "expected `rows cols entries`"));
            }
            let (rows, cols) = (int(fields[0])?, int(fields[1])?);
            if rows != cols {
                return Err(Error::parse(source, line_no, "similarity matrix must be square"));
            }
            declared_nnz = int(fields[2])?;
            size = Some((rows, cols));
            continue;
        };
        let expected = if field == Field::Pattern { 2 } else { 3 };
        if fields.len() != expected {
            return Err(Error::parse(source, line_no, "wrong number of fields"));
        }
        let (i, j) = (int(fields[0])?, int(fields[1])?);
        if i == 0 || j == 0 || i > n_rows || j > n_rows {
            return Err(Error::parse(source, line_no, format!("index ({i}, {j}) out of range")));
        }
        let w = if field == Field::Pattern {
            1.0
        } else {
            fields[2]
                .parse::<f64>()
                .map_err(|_| Error::parse(source, line_no, format!("bad value `{}`", fields[2])))?
        };
        n_read += 1;
        if i == j {
            continue;
        }
        let key = (i.min(j) - 1, i.max(j) - 1);
        let lower = i > j;
        let slot = entries.entry(key).or_insert((w, false, false));
        let seen = if lower { &mut slot.1 } else { &mut slot.2 };
        if *seen {
            return Err(Error::parse(source, line_no, format!("duplicate entry ({i}, {j})")));
        }
        *seen = true;
        if slot.0 != w {
            return Err(Error::parse(source, line_no, format!("entry ({i}, {j}) breaks symmetry")));
        }
        if symmetric && slot.1 && slot.2 {
            return Err(Error::parse(
                source,
                line_no,
                format!("symmetric file lists both ({i}, {j}) and its mirror"),
            ));
        }
    }
    let (n, _) = size.ok_or_else(|| Error::parse(source, 1, "missing size line"))?;
    if n_read != declared_nnz {
        return Err(Error::Invalid(format!(
            "{}: header declares {declared_nnz} entries, found {n_read}",
            source.display()
        )));
    }
    if !symmetric {
        if let Some((&(a, b), _)) = entries.iter().find(|(_, &(_, lo, hi))| !(lo && hi)) {
            return Err(Error::Invalid(format!(
                "{}: entry ({}, {}) has no mirror; the similarity matrix must be symmetric",
                source.display(),
                a + 1,
                b + 1
            )));
        }
    }
    let edges = entries.into_iter().filter(|(_, (w, _, _))| *w != 0.0).map(|((i, j), (w, _, _))| (i, j, w));
    Ok(SimilarityGraph::new(n, edges)?)
}

/// Writes the lower triangle as `real symmetric`.
pub fn write_matrix_market(path: &Path, graph: &SimilarityGraph) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_matrix_market_to(&mut out, graph).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_matrix_market_to(out: &mut impl Write, graph: &SimilarityGraph) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    let n = graph.n_vertices();
    writeln!(out, "{n} {n} {}", graph.n_edges())?;
    for e in graph.edges() {
        writeln!(out, "{} {} {}", e.j + 1, e.i + 1, e.w)?;
    }
    Ok(())
}
