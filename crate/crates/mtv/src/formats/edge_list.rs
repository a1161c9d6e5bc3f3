//! Plain-text edge lists: one `i j w` triple per line, 0-based indices.
//!
//! Blank lines and lines starting with `#` are skipped. The writer records
//! the vertex count as `# vertices N` so that trailing isolated vertices
//! survive a round trip; the reader honors that line when present and
//! otherwise takes `1 + max index`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use mtv_core::SimilarityGraph;

use crate::error::{Error, Result};

const VERTICES_TAG: &str = "vertices";

pub fn read_edge_list(path: &Path) -> Result<SimilarityGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), path)
}

pub fn parse_edge_list(reader: impl BufRead, source: &Path) -> Result<SimilarityGraph> {
    let mut declared: Option<usize> = None;
    let mut triples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some(VERTICES_TAG) {
                let n = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| Error::parse(source, line_no, "bad vertex count"))?;
                declared = Some(n);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(source, line_no, "expected `i j w`"));
        }
        let index = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::parse(source, line_no, format!("bad vertex index `{s}`")))
        };
        let (i, j) = (index(fields[0])?, index(fields[1])?);
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(source, line_no, format!("bad weight `{}`", fields[2])))?;
        triples.push((i, j, w));
    }
    let implied = triples.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
    let n = match declared {
        Some(n) if n < implied => {
            return Err(Error::Invalid(format!(
                "{}: declares {n} vertices but uses index {}",
                source.display(),
                implied - 1
            )))
        }
        Some(n) => n,
        None => implied,
    };
    Ok(SimilarityGraph::new(n, triples)?)
}

pub fn write_edge_list(path: &Path, graph: &SimilarityGraph) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_edge_list_to(&mut out, graph).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_edge_list_to(out: &mut impl Write, graph: &SimilarityGraph) -> std::io::Result<()> {
    writeln!(out, "# {VERTICES_TAG} {}", graph.n_vertices())?;
    for e in graph.edges() {
        writeln!(out, "{} {} {}", e.i, e.j, e.w)?;
    }
    Ok(())
}
