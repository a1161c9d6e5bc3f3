//! CSV tables: features, relaxed assignment matrices, hard assignments,
//! iteration records and vertex-function profiles. Also the whitespace
//! separated label file.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use mtv_core::projection::project_constraint_in_place;
use mtv_core::solver::IterationRecord;
use mtv_core::AssignmentMatrix;

use crate::error::{Error, Result};

fn csv_reader(path: &Path, has_headers: bool) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::csv(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn parse_field<T: std::str::FromStr>(path: &Path, record: &csv::StringRecord, col: usize) -> Result<T> {
    let raw = record.get(col).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::parse(path, line_of(record), format!("bad value `{raw}` in column {}", col + 1)))
}

/// Reads rows of numbers. A first row that does not parse is taken as a
/// header and skipped.
fn read_numeric_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv_reader(path, false)?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => continue,
            Err(_) => return Err(Error::parse(path, line_of(&record), "non-numeric value")),
        }
    }
    Ok(rows)
}

/// One point per row, all rows of equal length.
pub fn read_features(path: &Path) -> Result<Vec<Vec<f64>>> {
    let rows = read_numeric_rows(path)?;
    if rows.is_empty() {
        return Err(Error::Invalid(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

pub fn write_features(path: &Path, points: &[impl AsRef<[f64]>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for p in points {
        w.write_record(p.as_ref().iter().map(f64::to_string)).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// An `N x R` matrix, one vertex per row, without projection.
pub fn read_matrix(path: &Path) -> Result<AssignmentMatrix> {
    let rows = read_numeric_rows(path)?;
    let r = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || r == 0 {
        return Err(Error::Invalid(format!("{}: no data rows", path.display())));
    }
    let n = rows.len();
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(AssignmentMatrix::from_row_major(n, r, data)?)
}

/// Loads a warm start for an `n_vertices x n_classes` problem and projects
/// its rows onto the simplex.
pub fn load_init(path: &Path, n_vertices: usize, n_classes: usize) -> Result<AssignmentMatrix> {
    let mut f = read_matrix(path)?;
    if f.n_vertices() != n_vertices || f.n_classes() != n_classes {
        return Err(Error::Invalid(format!(
            "{}: init is {} x {}, problem is {n_vertices} x {n_classes}",
            path.display(),
            f.n_vertices(),
            f.n_classes()
        )));
    }
    project_constraint_in_place(&mut f, None)?;
    Ok(f)
}

pub fn write_matrix(path: &Path, f: &AssignmentMatrix) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in f.rows() {
        w.write_record(row.iter().map(f64::to_string)).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

const ASSIGNMENT_HEADER: [&str; 2] = ["vertex_index", "class_index"];

/// `vertex_index,class_index` rows covering every vertex exactly once; the
/// header is optional. Returned in vertex order.
pub fn read_assignments(path: &Path) -> Result<Vec<usize>> {
    let mut reader = csv_reader(path, false)?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        if idx == 0 && record.get(0) == Some(ASSIGNMENT_HEADER[0]) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::parse(path, line_of(&record), "expected `vertex_index,class_index`"));
        }
        pairs.push((parse_field(path, &record, 0)?, parse_field(path, &record, 1)?));
    }
    let n = pairs.len();
    let mut classes = vec![None; n];
    for (v, c) in pairs {
        match classes.get_mut(v) {
            Some(slot @ None) => *slot = Some(c),
            Some(Some(_)) => {
                return Err(Error::Invalid(format!("{}: vertex {v} listed twice", path.display())))
            }
            None => {
                return Err(Error::Invalid(format!("{}: vertex {v} out of range 0..{n}", path.display())))
            }
        }
    }
    Ok(classes.into_iter().map(|c| c.expect("every slot filled")).collect())
}

pub fn write_assignments(path: &Path, classes: &[usize]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(ASSIGNMENT_HEADER).map_err(|e| Error::csv(path, e))?;
    for (v, c) in classes.iter().enumerate() {
        w.write_record([v.to_string(), c.to_string()]).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `vertex_index class_index` per line, whitespace separated, `#` comments.
pub fn read_labels(path: &Path) -> Result<Vec<(usize, usize)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [v, c] => v.parse().ok().zip(c.parse().ok()),
            _ => None,
        };
        pairs.push(parsed.ok_or_else(|| Error::parse(path, idx + 1, "expected `vertex_index class_index`"))?);
    }
    Ok(pairs)
}

pub fn write_labels(path: &Path, pairs: &[(usize, usize)]) -> Result<()> {
    let mut text = String::new();
    for (v, c) in pairs {
        text.push_str(&format!("{v} {c}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

const RECORD_COLUMNS: [&str; 7] = [
    "outer_index",
    "inner_iterations",
    "total_energy",
    "descent_lhs",
    "descent_rhs",
    "descent_satisfied",
    "wall_time",
];

/// One row per accepted outer step, per-cluster energies last.
pub fn write_records(path: &Path, records: &[IterationRecord], n_classes: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    let header =
        RECORD_COLUMNS.iter().map(|s| s.to_string()).chain((0..n_classes).map(|r| format!("energy_{r}")));
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for rec in records {
        let row = [
            rec.outer_index.to_string(),
            rec.inner_iterations.to_string(),
            rec.total_energy.to_string(),
            rec.descent_lhs.to_string(),
            rec.descent_rhs.to_string(),
            rec.descent_satisfied.to_string(),
            rec.wall_time.to_string(),
        ];
        let energies = rec.per_cluster_energy.iter().map(f64::to_string);
        w.write_record(row.into_iter().chain(energies)).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<IterationRecord>> {
    let mut reader = csv_reader(path, true)?;
    let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    if header.len() < RECORD_COLUMNS.len() || header.iter().zip(RECORD_COLUMNS).any(|(a, b)| a != b) {
        return Err(Error::parse(path, 1, "unexpected record header"));
    }
    let n_energy = header.iter().skip(RECORD_COLUMNS.len()).take_while(|h| h.starts_with("energy_")).count();
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let k = RECORD_COLUMNS.len();
        records.push(IterationRecord {
            outer_index: parse_field(path, &record, 0)?,
            inner_iterations: parse_field(path, &record, 1)?,
            total_energy: parse_field(path, &record, 2)?,
            descent_lhs: parse_field(path, &record, 3)?,
            descent_rhs: parse_field(path, &record, 4)?,
            descent_satisfied: parse_field(path, &record, 5)?,
            wall_time: parse_field(path, &record, 6)?,
            per_cluster_energy: (k..k + n_energy)
                .map(|c| parse_field(path, &record, c))
                .collect::<Result<_>>()?,
        });
    }
    Ok(records)
}

/// Row of a vertex-function profile: the value at each vertex and the same
/// values sorted ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub vertex: usize,
    pub value: f64,
    pub sorted_value: f64,
}

pub fn profile_rows(column: &[f64]) -> Vec<ProfileRow> {
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    column
        .iter()
        .zip(sorted)
        .enumerate()
        .map(|(vertex, (&value, sorted_value))| ProfileRow { vertex, value, sorted_value })
        .collect()
}

pub fn write_profile(path: &Path, rows: &[ProfileRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["vertex", "value", "sorted_value"]).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.write_record([row.vertex.to_string(), row.value.to_string(), row.sorted_value.to_string()])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_profile(path: &Path) -> Result<Vec<ProfileRow>> {
    let mut reader = csv_reader(path, true)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        rows.push(ProfileRow {
            vertex: parse_field(path, &record, 0)?,
            value: parse_field(path, &record, 1)?,
            sorted_value: parse_field(path, &record, 2)?,
        });
    }
    Ok(rows)
}

/// Per-step trace for plotting: the record fields plus the relative energy
/// change and the descent margin `lhs - rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub record: IterationRecord,
    pub relative_change: f64,
    pub descent_margin: f64,
}

pub fn trace_rows(records: &[IterationRecord], initial_energy: Option<f64>) -> Vec<TraceRow> {
    let mut prev = initial_energy;
    records
        .iter()
        .map(|rec| {
            let relative_change = prev.map_or(f64::NAN, |p| (p - rec.total_energy).abs() / p);
            prev = Some(rec.total_energy);
            TraceRow {
                record: rec.clone(),
                relative_change,
                descent_margin: rec.descent_lhs - rec.descent_rhs,
            }
        })
        .collect()
}

pub fn write_trace(path: &Path, rows: &[TraceRow], n_classes: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    let header = RECORD_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(["relative_change".to_string(), "descent_margin".to_string()])
        .chain((0..n_classes).map(|r| format!("energy_{r}")));
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        let rec = &row.record;
        let fields = [
            rec.outer_index.to_string(),
            rec.inner_iterations.to_string(),
            rec.total_energy.to_string(),
            rec.descent_lhs.to_string(),
            rec.descent_rhs.to_string(),
            rec.descent_satisfied.to_string(),
            rec.wall_time.to_string(),
            row.relative_change.to_string(),
            row.descent_margin.to_string(),
        ];
        let energies = rec.per_cluster_energy.iter().map(f64::to_string);
        w.write_record(fields.into_iter().chain(energies)).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut reader = csv_reader(path, true)?;
    let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let k = RECORD_COLUMNS.len();
    if header.len() < k + 2 || header.get(k) != Some("relative_change") {
        return Err(Error::parse(path, 1, "unexpected trace header"));
    }
    let n_energy = header.len() - k - 2;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        rows.push(TraceRow {
            record: IterationRecord {
                outer_index: parse_field(path, &record, 0)?,
                inner_iterations: parse_field(path, &record, 1)?,
                total_energy: parse_field(path, &record, 2)?,
                descent_lhs: parse_field(path, &record, 3)?,
                descent_rhs: parse_field(path, &record, 4)?,
                descent_satisfied: parse_field(path, &record, 5)?,
                wall_time: parse_field(path, &record, 6)?,
                per_cluster_energy: (k + 2..k + 2 + n_energy)
                    .map(|c| parse_field(path, &record, c))
                    .collect::<Result<_>>()?,
            },
            relative_change: parse_field(path, &record, k)?,
            descent_margin: parse_field(path, &record, k + 1)?,
        });
    }
    Ok(rows)
}
