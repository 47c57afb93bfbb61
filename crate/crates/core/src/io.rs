//! Dataset file formats.
//!
//! * Graph file: header line `n m`, then `m` lines `u v w` (0-based ids,
//!   positive weight), whitespace separated. Blank lines and lines starting
//!   with `#` are ignored.
//! * Vector file: CSV without header, one point per row, all rows the same
//!   length.
//! * Id list: whitespace-separated point ids (used for demand sets).

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Norm, PointId};

/// Undirected weighted edge list with a node count.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl EdgeList {
    pub fn to_metric(&self) -> Result<MetricSpace> {
        MetricSpace::from_graph(self.n, &self.edges)
    }
}

fn parse_err(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { source_name: source.to_string(), line, message: message.into() }
}

pub fn parse_graph<R: Read>(reader: R, source: &str) -> Result<EdgeList> {
    let reader = BufReader::new(reader);
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match header {
            None => {
                if fields.len() != 2 {
                    return Err(parse_err(source, lineno, "expected header `n m`"));
                }
                let n = fields[0]
                    .parse::<usize>()
                    .map_err(|e| parse_err(source, lineno, format!("bad node count: {e}")))?;
                let m = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(source, lineno, format!("bad edge count: {e}")))?;
                header = Some((n, m));
            }
            Some((n, _)) => {
                if fields.len() != 3 {
                    return Err(parse_err(source, lineno, "expected edge `u v w`"));
                }
                let u = fields[0]
                    .parse::<usize>()
                    .map_err(|e| parse_err(source, lineno, format!("bad node id: {e}")))?;
                let v = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(source, lineno, format!("bad node id: {e}")))?;
                let w = fields[2]
                    .parse::<f64>()
                    .map_err(|e| parse_err(source, lineno, format!("bad weight: {e}")))?;
                if u >= n || v >= n {
                    return Err(parse_err(source, lineno, format!("node id out of range for n = {n}")));
                }
                if !(w > 0.0) || !w.is_finite() {
                    return Err(parse_err(source, lineno, format!("weight must be positive, got {w}")));
                }
                edges.push((u, v, w));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(source, 1, "missing header `n m`"))?;
    if edges.len() != m {
        return Err(parse_err(
            source,
            0,
            format!("header declares {m} edges but {} were read", edges.len()),
        ));
    }
    Ok(EdgeList { n, edges })
}

pub fn read_graph(path: &Path) -> Result<EdgeList> {
    let file = fs::File::open(path)?;
    parse_graph(file, &path.display().to_string())
}

pub fn write_graph<W: Write>(mut out: W, graph: &EdgeList) -> Result<()> {
    writeln!(out, "{} {}", graph.n, graph.edges.len())?;
    for &(u, v, w) in &graph.edges {
        writeln!(out, "{u} {v} {w}")?;
    }
    Ok(())
}

pub fn parse_vectors<R: Read>(reader: R, source: &str) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(source, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let x = field
                .parse::<f64>()
                .map_err(|e| parse_err(source, line, format!("column {}: {e}", col + 1)))?;
            if !x.is_finite() {
                return Err(parse_err(source, line, format!("column {}: non-finite value", col + 1)));
            }
            row.push(x);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    source,
                    line,
                    format!("row has {} columns, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(source, 0, "no data rows"));
    }
    Ok(rows)
}

pub fn read_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = fs::File::open(path)?;
    parse_vectors(file, &path.display().to_string())
}

pub fn write_vectors<W: Write>(out: W, rows: &[Vec<f64>]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in rows {
        wtr.write_record(row.iter().map(|x| x.to_string()))
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn parse_ids<R: Read>(mut reader: R, source: &str) -> Result<Vec<PointId>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut ids = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let id = tok
                .parse::<usize>()
                .map_err(|e| parse_err(source, idx + 1, format!("bad point id `{tok}`: {e}")))?;
            ids.push(PointId(id));
        }
    }
    Ok(ids)
}

pub fn read_ids(path: &Path) -> Result<Vec<PointId>> {
    let file = fs::File::open(path)?;
    parse_ids(file, &path.display().to_string())
}

/// Format of a dataset file on disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataFormat {
    Vectors,
    Graph,
}

impl DataFormat {
    /// `.csv` files are vectors, anything else is an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DataFormat::Vectors,
            _ => DataFormat::Graph,
        }
    }
}

/// Load a metric space from a vector CSV or graph file.
pub fn load_space(path: &Path, format: DataFormat, norm: Norm) -> Result<MetricSpace> {
    match format {
        DataFormat::Vectors => MetricSpace::from_vectors(&read_vectors(path)?, norm),
        DataFormat::Graph => read_graph(path)?.to_metric(),
    }
}
