//! Reading and writing datasets, graphs, parameters and summaries.
//!
//! A dataset is either a directory with one `level_<x>.csv` per level (header
//! row of vertex names) or a single CSV whose first column is `level`.
//! Numbers are written in the shortest form that parses back to the same
//! double, so a save/load cycle is the identity.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use crate::bayes_em::PosteriorSummaries;
use crate::error::{Error, Result};
use crate::gaussian::{GaussianProfileParams, ProfileDataset};
use crate::linalg::Matrix;
use crate::profile_graph::{MultipleGraphs, ProfileGraph, StateSpace};
use crate::scalar::Real;

const LEVEL_PREFIX: &str = "level_";
const LEVEL_COLUMN: &str = "level";

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), message: message.into() }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| format!("line {}: ", p.line())).unwrap_or_default();
    let detail = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    parse_error(path, format!("{line}{detail}"))
}

fn parse_value<T: Real>(path: &Path, line: u64, column: &str, field: &str) -> Result<T> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_error(path, format!("line {line}: column `{column}` holds `{field}`, not a number")))?;
    if !v.is_finite() {
        return Err(parse_error(path, format!("line {line}: column `{column}` is not finite")));
    }
    Ok(T::of(v))
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| parse_error(path, e.to_string()))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file))
}

fn headers(path: &Path, rdr: &mut csv::Reader<fs::File>) -> Result<Vec<String>> {
    Ok(rdr.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect())
}

/// Loads a dataset directory or single CSV file.
pub fn load_dataset<T: Real>(path: &Path) -> Result<ProfileDataset<T>> {
    if path.is_dir() {
        load_dataset_dir(path)
    } else {
        load_dataset_csv(path)
    }
}

/// Level files of a dataset directory, ordered numerically when every level
/// name is an integer and lexicographically otherwise.
fn level_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(level) = name.strip_prefix(LEVEL_PREFIX).and_then(|r| r.strip_suffix(".csv")) {
            found.push((level.to_string(), path.clone()));
        }
    }
    if found.is_empty() {
        return Err(parse_error(dir, "no level_<x>.csv files found"));
    }
    if found.iter().all(|(l, _)| l.parse::<i64>().is_ok()) {
        found.sort_by_key(|(l, _)| l.parse::<i64>().unwrap_or_default());
    } else {
        found.sort();
    }
    Ok(found)
}

pub fn load_dataset_dir<T: Real>(dir: &Path) -> Result<ProfileDataset<T>> {
    let mut levels = Vec::new();
    let mut vertices: Option<Vec<String>> = None;
    let mut blocks = Vec::new();
    for (level, path) in level_files(dir)? {
        let mut rdr = reader(&path)?;
        let header = headers(&path, &mut rdr)?;
        match &vertices {
            None => vertices = Some(header.clone()),
            Some(v) if *v != header => {
                return Err(parse_error(&path, "header differs from the other level files"));
            }
            Some(_) => {}
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(&path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let row = rec
                .iter()
                .zip(&header)
                .map(|(f, c)| parse_value(&path, line, c, f))
                .collect::<Result<Vec<T>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(parse_error(&path, "no observations"));
        }
        blocks.push(Matrix::from_rows(&rows).ok_or_else(|| parse_error(&path, "ragged rows"))?);
        levels.push(level);
    }
    ProfileDataset::new(levels, vertices.unwrap_or_default(), blocks)
}

pub fn load_dataset_csv<T: Real>(path: &Path) -> Result<ProfileDataset<T>> {
    let mut rdr = reader(path)?;
    let header = headers(path, &mut rdr)?;
    if header.first().map(String::as_str) != Some(LEVEL_COLUMN) {
        return Err(parse_error(path, format!("line 1: first column must be `{LEVEL_COLUMN}`")));
    }
    let vertices: Vec<String> = header[1..].to_vec();
    let mut levels: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<Vec<T>>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let level = rec.get(0).unwrap_or_default().to_string();
        let x = match levels.iter().position(|l| *l == level) {
            Some(x) => x,
            None => {
                levels.push(level);
                rows.push(Vec::new());
                levels.len() - 1
            }
        };
        let row = rec
            .iter()
            .skip(1)
            .zip(&vertices)
            .map(|(f, c)| parse_value(path, line, c, f))
            .collect::<Result<Vec<T>>>()?;
        rows[x].push(row);
    }
    if levels.is_empty() {
        return Err(parse_error(path, "no observations"));
    }
    let blocks = rows
        .iter()
        .map(|r| Matrix::from_rows(r).ok_or_else(|| parse_error(path, "ragged rows")))
        .collect::<Result<Vec<_>>>()?;
    ProfileDataset::new(levels, vertices, blocks)
}

fn fmt<T: Real>(v: T) -> String {
    v.to_string()
}

/// Writes `level_<x>.csv` for every level into `dir`, creating it if needed.
pub fn save_dataset_dir<T: Real>(data: &ProfileDataset<T>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (x, level) in data.levels().iter().enumerate() {
        let path = dir.join(format!("{LEVEL_PREFIX}{level}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(data.vertices())?;
        let m = data.level(x);
        for k in 0..m.rows() {
            w.write_record(m.row(k).iter().map(|&v| fmt(v)))?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Writes a single CSV with a leading `level` column.
pub fn save_dataset_csv<T: Real>(data: &ProfileDataset<T>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(std::iter::once(LEVEL_COLUMN).chain(data.vertices().iter().map(String::as_str)))?;
    for (x, level) in data.levels().iter().enumerate() {
        let m = data.level(x);
        for k in 0..m.rows() {
            w.write_record(std::iter::once(level.clone()).chain(m.row(k).iter().map(|&v| fmt(v))))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| parse_error(path, e.to_string()))
}

fn with_path<V>(path: &Path, r: Result<V>) -> Result<V> {
    r.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => parse_error(path, other.to_string()),
    })
}

pub fn load_json<V: DeserializeOwned>(path: &Path) -> Result<V> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut t = text.to_string();
    if !t.ends_with('\n') {
        t.push('\n');
    }
    fs::write(path, t)?;
    Ok(())
}

pub fn load_graph(path: &Path) -> Result<ProfileGraph> {
    with_path(path, ProfileGraph::from_json(&read_text(path)?))
}

pub fn save_graph(g: &ProfileGraph, path: &Path) -> Result<()> {
    write_text(path, &g.to_json())
}

pub fn load_params<T: Real>(path: &Path) -> Result<GaussianProfileParams<T>> {
    with_path(path, GaussianProfileParams::from_json(&read_text(path)?))
}

pub fn save_params<T: Real>(params: &GaussianProfileParams<T>, path: &Path) -> Result<()> {
    write_text(path, &params.to_json())
}

pub fn load_summaries<T: Real>(path: &Path) -> Result<PosteriorSummaries<T>> {
    with_path(path, PosteriorSummaries::from_json(&read_text(path)?))
}

pub fn save_summaries<T: Real>(s: &PosteriorSummaries<T>, path: &Path) -> Result<()> {
    write_text(path, &s.to_json())
}

/// Edges and scores produced by another method, read from a CSV with columns
/// `level,a,b` and an optional `score`. Listed pairs are edges; their score
/// defaults to 1 and unlisted pairs score 0.
pub fn load_edge_list(path: &Path, levels: &StateSpace, vertices: &[String]) -> Result<(MultipleGraphs, Vec<Matrix<f64>>)> {
    let mut rdr = reader(path)?;
    let header = headers(path, &mut rdr)?;
    let col = |name: &str| header.iter().position(|h| h == name);
    let (Some(cl), Some(ca), Some(cb)) = (col("level"), col("a"), col("b")) else {
        return Err(parse_error(path, "line 1: need columns `level`, `a` and `b`"));
    };
    let cs = col("score");
    let p = vertices.len();
    let mut graphs = MultipleGraphs::empty(levels.clone(), vertices.to_vec());
    let mut scores = vec![Matrix::zeros(p, p); levels.len()];
    let vertex = |line: u64, name: &str| {
        vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| parse_error(path, format!("line {line}: unknown vertex `{name}`")))
    };
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let level = &rec[cl];
        let x = levels
            .index_of(level)
            .ok_or_else(|| parse_error(path, format!("line {line}: unknown level `{level}`")))?;
        let (a, b) = (vertex(line, &rec[ca])?, vertex(line, &rec[cb])?);
        if a == b {
            return Err(parse_error(path, format!("line {line}: self-loop")));
        }
        let s: f64 = match cs {
            Some(c) => parse_value(path, line, "score", &rec[c])?,
            None => 1.0,
        };
        graphs.set_edge(x, a, b, true);
        scores[x][(a, b)] = s;
        scores[x][(b, a)] = s;
    }
    Ok((graphs, scores))
}
