use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RankedRetrievalRun, RetrievalError};
use crate::corpus::{LoadError, ValidationError};

/// Fixed-dimension vectors keyed by id, with precomputed norms.
#[derive(Debug, Clone)]
pub struct DenseVectorStore {
    dimension: usize,
    ids: Vec<String>,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl DenseVectorStore {
    pub fn new(dimension: usize, entries: Vec<(String, Vec<f64>)>) -> Result<Self, RetrievalError> {
        let mut ids = Vec::with_capacity(entries.len());
        let mut data = Vec::with_capacity(entries.len() * dimension);
        let mut norms = Vec::with_capacity(entries.len());
        let mut seen = HashSet::new();
        for (id, v) in entries {
            let norm = check_vector(&id, &v, dimension)?;
            if !seen.insert(id.clone()) {
                return Err(RetrievalError::DuplicateId(id));
            }
            ids.push(id);
            data.extend_from_slice(&v);
            norms.push(norm);
        }
        Ok(DenseVectorStore {
            dimension,
            ids,
            data,
            norms,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }
}

fn check_vector(id: &str, v: &[f64], dimension: usize) -> Result<f64, RetrievalError> {
    if v.len() != dimension {
        return Err(RetrievalError::DimensionMismatch {
            expected: dimension,
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(RetrievalError::NonFinite(id.to_string()));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(RetrievalError::ZeroVector(id.to_string()));
    }
    Ok(norm)
}

/// Ranks every stored paragraph by cosine similarity to the query.
pub fn dense_rank(
    store: &DenseVectorStore,
    query_id: &str,
    query: &[f64],
) -> Result<RankedRetrievalRun, RetrievalError> {
    let qnorm = check_vector(query_id, query, store.dimension)?;
    Ok(RankedRetrievalRun::from_scores(
        query_id,
        (0..store.len()).map(|i| {
            let dot: f64 = store.vector(i).iter().zip(query).map(|(a, b)| a * b).sum();
            (store.ids[i].clone(), dot / (store.norms[i] * qnorm))
        }),
    ))
}

#[derive(Serialize, Deserialize)]
struct VectorHeader {
    dimension: usize,
    count: usize,
}

/// Raw contents of a vector file.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFile {
    pub dimension: usize,
    pub entries: Vec<(String, Vec<f64>)>,
}

impl VectorFile {
    pub fn into_store(self) -> Result<DenseVectorStore, RetrievalError> {
        DenseVectorStore::new(self.dimension, self.entries)
    }
}

/// Header `{"dimension":d,"count":n}`, then `id v1 … vd` per line.
pub fn load_vectors(path: &Path) -> Result<VectorFile, LoadError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| LoadError::io(&display, e))?;
    let bad = |line: usize, message: String| LoadError::Malformed {
        path: display.clone(),
        line,
        message,
    };
    let mut lines = BufReader::new(file).lines().enumerate();
    let header: VectorHeader = match lines.next() {
        Some((_, l)) => serde_json::from_str(&l.map_err(|e| LoadError::io(&display, e))?)
            .map_err(|e| bad(1, e.to_string()))?,
        None => return Err(bad(1, "missing header".into())),
    };
    let mut entries = Vec::with_capacity(header.count);
    for (i, line) in lines {
        let line = line.map_err(|e| LoadError::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let id = fields.next().unwrap_or_default().to_string();
        let v: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| bad(i + 1, format!("{f:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if v.len() != header.dimension {
            return Err(bad(
                i + 1,
                format!("expected {} values, found {}", header.dimension, v.len()),
            ));
        }
        entries.push((id, v));
    }
    if entries.len() != header.count {
        return Err(LoadError::invalid(
            &display,
            1,
            ValidationError::Invalid(format!(
                "header count {} but {} records",
                header.count,
                entries.len()
            )),
        ));
    }
    Ok(VectorFile {
        dimension: header.dimension,
        entries,
    })
}

pub fn save_vectors(path: &Path, file: &VectorFile) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(
        &mut out,
        &VectorHeader {
            dimension: file.dimension,
            count: file.entries.len(),
        },
    )?;
    out.write_all(b"\n")?;
    for (id, v) in &file.entries {
        out.write_all(id.as_bytes())?;
        for x in v {
            write!(out, " {x}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}
