use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{LoadError, ValidationError};

/// One query's ranking: scores non-increasing, ties by ascending paragraph id.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRetrievalRun {
    pub query_id: String,
    pub entries: Vec<(String, f64)>,
}

impl RankedRetrievalRun {
    pub fn from_scores<I>(query_id: &str, scores: I) -> Self
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        let mut entries: Vec<(String, f64)> = scores.into_iter().collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        RankedRetrievalRun {
            query_id: query_id.to_string(),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }
}

/// TSV rows `type_id rank paragraph_id score`, rank starting at 1.
pub fn save_runs<'a, I>(path: &Path, runs: I) -> std::io::Result<()>
where
    I: IntoIterator<Item = &'a RankedRetrievalRun>,
{
    let mut out = BufWriter::new(File::create(path)?);
    for run in runs {
        for (rank, (pid, score)) in run.entries.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}\t{}", run.query_id, rank + 1, pid, score)?;
        }
    }
    out.flush()
}

/// Reads a run file from any ranker. Rows may come in any order; each query's
/// rows are ordered by rank, and ranks must be unique per query.
pub fn load_runs(path: &Path) -> Result<BTreeMap<String, RankedRetrievalRun>, LoadError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| LoadError::io(&display, e))?;
    let bad = |line: usize, message: String| LoadError::Malformed {
        path: display.clone(),
        line,
        message,
    };
    let mut rows: BTreeMap<String, BTreeMap<u64, (String, f64)>> = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| LoadError::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(bad(
                line_no,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let rank: u64 = fields[1]
            .parse()
            .map_err(|e| bad(line_no, format!("rank: {e}")))?;
        let score: f64 = fields[3]
            .parse()
            .map_err(|e| bad(line_no, format!("score: {e}")))?;
        let per_query = rows.entry(fields[0].to_string()).or_default();
        if per_query
            .insert(rank, (fields[2].to_string(), score))
            .is_some()
        {
            return Err(LoadError::invalid(
                &display,
                line_no,
                ValidationError::Invalid(format!("duplicate rank {rank} for `{}`", fields[0])),
            ));
        }
    }
    Ok(rows
        .into_iter()
        .map(|(q, ranked)| {
            let run = RankedRetrievalRun {
                query_id: q.clone(),
                entries: ranked.into_values().collect(),
            };
            (q, run)
        })
        .collect())
}
