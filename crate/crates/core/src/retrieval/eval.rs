use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use super::{RankedRetrievalRun, RetrievalError};
use crate::corpus::SilverDataset;

/// type_id → paragraphs containing at least one span of that type.
pub fn relevance_sets(dataset: &SilverDataset) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for p in &dataset.paragraphs {
        for t in p.tagged_types() {
            out.entry(t.to_string())
                .or_default()
                .insert(p.id().to_string());
        }
    }
    out
}

/// Share of the relevant set found in the top |REL| ranks. Ranks beyond the
/// end of a short run count as misses.
pub fn recall_at_rel(
    run: &RankedRetrievalRun,
    relevant: &BTreeSet<String>,
) -> Result<f64, RetrievalError> {
    if relevant.is_empty() {
        return Err(RetrievalError::EmptyRelevance(run.query_id.clone()));
    }
    let hits = run
        .ids()
        .take(relevant.len())
        .filter(|id| relevant.contains(*id))
        .count();
    Ok(hits as f64 / relevant.len() as f64)
}

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeRecall {
    pub type_id: String,
    pub relevant: usize,
    pub retrieved: usize,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalReport {
    pub per_type: Vec<TypeRecall>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Correlation between |REL| and per-type recall.
    pub pearson_rel_recall: Option<f64>,
}

/// Recall@|REL| for each test type, with macro mean and population std.
pub fn evaluate_runs(
    runs: &BTreeMap<String, RankedRetrievalRun>,
    relevance: &BTreeMap<String, BTreeSet<String>>,
    test_types: &[String],
) -> Result<RetrievalReport, RetrievalError> {
    let mut per_type = Vec::with_capacity(test_types.len());
    for t in test_types {
        let run = runs
            .get(t)
            .ok_or_else(|| RetrievalError::MissingRun(t.clone()))?;
        let rel = relevance
            .get(t)
            .ok_or_else(|| RetrievalError::EmptyRelevance(t.clone()))?;
        per_type.push(TypeRecall {
            type_id: t.clone(),
            relevant: rel.len(),
            retrieved: run.len(),
            recall: recall_at_rel(run, rel)?,
        });
    }
    let n = per_type.len() as f64;
    let recalls: Vec<f64> = per_type.iter().map(|r| r.recall).collect();
    let (mean, std) = if per_type.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = recalls.iter().sum::<f64>() / n;
        let var = recalls.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        (mean, var.sqrt())
    };
    let sizes: Vec<f64> = per_type.iter().map(|r| r.relevant as f64).collect();
    Ok(RetrievalReport {
        pearson_rel_recall: pearson(&sizes, &recalls),
        per_type,
        mean,
        std,
    })
}

impl RetrievalReport {
    /// Per-type rows, then `MEAN` and `STD` summary rows and the correlation.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "type_id\trelevant\tretrieved\trecall_at_rel")?;
        for r in &self.per_type {
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}",
                r.type_id, r.relevant, r.retrieved, r.recall
            )?;
        }
        writeln!(out, "MEAN\t\t\t{:.6}", self.mean)?;
        writeln!(out, "STD\t\t\t{:.6}", self.std)?;
        match self.pearson_rel_recall {
            Some(r) => writeln!(out, "PEARSON_REL_RECALL\t\t\t{r:.6}"),
            None => writeln!(out, "PEARSON_REL_RECALL\t\t\tNA"),
        }
    }
}
