use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{RankedRetrievalRun, RetrievalError};
use crate::corpus::tokenize::folded_tokens;
use crate::corpus::Paragraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Case-folded term → postings, with per-document lengths in tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    pub paragraph_ids: Vec<String>,
    pub lengths: Vec<u32>,
    pub average_length: f64,
    pub postings: BTreeMap<String, Vec<Posting>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl InvertedIndex {
    pub fn build(corpus: &[Paragraph]) -> Result<Self, RetrievalError> {
        if corpus.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut lengths = Vec::with_capacity(corpus.len());
        let mut paragraph_ids = Vec::with_capacity(corpus.len());
        let mut seen = BTreeSet::new();
        for (doc, p) in corpus.iter().enumerate() {
            if !seen.insert(p.paragraph_id.as_str()) {
                return Err(RetrievalError::DuplicateId(p.paragraph_id.clone()));
            }
            let terms = p.folded_tokens();
            lengths.push(terms.len() as u32);
            paragraph_ids.push(p.paragraph_id.clone());
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in terms {
                *tf.entry(t).or_default() += 1;
            }
            for (term, tf) in tf {
                postings.entry(term).or_default().push(Posting {
                    doc: doc as u32,
                    tf,
                });
            }
        }
        let average_length =
            lengths.iter().map(|&l| f64::from(l)).sum::<f64>() / lengths.len() as f64;
        Ok(InvertedIndex {
            paragraph_ids,
            lengths,
            average_length,
            postings,
        })
    }

    pub fn documents(&self) -> usize {
        self.paragraph_ids.len()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// ln(1 + (N − df + 0.5) / (df + 0.5))
    pub fn idf(&self, df: usize) -> f64 {
        let n = self.documents() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }
}

/// Scores every paragraph containing at least one query term. Repeated
/// query terms count once.
pub fn bm25_rank(
    index: &InvertedIndex,
    query_id: &str,
    query: &str,
    params: Bm25Params,
) -> Result<RankedRetrievalRun, RetrievalError> {
    let terms: BTreeSet<String> = folded_tokens(query).into_iter().collect();
    if terms.is_empty() {
        return Err(RetrievalError::EmptyQuery(query.to_string()));
    }
    let mut scores: BTreeMap<u32, f64> = BTreeMap::new();
    for term in &terms {
        let Some(list) = index.postings.get(term) else {
            continue;
        };
        let idf = index.idf(list.len());
        for p in list {
            let tf = f64::from(p.tf);
            let len = f64::from(index.lengths[p.doc as usize]);
            let norm = params.k1 * (1.0 - params.b + params.b * len / index.average_length);
            *scores.entry(p.doc).or_default() += idf * tf * (params.k1 + 1.0) / (tf + norm);
        }
    }
    Ok(RankedRetrievalRun::from_scores(
        query_id,
        scores
            .into_iter()
            .map(|(d, s)| (index.paragraph_ids[d as usize].clone(), s)),
    ))
}
