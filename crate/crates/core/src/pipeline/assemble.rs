use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::{
    AnnotatedParagraph, Lexicon, LinkGraph, MentionSpan, Paragraph, SilverDataset,
};
use crate::filter::{filter_matches, ContextFilter, FilteredMatch};
use crate::matcher::{compile, scan_corpus};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyConfig {
    pub slop: usize,
    pub threshold: f64,
    /// Minimum distinct tagged types (after hierarchy closure) per kept paragraph.
    pub min_distinct_types: usize,
    /// Keep at most this many paragraphs, best-ranked first.
    pub max_paragraphs: Option<usize>,
    pub seed: u64,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            slop: 5,
            threshold: 0.0,
            min_distinct_types: 2,
            max_paragraphs: None,
            seed: 0,
        }
    }
}

impl AssemblyConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.min_distinct_types == 0 {
            return Err(PipelineError::Config(
                "min_distinct_types must be at least 1".into(),
            ));
        }
        if self.threshold.is_nan() {
            return Err(PipelineError::Config("threshold is NaN".into()));
        }
        Ok(())
    }
}

/// Counters written next to an assembled dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: AssemblyConfig,
    pub corpus_paragraphs: usize,
    pub excluded_paragraphs: usize,
    pub raw_matches: usize,
    pub filtered_matches: usize,
    pub candidate_paragraphs: usize,
    pub selected_paragraphs: usize,
    pub spans: usize,
    pub typed_mentions: usize,
    pub missing_linkgraph_paragraphs: usize,
}

/// Seeded choice of `fraction` of the given paragraph ids as held-out filter training data.
pub fn select_holdout<'a, I>(paragraph_ids: I, fraction: f64, seed: u64) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut ids: Vec<&str> = paragraph_ids
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    ids.shuffle(&mut seed::rng(seed, "pipeline/holdout"));
    let n = (fraction.clamp(0.0, 1.0) * ids.len() as f64).round() as usize;
    ids.into_iter().take(n).map(String::from).collect()
}

/// Groups filtered matches into per-paragraph spans. Type sets are
/// closed under the hierarchy; matches of one entity on the same token
/// range (e.g. via two aliases) merge into one span.
pub fn spans_from_matches(
    matches: &[FilteredMatch],
    lexicon: &Lexicon,
) -> Result<BTreeMap<String, Vec<MentionSpan>>, PipelineError> {
    type SpanKey = (usize, usize, String);
    let mut merged: BTreeMap<String, BTreeMap<SpanKey, BTreeSet<String>>> = BTreeMap::new();
    for m in matches {
        let closed = lexicon.hierarchy_closure(&m.type_ids)?;
        merged
            .entry(m.paragraph_id.clone())
            .or_default()
            .entry((m.token_start, m.token_end, m.entity_id.clone()))
            .or_default()
            .extend(closed);
    }
    Ok(merged
        .into_iter()
        .map(|(pid, spans)| {
            let spans = spans
                .into_iter()
                .map(|((token_start, token_end, entity_id), types)| MentionSpan {
                    token_start,
                    token_end,
                    entity_id,
                    type_ids: types.into_iter().collect(),
                })
                .collect();
            (pid, spans)
        })
        .collect())
}

/// Keeps paragraphs tagged with at least `min_distinct_types` types; with a cap,
/// keeps the best by (distinct types desc, distinct entities desc, paragraph_id asc).
/// Output follows corpus order.
pub fn select_paragraphs(
    corpus: &[Paragraph],
    spans: &BTreeMap<String, Vec<MentionSpan>>,
    config: &AssemblyConfig,
) -> SilverDataset {
    let mut candidates: Vec<(usize, AnnotatedParagraph)> = corpus
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let s = spans.get(&p.paragraph_id)?;
            let ap = AnnotatedParagraph {
                paragraph: p.clone(),
                spans: s.clone(),
            };
            (ap.tagged_types().len() >= config.min_distinct_types).then_some((i, ap))
        })
        .collect();
    if let Some(cap) = config.max_paragraphs {
        if candidates.len() > cap {
            let key = |ap: &AnnotatedParagraph| {
                let entities: BTreeSet<&str> =
                    ap.spans.iter().map(|s| s.entity_id.as_str()).collect();
                (ap.tagged_types().len(), entities.len())
            };
            candidates
                .sort_by(|(_, a), (_, b)| key(b).cmp(&key(a)).then_with(|| a.id().cmp(b.id())));
            candidates.truncate(cap);
            candidates.sort_by_key(|(i, _)| *i);
        }
    }
    SilverDataset {
        paragraphs: candidates.into_iter().map(|(_, ap)| ap).collect(),
    }
}

/// Match → filter → span tagging → paragraph selection. Paragraphs in
/// `exclude` (the filter's held-out training data) are never assembled.
pub fn assemble(
    corpus: &[Paragraph],
    lexicon: &Lexicon,
    linkgraph: Option<&LinkGraph>,
    filter: &ContextFilter,
    exclude: &BTreeSet<String>,
    config: &AssemblyConfig,
) -> Result<(SilverDataset, RunMetadata), PipelineError> {
    config.validate()?;
    let pool: Vec<Paragraph> = corpus
        .iter()
        .filter(|p| !exclude.contains(&p.paragraph_id))
        .cloned()
        .collect();
    let patterns = compile(lexicon).map_err(|e| PipelineError::Config(e.to_string()))?;
    let scanned = scan_corpus(&pool, &patterns, linkgraph, config.slop);
    let filtered = filter_matches(&scanned.matches, filter, lexicon, &pool, config.threshold)?;
    let spans = spans_from_matches(&filtered, lexicon)?;
    let dataset = select_paragraphs(&pool, &spans, config);
    if dataset.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let meta = RunMetadata {
        config: config.clone(),
        corpus_paragraphs: corpus.len(),
        excluded_paragraphs: corpus.len() - pool.len(),
        raw_matches: scanned.matches.len(),
        filtered_matches: filtered.len(),
        candidate_paragraphs: spans.len(),
        selected_paragraphs: dataset.len(),
        spans: dataset.paragraphs.iter().map(|p| p.spans.len()).sum(),
        typed_mentions: dataset
            .paragraphs
            .iter()
            .map(AnnotatedParagraph::typed_mentions)
            .sum(),
        missing_linkgraph_paragraphs: scanned.missing_paragraphs.len(),
    };
    Ok((dataset, meta))
}
