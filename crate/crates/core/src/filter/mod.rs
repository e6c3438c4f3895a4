//! Per-type contextual filters: a bag-of-words TF-IDF linear SVM per entity
//! type scores how plausible a paragraph is as a context for that type, and
//! raw matches whose paragraph scores below threshold are discarded.

mod svm;
mod tfidf;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use svm::{LinearSvm, SvmConfig};
pub use tfidf::{featurize, SparseVector, TfidfVocabulary, VocabularyEntry};

use crate::corpus::{Lexicon, LoadError, Paragraph, ValidationError};
use crate::jsonl;
use crate::matcher::RawMatch;
use crate::seed;

pub const DEFAULT_MIN_DF: u32 = 2;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("type `{type_id}`: empty {class} class")]
    EmptyClass {
        type_id: String,
        class: &'static str,
    },
    #[error("type `{type_id}`: paragraph `{paragraph_id}` is both positive and negative")]
    OverlappingClasses {
        type_id: String,
        paragraph_id: String,
    },
    #[error("no filter model for type `{0}`")]
    MissingModel(String),
    #[error("match references unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("match references paragraph `{0}` not in the corpus")]
    UnknownParagraph(String),
    #[error("model for `{type_id}` was trained on vocabulary {model}, not {vocab}")]
    VocabularyMismatch {
        type_id: String,
        model: String,
        vocab: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub svm: SvmConfig,
    pub threshold: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            svm: SvmConfig::default(),
            threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeFilterModel {
    pub type_id: String,
    pub svm: LinearSvm,
    pub threshold: f64,
    pub config: SvmConfig,
    pub positives: usize,
    pub negatives: usize,
    pub vocab_hash: String,
}

impl TypeFilterModel {
    pub fn score_vector(&self, x: &SparseVector) -> f64 {
        self.svm.decision(x)
    }

    pub fn accepts(&self, score: f64) -> bool {
        score >= self.threshold
    }
}

/// `w·x + b` for the paragraph's TF-IDF vector.
pub fn score(model: &TypeFilterModel, vocab: &TfidfVocabulary, paragraph: &Paragraph) -> f64 {
    debug_assert_eq!(model.svm.weights.len(), vocab.len());
    model.score_vector(&featurize(paragraph, vocab))
}

/// Trains one type's filter on held-out positives and sampled negatives.
pub fn train_type_filter(
    type_id: &str,
    positives: &[&Paragraph],
    negatives: &[&Paragraph],
    vocab: &TfidfVocabulary,
    config: &FilterConfig,
) -> Result<TypeFilterModel, FilterError> {
    for (set, class) in [(positives, "positive"), (negatives, "negative")] {
        if set.is_empty() {
            return Err(FilterError::EmptyClass {
                type_id: type_id.to_string(),
                class,
            });
        }
    }
    let pos_ids: BTreeSet<&str> = positives.iter().map(|p| p.paragraph_id.as_str()).collect();
    if let Some(p) = negatives
        .iter()
        .find(|p| pos_ids.contains(p.paragraph_id.as_str()))
    {
        return Err(FilterError::OverlappingClasses {
            type_id: type_id.to_string(),
            paragraph_id: p.paragraph_id.clone(),
        });
    }
    let examples: Vec<(SparseVector, f64)> = positives
        .iter()
        .map(|p| (featurize(p, vocab), 1.0))
        .chain(negatives.iter().map(|p| (featurize(p, vocab), -1.0)))
        .collect();
    let svm = svm::train(&examples, vocab.len(), &config.svm);
    Ok(TypeFilterModel {
        type_id: type_id.to_string(),
        svm,
        threshold: config.threshold,
        config: config.svm,
        positives: positives.len(),
        negatives: negatives.len(),
        vocab_hash: vocab.hash(),
    })
}

/// A vocabulary together with the per-type models trained on it.
#[derive(Debug, Clone)]
pub struct ContextFilter {
    pub vocab: TfidfVocabulary,
    pub models: BTreeMap<String, TypeFilterModel>,
}

impl ContextFilter {
    pub fn new(vocab: TfidfVocabulary, models: Vec<TypeFilterModel>) -> Result<Self, FilterError> {
        let hash = vocab.hash();
        let mut map = BTreeMap::new();
        for m in models {
            if m.vocab_hash != hash || m.svm.weights.len() != vocab.len() {
                return Err(FilterError::VocabularyMismatch {
                    type_id: m.type_id.clone(),
                    model: m.vocab_hash.clone(),
                    vocab: hash,
                });
            }
            map.insert(m.type_id.clone(), m);
        }
        Ok(ContextFilter { vocab, models: map })
    }

    pub fn load(vocab_path: &Path, models_path: &Path) -> Result<Self, LoadError> {
        let vocab = load_vocabulary(vocab_path)?;
        let models = load_models(models_path)?;
        Self::new(vocab, models).map_err(|e| LoadError::Invalid {
            path: models_path.display().to_string(),
            line: 0,
            source: ValidationError::Invalid(e.to_string()),
        })
    }

    pub fn save(&self, vocab_path: &Path, models_path: &Path) -> std::io::Result<()> {
        save_vocabulary(vocab_path, &self.vocab)?;
        save_models(models_path, self.models.values())
    }

    /// Overrides every model's decision threshold.
    pub fn set_threshold(&mut self, threshold: f64) {
        for m in self.models.values_mut() {
            m.threshold = threshold;
        }
    }
}

/// Positive and negative paragraph ids for one type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrainingSet {
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
}

/// Builds per-type training sets from raw matches on held-out paragraphs.
///
/// A held-out paragraph is positive for every type in the hierarchy closure
/// of the entities matched in it. Negatives for a type are drawn uniformly,
/// 1:1 with its positives, from held-out paragraphs matched only to other types.
pub fn training_sets(
    matches: &[RawMatch],
    lexicon: &Lexicon,
    holdout: &BTreeSet<String>,
    seed: u64,
) -> Result<BTreeMap<String, TrainingSet>, FilterError> {
    let mut types_by_paragraph: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for m in matches.iter().filter(|m| holdout.contains(&m.paragraph_id)) {
        let closed = lexicon
            .entity_closure(&m.entity_id)
            .ok_or_else(|| FilterError::UnknownEntity(m.entity_id.clone()))?;
        types_by_paragraph
            .entry(m.paragraph_id.as_str())
            .or_default()
            .extend(closed);
    }
    let mut positives: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (pid, types) in &types_by_paragraph {
        for t in types {
            positives
                .entry(t.clone())
                .or_default()
                .push(pid.to_string());
        }
    }
    let mut out = BTreeMap::new();
    for (type_id, pos) in positives {
        let mut pool: Vec<&str> = types_by_paragraph
            .iter()
            .filter(|(_, ts)| !ts.contains(&type_id))
            .map(|(pid, _)| *pid)
            .collect();
        let mut rng = seed::rng(seed, &format!("filter/negatives/{type_id}"));
        pool.shuffle(&mut rng);
        pool.truncate(pos.len());
        pool.sort_unstable();
        let negatives = pool.into_iter().map(String::from).collect();
        out.insert(
            type_id,
            TrainingSet {
                positives: pos,
                negatives,
            },
        );
    }
    Ok(out)
}

/// Builds the shared vocabulary from all training paragraphs and trains one
/// model per type in parallel. Types lacking a positive or negative class
/// are skipped with a warning.
pub fn train_filters(
    sets: &BTreeMap<String, TrainingSet>,
    corpus: &[Paragraph],
    min_df: u32,
    config: &FilterConfig,
) -> Result<ContextFilter, FilterError> {
    let by_id: HashMap<&str, &Paragraph> = corpus
        .iter()
        .map(|p| (p.paragraph_id.as_str(), p))
        .collect();
    let lookup = |ids: &[String]| -> Result<Vec<&Paragraph>, FilterError> {
        ids.iter()
            .map(|id| {
                by_id
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| FilterError::UnknownParagraph(id.clone()))
            })
            .collect()
    };
    let mut training_ids = BTreeSet::new();
    for s in sets.values() {
        training_ids.extend(s.positives.iter().chain(&s.negatives).map(String::as_str));
    }
    let training: Vec<&Paragraph> = training_ids
        .iter()
        .map(|id| {
            by_id
                .get(id)
                .copied()
                .ok_or_else(|| FilterError::UnknownParagraph(id.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let vocab = TfidfVocabulary::build(training, min_df);

    let models: Vec<Option<TypeFilterModel>> = sets
        .par_iter()
        .map(|(type_id, set)| {
            if set.positives.is_empty() || set.negatives.is_empty() {
                log::warn!("type `{type_id}`: cannot train filter (empty class), skipping");
                return Ok(None);
            }
            let pos = lookup(&set.positives)?;
            let neg = lookup(&set.negatives)?;
            let mut cfg = *config;
            cfg.svm.seed = seed::derive(config.svm.seed, &format!("filter/svm/{type_id}"));
            train_type_filter(type_id, &pos, &neg, &vocab, &cfg).map(Some)
        })
        .collect::<Result<_, FilterError>>()?;
    ContextFilter::new(vocab, models.into_iter().flatten().collect())
}

/// A raw match with the entity types whose filter accepted its paragraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredMatch {
    pub paragraph_id: String,
    pub token_start: usize,
    pub token_end: usize,
    pub entity_id: String,
    pub alias: String,
    pub gap_count: usize,
    pub type_ids: Vec<String>,
}

/// Keeps, for each match, the declared entity types whose model scores the
/// paragraph at or above `threshold`; matches with no surviving type are dropped.
pub fn filter_matches(
    matches: &[RawMatch],
    filter: &ContextFilter,
    lexicon: &Lexicon,
    corpus: &[Paragraph],
    threshold: f64,
) -> Result<Vec<FilteredMatch>, FilterError> {
    let by_id: HashMap<&str, &Paragraph> = corpus
        .iter()
        .map(|p| (p.paragraph_id.as_str(), p))
        .collect();
    // group consecutive matches per paragraph so each paragraph is featurized once
    let mut groups: Vec<&[RawMatch]> = Vec::new();
    let mut rest = matches;
    while let Some(first) = rest.first() {
        let n = rest
            .iter()
            .take_while(|m| m.paragraph_id == first.paragraph_id)
            .count();
        groups.push(&rest[..n]);
        rest = &rest[n..];
    }
    let per_group: Vec<Vec<FilteredMatch>> = groups
        .par_iter()
        .map(|group| {
            let pid = &group[0].paragraph_id;
            let paragraph = by_id
                .get(pid.as_str())
                .ok_or_else(|| FilterError::UnknownParagraph(pid.clone()))?;
            let x = featurize(paragraph, &filter.vocab);
            let mut scores: HashMap<&str, f64> = HashMap::new();
            let mut out = Vec::new();
            for m in group.iter() {
                let entity = lexicon
                    .entity(&m.entity_id)
                    .ok_or_else(|| FilterError::UnknownEntity(m.entity_id.clone()))?;
                let mut kept = Vec::new();
                for t in &entity.type_ids {
                    let s = match scores.get(t.as_str()) {
                        Some(&s) => s,
                        None => {
                            let model = filter
                                .models
                                .get(t)
                                .ok_or_else(|| FilterError::MissingModel(t.clone()))?;
                            let s = model.score_vector(&x);
                            scores.insert(t.as_str(), s);
                            s
                        }
                    };
                    if s >= threshold {
                        kept.push(t.clone());
                    }
                }
                if !kept.is_empty() {
                    out.push(FilteredMatch {
                        paragraph_id: m.paragraph_id.clone(),
                        token_start: m.token_start,
                        token_end: m.token_end,
                        entity_id: m.entity_id.clone(),
                        alias: m.alias.clone(),
                        gap_count: m.gap_count,
                        type_ids: kept,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_, FilterError>>()?;
    Ok(per_group.into_iter().flatten().collect())
}

#[derive(Serialize, Deserialize)]
struct VocabularyHeader {
    documents: u32,
    size: usize,
}

pub fn save_vocabulary(path: &Path, vocab: &TfidfVocabulary) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    jsonl::write_to(
        &mut out,
        [&VocabularyHeader {
            documents: vocab.documents(),
            size: vocab.len(),
        }],
    )?;
    jsonl::write_to(&mut out, &vocab.entries())?;
    std::io::Write::flush(&mut out)
}

pub fn load_vocabulary(path: &Path) -> Result<TfidfVocabulary, LoadError> {
    let display = path.display().to_string();
    let mut lines = jsonl::read::<serde_json::Value>(path)?;
    let bad = |line, message: String| LoadError::Malformed {
        path: display.clone(),
        line,
        message,
    };
    let (line, header) = lines
        .next()
        .ok_or_else(|| bad(1, "missing vocabulary header".into()))??;
    let header: VocabularyHeader =
        serde_json::from_value(header).map_err(|e| bad(line, e.to_string()))?;
    let mut entries = Vec::with_capacity(header.size);
    for rec in lines {
        let (line, v) = rec?;
        entries.push(
            serde_json::from_value::<VocabularyEntry>(v).map_err(|e| bad(line, e.to_string()))?,
        );
    }
    if entries.len() != header.size {
        return Err(bad(
            1,
            format!(
                "header declares {} entries, found {}",
                header.size,
                entries.len()
            ),
        ));
    }
    TfidfVocabulary::from_entries(header.documents, entries)
        .map_err(|m| LoadError::invalid(&display, 0, ValidationError::Invalid(m)))
}

/// One model per line: header fields followed by the sparse weight list.
#[derive(Serialize, Deserialize)]
struct ModelRecord {
    type_id: String,
    vocab_hash: String,
    threshold: f64,
    config: SvmConfig,
    seed: u64,
    positives: usize,
    negatives: usize,
    dimension: usize,
    bias: f64,
    weights: Vec<(u32, f64)>,
}

pub fn save_models<'a, I>(path: &Path, models: I) -> std::io::Result<()>
where
    I: IntoIterator<Item = &'a TypeFilterModel>,
{
    let recs: Vec<ModelRecord> = models
        .into_iter()
        .map(|m| ModelRecord {
            type_id: m.type_id.clone(),
            vocab_hash: m.vocab_hash.clone(),
            threshold: m.threshold,
            config: m.config,
            seed: m.config.seed,
            positives: m.positives,
            negatives: m.negatives,
            dimension: m.svm.weights.len(),
            bias: m.svm.bias,
            weights: m
                .svm
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (i as u32, *w))
                .collect(),
        })
        .collect();
    jsonl::write(path, &recs)
}

pub fn load_models(path: &Path) -> Result<Vec<TypeFilterModel>, LoadError> {
    let display = path.display().to_string();
    let mut out = Vec::new();
    for rec in jsonl::read::<ModelRecord>(path)? {
        let (line, r) = rec?;
        let mut weights = vec![0.0; r.dimension];
        for (i, w) in r.weights {
            if !w.is_finite() || i as usize >= r.dimension {
                return Err(LoadError::invalid(
                    &display,
                    line,
                    ValidationError::Invalid(format!("bad weight ({i}, {w}) for `{}`", r.type_id)),
                ));
            }
            weights[i as usize] = w;
        }
        out.push(TypeFilterModel {
            type_id: r.type_id,
            svm: LinearSvm {
                weights,
                bias: r.bias,
            },
            threshold: r.threshold,
            config: r.config,
            positives: r.positives,
            negatives: r.negatives,
            vocab_hash: r.vocab_hash,
        });
    }
    Ok(out)
}

pub fn save_filtered(path: &Path, matches: &[FilteredMatch]) -> std::io::Result<()> {
    jsonl::write(path, matches)
}

pub fn load_filtered(path: &Path) -> Result<Vec<FilteredMatch>, LoadError> {
    jsonl::read::<FilteredMatch>(path)?
        .map(|r| r.map(|(_, m)| m))
        .collect()
}
