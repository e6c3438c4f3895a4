use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use super::matching::TypedMention;
use super::EvalError;
use crate::corpus::{fold, AnnotatedParagraph, Lexicon, LoadError, SilverDataset};
use crate::jsonl;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictionTarget {
    /// Generated text, as produced by string-output models.
    Surface(String),
    /// Token range into the paragraph.
    Span {
        token_start: usize,
        token_end: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub target: PredictionTarget,
    pub type_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionSet {
    pub paragraphs: BTreeMap<String, Vec<Prediction>>,
}

#[derive(Deserialize)]
struct SpanPrediction {
    token_start: usize,
    token_end: usize,
    type_id: String,
}

#[derive(Deserialize)]
struct TypedEntities {
    entity_type: String,
    /// Comma-separated surface strings.
    entities: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PredictionRecord {
    Spans {
        paragraph_id: String,
        predictions: Vec<SpanPrediction>,
    },
    Strings {
        paragraph_id: String,
        entities: Vec<TypedEntities>,
    },
}

/// Maps the type names found in prediction files onto type ids: an exact
/// type id wins, then a case-folded label match; anything else is kept verbatim.
#[derive(Debug, Clone, Default)]
pub struct TypeResolver {
    ids: BTreeSet<String>,
    labels: HashMap<String, String>,
}

impl TypeResolver {
    pub fn new<I: IntoIterator<Item = String>>(type_ids: I) -> Self {
        TypeResolver {
            ids: type_ids.into_iter().collect(),
            labels: HashMap::new(),
        }
    }

    pub fn with_lexicon(mut self, lexicon: &Lexicon) -> Self {
        for t in lexicon.types() {
            self.ids.insert(t.type_id.clone());
            self.labels.insert(fold(t.label.trim()), t.type_id.clone());
        }
        self
    }

    pub fn resolve(&self, name: &str) -> String {
        let name = name.trim();
        if self.ids.contains(name) {
            return name.to_string();
        }
        self.labels
            .get(&fold(name))
            .cloned()
            .unwrap_or_else(|| name.to_string())
    }
}

/// Reads a prediction file in either span form or comma-separated string form
/// (the form is detected per line). Lines for the same paragraph are merged.
pub fn load_predictions(path: &Path, resolver: &TypeResolver) -> Result<PredictionSet, LoadError> {
    let mut set = PredictionSet::default();
    for rec in jsonl::read::<PredictionRecord>(path)? {
        match rec?.1 {
            PredictionRecord::Spans {
                paragraph_id,
                predictions,
            } => {
                let list = set.paragraphs.entry(paragraph_id).or_default();
                list.extend(predictions.into_iter().map(|p| Prediction {
                    target: PredictionTarget::Span {
                        token_start: p.token_start,
                        token_end: p.token_end,
                    },
                    type_id: resolver.resolve(&p.type_id),
                }));
            }
            PredictionRecord::Strings {
                paragraph_id,
                entities,
            } => {
                let list = set.paragraphs.entry(paragraph_id).or_default();
                for group in entities {
                    let type_id = resolver.resolve(&group.entity_type);
                    list.extend(
                        group
                            .entities
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(|s| Prediction {
                                target: PredictionTarget::Surface(s.to_string()),
                                type_id: type_id.clone(),
                            }),
                    );
                }
            }
        }
    }
    Ok(set)
}

/// Gold mentions and predicted mentions of one paragraph.
pub type GoldAndPredicted = (Vec<TypedMention>, Vec<TypedMention>);

/// Every (span text, type) pair tagged in a paragraph.
pub fn gold_mentions(paragraph: &AnnotatedParagraph) -> Vec<TypedMention> {
    paragraph
        .spans
        .iter()
        .flat_map(|s| {
            let text = paragraph.span_text(s);
            s.type_ids
                .iter()
                .map(move |t| TypedMention::new(text, t.clone()))
        })
        .collect()
}

impl PredictionSet {
    /// Resolves predictions to text against the gold paragraphs and pairs them
    /// with the gold mentions. Only paragraphs present in the prediction set are scored.
    pub fn pair_with_gold(
        &self,
        dataset: &SilverDataset,
    ) -> Result<Vec<GoldAndPredicted>, EvalError> {
        let gold = dataset.by_id();
        self.paragraphs
            .iter()
            .map(|(pid, preds)| {
                let p = gold
                    .get(pid.as_str())
                    .ok_or_else(|| EvalError::UnknownParagraph(pid.clone()))?;
                let mut resolved = Vec::with_capacity(preds.len());
                for pred in preds {
                    let text = match &pred.target {
                        PredictionTarget::Surface(s) => s.clone(),
                        PredictionTarget::Span {
                            token_start,
                            token_end,
                        } => {
                            if !(token_start < token_end
                                && *token_end <= p.paragraph.tokens().len())
                            {
                                return Err(EvalError::SpanOutOfRange {
                                    paragraph_id: pid.clone(),
                                    start: *token_start,
                                    end: *token_end,
                                });
                            }
                            p.paragraph.span_text(*token_start, *token_end).to_string()
                        }
                    };
                    resolved.push(TypedMention::new(text, pred.type_id.clone()));
                }
                Ok((gold_mentions(p), resolved))
            })
            .collect()
    }

    pub fn has_type(&self, paragraph_id: &str, type_id: &str) -> bool {
        self.paragraphs
            .get(paragraph_id)
            .is_some_and(|ps| ps.iter().any(|p| p.type_id == type_id))
    }
}

/// Paragraphs whose gold annotation has no mention of `type_id`.
pub fn paragraphs_lacking_type<'a>(dataset: &'a SilverDataset, type_id: &str) -> Vec<&'a str> {
    dataset
        .paragraphs
        .iter()
        .filter(|p| !p.has_type(type_id))
        .map(|p| p.id())
        .collect()
}

/// Fraction of the given paragraphs with at least one predicted mention of `type_id`.
pub fn fp_rate<'a, I>(
    predictions: &PredictionSet,
    paragraphs: I,
    type_id: &str,
) -> Result<f64, EvalError>
where
    I: IntoIterator<Item = &'a str>,
{
    let ids: BTreeSet<&str> = paragraphs.into_iter().collect();
    if ids.is_empty() {
        return Err(EvalError::EmptyParagraphSet);
    }
    let hit = ids
        .iter()
        .filter(|id| predictions.has_type(id, type_id))
        .count();
    Ok(hit as f64 / ids.len() as f64)
}
