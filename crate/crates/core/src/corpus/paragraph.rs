use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::error::{LoadError, ValidationError};
use super::lexicon::Lexicon;
use super::tokenize::{fold, tokenize, Token};
use crate::jsonl;

/// A text unit with its (derived, never stored) token list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    pub paragraph_id: String,
    pub text: String,
    tokens: Vec<Token>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ParagraphRecord {
    paragraph_id: String,
    text: String,
}

impl Paragraph {
    pub fn new(paragraph_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Paragraph {
            paragraph_id: paragraph_id.into(),
            text,
            tokens,
        }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn folded_tokens(&self) -> Vec<String> {
        self.tokens.iter().map(|t| fold(&t.text)).collect()
    }

    /// Original text covering tokens `[start, end)`, intervening whitespace included.
    pub fn span_text(&self, start: usize, end: usize) -> &str {
        if start >= end || end > self.tokens.len() {
            return "";
        }
        &self.text[self.tokens[start].byte_start..self.tokens[end - 1].byte_end]
    }

    /// Char range covered by tokens `[start, end)`.
    pub fn span_chars(&self, start: usize, end: usize) -> (usize, usize) {
        (self.tokens[start].start, self.tokens[end - 1].end)
    }
}

/// Streams paragraphs from a corpus file; duplicate ids are not checked here.
pub fn read_corpus(
    path: &Path,
) -> Result<impl Iterator<Item = Result<Paragraph, LoadError>>, LoadError> {
    Ok(jsonl::read::<ParagraphRecord>(path)?
        .map(|r| r.map(|(_, rec)| Paragraph::new(rec.paragraph_id, rec.text))))
}

/// Loads a whole corpus, rejecting duplicate paragraph ids.
pub fn load_corpus(path: &Path) -> Result<Vec<Paragraph>, LoadError> {
    let display = path.display().to_string();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in jsonl::read::<ParagraphRecord>(path)? {
        let (line, rec) = rec?;
        if !seen.insert(rec.paragraph_id.clone()) {
            return Err(LoadError::invalid(
                &display,
                line,
                ValidationError::DuplicateId(rec.paragraph_id),
            ));
        }
        out.push(Paragraph::new(rec.paragraph_id, rec.text));
    }
    Ok(out)
}

pub fn save_corpus(path: &Path, corpus: &[Paragraph]) -> std::io::Result<()> {
    let recs: Vec<ParagraphRecord> = corpus
        .iter()
        .map(|p| ParagraphRecord {
            paragraph_id: p.paragraph_id.clone(),
            text: p.text.clone(),
        })
        .collect();
    jsonl::write(path, &recs)
}

/// Candidate paragraphs per entity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkGraph {
    pub links: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LinkRecord {
    entity_id: String,
    paragraph_ids: Vec<String>,
}

impl LinkGraph {
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let display = path.display().to_string();
        let mut links = BTreeMap::new();
        for rec in jsonl::read::<LinkRecord>(path)? {
            let (line, rec) = rec?;
            if links.contains_key(&rec.entity_id) {
                return Err(LoadError::invalid(
                    &display,
                    line,
                    ValidationError::DuplicateId(rec.entity_id),
                ));
            }
            links.insert(rec.entity_id, rec.paragraph_ids.into_iter().collect());
        }
        Ok(LinkGraph { links })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let recs: Vec<LinkRecord> = self
            .links
            .iter()
            .map(|(e, ps)| LinkRecord {
                entity_id: e.clone(),
                paragraph_ids: ps.iter().cloned().collect(),
            })
            .collect();
        jsonl::write(path, &recs)
    }

    pub fn insert(&mut self, entity_id: impl Into<String>, paragraph_id: impl Into<String>) {
        self.links
            .entry(entity_id.into())
            .or_default()
            .insert(paragraph_id.into());
    }

    pub fn paragraphs(&self, entity_id: &str) -> Option<&BTreeSet<String>> {
        self.links.get(entity_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionSpan {
    pub token_start: usize,
    pub token_end: usize,
    pub entity_id: String,
    pub type_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedParagraph {
    pub paragraph: Paragraph,
    pub spans: Vec<MentionSpan>,
}

#[derive(Serialize, Deserialize)]
struct AnnotatedRecord {
    paragraph_id: String,
    text: String,
    spans: Vec<MentionSpan>,
}

impl AnnotatedParagraph {
    pub fn id(&self) -> &str {
        &self.paragraph.paragraph_id
    }

    pub fn span_text(&self, span: &MentionSpan) -> &str {
        self.paragraph.span_text(span.token_start, span.token_end)
    }

    /// Distinct types tagged anywhere in the paragraph.
    pub fn tagged_types(&self) -> BTreeSet<&str> {
        self.spans
            .iter()
            .flat_map(|s| s.type_ids.iter().map(String::as_str))
            .collect()
    }

    pub fn has_type(&self, type_id: &str) -> bool {
        self.spans
            .iter()
            .any(|s| s.type_ids.iter().any(|t| t == type_id))
    }

    /// Number of typed mentions (span × type pairs).
    pub fn typed_mentions(&self) -> usize {
        self.spans.iter().map(|s| s.type_ids.len()).sum()
    }
}

/// Annotated paragraphs in output order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SilverDataset {
    pub paragraphs: Vec<AnnotatedParagraph>,
}

impl SilverDataset {
    pub fn len(&self) -> usize {
        self.paragraphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paragraphs.is_empty()
    }

    pub fn get(&self, paragraph_id: &str) -> Option<&AnnotatedParagraph> {
        self.paragraphs.iter().find(|p| p.id() == paragraph_id)
    }

    pub fn by_id(&self) -> BTreeMap<&str, &AnnotatedParagraph> {
        self.paragraphs.iter().map(|p| (p.id(), p)).collect()
    }

    /// Every type tagged in the dataset.
    pub fn types(&self) -> BTreeSet<String> {
        self.paragraphs
            .iter()
            .flat_map(|p| p.spans.iter().flat_map(|s| s.type_ids.iter().cloned()))
            .collect()
    }

    /// Checks that every span is non-empty, in range, and carries at least one type.
    fn check_spans(p: &AnnotatedParagraph) -> Result<(), ValidationError> {
        let n = p.paragraph.tokens().len();
        for s in &p.spans {
            if !(s.token_start < s.token_end && s.token_end <= n) {
                return Err(ValidationError::Invalid(format!(
                    "span [{}, {}) out of range for paragraph `{}` with {n} tokens",
                    s.token_start,
                    s.token_end,
                    p.id()
                )));
            }
            if s.type_ids.is_empty() {
                return Err(ValidationError::Invalid(format!(
                    "span in `{}` has no type_ids",
                    p.id()
                )));
            }
        }
        Ok(())
    }

    /// Checks span types against the lexicon: each span's types must be a
    /// subset of its entity's closed types, and themselves closed.
    pub fn validate_against(&self, lexicon: &Lexicon) -> Result<(), ValidationError> {
        for p in &self.paragraphs {
            for s in &p.spans {
                let allowed = lexicon.entity_closure(&s.entity_id).ok_or_else(|| {
                    ValidationError::Invalid(format!(
                        "unknown entity `{}` in `{}`",
                        s.entity_id,
                        p.id()
                    ))
                })?;
                if let Some(t) = s.type_ids.iter().find(|t| !allowed.contains(*t)) {
                    return Err(ValidationError::Invalid(format!(
                        "span of `{}` in `{}` carries type `{t}` outside its entity's types",
                        s.entity_id,
                        p.id()
                    )));
                }
                let closed = lexicon.hierarchy_closure(&s.type_ids)?;
                if closed.len() != s.type_ids.len() {
                    return Err(ValidationError::Invalid(format!(
                        "span of `{}` in `{}` is not closed under the type hierarchy",
                        s.entity_id,
                        p.id()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let display = path.display().to_string();
        let mut seen = HashSet::new();
        let mut paragraphs = Vec::new();
        for rec in jsonl::read::<AnnotatedRecord>(path)? {
            let (line, rec) = rec?;
            if !seen.insert(rec.paragraph_id.clone()) {
                return Err(LoadError::invalid(
                    &display,
                    line,
                    ValidationError::DuplicateId(rec.paragraph_id),
                ));
            }
            let p = AnnotatedParagraph {
                paragraph: Paragraph::new(rec.paragraph_id, rec.text),
                spans: rec.spans,
            };
            Self::check_spans(&p).map_err(|e| LoadError::invalid(&display, line, e))?;
            paragraphs.push(p);
        }
        Ok(SilverDataset { paragraphs })
    }

    pub fn write_to<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        for p in &self.paragraphs {
            let rec = AnnotatedRecord {
                paragraph_id: p.paragraph.paragraph_id.clone(),
                text: p.paragraph.text.clone(),
                spans: p.spans.clone(),
            };
            serde_json::to_writer(&mut *out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut out)?;
        std::io::Write::flush(&mut out)
    }
}
