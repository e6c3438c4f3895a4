//! Relaxed gazetteer matching: every alias word must match exactly (after
//! case folding), in order, with at most `slop` intervening tokens in total.
//!
//! Candidate starts come from a hash table keyed by each alias's first token;
//! each candidate is verified by a bounded forward scan that takes the earliest
//! occurrence of every following alias token, which yields the minimal-gap
//! embedding for that start.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::tokenize::{fold, tokenize};
use crate::corpus::{Lexicon, LinkGraph, LoadError, Paragraph};
use crate::jsonl;

pub const DEFAULT_SLOP: usize = 5;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("entity `{entity_id}` has alias {alias:?} with no tokens")]
    EmptyAlias { entity_id: String, alias: String },
}

const UNKNOWN: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Pattern {
    entity: u32,
    alias: String,
    tokens: Vec<u32>,
}

/// Compiled aliases of a lexicon. Immutable and shareable across threads.
#[derive(Debug, Clone, Default)]
pub struct PatternSet {
    vocab: HashMap<String, u32>,
    words: Vec<String>,
    entity_ids: Vec<String>,
    entity_lookup: HashMap<String, u32>,
    patterns: Vec<Pattern>,
    by_first: HashMap<u32, Vec<u32>>,
}

impl PatternSet {
    /// Builds from `(entity_id, alias)` pairs; repeated pairs collapse to one pattern.
    pub fn from_aliases<I, E, A>(pairs: I) -> Result<Self, MatchError>
    where
        I: IntoIterator<Item = (E, A)>,
        E: Into<String>,
        A: Into<String>,
    {
        let mut set = PatternSet::default();
        let mut seen = HashSet::new();
        for (entity_id, alias) in pairs {
            let (entity_id, alias) = (entity_id.into(), alias.into());
            if !seen.insert((entity_id.clone(), alias.clone())) {
                continue;
            }
            let folded: Vec<String> = tokenize(&alias).iter().map(|t| fold(&t.text)).collect();
            if folded.is_empty() {
                return Err(MatchError::EmptyAlias { entity_id, alias });
            }
            let tokens: Vec<u32> = folded.into_iter().map(|w| set.intern(w)).collect();
            let entity = match set.entity_lookup.get(&entity_id) {
                Some(&e) => e,
                None => {
                    let e = set.entity_ids.len() as u32;
                    set.entity_ids.push(entity_id.clone());
                    set.entity_lookup.insert(entity_id, e);
                    e
                }
            };
            let idx = set.patterns.len() as u32;
            set.by_first.entry(tokens[0]).or_default().push(idx);
            set.patterns.push(Pattern {
                entity,
                alias,
                tokens,
            });
        }
        Ok(set)
    }

    fn intern(&mut self, word: String) -> u32 {
        if let Some(&id) = self.vocab.get(&word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.clone());
        self.vocab.insert(word, id);
        id
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// `(entity_id, alias, folded tokens)` of every pattern, in compile order.
    pub fn patterns(&self) -> impl Iterator<Item = (&str, &str, Vec<&str>)> {
        self.patterns.iter().map(|p| {
            (
                self.entity_ids[p.entity as usize].as_str(),
                p.alias.as_str(),
                p.tokens
                    .iter()
                    .map(|&t| self.words[t as usize].as_str())
                    .collect(),
            )
        })
    }

    fn entity_position(&self, entity_id: &str) -> Option<u32> {
        self.entity_lookup.get(entity_id).copied()
    }
}

/// Compiles every alias of every lexicon entity.
pub fn compile(lexicon: &Lexicon) -> Result<PatternSet, MatchError> {
    PatternSet::from_aliases(lexicon.entities().iter().flat_map(|e| {
        e.aliases
            .iter()
            .map(move |a| (e.entity_id.clone(), a.clone()))
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawMatch {
    pub paragraph_id: String,
    pub token_start: usize,
    pub token_end: usize,
    pub entity_id: String,
    pub alias: String,
    /// Intervening non-alias tokens inside the span.
    pub gap_count: usize,
}

/// All matches of `patterns` in one paragraph.
pub fn scan(paragraph: &Paragraph, patterns: &PatternSet, slop: usize) -> Vec<RawMatch> {
    scan_filtered(paragraph, patterns, slop, |_| true)
}

fn scan_filtered(
    paragraph: &Paragraph,
    patterns: &PatternSet,
    slop: usize,
    allow: impl Fn(u32) -> bool,
) -> Vec<RawMatch> {
    if patterns.is_empty() {
        return Vec::new();
    }
    let ids: Vec<u32> = paragraph
        .tokens()
        .iter()
        .map(|t| {
            patterns
                .vocab
                .get(&fold(&t.text))
                .copied()
                .unwrap_or(UNKNOWN)
        })
        .collect();
    // end of the last accepted match per pattern, for overlap reduction
    let mut last_end: HashMap<u32, usize> = HashMap::new();
    let mut out = Vec::new();
    for start in 0..ids.len() {
        let Some(cands) = patterns.by_first.get(&ids[start]) else {
            continue;
        };
        for &pi in cands {
            let p = &patterns.patterns[pi as usize];
            if !allow(p.entity) {
                continue;
            }
            if last_end.get(&pi).is_some_and(|&e| start < e) {
                continue;
            }
            if let Some(end) = embed(&ids, start, &p.tokens, slop) {
                last_end.insert(pi, end);
                out.push(RawMatch {
                    paragraph_id: paragraph.paragraph_id.clone(),
                    token_start: start,
                    token_end: end,
                    entity_id: patterns.entity_ids[p.entity as usize].clone(),
                    alias: p.alias.clone(),
                    gap_count: end - start - p.tokens.len(),
                });
            }
        }
    }
    sort_matches(&mut out);
    out
}

/// Earliest in-order embedding of `pattern` starting at `start`; returns the
/// exclusive end token if the total gap stays within `slop`.
fn embed(ids: &[u32], start: usize, pattern: &[u32], slop: usize) -> Option<usize> {
    let limit = (start + pattern.len() + slop).min(ids.len());
    let mut pos = start;
    for &tok in &pattern[1..] {
        pos = (pos + 1..limit).find(|&j| ids[j] == tok)?;
    }
    Some(pos + 1)
}

fn sort_matches(matches: &mut [RawMatch]) {
    matches.sort_by(|a, b| {
        (a.token_start, &a.entity_id, a.token_end, &a.alias).cmp(&(
            b.token_start,
            &b.entity_id,
            b.token_end,
            &b.alias,
        ))
    });
}

/// Output of a corpus scan.
#[derive(Debug, Clone, Default)]
pub struct ScanOutput {
    pub matches: Vec<RawMatch>,
    /// Paragraph ids named in the link graph but absent from the corpus.
    pub missing_paragraphs: Vec<String>,
}

/// Scans a corpus, in corpus order. With a link graph, each entity is only
/// searched in the paragraphs listed for it.
pub fn scan_corpus(
    corpus: &[Paragraph],
    patterns: &PatternSet,
    linkgraph: Option<&LinkGraph>,
    slop: usize,
) -> ScanOutput {
    let Some(graph) = linkgraph else {
        let matches = corpus
            .par_iter()
            .flat_map_iter(|p| scan(p, patterns, slop))
            .collect();
        return ScanOutput {
            matches,
            missing_paragraphs: Vec::new(),
        };
    };

    let present: HashSet<&str> = corpus.iter().map(|p| p.paragraph_id.as_str()).collect();
    let mut allowed: HashMap<&str, HashSet<u32>> = HashMap::new();
    let mut missing = BTreeSet::new();
    for (entity_id, paragraphs) in &graph.links {
        let Some(e) = patterns.entity_position(entity_id) else {
            log::debug!("link graph entity `{entity_id}` has no patterns");
            continue;
        };
        for pid in paragraphs {
            if present.contains(pid.as_str()) {
                allowed.entry(pid.as_str()).or_default().insert(e);
            } else {
                missing.insert(pid.clone());
            }
        }
    }
    if !missing.is_empty() {
        log::warn!(
            "{} link-graph paragraph(s) not found in corpus",
            missing.len()
        );
    }
    let matches = corpus
        .par_iter()
        .flat_map_iter(|p| match allowed.get(p.paragraph_id.as_str()) {
            Some(ents) => scan_filtered(p, patterns, slop, |e| ents.contains(&e)),
            None => Vec::new(),
        })
        .collect();
    ScanOutput {
        matches,
        missing_paragraphs: missing.into_iter().collect(),
    }
}

pub fn load_matches(path: &Path) -> Result<Vec<RawMatch>, LoadError> {
    jsonl::read::<RawMatch>(path)?
        .map(|r| r.map(|(_, m)| m))
        .collect()
}

pub fn save_matches(path: &Path, matches: &[RawMatch]) -> std::io::Result<()> {
    jsonl::write(path, matches)
}
