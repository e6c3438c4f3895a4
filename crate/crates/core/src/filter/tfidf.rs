use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Paragraph;
use crate::seed::fnv1a;

/// Sparse vector as `(feature index, value)` pairs sorted by index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector(pub Vec<(u32, f64)>);

impl SparseVector {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&(_, v)| v == 0.0)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.0.iter().map(|&(i, v)| dense[i as usize] * v).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for &(i, v) in &self.0 {
            out[i as usize] = v;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyEntry {
    pub token: String,
    pub index: u32,
    pub df: u32,
}

/// Case-folded token → (feature index, document frequency), over `documents` training paragraphs.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfVocabulary {
    terms: HashMap<String, (u32, u32)>,
    tokens: Vec<String>,
    documents: u32,
}

impl TfidfVocabulary {
    /// Keeps tokens seen in at least `min_df` paragraphs; indices follow
    /// lexicographic token order.
    pub fn build<'a, I>(paragraphs: I, min_df: u32) -> Self
    where
        I: IntoIterator<Item = &'a Paragraph>,
    {
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        let mut documents = 0u32;
        for p in paragraphs {
            documents += 1;
            let distinct: HashSet<String> = p.folded_tokens().into_iter().collect();
            for t in distinct {
                *df.entry(t).or_default() += 1;
            }
        }
        let entries = df
            .into_iter()
            .filter(|&(_, d)| d >= min_df.max(1))
            .enumerate()
            .map(|(i, (token, df))| VocabularyEntry {
                token,
                index: i as u32,
                df,
            });
        Self::from_entries(documents, entries).expect("indices are dense by construction")
    }

    pub fn from_entries<I>(documents: u32, entries: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = VocabularyEntry>,
    {
        let mut pairs: Vec<VocabularyEntry> = entries.into_iter().collect();
        pairs.sort_by_key(|e| e.index);
        let mut terms = HashMap::with_capacity(pairs.len());
        let mut tokens = Vec::with_capacity(pairs.len());
        for (i, e) in pairs.into_iter().enumerate() {
            if e.index as usize != i {
                return Err(format!("feature indices not dense at {i}"));
            }
            if e.df == 0 || e.df > documents {
                return Err(format!(
                    "document frequency {} of `{}` outside 1..={documents}",
                    e.df, e.token
                ));
            }
            if terms.insert(e.token.clone(), (e.index, e.df)).is_some() {
                return Err(format!("duplicate token `{}`", e.token));
            }
            tokens.push(e.token);
        }
        Ok(TfidfVocabulary {
            terms,
            tokens,
            documents,
        })
    }

    pub fn entries(&self) -> Vec<VocabularyEntry> {
        self.tokens
            .iter()
            .map(|t| {
                let (index, df) = self.terms[t];
                VocabularyEntry {
                    token: t.clone(),
                    index,
                    df,
                }
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn documents(&self) -> u32 {
        self.documents
    }

    pub fn get(&self, token: &str) -> Option<(u32, u32)> {
        self.terms.get(token).copied()
    }

    /// Smoothed idf: ln((1 + N) / (1 + df)) + 1.
    pub fn idf(&self, df: u32) -> f64 {
        ((1.0 + f64::from(self.documents)) / (1.0 + f64::from(df))).ln() + 1.0
    }

    /// Content hash used to pair models with the vocabulary they were trained on.
    pub fn hash(&self) -> String {
        let mut buf = Vec::new();
        buf.extend_from_slice(&self.documents.to_le_bytes());
        for t in &self.tokens {
            let (i, df) = self.terms[t];
            buf.extend_from_slice(t.as_bytes());
            buf.push(0);
            buf.extend_from_slice(&i.to_le_bytes());
            buf.extend_from_slice(&df.to_le_bytes());
        }
        format!("{:016x}", fnv1a(&buf))
    }
}

/// Raw-count tf times smoothed idf, L2-normalized. Out-of-vocabulary tokens are ignored.
pub fn featurize(paragraph: &Paragraph, vocab: &TfidfVocabulary) -> SparseVector {
    let mut counts: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
    for tok in paragraph.folded_tokens() {
        if let Some((idx, df)) = vocab.get(&tok) {
            counts.entry(idx).or_insert((0, df)).0 += 1;
        }
    }
    let mut values: Vec<(u32, f64)> = counts
        .into_iter()
        .map(|(i, (tf, df))| (i, f64::from(tf) * vocab.idf(df)))
        .collect();
    let norm = values.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, v) in &mut values {
            *v /= norm;
        }
    }
    SparseVector(values)
}
