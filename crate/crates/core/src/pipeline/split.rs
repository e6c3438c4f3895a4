use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::{LoadError, SilverDataset};
use crate::jsonl;
use crate::seed;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Share of each type's mentions targeted for the train paragraphs.
    pub paragraph_fraction: f64,
    /// Share of types assigned to the train type set.
    pub type_fraction: f64,
    pub seed: u64,
    /// Explicit test types; overrides the seeded type draw.
    pub test_types: Option<Vec<String>>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            paragraph_fraction: 0.8,
            type_fraction: 0.8,
            seed: 0,
            test_types: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitAssignment {
    pub paragraphs: BTreeMap<String, Split>,
    pub types: BTreeMap<String, Split>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TypeBalance {
    pub train_paragraphs: usize,
    pub test_paragraphs: usize,
    pub train_mentions: usize,
    pub test_mentions: usize,
}

impl TypeBalance {
    pub fn train_share(&self) -> f64 {
        let total = self.train_mentions + self.test_mentions;
        if total == 0 {
            0.0
        } else {
            self.train_mentions as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SplitReport {
    pub per_type: BTreeMap<String, TypeBalance>,
    /// Types whose proportion constraint cannot be met (single paragraph).
    pub unsatisfiable: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SplitRecord {
    Paragraph { paragraph_id: String, split: Split },
    Type { type_id: String, split: Split },
}

impl SplitAssignment {
    pub fn test_types(&self) -> Vec<String> {
        self.types
            .iter()
            .filter(|(_, s)| **s == Split::Test)
            .map(|(t, _)| t.clone())
            .collect()
    }

    pub fn train_types(&self) -> Vec<String> {
        self.types
            .iter()
            .filter(|(_, s)| **s == Split::Train)
            .map(|(t, _)| t.clone())
            .collect()
    }

    pub fn paragraphs_in(&self, split: Split) -> Vec<&str> {
        self.paragraphs
            .iter()
            .filter(|(_, s)| **s == split)
            .map(|(p, _)| p.as_str())
            .collect()
    }

    /// Paragraph records, then type records, each in id order.
    pub fn write_to<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        let recs: Vec<SplitRecord> = self
            .paragraphs
            .iter()
            .map(|(p, s)| SplitRecord::Paragraph {
                paragraph_id: p.clone(),
                split: *s,
            })
            .chain(self.types.iter().map(|(t, s)| SplitRecord::Type {
                type_id: t.clone(),
                split: *s,
            }))
            .collect();
        jsonl::write_to(out, &recs)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut out)?;
        std::io::Write::flush(&mut out)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let mut out = SplitAssignment::default();
        for rec in jsonl::read::<SplitRecord>(path)? {
            match rec?.1 {
                SplitRecord::Paragraph {
                    paragraph_id,
                    split,
                } => {
                    out.paragraphs.insert(paragraph_id, split);
                }
                SplitRecord::Type { type_id, split } => {
                    out.types.insert(type_id, split);
                }
            }
        }
        Ok(out)
    }
}

/// Greedy stratified paragraph split plus an independent seeded type split.
///
/// Paragraphs are visited in seeded random order; each goes to whichever side
/// has the larger remaining mention need, summed over the types it mentions
/// (targets: `fraction × total mentions` per type). Ties fall back to the
/// paragraph-count need, then to train.
pub fn split(
    dataset: &SilverDataset,
    config: &SplitConfig,
) -> Result<(SplitAssignment, SplitReport), PipelineError> {
    if dataset.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    for (name, f) in [
        ("paragraph_fraction", config.paragraph_fraction),
        ("type_fraction", config.type_fraction),
    ] {
        if !(0.0..=1.0).contains(&f) {
            return Err(PipelineError::Config(format!(
                "{name} must lie in [0, 1], got {f}"
            )));
        }
    }
    let f = config.paragraph_fraction;

    let per_paragraph: Vec<BTreeMap<&str, usize>> = dataset
        .paragraphs
        .iter()
        .map(|p| {
            let mut counts = BTreeMap::new();
            for s in &p.spans {
                for t in &s.type_ids {
                    *counts.entry(t.as_str()).or_default() += 1;
                }
            }
            counts
        })
        .collect();
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    let mut paragraph_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for counts in &per_paragraph {
        for (t, c) in counts {
            *totals.entry(t).or_default() += c;
            *paragraph_counts.entry(t).or_default() += 1;
        }
    }

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut seed::rng(config.seed, "split/paragraphs"));

    let mut assigned: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let (mut n_train, mut n_test) = (0usize, 0usize);
    let n = dataset.len() as f64;
    let mut assignment = SplitAssignment::default();
    for &i in &order {
        let counts = &per_paragraph[i];
        let (mut need_train, mut need_test) = (0.0, 0.0);
        for (t, &c) in counts {
            let total = totals[t] as f64;
            let (tr, te) = assigned.get(t).copied().unwrap_or_default();
            let target_train = f * total;
            need_train += c as f64 * (target_train - tr as f64);
            need_test += c as f64 * ((total - target_train) - te as f64);
        }
        let side = if need_train > need_test + EPS {
            Split::Train
        } else if need_test > need_train + EPS {
            Split::Test
        } else {
            let g_train = f * n - n_train as f64;
            let g_test = (1.0 - f) * n - n_test as f64;
            if g_test > g_train + EPS {
                Split::Test
            } else {
                Split::Train
            }
        };
        for (t, &c) in counts {
            let e = assigned.entry(t).or_default();
            match side {
                Split::Train => e.0 += c,
                Split::Test => e.1 += c,
            }
        }
        match side {
            Split::Train => n_train += 1,
            Split::Test => n_test += 1,
        }
        assignment
            .paragraphs
            .insert(dataset.paragraphs[i].id().to_string(), side);
    }

    let mut report = SplitReport::default();
    for (i, p) in dataset.paragraphs.iter().enumerate() {
        let side = assignment.paragraphs[p.id()];
        for (t, &c) in &per_paragraph[i] {
            let b = report.per_type.entry(t.to_string()).or_default();
            match side {
                Split::Train => {
                    b.train_paragraphs += 1;
                    b.train_mentions += c;
                }
                Split::Test => {
                    b.test_paragraphs += 1;
                    b.test_mentions += c;
                }
            }
        }
    }
    for (t, &c) in &paragraph_counts {
        if c < 2 && f > 0.0 && f < 1.0 {
            log::warn!(
                "type `{t}` occurs in a single paragraph; its split proportion cannot be met"
            );
            report.unsatisfiable.push(t.to_string());
        }
    }

    let all_types: Vec<String> = dataset.types().into_iter().collect();
    let test: BTreeSet<String> = match &config.test_types {
        Some(list) => {
            if let Some(t) = list.iter().find(|t| !all_types.contains(t)) {
                return Err(PipelineError::Config(format!(
                    "test type `{t}` does not occur in the dataset"
                )));
            }
            list.iter().cloned().collect()
        }
        None => {
            let mut shuffled = all_types.clone();
            shuffled.shuffle(&mut seed::rng(config.seed, "split/types"));
            let k = ((1.0 - config.type_fraction) * all_types.len() as f64).round() as usize;
            shuffled.into_iter().take(k).collect()
        }
    };
    for t in all_types {
        let side = if test.contains(&t) {
            Split::Test
        } else {
            Split::Train
        };
        assignment.types.insert(t, side);
    }
    Ok((assignment, report))
}
