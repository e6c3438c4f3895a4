use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::SilverDataset;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Judgment {
    Correct,
    Incorrect,
}

impl Judgment {
    pub fn parse(s: &str) -> Result<Option<Judgment>, String> {
        match s.trim().to_lowercase().as_str() {
            "" => Ok(None),
            "correct" | "c" | "y" | "yes" | "1" | "true" => Ok(Some(Judgment::Correct)),
            "incorrect" | "i" | "n" | "no" | "0" | "false" => Ok(Some(Judgment::Incorrect)),
            other => Err(format!("unrecognized judgment {other:?}")),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Judgment::Correct => "correct",
            Judgment::Incorrect => "incorrect",
        }
    }
}

/// One typed mention for human review.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditRow {
    pub paragraph_id: String,
    pub paragraph_text: String,
    pub token_start: usize,
    pub token_end: usize,
    pub span_text: String,
    pub entity_id: String,
    pub type_id: String,
    pub judgment: Option<Judgment>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditWorksheet {
    pub paragraphs: usize,
    pub rows: Vec<AuditRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub typed_mentions: usize,
    pub judged: usize,
    pub correct: usize,
    /// `correct / judged`, 0 when nothing is judged.
    pub accuracy: f64,
}

const HEADER: [&str; 8] = [
    "paragraph_id",
    "token_start",
    "token_end",
    "span_text",
    "entity_id",
    "type_id",
    "judgment",
    "paragraph_text",
];

// TSV cells cannot hold raw tabs or newlines
fn escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('\t', "\\t")
        .replace('\n', "\\n")
        .replace('\r', "\\r")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

impl AuditWorksheet {
    pub fn report(&self) -> AuditReport {
        let judged = self.rows.iter().filter(|r| r.judgment.is_some()).count();
        let correct = self
            .rows
            .iter()
            .filter(|r| r.judgment == Some(Judgment::Correct))
            .count();
        AuditReport {
            typed_mentions: self.rows.len(),
            judged,
            correct,
            accuracy: if judged == 0 {
                0.0
            } else {
                correct as f64 / judged as f64
            },
        }
    }

    pub fn write_to<W: std::io::Write>(&self, out: W) -> Result<(), PipelineError> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(b'\t')
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(out);
        let err = |e: csv::Error| PipelineError::Worksheet(e.to_string());
        w.write_record(HEADER).map_err(err)?;
        for r in &self.rows {
            w.write_record([
                escape(&r.paragraph_id),
                r.token_start.to_string(),
                r.token_end.to_string(),
                escape(&r.span_text),
                escape(&r.entity_id),
                escape(&r.type_id),
                r.judgment.map(Judgment::as_str).unwrap_or("").to_string(),
                escape(&r.paragraph_text),
            ])
            .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .quoting(false)
            .flexible(false)
            .from_path(path)
            .map_err(|e| PipelineError::Worksheet(e.to_string()))?;
        let mut rows = Vec::new();
        let mut paragraphs = std::collections::BTreeSet::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| PipelineError::Worksheet(format!("line {line}: {e}")))?;
            if rec.len() != HEADER.len() {
                return Err(PipelineError::Worksheet(format!(
                    "line {line}: expected {} columns",
                    HEADER.len()
                )));
            }
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| PipelineError::Worksheet(format!("line {line}: {e}")))
            };
            let judgment = Judgment::parse(&rec[6])
                .map_err(|e| PipelineError::Worksheet(format!("line {line}: {e}")))?;
            let row = AuditRow {
                paragraph_id: unescape(&rec[0]),
                token_start: num(&rec[1])?,
                token_end: num(&rec[2])?,
                span_text: unescape(&rec[3]),
                entity_id: unescape(&rec[4]),
                type_id: unescape(&rec[5]),
                judgment,
                paragraph_text: unescape(&rec[7]),
            };
            paragraphs.insert(row.paragraph_id.clone());
            rows.push(row);
        }
        Ok(AuditWorksheet {
            paragraphs: paragraphs.len(),
            rows,
        })
    }
}

/// Samples `n` paragraphs uniformly (fewer if the dataset is smaller) and lists
/// every typed mention in them, in dataset order.
pub fn audit_sample(dataset: &SilverDataset, n: usize, seed: u64) -> AuditWorksheet {
    let n = n.min(dataset.len());
    let mut picked =
        index::sample(&mut seed::rng(seed, "audit/sample"), dataset.len(), n).into_vec();
    picked.sort_unstable();
    let mut rows = Vec::new();
    for i in &picked {
        let p = &dataset.paragraphs[*i];
        for s in &p.spans {
            for t in &s.type_ids {
                rows.push(AuditRow {
                    paragraph_id: p.id().to_string(),
                    paragraph_text: p.paragraph.text.clone(),
                    token_start: s.token_start,
                    token_end: s.token_end,
                    span_text: p.span_text(s).to_string(),
                    entity_id: s.entity_id.clone(),
                    type_id: t.clone(),
                    judgment: None,
                });
            }
        }
    }
    AuditWorksheet {
        paragraphs: picked.len(),
        rows,
    }
}
