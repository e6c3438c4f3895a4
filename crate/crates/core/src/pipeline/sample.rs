use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::SilverDataset;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleDraw {
    pub paragraph_id: String,
    /// The type whose turn produced this draw.
    pub type_id: String,
}

/// Round-robin over types (seeded order), drawing for each an unseen paragraph
/// containing it, until `n` paragraphs are collected.
pub fn stratified_sample(
    dataset: &SilverDataset,
    n: usize,
    seed: u64,
) -> Result<Vec<SampleDraw>, PipelineError> {
    if n == 0 {
        return Err(PipelineError::EmptySample);
    }
    if n > dataset.len() {
        return Err(PipelineError::SampleTooLarge {
            requested: n,
            available: dataset.len(),
        });
    }
    let mut by_type: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for p in &dataset.paragraphs {
        for t in p.tagged_types() {
            by_type.entry(t.to_string()).or_default().push(p.id());
        }
    }
    let mut types: Vec<String> = by_type.keys().cloned().collect();
    types.shuffle(&mut seed::rng(seed, "sample/types"));
    let mut queues: Vec<(String, VecDeque<&str>)> = types
        .into_iter()
        .map(|t| {
            let mut cands = by_type.remove(&t).unwrap_or_default();
            cands.shuffle(&mut seed::rng(seed, &format!("sample/type/{t}")));
            (t, cands.into())
        })
        .collect();

    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut progressed = false;
        for (t, queue) in queues.iter_mut() {
            if out.len() == n {
                break;
            }
            while let Some(pid) = queue.pop_front() {
                if seen.insert(pid) {
                    out.push(SampleDraw {
                        paragraph_id: pid.to_string(),
                        type_id: t.clone(),
                    });
                    progressed = true;
                    break;
                }
            }
        }
        if !progressed {
            // remaining paragraphs carry no spans
            return Err(PipelineError::SampleTooLarge {
                requested: n,
                available: out.len(),
            });
        }
    }
    Ok(out)
}
