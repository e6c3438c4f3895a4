use std::collections::HashSet;

use crate::corpus::tokenize::{fold, tokenize};

/// A (surface text, type) pair on either side of the comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedMention {
    pub text: String,
    pub type_id: String,
}

impl TypedMention {
    pub fn new(text: impl Into<String>, type_id: impl Into<String>) -> Self {
        TypedMention {
            text: text.into(),
            type_id: type_id.into(),
        }
    }

    fn folded(&self) -> String {
        fold(self.text.trim())
    }

    /// Case-folded tokens containing at least one alphanumeric character.
    fn words(&self) -> HashSet<String> {
        tokenize(&self.text)
            .into_iter()
            .filter(|t| t.text.chars().any(char::is_alphanumeric))
            .map(|t| fold(&t.text))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

/// One-to-one greedy consumption: each prediction, in input order, takes the
/// first unconsumed gold mention it is compatible with.
fn greedy<F>(
    gold: &[TypedMention],
    preds: &[TypedMention],
    consumed: &mut [bool],
    compatible: F,
) -> usize
where
    F: Fn(usize, usize) -> bool,
{
    let mut tp = 0;
    for p in 0..preds.len() {
        if let Some(g) = (0..gold.len()).find(|&g| !consumed[g] && compatible(p, g)) {
            consumed[g] = true;
            tp += 1;
        }
    }
    tp
}

/// TP iff the case-folded strings and the types are equal.
pub fn match_exact(gold: &[TypedMention], preds: &[TypedMention]) -> Counts {
    let gf: Vec<String> = gold.iter().map(TypedMention::folded).collect();
    let pf: Vec<String> = preds.iter().map(TypedMention::folded).collect();
    let mut consumed = vec![false; gold.len()];
    let tp = greedy(gold, preds, &mut consumed, |p, g| {
        preds[p].type_id == gold[g].type_id && pf[p] == gf[g]
    });
    Counts {
        tp,
        fp: preds.len() - tp,
        fn_: gold.len() - tp,
    }
}

/// TP iff the types are equal and the strings share at least one word.
/// Exact pairs are consumed first, then the remaining predictions greedily.
pub fn match_relaxed(gold: &[TypedMention], preds: &[TypedMention]) -> Counts {
    let gf: Vec<String> = gold.iter().map(TypedMention::folded).collect();
    let pf: Vec<String> = preds.iter().map(TypedMention::folded).collect();
    let gw: Vec<HashSet<String>> = gold.iter().map(TypedMention::words).collect();
    let pw: Vec<HashSet<String>> = preds.iter().map(TypedMention::words).collect();
    let mut consumed = vec![false; gold.len()];
    let mut used = vec![false; preds.len()];
    let mut tp = 0;
    for p in 0..preds.len() {
        if let Some(g) = (0..gold.len())
            .find(|&g| !consumed[g] && preds[p].type_id == gold[g].type_id && pf[p] == gf[g])
        {
            consumed[g] = true;
            used[p] = true;
            tp += 1;
        }
    }
    for p in 0..preds.len() {
        if used[p] {
            continue;
        }
        if let Some(g) = (0..gold.len()).find(|&g| {
            !consumed[g] && preds[p].type_id == gold[g].type_id && !pw[p].is_disjoint(&gw[g])
        }) {
            consumed[g] = true;
            tp += 1;
        }
    }
    Counts {
        tp,
        fp: preds.len() - tp,
        fn_: gold.len() - tp,
    }
}
