use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use super::matching::{match_exact, match_relaxed, Counts, TypedMention};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a zero denominator was replaced by 0.
    pub degenerate: bool,
}

fn ratio(num: usize, den: usize, degenerate: &mut bool) -> f64 {
    if den == 0 {
        *degenerate = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64, degenerate: &mut bool) -> f64 {
    if p + r == 0.0 {
        *degenerate = true;
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn prf(c: Counts) -> Scores {
    let mut degenerate = false;
    let precision = ratio(c.tp, c.tp + c.fp, &mut degenerate);
    let recall = ratio(c.tp, c.tp + c.fn_, &mut degenerate);
    let f1 = harmonic(precision, recall, &mut degenerate);
    Scores {
        precision,
        recall,
        f1,
        degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Average {
    /// Pool counts, then compute P/R/F1.
    Micro,
    /// Mean of per-type P, R and F1.
    Macro,
}

pub fn aggregate(per_type: &[Counts], mode: Average) -> Scores {
    match mode {
        Average::Micro => {
            let mut pooled = Counts::default();
            for c in per_type {
                pooled += *c;
            }
            prf(pooled)
        }
        Average::Macro => {
            if per_type.is_empty() {
                return Scores {
                    degenerate: true,
                    ..Scores::default()
                };
            }
            let n = per_type.len() as f64;
            let scores: Vec<Scores> = per_type.iter().map(|c| prf(*c)).collect();
            Scores {
                precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
                recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
                f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
                degenerate: scores.iter().any(|s| s.degenerate),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TypeScores {
    pub exact: Counts,
    pub relaxed: Counts,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_type: BTreeMap<String, TypeScores>,
    pub exact_micro: Scores,
    pub relaxed_micro: Scores,
    pub exact_macro: Scores,
    pub relaxed_macro: Scores,
}

fn dedup(items: Vec<TypedMention>) -> Vec<TypedMention> {
    let mut seen = BTreeSet::new();
    items
        .into_iter()
        .filter(|m| seen.insert((crate::corpus::fold(m.text.trim()), m.type_id.clone())))
        .collect()
}

/// Scores `(gold, predictions)` pairs, one per paragraph. Repeated
/// (case-folded text, type) entries are collapsed on both sides first.
pub fn evaluate<I>(paragraphs: I) -> EvalReport
where
    I: IntoIterator<Item = (Vec<TypedMention>, Vec<TypedMention>)>,
{
    let mut per_type: BTreeMap<String, TypeScores> = BTreeMap::new();
    for (gold, preds) in paragraphs {
        let (gold, preds) = (dedup(gold), dedup(preds));
        let types: BTreeSet<&str> = gold
            .iter()
            .chain(&preds)
            .map(|m| m.type_id.as_str())
            .collect();
        for t in types {
            let g: Vec<TypedMention> = gold.iter().filter(|m| m.type_id == t).cloned().collect();
            let p: Vec<TypedMention> = preds.iter().filter(|m| m.type_id == t).cloned().collect();
            let entry = per_type.entry(t.to_string()).or_default();
            entry.exact += match_exact(&g, &p);
            entry.relaxed += match_relaxed(&g, &p);
        }
    }
    let exact: Vec<Counts> = per_type.values().map(|s| s.exact).collect();
    let relaxed: Vec<Counts> = per_type.values().map(|s| s.relaxed).collect();
    EvalReport {
        exact_micro: aggregate(&exact, Average::Micro),
        relaxed_micro: aggregate(&relaxed, Average::Micro),
        exact_macro: aggregate(&exact, Average::Macro),
        relaxed_macro: aggregate(&relaxed, Average::Macro),
        per_type,
    }
}

impl EvalReport {
    /// Exact P/R/F1 then Relaxed P/R/F1 per type, with MICRO and MACRO rows.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "type_id\texact_precision\texact_recall\texact_f1\trelaxed_precision\trelaxed_recall\trelaxed_f1\texact_tp\texact_fp\texact_fn\trelaxed_tp\trelaxed_fp\trelaxed_fn"
        )?;
        let row =
            |out: &mut W, name: &str, e: Scores, r: Scores, counts: Option<(Counts, Counts)>| {
                write!(
                    out,
                    "{name}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                    e.precision, e.recall, e.f1, r.precision, r.recall, r.f1
                )?;
                match counts {
                    Some((ec, rc)) => writeln!(
                        out,
                        "\t{}\t{}\t{}\t{}\t{}\t{}",
                        ec.tp, ec.fp, ec.fn_, rc.tp, rc.fp, rc.fn_
                    ),
                    None => writeln!(out, "\t\t\t\t\t\t"),
                }
            };
        let mut pooled = (Counts::default(), Counts::default());
        for (t, s) in &self.per_type {
            row(
                &mut out,
                t,
                prf(s.exact),
                prf(s.relaxed),
                Some((s.exact, s.relaxed)),
            )?;
            pooled.0 += s.exact;
            pooled.1 += s.relaxed;
        }
        row(
            &mut out,
            "MICRO",
            self.exact_micro,
            self.relaxed_micro,
            Some(pooled),
        )?;
        row(
            &mut out,
            "MACRO",
            self.exact_macro,
            self.relaxed_macro,
            None,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tp() {
        let s = prf(Counts {
            tp: 1,
            fp: 0,
            fn_: 0,
        });
        assert_eq!(
            (s.precision, s.recall, s.f1, s.degenerate),
            (1.0, 1.0, 1.0, false)
        );
    }

    #[test]
    fn all_zero_is_degenerate() {
        let s = prf(Counts::default());
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        assert!(s.degenerate);
    }

    #[test]
    fn micro_pools_counts() {
        let s = aggregate(
            &[
                Counts {
                    tp: 1,
                    fp: 1,
                    fn_: 0,
                },
                Counts {
                    tp: 0,
                    fp: 0,
                    fn_: 1,
                },
            ],
            Average::Micro,
        );
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
        let m = aggregate(
            &[
                Counts {
                    tp: 1,
                    fp: 1,
                    fn_: 0,
                },
                Counts {
                    tp: 0,
                    fp: 0,
                    fn_: 1,
                },
            ],
            Average::Macro,
        );
        // type 1: P=0.5 R=1 F1=2/3; type 2: all zero
        assert!((m.f1 - 1.0 / 3.0).abs() < 1e-15);
        assert!(m.degenerate);
    }

    #[test]
    fn micro_equals_macro_for_identical_types() {
        let c = Counts {
            tp: 3,
            fp: 2,
            fn_: 4,
        };
        let (mi, ma) = (
            aggregate(&[c, c, c], Average::Micro),
            aggregate(&[c, c, c], Average::Macro),
        );
        assert!((mi.precision - ma.precision).abs() < 1e-15);
        assert!((mi.recall - ma.recall).abs() < 1e-15);
        assert!((mi.f1 - ma.f1).abs() < 1e-15);
    }
}
