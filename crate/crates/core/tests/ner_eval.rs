mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;
use silverner::ner_eval::{
    aggregate, evaluate, fp_rate, load_predictions, match_exact, match_relaxed, prf, Average,
    Counts, EvalError, PredictionSet, TypeResolver, TypedMention,
};

fn c(tp: usize, fp: usize, fn_: usize) -> Counts {
    Counts { tp, fp, fn_ }
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

/// Maximum bipartite matching by augmenting paths (Kuhn's algorithm).
fn optimal_relaxed_tp(gold: &[TypedMention], preds: &[TypedMention]) -> usize {
    let edge = |p: usize, g: usize| {
        preds[p].type_id == gold[g].type_id
            && words(&preds[p].text)
                .iter()
                .any(|w| words(&gold[g].text).contains(w))
    };
    fn augment(
        p: usize,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
        edge: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        for g in 0..owner.len() {
            if edge(p, g) && !seen[g] {
                seen[g] = true;
                if owner[g].is_none_or(|q| augment(q, seen, owner, edge)) {
                    owner[g] = Some(p);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; gold.len()];
    (0..preds.len())
        .filter(|&p| augment(p, &mut vec![false; gold.len()], &mut owner, &edge))
        .count()
}

#[test]
fn fixture_report_matches_hand_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("preds.jsonl");
    std::fs::write(&path, NER_FIXTURE_PREDICTIONS).unwrap();
    let dataset = ner_fixture_dataset();
    let resolver = TypeResolver::new(dataset.types()).with_lexicon(&ner_fixture_lexicon());
    let report = evaluate(
        load_predictions(&path, &resolver)
            .unwrap()
            .pair_with_gold(&dataset)
            .unwrap(),
    );
    for (t, e, r) in NER_FIXTURE_COUNTS {
        assert_eq!(report.per_type[*t].exact, c(e.0, e.1, e.2), "{t}");
        assert_eq!(report.per_type[*t].relaxed, c(r.0, r.1, r.2), "{t}");
    }
    let sax = prf(report.per_type[SAX].relaxed);
    assert!((sax.precision - 2.0 / 3.0).abs() < 1e-12 && (sax.recall - 2.0 / 3.0).abs() < 1e-12);
    let forest = prf(report.per_type[FOREST].relaxed);
    assert!(
        (forest.precision - 0.25).abs() < 1e-12
            && forest.recall == 1.0
            && (forest.f1 - 0.4).abs() < 1e-12
    );

    let mut tsv = Vec::new();
    report.write_tsv(&mut tsv).unwrap();
    let tsv = String::from_utf8(tsv).unwrap();
    let rows: Vec<&str> = tsv.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(rows, ["type_id", FOREST, JAZZ, SAX, "MICRO", "MACRO"]);
    assert!(tsv.lines().all(|l| l.split('\t').count() == 13));
}

#[test]
fn lester_young_exact_versus_relaxed() {
    let gold = vec![m("Lester Young", SAX)];
    let preds = vec![m("Young", SAX)];
    assert_eq!(match_exact(&gold, &preds), c(0, 1, 1));
    assert_eq!(match_relaxed(&gold, &preds), c(1, 0, 0));
    assert_eq!(match_relaxed(&gold, &[m("Lester Young", JAZZ)]), c(0, 1, 1));
    assert_eq!(match_exact(&gold, &[m("lester YOUNG", SAX)]), c(1, 0, 0));
}

#[test]
fn empty_predictions_score_zero() {
    let s = prf(match_exact(&[m("Lester Young", SAX)], &[]));
    assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    assert!(s.degenerate);
}

#[test]
fn prf_and_averaging_examples() {
    let s = prf(c(1, 0, 0));
    assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    let micro = aggregate(&[c(1, 1, 0), c(0, 0, 1)], Average::Micro);
    assert_eq!((micro.precision, micro.recall, micro.f1), (0.5, 0.5, 0.5));
    let zero = prf(c(0, 0, 0));
    assert_eq!(
        (zero.precision, zero.recall, zero.f1, zero.degenerate),
        (0.0, 0.0, 0.0, true)
    );
    let same = [c(3, 1, 2), c(3, 1, 2), c(3, 1, 2)];
    let (mi, ma) = (
        aggregate(&same, Average::Micro),
        aggregate(&same, Average::Macro),
    );
    assert!((mi.f1 - ma.f1).abs() < 1e-12 && (mi.precision - ma.precision).abs() < 1e-12);
}

/// Greedy consumption can fall short of the optimum: "a" takes "a c",
/// leaving "c" without a partner although "a"–"a b", "c"–"a c" pairs both.
#[test]
fn greedy_divergence_counterexample() {
    let gold = vec![m("a c", "t"), m("a b", "t")];
    let preds = vec![m("a", "t"), m("c", "t")];
    assert_eq!(match_relaxed(&gold, &preds).tp, 1);
    assert_eq!(optimal_relaxed_tp(&gold, &preds), 2);
}

#[test]
fn greedy_against_optimal_on_random_instances() {
    let mut r = rng(17);
    let vocab = ["lester", "young", "parker", "charlie", "dorsey"];
    let (mut diverged, trials) = (0, 2000);
    for _ in 0..trials {
        let draw = |n: usize, r: &mut rand_chacha::ChaCha8Rng| -> Vec<TypedMention> {
            (0..n)
                .map(|_| {
                    let k = r.gen_range(1..=2);
                    let ws: Vec<&str> = (0..k).map(|_| *vocab.choose(r).unwrap()).collect();
                    m(&ws.join(" "), ["x", "y"].choose(r).unwrap())
                })
                .collect()
        };
        let gold = draw(r.gen_range(0..5), &mut r);
        let preds = draw(r.gen_range(0..5), &mut r);
        let greedy = match_relaxed(&gold, &preds).tp;
        let best = optimal_relaxed_tp(&gold, &preds);
        assert!(greedy <= best);
        assert!(greedy >= match_exact(&gold, &preds).tp);
        diverged += (greedy < best) as usize;
    }
    eprintln!("greedy below optimum on {diverged}/{trials} instances");
}

#[test]
fn fp_rate_edge_cases() {
    let empty = PredictionSet::default();
    assert_eq!(fp_rate(&empty, ["p1", "p2"], SAX).unwrap(), 0.0);
    assert!(matches!(
        fp_rate(&empty, [], SAX),
        Err(EvalError::EmptyParagraphSet)
    ));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.jsonl");
    let resolver = TypeResolver::new([SAX.to_string()]);
    std::fs::write(
        &path,
        "{\"paragraph_id\":\"p1\",\"entities\":[{\"entity_type\":\"saxophonist\",\"entities\":\"A\"}]}\n",
    )
    .unwrap();
    let once = fp_rate(
        &load_predictions(&path, &resolver).unwrap(),
        ["p1", "p2", "p3", "p4"],
        SAX,
    )
    .unwrap();
    std::fs::write(
        &path,
        "{\"paragraph_id\":\"p1\",\"entities\":[{\"entity_type\":\"saxophonist\",\"entities\":\"A, A, B\"}]}\n\
         {\"paragraph_id\":\"p1\",\"entities\":[{\"entity_type\":\"saxophonist\",\"entities\":\"C\"}]}\n",
    )
    .unwrap();
    let many = fp_rate(
        &load_predictions(&path, &resolver).unwrap(),
        ["p1", "p2", "p3", "p4"],
        SAX,
    )
    .unwrap();
    assert_eq!((once, many), (0.25, 0.25));
}

#[test]
fn span_form_predictions_use_gold_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spans.jsonl");
    std::fs::write(
        &path,
        "{\"paragraph_id\":\"dorsey\",\"predictions\":[{\"token_start\":0,\"token_end\":2,\"type_id\":\"saxophonist\"},\
         {\"token_start\":31,\"token_end\":32,\"type_id\":\"saxophonist\"}]}\n",
    )
    .unwrap();
    let dataset = ner_fixture_dataset();
    let preds = load_predictions(&path, &TypeResolver::new(dataset.types())).unwrap();
    let report = evaluate(preds.pair_with_gold(&dataset).unwrap());
    assert_eq!(report.per_type[SAX].exact, c(1, 1, 2));
    assert_eq!(report.per_type[SAX].relaxed, c(2, 0, 1));
    // jazz gold in the scored paragraph with no jazz predictions
    assert_eq!(report.per_type[JAZZ].exact, c(0, 0, 3));

    std::fs::write(&path, "{\"paragraph_id\":\"dorsey\",\"predictions\":[{\"token_start\":50,\"token_end\":52,\"type_id\":\"saxophonist\"}]}\n").unwrap();
    let bad = load_predictions(&path, &TypeResolver::new(dataset.types())).unwrap();
    assert!(matches!(
        bad.pair_with_gold(&dataset),
        Err(EvalError::SpanOutOfRange { .. })
    ));
}

fn mention() -> impl Strategy<Value = TypedMention> {
    (
        prop::sample::select(vec![
            "Lester Young",
            "Young",
            "Charlie Parker",
            "Parker",
            "Big Band",
        ]),
        prop::sample::select(vec!["x", "y"]),
    )
        .prop_map(|(t, ty)| TypedMention::new(t, ty))
}

proptest! {
    #[test]
    fn perfect_and_dominance(gold in prop::collection::vec(mention(), 0..8), preds in prop::collection::vec(mention(), 0..8)) {
        let e = match_exact(&gold, &gold);
        prop_assert_eq!((e.fp, e.fn_), (0, 0));
        prop_assert!(match_relaxed(&gold, &preds).tp >= match_exact(&gold, &preds).tp);
        let counts = match_relaxed(&gold, &preds);
        prop_assert_eq!(counts.tp + counts.fp, preds.len());
        prop_assert_eq!(counts.tp + counts.fn_, gold.len());
    }
}
