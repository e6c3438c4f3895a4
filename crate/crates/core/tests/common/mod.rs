//! Reference implementations and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use silverner::corpus::{
    AnnotatedParagraph, EntityEntry, EntityType, Lexicon, MentionSpan, Paragraph, SilverDataset,
};
use silverner::ner_eval::TypedMention;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brute-force matcher: enumerate every in-order embedding of every alias from
/// every start, keep the shortest admissible one per start, then drop starts
/// overlapping an earlier accepted match of the same (entity, alias).
pub fn brute_force_matches(
    paragraph_id: &str,
    text: &str,
    aliases: &[(String, String)],
    slop: usize,
) -> BTreeSet<(String, usize, usize, String, String, usize)> {
    let toks: Vec<String> = text.split_whitespace().map(str::to_lowercase).collect();
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for (entity, alias) in aliases {
        if !seen.insert((entity.clone(), alias.clone())) {
            continue;
        }
        let pat: Vec<String> = alias.split_whitespace().map(str::to_lowercase).collect();
        let mut last_end = 0;
        for s in 0..toks.len() {
            if toks[s] != pat[0] || s < last_end {
                continue;
            }
            let mut best: Option<usize> = None;
            all_embeddings(&toks, &pat, 1, s, &mut |last| {
                let end = last + 1;
                if end - s - pat.len() <= slop {
                    best = Some(best.map_or(end, |b: usize| b.min(end)));
                }
            });
            if let Some(end) = best {
                last_end = end;
                out.insert((
                    paragraph_id.to_string(),
                    s,
                    end,
                    entity.clone(),
                    alias.clone(),
                    end - s - pat.len(),
                ));
            }
        }
    }
    out
}

fn all_embeddings(
    toks: &[String],
    pat: &[String],
    k: usize,
    pos: usize,
    visit: &mut dyn FnMut(usize),
) {
    if k == pat.len() {
        visit(pos);
        return;
    }
    for j in pos + 1..toks.len() {
        if toks[j] == pat[k] {
            all_embeddings(toks, pat, k + 1, j, visit);
        }
    }
}

/// Count of relevant ids among the first |REL| entries, over |REL|.
pub fn brute_force_recall(ranking: &[String], relevant: &BTreeSet<String>) -> f64 {
    let mut hits = 0usize;
    for (i, id) in ranking.iter().enumerate() {
        if i >= relevant.len() {
            break;
        }
        if relevant.iter().any(|r| r == id) {
            hits += 1;
        }
    }
    hits as f64 / relevant.len() as f64
}

pub fn span(start: usize, end: usize, entity: &str, types: &[&str]) -> MentionSpan {
    MentionSpan {
        token_start: start,
        token_end: end,
        entity_id: entity.into(),
        type_ids: types.iter().map(|t| t.to_string()).collect(),
    }
}

pub fn annotated(id: &str, text: &str, spans: Vec<MentionSpan>) -> AnnotatedParagraph {
    AnnotatedParagraph {
        paragraph: Paragraph::new(id, text),
        spans,
    }
}

/// `types` types with exactly `per_type` single-mention paragraphs each.
pub fn balanced_dataset(types: usize, per_type: usize) -> SilverDataset {
    let mut paragraphs = Vec::new();
    for t in 0..types {
        for i in 0..per_type {
            let tid = format!("t{t:02}");
            paragraphs.push(annotated(
                &format!("p{t:02}_{i:02}"),
                &format!("Entity{t}x{i} appears here"),
                vec![span(0, 1, &format!("e{t}_{i}"), &[&tid])],
            ));
        }
    }
    SilverDataset { paragraphs }
}

const RIVER_WORDS: &[&str] = &[
    "river",
    "tributary",
    "flows",
    "basin",
    "delta",
    "estuary",
    "banks",
    "upstream",
    "confluence",
    "discharge",
    "flood",
    "valley",
];
const FILM_WORDS: &[&str] = &[
    "film",
    "directed",
    "starring",
    "premiere",
    "screenplay",
    "cinema",
    "sequel",
    "actors",
    "studio",
    "trailer",
    "release",
    "critics",
];
const SHARED_WORDS: &[&str] = &[
    "the", "of", "and", "was", "in", "its", "with", "by", "during", "after",
];

/// Two-type corpus whose contexts use disjoint vocabularies.
pub struct SeparableCorpus {
    pub lexicon: Lexicon,
    /// (paragraph, context type)
    pub train: Vec<(Paragraph, &'static str)>,
    pub test: Vec<(Paragraph, &'static str)>,
    /// Token span and entity of every mention in a test paragraph, and
    /// whether the entity's type matches the paragraph context.
    pub test_mentions: BTreeMap<String, Vec<(usize, usize, String, bool)>>,
}

fn pseudo_word(rng: &mut ChaCha8Rng, used: &mut BTreeSet<String>) -> String {
    const C: &[u8] = b"bdfgklmnprstvz";
    const V: &[u8] = b"aeiou";
    loop {
        let mut w = String::new();
        for _ in 0..3 {
            w.push(C[rng.gen_range(0..C.len())] as char);
            w.push(V[rng.gen_range(0..V.len())] as char);
        }
        if used.insert(w.clone()) {
            let mut cs = w.chars();
            return cs.next().unwrap().to_ascii_uppercase().to_string() + cs.as_str();
        }
    }
}

/// `per_type` paragraphs of each of two types; the test half receives a
/// wrong-context decoy mention in `decoy_rate` of its paragraphs.
pub fn separable_corpus(per_type: usize, decoy_rate: f64, seed: u64) -> SeparableCorpus {
    let mut rng = rng(seed);
    let mut used = BTreeSet::new();
    let mut entities = Vec::new();
    let mut names: BTreeMap<&str, Vec<(String, String)>> = BTreeMap::new();
    for t in ["river", "film"] {
        for i in 0..20 {
            let name = format!(
                "{} {}",
                pseudo_word(&mut rng, &mut used),
                pseudo_word(&mut rng, &mut used)
            );
            let id = format!("{t}{i:02}");
            names.entry(t).or_default().push((id.clone(), name.clone()));
            entities.push(EntityEntry {
                entity_id: id,
                canonical_name: name,
                aliases: vec![],
                type_ids: vec![t.into()],
            });
        }
    }
    let types = ["river", "film"]
        .iter()
        .map(|t| EntityType {
            type_id: t.to_string(),
            label: t.to_string(),
            parent_ids: vec![],
        })
        .collect();
    let lexicon = Lexicon::new(types, entities).unwrap();

    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut test_mentions = BTreeMap::new();
    for i in 0..2 * per_type {
        let ty: &'static str = if i % 2 == 0 { "river" } else { "film" };
        let other = if ty == "river" { "film" } else { "river" };
        let context = if ty == "river" {
            RIVER_WORDS
        } else {
            FILM_WORDS
        };
        let mut words: Vec<String> = context
            .choose_multiple(&mut rng, 6)
            .map(|w| w.to_string())
            .collect();
        words.extend(
            SHARED_WORDS
                .choose_multiple(&mut rng, 4)
                .map(|w| w.to_string()),
        );
        words.shuffle(&mut rng);
        let is_test = (i / 2) % 2 == 1;
        let mut inserts = vec![(names[ty].choose(&mut rng).unwrap().clone(), true)];
        if is_test && rng.gen_bool(decoy_rate) {
            inserts.push((names[other].choose(&mut rng).unwrap().clone(), false));
        }
        // positions are in units of words; each name is two tokens
        let mut slots: Vec<(usize, (String, String), bool)> = inserts
            .into_iter()
            .map(|(n, g)| (rng.gen_range(0..=words.len()), n, g))
            .collect();
        slots.sort_by_key(|s| s.0);
        let mut tokens: Vec<String> = Vec::new();
        let mut mentions = Vec::new();
        let mut w = 0;
        for (at, (id, name), genuine) in slots {
            while w < at {
                tokens.push(words[w].clone());
                w += 1;
            }
            mentions.push((tokens.len(), tokens.len() + 2, id, genuine));
            tokens.extend(name.split(' ').map(String::from));
        }
        tokens.extend(words[w..].iter().cloned());
        let p = Paragraph::new(format!("s{i:04}"), tokens.join(" ") + " .");
        if is_test {
            test_mentions.insert(p.paragraph_id.clone(), mentions);
            test.push((p, ty));
        } else {
            train.push((p, ty));
        }
    }
    SeparableCorpus {
        lexicon,
        train,
        test,
        test_mentions,
    }
}

pub fn m(text: &str, ty: &str) -> TypedMention {
    TypedMention::new(text, ty)
}

pub const JAZZ: &str = "jazz_musician";
pub const SAX: &str = "saxophonist";
pub const FOREST: &str = "forest";

pub const DORSEY_TEXT: &str = "Jimmy Dorsey is considered one of the most important and influential alto saxophone \
players of the Big Band and Swing era , and also after that era . Jazz saxophonists Lester Young and Charlie Parker \
both acknowledge him as an important influence on their styles .";
pub const TAIGA_TEXT: &str =
    "Lapland Reserve is located in the Scandinavian and Russian taiga ecoregion , which is \
situated in Northern Europe between tundra in the north and temperate mixed forests in the south .";

/// Gold silver annotation for the two fixture paragraphs.
pub fn ner_fixture_dataset() -> SilverDataset {
    SilverDataset {
        paragraphs: vec![
            annotated(
                "dorsey",
                DORSEY_TEXT,
                vec![
                    span(0, 2, "jimmy_dorsey", &[JAZZ, SAX]),
                    span(30, 32, "lester_young", &[JAZZ, SAX]),
                    span(33, 35, "charlie_parker", &[JAZZ, SAX]),
                ],
            ),
            annotated(
                "taiga",
                TAIGA_TEXT,
                vec![span(6, 11, "taiga_ecoregion", &[FOREST])],
            ),
        ],
    }
}

/// String-form prediction file mirroring the zero-shot output schema.
pub const NER_FIXTURE_PREDICTIONS: &str = r#"{"paragraph_id":"dorsey","entities":[{"entity_type":"Jazz musician","entities":"Jimmy Dorsey, Lester Young, Charlie Parker"},{"entity_type":"Saxophonist","entities":"Dorsey, Lester Young, Big Band, Lester Young"}]}
{"paragraph_id":"taiga","entities":[{"entity_type":"Forest","entities":"Lapland Reserve, Russian taiga, Pinus sylvestris, Larix sibirica"}]}
"#;

/// Hand-computed per-type (tp, fp, fn) for the fixture: exact then relaxed.
pub type Tpfpfn = (usize, usize, usize);

pub const NER_FIXTURE_COUNTS: &[(&str, Tpfpfn, Tpfpfn)] = &[
    (FOREST, (0, 4, 1), (1, 3, 0)),
    (JAZZ, (3, 0, 0), (3, 0, 0)),
    (SAX, (1, 2, 2), (2, 1, 1)),
];

pub fn ner_fixture_lexicon() -> Lexicon {
    let types = [
        (JAZZ, "Jazz musician"),
        (SAX, "Saxophonist"),
        (FOREST, "Forest"),
    ]
    .iter()
    .map(|(id, label)| EntityType {
        type_id: id.to_string(),
        label: label.to_string(),
        parent_ids: vec![],
    })
    .collect();
    Lexicon::new(types, vec![]).unwrap()
}
