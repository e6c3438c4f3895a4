//! Seeded synthetic corpus with known ground truth.
//!
//! Twenty entity types (a four-level chain Butterfly ⊂ Insect ⊂ Invertebrate
//! ⊂ Animal, two intersectional types, and unrelated roots) each get a pool of
//! context words and invented entity names. Paragraphs mention entities of a
//! few types inside sentences drawn from those types' contexts. A fraction of
//! paragraphs also carries a decoy: an entity name from an unrelated type set
//! in the wrong context, which the context filter is expected to remove.
//!
//! The generator records every mention it writes, so a [`ConstructionOracle`]
//! can judge audit rows without human review.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::tokenize::fold;
use crate::corpus::{EntityEntry, EntityType, Lexicon, LinkGraph, LoadError, Paragraph};
use crate::jsonl;
use crate::pipeline::{AuditRow, AuditWorksheet, Judgment};
use crate::retrieval::VectorFile;
use crate::seed::{self, fnv1a};

struct TypeSpec {
    id: &'static str,
    label: &'static str,
    parents: &'static [&'static str],
    context: &'static [&'static str],
    /// Whether entities are listed directly under this type.
    has_entities: bool,
}

const TYPES: &[TypeSpec] = &[
    TypeSpec {
        id: "animal",
        label: "Animal",
        parents: &[],
        context: &[
            "species",
            "wild",
            "habitat",
            "predators",
            "animals",
            "fauna",
            "zoo",
            "conservation",
            "endangered",
            "population",
            "wildlife",
            "prey",
        ],
        has_entities: false,
    },
    TypeSpec {
        id: "invertebrate",
        label: "Invertebrate",
        parents: &["animal"],
        context: &[
            "invertebrate",
            "exoskeleton",
            "larvae",
            "molting",
            "segmented",
            "tentacles",
            "shell",
            "marine",
            "soft-bodied",
            "invertebrates",
            "colonies",
            "spineless",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "insect",
        label: "Insect",
        parents: &["invertebrate"],
        context: &[
            "insect",
            "antennae",
            "thorax",
            "abdomen",
            "beetle",
            "swarm",
            "hive",
            "pollination",
            "insects",
            "entomologists",
            "legs",
            "mandibles",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "butterfly",
        label: "Butterfly",
        parents: &["insect"],
        context: &[
            "butterfly",
            "wings",
            "caterpillar",
            "nectar",
            "chrysalis",
            "pupa",
            "moth",
            "butterflies",
            "wingspan",
            "lepidoptera",
            "flutter",
            "metamorphosis",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "dog_breed",
        label: "Dog Breed",
        parents: &["animal"],
        context: &[
            "dog",
            "breed",
            "kennel",
            "puppies",
            "coat",
            "terrier",
            "hound",
            "leash",
            "breeders",
            "obedience",
            "dogs",
            "canine",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "bird",
        label: "Bird",
        parents: &["animal"],
        context: &[
            "bird",
            "feathers",
            "nest",
            "migratory",
            "beak",
            "plumage",
            "songbird",
            "eggs",
            "flock",
            "birds",
            "ornithologists",
            "perch",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "company",
        label: "Company",
        parents: &[],
        context: &[
            "company",
            "shares",
            "revenue",
            "headquartered",
            "subsidiary",
            "acquisition",
            "investors",
            "quarterly",
            "corporation",
            "executive",
            "profits",
            "founded",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "film",
        label: "Film",
        parents: &[],
        context: &[
            "film",
            "directed",
            "starring",
            "box-office",
            "premiere",
            "screenplay",
            "cinema",
            "sequel",
            "actors",
            "films",
            "studio",
            "trailer",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "politician",
        label: "Politician",
        parents: &[],
        context: &[
            "politician",
            "elected",
            "parliament",
            "minister",
            "party",
            "campaign",
            "senate",
            "votes",
            "cabinet",
            "legislation",
            "politicians",
            "constituency",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "french_person",
        label: "French Person",
        parents: &[],
        context: &[
            "french",
            "paris",
            "born",
            "france",
            "lyon",
            "marseille",
            "bordeaux",
            "citizen",
            "parisian",
            "normandy",
            "provence",
            "frenchman",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "french_politician",
        label: "French Politician",
        parents: &["politician", "french_person"],
        context: &[
            "mayor",
            "assembly",
            "deputy",
            "élysée",
            "prefect",
            "gaullist",
            "republic",
            "socialist",
            "commune",
            "assemblée",
            "french",
            "parliament",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "writer",
        label: "Writer",
        parents: &[],
        context: &[
            "writer",
            "novel",
            "published",
            "author",
            "poems",
            "literary",
            "manuscript",
            "essays",
            "novelist",
            "prose",
            "writers",
            "fiction",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "british_person",
        label: "British Person",
        parents: &[],
        context: &[
            "british",
            "london",
            "england",
            "oxford",
            "scotland",
            "wales",
            "manchester",
            "knighted",
            "britain",
            "english",
            "cambridge",
            "yorkshire",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "british_writer",
        label: "British Writer",
        parents: &["writer", "british_person"],
        context: &[
            "booker",
            "victorian",
            "publisher",
            "bloomsbury",
            "trilogy",
            "memoir",
            "playwright",
            "satire",
            "novelist",
            "london",
            "english",
            "literary",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "river",
        label: "River",
        parents: &[],
        context: &[
            "river",
            "tributary",
            "flows",
            "basin",
            "delta",
            "estuary",
            "rivers",
            "banks",
            "upstream",
            "confluence",
            "discharge",
            "flood",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "mountain",
        label: "Mountain",
        parents: &[],
        context: &[
            "mountain",
            "summit",
            "peak",
            "elevation",
            "climbers",
            "ridge",
            "glacier",
            "mountains",
            "slopes",
            "ascent",
            "alpine",
            "range",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "saxophonist",
        label: "Saxophonist",
        parents: &[],
        context: &[
            "saxophonist",
            "saxophone",
            "jazz",
            "tenor",
            "alto",
            "solo",
            "quartet",
            "bebop",
            "improvisation",
            "swing",
            "saxophonists",
            "album",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "composer",
        label: "Composer",
        parents: &[],
        context: &[
            "composer",
            "symphony",
            "orchestra",
            "sonata",
            "concerto",
            "opera",
            "composed",
            "composers",
            "premiered",
            "quartets",
            "chamber",
            "score",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "forest",
        label: "Forest",
        parents: &[],
        context: &[
            "forest",
            "trees",
            "canopy",
            "woodland",
            "timber",
            "conifers",
            "oak",
            "foliage",
            "forests",
            "undergrowth",
            "logging",
            "reserve",
        ],
        has_entities: true,
    },
    TypeSpec {
        id: "lighthouse",
        label: "Lighthouse",
        parents: &[],
        context: &[
            "lighthouse",
            "beacon",
            "keeper",
            "coast",
            "lantern",
            "lighthouses",
            "tower",
            "shipwrecks",
            "harbour",
            "lens",
            "rocks",
            "navigation",
        ],
        has_entities: true,
    },
];

const FILLER: &[&str] = &[
    "the", "of", "and", "was", "is", "in", "a", "with", "by", "from", "which", "its", "also",
    "known", "as", "during", "after", "many", "most", "early", "other", "their", "has", "been",
    "for", "on",
];

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "kr", "tr", "st",
    "gl", "pl",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ae", "ou", "ei"];
const CODAS: &[&str] = &["", "", "n", "r", "s", "l", "x", "th"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub paragraphs: usize,
    pub entities_per_type: usize,
    /// Probability that a paragraph receives one out-of-context decoy mention.
    pub decoy_rate: f64,
    /// Extra non-mentioning link-graph paragraphs listed per entity.
    pub link_noise: usize,
    pub dimension: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            paragraphs: 5000,
            entities_per_type: 20,
            decoy_rate: 0.1,
            link_noise: 2,
            dimension: 64,
            seed: 0,
        }
    }
}

/// A mention written by the generator, in char offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthMention {
    pub paragraph_id: String,
    pub char_start: usize,
    pub char_end: usize,
    pub entity_id: String,
    /// False for decoys placed in an unrelated context.
    pub genuine: bool,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub lexicon: Lexicon,
    pub corpus: Vec<Paragraph>,
    pub linkgraph: LinkGraph,
    pub truth: Vec<TruthMention>,
    pub paragraph_vectors: VectorFile,
    pub query_vectors: VectorFile,
}

struct NameGen {
    used: HashSet<String>,
}

impl NameGen {
    fn word(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let syllables = rng.gen_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(rng).unwrap());
                w.push_str(VOWELS.choose(rng).unwrap());
            }
            w.push_str(CODAS.choose(rng).unwrap());
            if self.used.insert(w.clone()) {
                let mut cs = w.chars();
                let first = cs.next().unwrap().to_uppercase();
                return first.chain(cs).collect();
            }
        }
    }
}

struct Builder {
    text: String,
    chars: usize,
}

impl Builder {
    fn push(&mut self, piece: &str) -> (usize, usize) {
        if !self.text.is_empty() && !piece.starts_with('.') && !piece.starts_with(',') {
            self.text.push(' ');
            self.chars += 1;
        }
        let start = self.chars;
        self.text.push_str(piece);
        self.chars += piece.chars().count();
        (start, self.chars)
    }
}

fn capitalize(w: &str) -> String {
    let mut cs = w.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

fn hashed_embedding(tokens: impl IntoIterator<Item = String>, dimension: usize) -> Vec<f64> {
    let mut v = vec![0.0; dimension];
    for t in tokens {
        let h = fnv1a(t.as_bytes());
        let sign = if (h >> 63) & 1 == 1 { -1.0 } else { 1.0 };
        v[(h % dimension as u64) as usize] += sign;
    }
    if v.iter().all(|x| *x == 0.0) {
        v[0] = 1.0;
    }
    v
}

type MentionSlot = (usize, bool);

pub fn generate(config: &SyntheticConfig) -> SyntheticCorpus {
    let mut rng = seed::rng(config.seed, "synthetic/names");
    let mut names = NameGen {
        used: TYPES
            .iter()
            .flat_map(|t| t.context.iter())
            .chain(FILLER)
            .map(|w| w.to_string())
            .collect(),
    };

    let types: Vec<EntityType> = TYPES
        .iter()
        .map(|t| EntityType {
            type_id: t.id.into(),
            label: t.label.into(),
            parent_ids: t.parents.iter().map(|p| p.to_string()).collect(),
        })
        .collect();

    // entities per owning type; each entry is (entity index, mention forms)
    let mut entities: Vec<EntityEntry> = Vec::new();
    let mut forms: Vec<Vec<String>> = Vec::new();
    let mut pool: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for spec in TYPES.iter().filter(|t| t.has_entities) {
        for _ in 0..config.entities_per_type {
            let n_words = match rng.gen_range(0..10) {
                0..=1 => 1,
                2..=6 => 2,
                _ => 3,
            };
            let words: Vec<String> = (0..n_words).map(|_| names.word(&mut rng)).collect();
            let canonical = words.join(" ");
            let mut aliases = vec![canonical.clone()];
            if n_words == 3 {
                aliases.push(format!("{} {}", words[0], words[2]));
            } else if n_words == 2 && rng.gen_bool(0.3) {
                aliases.push(names.word(&mut rng));
            }
            let mut type_ids = vec![spec.id.to_string()];
            if spec.id == "composer" && rng.gen_bool(0.25) {
                type_ids.push("saxophonist".into());
            }
            let idx = entities.len();
            for t in &type_ids {
                pool.entry(TYPES.iter().find(|s| s.id == t).unwrap().id)
                    .or_default()
                    .push(idx);
            }
            forms.push(aliases.clone());
            entities.push(EntityEntry {
                entity_id: format!("e{:04}", idx + 1),
                canonical_name: canonical,
                aliases,
                type_ids,
            });
        }
    }
    let lexicon = Lexicon::new(types, entities).expect("synthetic lexicon is valid");
    let owning: Vec<&TypeSpec> = TYPES.iter().filter(|t| t.has_entities).collect();
    let closures: HashMap<&str, BTreeSet<String>> = TYPES
        .iter()
        .map(|t| (t.id, lexicon.hierarchy_closure([t.id]).unwrap()))
        .collect();

    let mut rng = seed::rng(config.seed, "synthetic/paragraphs");
    let mut corpus = Vec::with_capacity(config.paragraphs);
    let mut truth = Vec::new();
    let mut linkgraph = LinkGraph::default();
    for pi in 0..config.paragraphs {
        let pid = format!("p{:05}", pi + 1);
        let k = match rng.gen_range(0..10) {
            0 => 1,
            1..=6 => 2,
            _ => 3,
        };
        let chosen: Vec<&TypeSpec> = owning.choose_multiple(&mut rng, k).copied().collect();
        // each word carries (mention index, genuine) when it is a mention placeholder
        let mut sentences: Vec<Vec<(String, Option<MentionSlot>)>> = Vec::new();
        for spec in &chosen {
            let cands = &pool[spec.id];
            for _ in 0..rng.gen_range(1..=2) {
                let entity = cands[rng.gen_range(0..cands.len())];
                let form = forms[entity].choose(&mut rng).unwrap().clone();
                let n_context = rng.gen_range(5..=8);
                let mut words: Vec<(String, Option<(usize, bool)>)> = spec
                    .context
                    .choose_multiple(&mut rng, n_context)
                    .map(|w| (w.to_string(), None))
                    .collect();
                for _ in 0..rng.gen_range(2..=4) {
                    words.push((FILLER.choose(&mut rng).unwrap().to_string(), None));
                }
                words.shuffle(&mut rng);
                let at = rng.gen_range(0..=words.len());
                words.insert(at, (form, Some((entity, true))));
                sentences.push(words);
            }
        }
        if rng.gen_bool(config.decoy_rate) {
            let used: BTreeSet<&String> =
                chosen.iter().flat_map(|s| closures[s.id].iter()).collect();
            let unrelated: Vec<&&TypeSpec> = owning
                .iter()
                .filter(|s| closures[s.id].iter().all(|t| !used.contains(t)))
                .filter(|s| {
                    pool[s.id].iter().all(|&e| {
                        lexicon.entities()[e]
                            .type_ids
                            .iter()
                            .all(|t| closures[t.as_str()].iter().all(|c| !used.contains(c)))
                    })
                })
                .collect();
            if let Some(spec) = unrelated.choose(&mut rng) {
                let cands = &pool[spec.id];
                let entity = cands[rng.gen_range(0..cands.len())];
                let s = rng.gen_range(0..sentences.len());
                let at = rng.gen_range(0..=sentences[s].len());
                sentences[s].insert(
                    at,
                    (
                        lexicon.entities()[entity].canonical_name.clone(),
                        Some((entity, false)),
                    ),
                );
            }
        }
        sentences.shuffle(&mut rng);

        let mut b = Builder {
            text: String::new(),
            chars: 0,
        };
        for words in sentences {
            for (wi, (w, mention)) in words.into_iter().enumerate() {
                let piece = if wi == 0 && mention.is_none() {
                    capitalize(&w)
                } else {
                    w
                };
                let (start, end) = b.push(&piece);
                if let Some((entity, genuine)) = mention {
                    let entity_id = lexicon.entities()[entity].entity_id.clone();
                    linkgraph.insert(entity_id.clone(), pid.clone());
                    truth.push(TruthMention {
                        paragraph_id: pid.clone(),
                        char_start: start,
                        char_end: end,
                        entity_id,
                        genuine,
                    });
                }
            }
            b.push(".");
        }
        corpus.push(Paragraph::new(pid, b.text));
    }

    let mut rng = seed::rng(config.seed, "synthetic/links");
    for e in lexicon.entities() {
        for _ in 0..config.link_noise {
            let p = &corpus[rng.gen_range(0..corpus.len())];
            linkgraph.insert(e.entity_id.clone(), p.paragraph_id.clone());
        }
    }

    let paragraph_vectors = VectorFile {
        dimension: config.dimension,
        entries: corpus
            .iter()
            .map(|p| {
                (
                    p.paragraph_id.clone(),
                    hashed_embedding(p.folded_tokens(), config.dimension),
                )
            })
            .collect(),
    };
    let query_vectors = VectorFile {
        dimension: config.dimension,
        entries: TYPES
            .iter()
            .map(|t| {
                let words = t
                    .label
                    .split_whitespace()
                    .map(fold)
                    .chain(t.context.iter().map(|w| fold(w)));
                (t.id.to_string(), hashed_embedding(words, config.dimension))
            })
            .collect(),
    };

    SyntheticCorpus {
        lexicon,
        corpus,
        linkgraph,
        truth,
        paragraph_vectors,
        query_vectors,
    }
}

pub fn save_truth(path: &Path, truth: &[TruthMention]) -> std::io::Result<()> {
    jsonl::write(path, truth)
}

pub fn load_truth(path: &Path) -> Result<Vec<TruthMention>, LoadError> {
    jsonl::read::<TruthMention>(path)?
        .map(|r| r.map(|(_, t)| t))
        .collect()
}

/// Judges typed mentions against what the generator actually wrote: a row is
/// correct iff a genuine mention of that entity covers exactly the row's span
/// and the type lies in the entity's closed type set.
pub struct ConstructionOracle {
    genuine: HashSet<(String, usize, usize, String)>,
    closures: HashMap<String, BTreeSet<String>>,
}

impl ConstructionOracle {
    pub fn new(truth: &[TruthMention], lexicon: &Lexicon) -> Self {
        ConstructionOracle {
            genuine: truth
                .iter()
                .filter(|t| t.genuine)
                .map(|t| {
                    (
                        t.paragraph_id.clone(),
                        t.char_start,
                        t.char_end,
                        t.entity_id.clone(),
                    )
                })
                .collect(),
            closures: lexicon
                .entities()
                .iter()
                .map(|e| {
                    (
                        e.entity_id.clone(),
                        lexicon.hierarchy_closure(&e.type_ids).unwrap_or_default(),
                    )
                })
                .collect(),
        }
    }

    pub fn judge(&self, row: &AuditRow) -> Judgment {
        let p = Paragraph::new(row.paragraph_id.clone(), row.paragraph_text.clone());
        if row.token_start >= row.token_end || row.token_end > p.tokens().len() {
            return Judgment::Incorrect;
        }
        let (start, end) = p.span_chars(row.token_start, row.token_end);
        let key = (row.paragraph_id.clone(), start, end, row.entity_id.clone());
        let typed = self
            .closures
            .get(&row.entity_id)
            .is_some_and(|c| c.contains(&row.type_id));
        if typed && self.genuine.contains(&key) {
            Judgment::Correct
        } else {
            Judgment::Incorrect
        }
    }

    /// Fills every judgment slot of the worksheet.
    pub fn fill(&self, worksheet: &mut AuditWorksheet) {
        for row in &mut worksheet.rows {
            row.judgment = Some(self.judge(row));
        }
    }
}
