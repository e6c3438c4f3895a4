use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::error::{LoadError, ValidationError};
use super::tokenize::tokenize;
use crate::jsonl;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityType {
    pub type_id: String,
    /// Human-readable name, used verbatim as the retrieval query.
    pub label: String,
    /// Types this type is a declared subset of.
    #[serde(default)]
    pub parent_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityEntry {
    pub entity_id: String,
    pub canonical_name: String,
    /// Always contains `canonical_name`.
    #[serde(default)]
    pub aliases: Vec<String>,
    pub type_ids: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LexiconRecord {
    Type(EntityType),
    Entity(EntityEntry),
}

/// Entity types with their declared hierarchy, and the entities listed for them.
///
/// Immutable after construction; `ancestors` holds the reflexive-transitive
/// closure of each type, sorted by type index.
#[derive(Debug, Clone)]
pub struct Lexicon {
    types: Vec<EntityType>,
    entities: Vec<EntityEntry>,
    type_index: HashMap<String, usize>,
    entity_index: HashMap<String, usize>,
    ancestors: Vec<Vec<usize>>,
}

fn dedup_in_order(items: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    items.retain(|s| seen.insert(s.clone()));
}

impl Lexicon {
    pub fn new(
        types: Vec<EntityType>,
        entities: Vec<EntityEntry>,
    ) -> Result<Self, ValidationError> {
        let lines = (vec![0; types.len()], vec![0; entities.len()]);
        Self::build(types, entities, &lines).map_err(|(_, e)| e)
    }

    /// Validates and indexes. `lines` carries source line numbers per record
    /// so loaders can report where a violation came from.
    fn build(
        mut types: Vec<EntityType>,
        mut entities: Vec<EntityEntry>,
        lines: &(Vec<usize>, Vec<usize>),
    ) -> Result<Self, (usize, ValidationError)> {
        let mut type_index = HashMap::with_capacity(types.len());
        for (i, t) in types.iter_mut().enumerate() {
            if t.type_id.is_empty() {
                return Err((lines.0[i], ValidationError::Invalid("empty type_id".into())));
            }
            if t.label.trim().is_empty() {
                return Err((
                    lines.0[i],
                    ValidationError::Invalid(format!("type `{}` has an empty label", t.type_id)),
                ));
            }
            dedup_in_order(&mut t.parent_ids);
            if type_index.insert(t.type_id.clone(), i).is_some() {
                return Err((lines.0[i], ValidationError::DuplicateId(t.type_id.clone())));
            }
        }
        let mut parents = Vec::with_capacity(types.len());
        for (i, t) in types.iter().enumerate() {
            let mut ps = Vec::with_capacity(t.parent_ids.len());
            for p in &t.parent_ids {
                match type_index.get(p) {
                    Some(&pi) => ps.push(pi),
                    None => {
                        return Err((
                            lines.0[i],
                            ValidationError::DanglingReference {
                                owner: t.type_id.clone(),
                                missing: p.clone(),
                            },
                        ))
                    }
                }
            }
            parents.push(ps);
        }
        if let Some(i) = find_cycle(&parents) {
            return Err((
                lines.0[i],
                ValidationError::HierarchyCycle(types[i].type_id.clone()),
            ));
        }
        let ancestors = (0..types.len())
            .map(|i| closure_of(&parents, &[i]))
            .collect();

        let mut entity_index = HashMap::with_capacity(entities.len());
        for (i, e) in entities.iter_mut().enumerate() {
            let line = lines.1[i];
            if e.entity_id.is_empty() {
                return Err((line, ValidationError::Invalid("empty entity_id".into())));
            }
            if !e.aliases.contains(&e.canonical_name) {
                e.aliases.insert(0, e.canonical_name.clone());
            }
            dedup_in_order(&mut e.aliases);
            dedup_in_order(&mut e.type_ids);
            if let Some(a) = e.aliases.iter().find(|a| tokenize(a).is_empty()) {
                return Err((
                    line,
                    ValidationError::Invalid(format!(
                        "entity `{}` has alias {a:?} with no tokens",
                        e.entity_id
                    )),
                ));
            }
            if e.type_ids.is_empty() {
                return Err((
                    line,
                    ValidationError::Invalid(format!("entity `{}` has no type_ids", e.entity_id)),
                ));
            }
            if let Some(t) = e.type_ids.iter().find(|t| !type_index.contains_key(*t)) {
                return Err((
                    line,
                    ValidationError::DanglingReference {
                        owner: e.entity_id.clone(),
                        missing: t.clone(),
                    },
                ));
            }
            if entity_index.insert(e.entity_id.clone(), i).is_some() {
                return Err((line, ValidationError::DuplicateId(e.entity_id.clone())));
            }
        }
        Ok(Lexicon {
            types,
            entities,
            type_index,
            entity_index,
            ancestors,
        })
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let display = path.display().to_string();
        let mut types = Vec::new();
        let mut entities = Vec::new();
        let mut lines = (Vec::new(), Vec::new());
        for rec in jsonl::read::<LexiconRecord>(path)? {
            let (line, rec) = rec?;
            match rec {
                LexiconRecord::Type(t) => {
                    types.push(t);
                    lines.0.push(line);
                }
                LexiconRecord::Entity(e) => {
                    entities.push(e);
                    lines.1.push(line);
                }
            }
        }
        Self::build(types, entities, &lines)
            .map_err(|(line, e)| LoadError::invalid(&display, line, e))
    }

    /// Type records first, then entity records, in stored order.
    pub fn records(&self) -> Vec<LexiconRecord> {
        self.types
            .iter()
            .cloned()
            .map(LexiconRecord::Type)
            .chain(self.entities.iter().cloned().map(LexiconRecord::Entity))
            .collect()
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        jsonl::write(path, &self.records())
    }

    pub fn types(&self) -> &[EntityType] {
        &self.types
    }

    pub fn entities(&self) -> &[EntityEntry] {
        &self.entities
    }

    pub fn entity(&self, entity_id: &str) -> Option<&EntityEntry> {
        self.entity_index.get(entity_id).map(|&i| &self.entities[i])
    }

    pub fn entity_type(&self, type_id: &str) -> Option<&EntityType> {
        self.type_index.get(type_id).map(|&i| &self.types[i])
    }

    pub fn type_position(&self, type_id: &str) -> Option<usize> {
        self.type_index.get(type_id).copied()
    }

    /// The requested types plus all their ancestors.
    pub fn hierarchy_closure<I, S>(&self, type_ids: I) -> Result<BTreeSet<String>, ValidationError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = BTreeSet::new();
        for t in type_ids {
            let t = t.as_ref();
            let &i = self
                .type_index
                .get(t)
                .ok_or_else(|| ValidationError::UnknownType(t.to_string()))?;
            out.extend(
                self.ancestors[i]
                    .iter()
                    .map(|&a| self.types[a].type_id.clone()),
            );
        }
        Ok(out)
    }

    /// Closure of an entity's declared types.
    pub fn entity_closure(&self, entity_id: &str) -> Option<BTreeSet<String>> {
        let e = self.entity(entity_id)?;
        self.hierarchy_closure(&e.type_ids).ok()
    }
}

/// Free-function form of [`Lexicon::hierarchy_closure`].
pub fn hierarchy_closure<I, S>(
    lexicon: &Lexicon,
    type_ids: I,
) -> Result<BTreeSet<String>, ValidationError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    lexicon.hierarchy_closure(type_ids)
}

fn closure_of(parents: &[Vec<usize>], start: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; parents.len()];
    let mut stack: Vec<usize> = start.to_vec();
    while let Some(i) = stack.pop() {
        if !seen[i] {
            seen[i] = true;
            stack.extend(parents[i].iter().copied());
        }
    }
    seen.iter()
        .enumerate()
        .filter(|(_, s)| **s)
        .map(|(i, _)| i)
        .collect()
}

/// Returns a node that lies on a cycle, if any.
fn find_cycle(parents: &[Vec<usize>]) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut marks = vec![Mark::New; parents.len()];
    for root in 0..parents.len() {
        if marks[root] != Mark::New {
            continue;
        }
        // iterative DFS: (node, next parent slot)
        let mut stack = vec![(root, 0usize)];
        marks[root] = Mark::Active;
        while let Some(&mut (node, ref mut slot)) = stack.last_mut() {
            if let Some(&p) = parents[node].get(*slot) {
                *slot += 1;
                match marks[p] {
                    Mark::Active => return Some(p),
                    Mark::New => {
                        marks[p] = Mark::Active;
                        stack.push((p, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                marks[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}
