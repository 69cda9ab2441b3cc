//! The intermediary representation: entities and predicates collected from
//! matched statements, glossary checks and entity typing.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::document::{Project, StepRef, TypeAssignment};
use crate::template::{is_word, Role};

/// One place a term was used: the step, which triple of that step (1-based)
/// and the position it held in the triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Occurrence {
    #[serde(flatten)]
    pub location: StepRef,
    pub triple: usize,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entity {
    pub lexeme: String,
    pub roles: BTreeSet<Role>,
    pub occurrences: Vec<Occurrence>,
    #[serde(rename = "type")]
    pub assigned_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredicateTerm {
    pub lexeme: String,
    pub occurrences: Vec<Occurrence>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionReport {
    /// Sorted by lexeme.
    pub entities: Vec<Entity>,
    /// Sorted by lexeme.
    pub predicates: Vec<PredicateTerm>,
    /// SHA-256 of the canonical project file the report was extracted from.
    pub source_hash: String,
}

impl ExtractionReport {
    pub fn entity(&self, lexeme: &str) -> Option<&Entity> {
        self.entities
            .binary_search_by(|e| e.lexeme.as_str().cmp(lexeme))
            .ok()
            .map(|i| &self.entities[i])
    }

    pub fn predicate(&self, lexeme: &str) -> Option<&PredicateTerm> {
        self.predicates
            .binary_search_by(|p| p.lexeme.as_str().cmp(lexeme))
            .ok()
            .map(|i| &self.predicates[i])
    }

    pub fn entity_lexemes(&self) -> impl Iterator<Item = &str> + '_ {
        self.entities.iter().map(|e| e.lexeme.as_str())
    }

    pub fn predicate_lexemes(&self) -> impl Iterator<Item = &str> + '_ {
        self.predicates.iter().map(|p| p.lexeme.as_str())
    }

    /// The JSON export: `entities` and `predicates`, each entry with
    /// `lexeme`, `roles`, `occurrences` and `type`.
    pub fn to_json(&self) -> Value {
        let predicates: Vec<Value> = self
            .predicates
            .iter()
            .map(|p| {
                json!({
                    "lexeme": p.lexeme,
                    "roles": ["predicate"],
                    "occurrences": p.occurrences,
                    "type": Value::Null,
                })
            })
            .collect();
        json!({
            "entities": self.entities,
            "predicates": predicates,
            "source_hash": self.source_hash,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("E_UNVALIDATED: {} step(s) have no template match", .0.len())]
    Unvalidated(Vec<StepRef>),
}

impl ExtractError {
    pub fn code(&self) -> &'static str {
        "E_UNVALIDATED"
    }
}

fn hash_project(project: &Project) -> String {
    let bytes = crate::project_file::save_project(project);
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Collects every subject and object as an entity and every predicate as a
/// predicate term, with full occurrence provenance.
///
/// The project must have been validated: each step needs a stored match.
pub fn extract(project: &Project) -> Result<ExtractionReport, ExtractError> {
    let unmatched: Vec<StepRef> = project
        .steps()
        .filter(|(_, s)| s.matched.is_none())
        .map(|(loc, _)| loc)
        .collect();
    if !unmatched.is_empty() {
        return Err(ExtractError::Unvalidated(unmatched));
    }

    let mut entities: BTreeMap<String, Entity> = BTreeMap::new();
    let mut predicates: BTreeMap<String, PredicateTerm> = BTreeMap::new();

    for (location, step) in project.steps() {
        let Some(matched) = &step.matched else {
            continue;
        };
        for (k, triple) in matched.triples.iter().enumerate() {
            let occ = |role| Occurrence {
                location: location.clone(),
                triple: k + 1,
                role,
            };
            for (lexeme, role) in [(&triple.subject, Role::Subject), (&triple.object, Role::Object)] {
                let entity = entities.entry(lexeme.clone()).or_insert_with(|| Entity {
                    lexeme: lexeme.clone(),
                    roles: BTreeSet::new(),
                    occurrences: Vec::new(),
                    assigned_type: None,
                });
                entity.roles.insert(role);
                entity.occurrences.push(occ(role));
            }
            predicates
                .entry(triple.predicate.clone())
                .or_insert_with(|| PredicateTerm {
                    lexeme: triple.predicate.clone(),
                    occurrences: Vec::new(),
                })
                .occurrences
                .push(occ(Role::Predicate));
        }
    }

    Ok(ExtractionReport {
        entities: entities.into_values().collect(),
        predicates: predicates.into_values().collect(),
        source_hash: hash_project(project),
    })
}

/// The project's controlled vocabulary. Terms are stored lowercase.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Glossary {
    terms: BTreeMap<String, Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlossaryEntry {
    pub term: String,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub suggested_type: Option<String>,
}

impl Glossary {
    /// Builds a glossary; returns the first duplicate term on failure.
    pub fn from_entries(entries: impl IntoIterator<Item = GlossaryEntry>) -> Result<Self, String> {
        let mut terms = BTreeMap::new();
        for e in entries {
            let term = e.term.to_ascii_lowercase();
            if terms.insert(term.clone(), e.suggested_type).is_some() {
                return Err(term);
            }
        }
        Ok(Glossary { terms })
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = &'a str>) -> Self {
        Glossary {
            terms: terms
                .into_iter()
                .map(|t| (t.to_ascii_lowercase(), None))
                .collect(),
        }
    }

    pub fn entries(&self) -> Vec<GlossaryEntry> {
        self.terms
            .iter()
            .map(|(term, ty)| GlossaryEntry {
                term: term.clone(),
                suggested_type: ty.clone(),
            })
            .collect()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains_key(term)
    }

    pub fn suggested_type(&self, term: &str) -> Option<&str> {
        self.terms.get(term).and_then(|t| t.as_deref())
    }

    pub fn insert(&mut self, term: &str, suggested_type: Option<String>) {
        self.terms.insert(term.to_ascii_lowercase(), suggested_type);
    }

    pub fn remove(&mut self, term: &str) {
        self.terms.remove(term);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn union(&self, other: &Glossary) -> Glossary {
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            terms.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Glossary { terms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Entity,
    Predicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GlossaryWarning {
    pub code: &'static str,
    pub term: String,
    pub kind: TermKind,
    pub occurrences: Vec<Occurrence>,
}

impl std::fmt::Display for GlossaryWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            TermKind::Entity => "entity",
            TermKind::Predicate => "predicate",
        };
        write!(f, "{}: {kind} {:?} is not in the glossary", self.code, self.term)?;
        if let Some(first) = self.occurrences.first() {
            write!(f, " (first used at {}", first.location)?;
            if self.occurrences.len() > 1 {
                write!(f, ", {} uses", self.occurrences.len())?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// One `W_UNKNOWN_TERM` per entity or predicate lexeme missing from the
/// glossary, entities first.
pub fn check_glossary(report: &ExtractionReport, glossary: &Glossary) -> Vec<GlossaryWarning> {
    let entities = report
        .entities
        .iter()
        .map(|e| (TermKind::Entity, &e.lexeme, &e.occurrences));
    let predicates = report
        .predicates
        .iter()
        .map(|p| (TermKind::Predicate, &p.lexeme, &p.occurrences));
    entities
        .chain(predicates)
        .filter(|(_, lexeme, _)| !glossary.contains(lexeme))
        .map(|(kind, lexeme, occurrences)| GlossaryWarning {
            code: "W_UNKNOWN_TERM",
            term: lexeme.clone(),
            kind,
            occurrences: occurrences.clone(),
        })
        .collect()
}

/// An extraction report in which every entity carries a type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedReport(ExtractionReport);

impl TypedReport {
    pub fn report(&self) -> &ExtractionReport {
        &self.0
    }

    pub fn into_report(self) -> ExtractionReport {
        self.0
    }

    /// `(entity, type)` pairs in lexeme order.
    pub fn types(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.0.entities.iter().map(|e| {
            (
                e.lexeme.as_str(),
                e.assigned_type.as_deref().expect("typed report"),
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypingError {
    #[error("E_UNTYPED: no type for {}", .0.join(", "))]
    Untyped(Vec<String>),
    #[error("E_BAD_TYPE: {0:?} is not a valid type name")]
    BadTypeName(String),
}

impl TypingError {
    pub fn code(&self) -> &'static str {
        match self {
            TypingError::Untyped(_) => "E_UNTYPED",
            TypingError::BadTypeName(_) => "E_BAD_TYPE",
        }
    }
}

/// Gives every entity its type from `assignment`, falling back to
/// `default_type`. Without a default, every unassigned entity is reported.
/// Keys of `assignment` that name no entity are ignored.
pub fn assign_types(
    report: &ExtractionReport,
    assignment: &TypeAssignment,
    default_type: Option<&str>,
) -> Result<TypedReport, TypingError> {
    if let Some(bad) = default_type
        .into_iter()
        .chain(assignment.values().map(String::as_str))
        .find(|t| !is_word(t))
    {
        return Err(TypingError::BadTypeName(bad.to_string()));
    }

    let mut typed = report.clone();
    let mut missing = Vec::new();
    for entity in &mut typed.entities {
        entity.assigned_type = assignment
            .get(&entity.lexeme)
            .map(String::as_str)
            .or(default_type)
            .map(str::to_string);
        if entity.assigned_type.is_none() {
            missing.push(entity.lexeme.clone());
        }
    }
    if missing.is_empty() {
        Ok(TypedReport(typed))
    } else {
        Err(TypingError::Untyped(missing))
    }
}

/// The project's explicit type assignments, with glossary-suggested types
/// filling in terms that have no explicit type.
pub fn effective_assignment(project: &Project) -> TypeAssignment {
    let mut assignment: TypeAssignment = project
        .glossary
        .entries()
        .into_iter()
        .filter_map(|e| e.suggested_type.map(|t| (e.term, t)))
        .collect();
    assignment.extend(
        project
            .type_assignments
            .iter()
            .map(|(k, v)| (k.clone(), v.clone())),
    );
    assignment
}
