//! Conjunctive `SELECT ... WHERE { ... }` queries over a knowledge base.
//!
//! ```text
//! SELECT ?o WHERE { ns:user ?p ?o . }
//! ```
//!
//! Terms are `?var`, `<absolute-iri>`, `prefix:local` (with `ns:`, `ucat:`,
//! `rdf:` and `xsd:` predeclared), `a` for `rdf:type` in predicate
//! position, quoted literals with an optional `^^datatype` or `@lang`, and
//! bare integers.
//!
//! A variable in predicate position only binds domain properties, never
//! `rdf:type` or a `ucat:` term, unless [`PredicateScope::All`] is requested.
//! Structure and provenance triples stay reachable through patterns that
//! name their predicate explicitly.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::kb::{Iri, Literal, Term};

mod eval;
mod parser;

pub use eval::{evaluate, evaluate_with};
pub use parser::{parse_query, Prefixes, QueryError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(String),
    Iri(Iri),
    Lit(Literal),
}

impl PatternTerm {
    pub fn var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "?{v}"),
            PatternTerm::Iri(iri) => write!(f, "<{iri}>"),
            PatternTerm::Lit(lit) => write!(f, "{}", Term::Literal(lit.clone())),
        }
    }
}

/// Subject and predicate are never literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn terms(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectQuery {
    pub projection: Vec<String>,
    pub patterns: Vec<TriplePattern>,
}

impl fmt::Display for SelectQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT")?;
        for v in &self.projection {
            write!(f, " ?{v}")?;
        }
        f.write_str(" WHERE {")?;
        for p in &self.patterns {
            write!(f, " {p}")?;
        }
        f.write_str(" }")
    }
}

/// Variable bindings restricted to the query's projection.
pub type SolutionMapping = BTreeMap<String, Term>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PredicateScope {
    /// Predicate variables bind only IRIs outside `rdf:` and `ucat:`.
    #[default]
    Domain,
    /// Predicate variables bind any predicate.
    All,
}

/// Tabular view of a result: one row per solution, columns in projection order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ResultTable {
    /// Cells hold IRI text or a literal's lexical form.
    pub fn new(query: &SelectQuery, solutions: &[SolutionMapping]) -> Self {
        ResultTable {
            columns: query.projection.clone(),
            rows: solutions
                .iter()
                .map(|s| {
                    query
                        .projection
                        .iter()
                        .map(|v| s.get(v).map(|t| t.value().to_string()).unwrap_or_default())
                        .collect()
                })
                .collect(),
        }
    }
}
