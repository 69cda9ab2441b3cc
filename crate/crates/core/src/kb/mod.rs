//! The generated knowledge base: a set of typed triples over absolute IRIs
//! and string or integer literals.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

mod build;
mod dot;
mod ntriples;

pub use build::build_kb;
pub use dot::{export_graph, Edge, EdgeKind, Graph, GraphOptions, NodeKind};
pub use ntriples::{parse_ntriples, serialize_ntriples, NtError};

/// The fixed vocabulary used for structure and provenance triples.
pub mod vocab {
    pub const UCAT: &str = "urn:ucat:vocab:1#";
    pub const VERSION: &str = "1";
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";

    pub const CLASS: &str = "urn:ucat:vocab:1#Class";
    pub const PROPERTY: &str = "urn:ucat:vocab:1#Property";
    pub const STATEMENT: &str = "urn:ucat:vocab:1#Statement";
    pub const HAS_SUBJECT: &str = "urn:ucat:vocab:1#hasSubject";
    pub const HAS_PREDICATE: &str = "urn:ucat:vocab:1#hasPredicate";
    pub const HAS_OBJECT: &str = "urn:ucat:vocab:1#hasObject";
    pub const IN_STEP: &str = "urn:ucat:vocab:1#inStep";
    pub const SIDE: &str = "urn:ucat:vocab:1#side";
    pub const IN_SCENARIO: &str = "urn:ucat:vocab:1#inScenario";
    pub const IN_USE_CASE: &str = "urn:ucat:vocab:1#inUseCase";
    pub const OWNED_BY: &str = "urn:ucat:vocab:1#ownedBy";
    pub const BRANCHES_AT: &str = "urn:ucat:vocab:1#branchesAt";

    /// True for `rdf:type` and every `ucat:` IRI.
    pub fn is_vocabulary(iri: &str) -> bool {
        iri == RDF_TYPE || iri.starts_with(UCAT)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("E_IRI: {0}")]
    Iri(String),
}

impl KbError {
    pub fn code(&self) -> &'static str {
        match self {
            KbError::Iri(_) => "E_IRI",
        }
    }
}

fn iri_problem(s: &str) -> Option<String> {
    let Some((scheme, _)) = s.split_once(':') else {
        return Some(format!("{s:?} has no scheme"));
    };
    let scheme_ok = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && scheme
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    if !scheme_ok {
        return Some(format!("{s:?} has an invalid scheme"));
    }
    s.chars()
        .find(|&c| c <= ' ' || "<>\"{}|^`\\".contains(c))
        .map(|c| format!("{s:?} contains {c:?}"))
}

/// An absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(String);

impl Iri {
    pub fn new(iri: impl Into<String>) -> Result<Self, KbError> {
        let iri = iri.into();
        match iri_problem(&iri) {
            Some(problem) => Err(KbError::Iri(problem)),
            None => Ok(Iri(iri)),
        }
    }

    /// For compile-time vocabulary constants.
    pub(crate) fn from_static(iri: &'static str) -> Self {
        debug_assert!(iri_problem(iri).is_none());
        Iri(iri.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#`, `/` or `:`.
    pub fn local_name(&self) -> &str {
        self.0
            .rfind(['#', '/', ':'])
            .map(|i| &self.0[i + 1..])
            .unwrap_or(&self.0)
    }

    pub fn namespace(&self) -> &str {
        &self.0[..self.0.len() - self.local_name().len()]
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    lang: Option<String>,
}

impl Literal {
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static(vocab::XSD_STRING),
            lang: None,
        }
    }

    pub fn integer(value: i64) -> Self {
        Literal {
            lexical: value.to_string(),
            datatype: Iri::from_static(vocab::XSD_INTEGER),
            lang: None,
        }
    }

    /// A literal with an explicit datatype. `xsd:integer` literals must be
    /// base-10 integers.
    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Result<Self, String> {
        let lexical = lexical.into();
        if datatype.as_str() == vocab::XSD_INTEGER && !is_integer_lexical(&lexical) {
            return Err(format!("{lexical:?} is not a base-10 integer"));
        }
        Ok(Literal {
            lexical,
            datatype,
            lang: None,
        })
    }

    pub fn lang_string(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Iri::from_static("http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"),
            lang: Some(lang.into()),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn lang(&self) -> Option<&str> {
        self.lang.as_deref()
    }

    pub fn as_integer(&self) -> Option<i64> {
        (self.datatype.as_str() == vocab::XSD_INTEGER)
            .then(|| self.lexical.parse().ok())
            .flatten()
    }
}

fn is_integer_lexical(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    /// IRI text or literal lexical form.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.as_str(),
            Term::Literal(lit) => lit.lexical(),
        }
    }

    /// The N-Triples spelling of this term.
    pub fn to_ntriples(&self) -> String {
        ntriples::term_to_string(self)
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KbTriple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl KbTriple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        KbTriple {
            subject,
            predicate,
            object: object.into(),
        }
    }

    /// A triple whose predicate is neither `rdf:type` nor a `ucat:` term and
    /// whose object is an IRI.
    pub fn is_domain_assertion(&self) -> bool {
        !vocab::is_vocabulary(self.predicate.as_str()) && matches!(self.object, Term::Iri(_))
    }
}

/// Equality compares the triple sets only.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    triples: BTreeSet<KbTriple>,
    /// The project namespace, when known.
    pub namespace: Option<String>,
    pub vocabulary_version: String,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for KnowledgeBase {}

impl KnowledgeBase {
    pub fn new(namespace: Option<String>) -> Self {
        KnowledgeBase {
            triples: BTreeSet::new(),
            namespace,
            vocabulary_version: vocab::VERSION.to_string(),
        }
    }

    pub fn from_triples(triples: impl IntoIterator<Item = KbTriple>) -> Self {
        let mut kb = KnowledgeBase::new(None);
        kb.triples.extend(triples);
        kb.namespace = kb.infer_namespace();
        kb
    }

    /// Returns false when the triple was already present.
    pub fn insert(&mut self, triple: KbTriple) -> bool {
        self.triples.insert(triple)
    }

    pub fn contains(&self, triple: &KbTriple) -> bool {
        self.triples.contains(triple)
    }

    pub fn triples(&self) -> impl Iterator<Item = &KbTriple> + '_ {
        self.triples.iter()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn domain_assertions(&self) -> impl Iterator<Item = &KbTriple> + '_ {
        self.triples.iter().filter(|t| t.is_domain_assertion())
    }

    /// Subjects of `rdf:type <class>` triples.
    pub fn instances_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a Iri> + 'a {
        self.triples.iter().filter_map(move |t| {
            (t.predicate.as_str() == vocab::RDF_TYPE
                && t.object.as_iri().is_some_and(|o| o.as_str() == class))
            .then_some(&t.subject)
        })
    }

    /// Set union; the namespace of `self` wins when both are known.
    pub fn union(&self, other: &KnowledgeBase) -> KnowledgeBase {
        let mut kb = self.clone();
        kb.triples.extend(other.triples.iter().cloned());
        if kb.namespace.is_none() {
            kb.namespace = other.namespace.clone();
        }
        kb
    }

    /// The namespace shared by the declared classes and properties, if any.
    pub fn infer_namespace(&self) -> Option<String> {
        let mut found = self
            .instances_of(vocab::CLASS)
            .chain(self.instances_of(vocab::PROPERTY))
            .map(|iri| iri.namespace().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter();
        match (found.next(), found.next()) {
            (Some(ns), None) => Some(ns),
            _ => None,
        }
    }
}
