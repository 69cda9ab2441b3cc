use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use super::{PatternTerm, SelectQuery, TriplePattern};
use crate::kb::{vocab, Iri, Literal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    /// `position` is the 1-based character offset of the problem.
    #[error("E_Q_SYNTAX at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("E_Q_UNBOUND: projected variable ?{0} does not occur in any pattern")]
    Unbound(String),
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::Syntax { .. } => "E_Q_SYNTAX",
            QueryError::Unbound(_) => "E_Q_UNBOUND",
        }
    }
}

/// Prefix bindings available to a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prefixes(BTreeMap<String, String>);

impl Prefixes {
    /// `ucat:`, `rdf:` and `xsd:`, plus `ns:` when a namespace is given.
    pub fn new(namespace: Option<&str>) -> Self {
        let mut map = BTreeMap::new();
        map.insert("ucat".to_string(), vocab::UCAT.to_string());
        map.insert(
            "rdf".to_string(),
            "http://www.w3.org/1999/02/22-rdf-syntax-ns#".to_string(),
        );
        map.insert(
            "xsd".to_string(),
            "http://www.w3.org/2001/XMLSchema#".to_string(),
        );
        if let Some(ns) = namespace {
            map.insert("ns".to_string(), ns.to_string());
        }
        Prefixes(map)
    }

    pub fn insert(&mut self, prefix: &str, iri: &str) {
        self.0.insert(prefix.to_string(), iri.to_string());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.0.get(prefix).map(String::as_str)
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    prefixes: &'a mut Prefixes,
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Syntax {
            position: self.pos + 1,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => self.pos += 1,
                Some('#') => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    fn keyword(&mut self, word: &str) -> bool {
        let end = self.pos + word.len();
        if end > self.chars.len() {
            return false;
        }
        let found: String = self.chars[self.pos..end].iter().collect();
        let boundary = self.chars.get(end).is_none_or(|c| !is_name_char(*c));
        if found.eq_ignore_ascii_case(word) && boundary {
            self.pos = end;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), QueryError> {
        self.skip_ws();
        if self.keyword(word) {
            Ok(())
        } else {
            self.err(format!("expected {word}"))
        }
    }

    fn expect_char(&mut self, wanted: char) -> Result<(), QueryError> {
        self.skip_ws();
        if self.peek() == Some(wanted) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {wanted:?}"))
        }
    }

    fn name(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(is_name_char) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn variable(&mut self) -> Result<String, QueryError> {
        // caller has seen '?' or '$'
        self.pos += 1;
        if !self.peek().is_some_and(is_name_start) {
            return self.err("variable names must start with a letter");
        }
        Ok(self.name())
    }

    fn iri_ref(&mut self) -> Result<Iri, QueryError> {
        let start = self.pos;
        self.pos += 1;
        let mut text = String::new();
        loop {
            match self.peek() {
                None => {
                    self.pos = start;
                    return self.err("unterminated IRI");
                }
                Some('>') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => {
                    text.push(c);
                    self.pos += 1;
                }
            }
        }
        Iri::new(text).or_else(|e| {
            self.pos = start;
            self.err(e.to_string())
        })
    }

    fn prefixed_name(&mut self) -> Result<Iri, QueryError> {
        let start = self.pos;
        let prefix = self.name();
        if self.peek() != Some(':') {
            self.pos = start;
            return self.err(format!("unexpected {prefix:?}"));
        }
        self.pos += 1;
        let local_start = self.pos;
        while self
            .peek()
            .is_some_and(|c| is_name_char(c) || matches!(c, '-' | '.' | '%'))
        {
            self.pos += 1;
        }
        // a trailing '.' ends the triple, not the name
        while self.pos > local_start && self.chars[self.pos - 1] == '.' {
            self.pos -= 1;
        }
        let local: String = self.chars[local_start..self.pos].iter().collect();
        let Some(base) = self.prefixes.get(&prefix) else {
            self.pos = start;
            return self.err(format!("prefix {prefix}: is not bound"));
        };
        Iri::new(format!("{base}{local}")).or_else(|e| {
            self.pos = start;
            self.err(e.to_string())
        })
    }

    fn literal(&mut self) -> Result<Literal, QueryError> {
        let start = self.pos;
        self.pos += 1;
        let mut lexical = String::new();
        loop {
            match self.peek() {
                None => {
                    self.pos = start;
                    return self.err("unterminated string literal");
                }
                Some('"') => {
                    self.pos += 1;
                    break;
                }
                Some('\\') => {
                    self.pos += 1;
                    let c = match self.peek() {
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('t') => '\t',
                        Some('"') => '"',
                        Some('\\') => '\\',
                        _ => return self.err("invalid escape"),
                    };
                    lexical.push(c);
                    self.pos += 1;
                }
                Some(c) => {
                    lexical.push(c);
                    self.pos += 1;
                }
            }
        }
        if self.peek() == Some('^') {
            self.pos += 1;
            if self.peek() != Some('^') {
                return self.err("expected '^^'");
            }
            self.pos += 1;
            let datatype = match self.peek() {
                Some('<') => self.iri_ref()?,
                Some(c) if is_name_start(c) => self.prefixed_name()?,
                _ => return self.err("expected a datatype IRI"),
            };
            return Literal::typed(lexical, datatype).or_else(|msg| {
                self.pos = start;
                self.err(msg)
            });
        }
        if self.peek() == Some('@') {
            self.pos += 1;
            let tag_start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '-') {
                self.pos += 1;
            }
            let tag: String = self.chars[tag_start..self.pos].iter().collect();
            if tag.is_empty() {
                return self.err("empty language tag");
            }
            return Ok(Literal::lang_string(lexical, tag));
        }
        Ok(Literal::string(lexical))
    }

    fn integer(&mut self) -> Result<Literal, QueryError> {
        let start = self.pos;
        if matches!(self.peek(), Some('+' | '-')) {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<i64>() {
            Ok(n) => Ok(Literal::integer(n)),
            Err(_) => {
                self.pos = start;
                self.err(format!("invalid integer {text:?}"))
            }
        }
    }

    fn term(&mut self, position: &str) -> Result<PatternTerm, QueryError> {
        self.skip_ws();
        let at = self.pos;
        let term = match self.peek() {
            Some('?' | '$') => PatternTerm::Var(self.variable()?),
            Some('<') => PatternTerm::Iri(self.iri_ref()?),
            Some('"') => PatternTerm::Lit(self.literal()?),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => {
                PatternTerm::Lit(self.integer()?)
            }
            Some('a')
                if position == "predicate"
                    && self.chars.get(self.pos + 1).is_none_or(|c| c.is_whitespace()) =>
            {
                self.pos += 1;
                PatternTerm::Iri(Iri::new(vocab::RDF_TYPE).expect("rdf:type"))
            }
            Some(c) if is_name_start(c) => PatternTerm::Iri(self.prefixed_name()?),
            Some(c) => return self.err(format!("unexpected {c:?} where a {position} was expected")),
            None => return self.err(format!("missing {position}")),
        };
        if position != "object" && matches!(term, PatternTerm::Lit(_)) {
            self.pos = at;
            return self.err(format!("a literal cannot be a {position}"));
        }
        Ok(term)
    }

    fn prologue(&mut self) -> Result<(), QueryError> {
        loop {
            self.skip_ws();
            if !self.keyword("PREFIX") {
                return Ok(());
            }
            self.skip_ws();
            let prefix = self.name();
            if prefix.is_empty() {
                return self.err("expected a prefix name");
            }
            self.expect_char(':')?;
            self.skip_ws();
            if self.peek() != Some('<') {
                return self.err("expected an IRI after the prefix name");
            }
            let iri = self.iri_ref()?;
            self.prefixes.insert(&prefix, iri.as_str());
        }
    }

    fn query(&mut self) -> Result<SelectQuery, QueryError> {
        self.prologue()?;
        self.expect_keyword("SELECT")?;
        let mut projection = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some('?' | '$') => {
                    let at = self.pos;
                    let v = self.variable()?;
                    if projection.contains(&v) {
                        self.pos = at;
                        return self.err(format!("?{v} is projected twice"));
                    }
                    projection.push(v);
                }
                _ => break,
            }
        }
        if projection.is_empty() {
            return self.err("SELECT needs at least one variable");
        }
        self.expect_keyword("WHERE")?;
        self.expect_char('{')?;

        let mut patterns = Vec::new();
        loop {
            self.skip_ws();
            if self.peek() == Some('}') {
                if patterns.is_empty() {
                    return self.err("the pattern list is empty");
                }
                self.pos += 1;
                break;
            }
            let subject = self.term("subject")?;
            let predicate = self.term("predicate")?;
            let object = self.term("object")?;
            patterns.push(TriplePattern {
                subject,
                predicate,
                object,
            });
            self.skip_ws();
            match self.peek() {
                Some('.') => self.pos += 1,
                Some('}') => {}
                _ => return self.err("expected '.' or '}'"),
            }
        }
        self.skip_ws();
        if self.pos < self.chars.len() {
            return self.err("unexpected text after the query");
        }

        let used: HashSet<&str> = patterns
            .iter()
            .flat_map(|p| p.terms())
            .filter_map(|t| t.var())
            .collect();
        if let Some(missing) = projection.iter().find(|v| !used.contains(v.as_str())) {
            return Err(QueryError::Unbound(missing.clone()));
        }
        Ok(SelectQuery {
            projection,
            patterns,
        })
    }
}

/// Parses a query; `PREFIX` declarations in the text extend `prefixes` for
/// this query only.
pub fn parse_query(text: &str, prefixes: &Prefixes) -> Result<SelectQuery, QueryError> {
    let mut prefixes = prefixes.clone();
    Parser {
        chars: text.chars().collect(),
        pos: 0,
        prefixes: &mut prefixes,
    }
    .query()
}
