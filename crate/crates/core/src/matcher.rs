//! Matching tokenized statements against templates.

use std::fmt;
use std::ops::Range;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::template::{
    tokenize, LexError, Role, Template, TemplateElement, TemplateSet, Token, DEFAULT_DETERMINERS,
    LIST_CONJUNCTION,
};

/// A subject, predicate, object triple of lowercase word lexemes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RawTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl RawTriple {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        RawTriple {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }
}

impl fmt::Display for RawTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub template_id: String,
    pub triples: Vec<RawTriple>,
    pub consumed: Range<usize>,
}

/// Outcome of matching one statement against a template set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchOutcome {
    Matched(MatchResult),
    NoMatch,
}

impl MatchOutcome {
    pub fn into_option(self) -> Option<MatchResult> {
        match self {
            MatchOutcome::Matched(m) => Some(m),
            MatchOutcome::NoMatch => None,
        }
    }
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    determiners: &'a [String],
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn is_determiner(&self, tok: &Token) -> bool {
        tok.is_word() && self.determiners.contains(&tok.lexeme)
    }

    /// Optional determiner, then one non-determiner word.
    fn bind_word(&mut self) -> Option<&'a str> {
        if let Some(tok) = self.peek() {
            if self.is_determiner(tok) {
                self.pos += 1;
            }
        }
        let tok = self.peek()?;
        if !tok.is_word() || self.is_determiner(tok) {
            return None;
        }
        self.pos += 1;
        Some(&tok.lexeme)
    }

    /// `word (, word)* (and word)?` where every word may carry a determiner.
    fn bind_list(&mut self, out: &mut Vec<&'a str>) -> Option<()> {
        out.push(self.bind_word()?);
        while let Some(tok) = self.peek() {
            if !tok.is_word() {
                self.pos += 1;
                out.push(self.bind_word()?);
            } else if tok.lexeme == LIST_CONJUNCTION {
                self.pos += 1;
                out.push(self.bind_word()?);
                break;
            } else {
                return None;
            }
        }
        Some(())
    }
}

/// Matches a token stream against one template, consuming every token.
///
/// Determiner filtering uses the default determiner set. Use
/// [`match_statement_in`] to honour a project's configured determiners.
pub fn match_statement(tokens: &[Token], template: &Template) -> MatchOutcome {
    static DEFAULTS: LazyLock<Vec<String>> =
        LazyLock::new(|| DEFAULT_DETERMINERS.iter().map(|d| d.to_string()).collect());
    match_with_determiners(tokens, template, &DEFAULTS)
}

/// Like [`match_statement`], taking determiners from `set`.
pub fn match_statement_in(tokens: &[Token], template: &Template, set: &TemplateSet) -> MatchOutcome {
    match_with_determiners(tokens, template, set.determiners())
}

fn match_with_determiners(tokens: &[Token], template: &Template, determiners: &[String]) -> MatchOutcome {
    let mut cur = Cursor {
        tokens,
        pos: 0,
        determiners,
    };
    let mut subject = None;
    let mut predicate = None;
    let mut objects = Vec::new();

    for element in template.elements() {
        let ok = match element {
            TemplateElement::Literal(word) => match cur.peek() {
                Some(tok) if tok.is_word() && tok.lexeme == *word => {
                    cur.pos += 1;
                    true
                }
                _ => false,
            },
            TemplateElement::Placeholder { role, repeatable } => match (role, repeatable) {
                (Role::Object, true) => cur.bind_list(&mut objects).is_some(),
                (Role::Object, false) => cur.bind_word().map(|w| objects.push(w)).is_some(),
                (Role::Subject, _) => cur.bind_word().map(|w| subject = Some(w)).is_some(),
                (Role::Predicate, _) => cur.bind_word().map(|w| predicate = Some(w)).is_some(),
            },
        };
        if !ok {
            return MatchOutcome::NoMatch;
        }
    }
    if cur.pos != tokens.len() {
        return MatchOutcome::NoMatch;
    }

    let (Some(subject), Some(predicate)) = (subject, predicate) else {
        return MatchOutcome::NoMatch;
    };
    let triples = objects
        .into_iter()
        .map(|o| RawTriple::new(subject, predicate, o))
        .collect();
    MatchOutcome::Matched(MatchResult {
        template_id: template.id().to_string(),
        triples,
        consumed: 0..tokens.len(),
    })
}

/// Tries every template of `set` in matching order; the first match wins.
pub fn match_tokens(tokens: &[Token], set: &TemplateSet) -> MatchOutcome {
    set.in_matching_order()
        .map(|t| match_statement_in(tokens, t, set))
        .find(|m| matches!(m, MatchOutcome::Matched(_)))
        .unwrap_or(MatchOutcome::NoMatch)
}

pub fn match_against_set(statement: &str, set: &TemplateSet) -> Result<MatchOutcome, LexError> {
    let tokens = tokenize(statement)?;
    Ok(match_tokens(&tokens, set))
}
