//! Statement templates and the statement tokenizer.
//!
//! A template is a whitespace-separated sequence of literal words and the
//! placeholders `<S>`, `<P>`, `<O>` and `<O>+`. The tokenizer reduces a
//! statement to lowercase words and standalone commas, which is the only
//! surface the matcher ever sees.

use std::cmp::Reverse;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Closed set of determiners skipped before a placeholder-bound word.
pub const DEFAULT_DETERMINERS: [&str; 3] = ["a", "an", "the"];

/// The word joining the last item of a repeatable object list.
pub const LIST_CONJUNCTION: &str = "and";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Comma,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub lexeme: String,
    pub kind: TokenKind,
    /// 1-based character column of the first character in the source statement.
    pub column: usize,
}

impl Token {
    pub fn word(lexeme: impl Into<String>, column: usize) -> Self {
        Token {
            lexeme: lexeme.into(),
            kind: TokenKind::Word,
            column,
        }
    }

    pub fn comma(column: usize) -> Self {
        Token {
            lexeme: ",".to_string(),
            kind: TokenKind::Comma,
            column,
        }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexeme)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("E_LEX: unexpected character {found:?} at column {column}")]
pub struct LexError {
    pub column: usize,
    pub found: char,
}

impl LexError {
    pub fn code(&self) -> &'static str {
        "E_LEX"
    }
}

/// True when `s` matches `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_word(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits a statement into lowercase words and comma tokens.
pub fn tokenize(statement: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, String)> = None;

    for (idx, ch) in statement.chars().enumerate() {
        let column = idx + 1;
        if ch.is_ascii_alphanumeric() || ch == '_' {
            match current.as_mut() {
                Some((_, word)) => word.push(ch.to_ascii_lowercase()),
                None if ch.is_ascii_alphabetic() => {
                    current = Some((column, ch.to_ascii_lowercase().to_string()))
                }
                None => return Err(LexError { column, found: ch }),
            }
            continue;
        }
        if let Some((start, word)) = current.take() {
            tokens.push(Token::word(word, start));
        }
        if ch == ',' {
            tokens.push(Token::comma(column));
        } else if !ch.is_whitespace() {
            return Err(LexError { column, found: ch });
        }
    }
    if let Some((start, word)) = current {
        tokens.push(Token::word(word, start));
    }
    Ok(tokens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Predicate,
    Object,
}

impl Role {
    fn symbol(self) -> &'static str {
        match self {
            Role::Subject => "<S>",
            Role::Predicate => "<P>",
            Role::Object => "<O>",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TemplateElement {
    Literal(String),
    Placeholder { role: Role, repeatable: bool },
}

impl TemplateElement {
    pub fn is_literal(&self) -> bool {
        matches!(self, TemplateElement::Literal(_))
    }
}

impl fmt::Display for TemplateElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateElement::Literal(word) => f.write_str(word),
            TemplateElement::Placeholder { role, repeatable } => {
                f.write_str(role.symbol())?;
                if *repeatable {
                    f.write_str("+")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("E_TPL_DUP_ROLE: more than one {0} placeholder")]
    DuplicateRole(&'static str),
    #[error("E_TPL_NO_ROLE: missing {0} placeholder")]
    MissingRole(&'static str),
    #[error("E_TPL_BAD_REPEAT: {0}")]
    BadRepeat(String),
    #[error("E_TPL_BAD_TOKEN: {0:?} is neither a placeholder nor a word")]
    BadToken(String),
    #[error("E_TPL_ORDER: placeholders must appear in subject, predicate, object order")]
    Order,
    #[error("E_TPL_EMPTY: template is empty")]
    Empty,
}

impl TemplateError {
    pub fn code(&self) -> &'static str {
        match self {
            TemplateError::DuplicateRole(_) => "E_TPL_DUP_ROLE",
            TemplateError::MissingRole(_) => "E_TPL_NO_ROLE",
            TemplateError::BadRepeat(_) => "E_TPL_BAD_REPEAT",
            TemplateError::BadToken(_) => "E_TPL_BAD_TOKEN",
            TemplateError::Order => "E_TPL_ORDER",
            TemplateError::Empty => "E_TPL_EMPTY",
        }
    }
}

/// One admissible statement shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    id: String,
    elements: Vec<TemplateElement>,
    source: String,
}

impl Template {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn elements(&self) -> &[TemplateElement] {
        &self.elements
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn literal_count(&self) -> usize {
        self.elements.iter().filter(|e| e.is_literal()).count()
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, el) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{el}")?;
        }
        Ok(())
    }
}

fn parse_item(item: &str) -> Result<TemplateElement, TemplateError> {
    let (body, repeatable) = match item.strip_suffix('+') {
        Some(body) => (body, true),
        None => (item, false),
    };
    let role = match body {
        "<S>" => Some(Role::Subject),
        "<P>" => Some(Role::Predicate),
        "<O>" => Some(Role::Object),
        _ => None,
    };
    match role {
        Some(Role::Object) => Ok(TemplateElement::Placeholder {
            role: Role::Object,
            repeatable,
        }),
        Some(role) if repeatable => Err(TemplateError::BadRepeat(format!(
            "{} cannot repeat",
            role.symbol()
        ))),
        Some(role) => Ok(TemplateElement::Placeholder {
            role,
            repeatable: false,
        }),
        None if !repeatable && is_word(item) => {
            Ok(TemplateElement::Literal(item.to_ascii_lowercase()))
        }
        None => Err(TemplateError::BadToken(item.to_string())),
    }
}

/// Parses a single template pattern such as `<S> <P> in the <O>`.
///
/// The returned template has an empty id; [`TemplateSet::from_lines`] and
/// [`Template::with_id`] assign one.
pub fn parse_template(source: &str) -> Result<Template, TemplateError> {
    let elements = source
        .split_whitespace()
        .map(parse_item)
        .collect::<Result<Vec<_>, _>>()?;
    if elements.is_empty() {
        return Err(TemplateError::Empty);
    }

    let positions = |wanted: Role| -> Vec<usize> {
        elements
            .iter()
            .enumerate()
            .filter_map(|(i, e)| match e {
                TemplateElement::Placeholder { role, .. } if *role == wanted => Some(i),
                _ => None,
            })
            .collect()
    };
    let subjects = positions(Role::Subject);
    let predicates = positions(Role::Predicate);
    let objects = positions(Role::Object);

    if subjects.len() > 1 {
        return Err(TemplateError::DuplicateRole("<S>"));
    }
    if predicates.len() > 1 {
        return Err(TemplateError::DuplicateRole("<P>"));
    }
    for (found, role) in [
        (&subjects, Role::Subject),
        (&predicates, Role::Predicate),
        (&objects, Role::Object),
    ] {
        if found.is_empty() {
            return Err(TemplateError::MissingRole(role.symbol()));
        }
    }

    let repeated: Vec<usize> = elements
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e, TemplateElement::Placeholder { repeatable: true, .. }))
        .map(|(i, _)| i)
        .collect();
    if repeated.len() > 1 {
        return Err(TemplateError::BadRepeat(
            "at most one repeatable object is allowed".into(),
        ));
    }
    if let Some(&pos) = repeated.first() {
        if pos != elements.len() - 1 {
            return Err(TemplateError::BadRepeat(
                "a repeatable object must be the final element".into(),
            ));
        }
    }

    if !(subjects[0] < predicates[0] && predicates[0] < objects[0]) {
        return Err(TemplateError::Order);
    }

    Ok(Template {
        id: String::new(),
        elements,
        source: source.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateFileError {
    #[error("line {line}: {source}")]
    Template { line: usize, source: TemplateError },
    #[error("line {line}: E_TPL_DUP_ID: template id {id:?} is already defined")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: E_TPL_BAD_ID: {id:?} is not a valid template id")]
    BadId { line: usize, id: String },
}

impl TemplateFileError {
    pub fn code(&self) -> &'static str {
        match self {
            TemplateFileError::Template { source, .. } => source.code(),
            TemplateFileError::DuplicateId { .. } => "E_TPL_DUP_ID",
            TemplateFileError::BadId { .. } => "E_TPL_BAD_ID",
        }
    }

    pub fn line(&self) -> usize {
        match self {
            TemplateFileError::Template { line, .. }
            | TemplateFileError::DuplicateId { line, .. }
            | TemplateFileError::BadId { line, .. } => *line,
        }
    }
}

fn is_template_id(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

/// An ordered, id-unique collection of templates plus the filler words the
/// matcher tolerates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: Vec<Template>,
    /// Indices into `templates` in matching order.
    order: Vec<usize>,
    determiners: Vec<String>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet::from_lines(["<S> <P> <O>"]).expect("seed template is valid")
    }
}

impl TemplateSet {
    pub fn new(templates: Vec<Template>) -> Result<Self, TemplateFileError> {
        let mut seen = HashSet::new();
        for (i, t) in templates.iter().enumerate() {
            if !seen.insert(t.id.clone()) {
                return Err(TemplateFileError::DuplicateId {
                    line: i + 1,
                    id: t.id.clone(),
                });
            }
        }
        let mut order: Vec<usize> = (0..templates.len()).collect();
        // Most literals first; the stable sort keeps declaration order on ties.
        order.sort_by_key(|&i| Reverse(templates[i].literal_count()));
        Ok(TemplateSet {
            templates,
            order,
            determiners: DEFAULT_DETERMINERS.iter().map(|d| d.to_string()).collect(),
        })
    }

    /// Reads the line-oriented template format: `#` comments, blank lines,
    /// optional `name:` prefix, otherwise the id is `t<line-number>`.
    pub fn from_lines<I, S>(lines: I) -> Result<Self, TemplateFileError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut templates = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in lines.into_iter().enumerate() {
            let line = idx + 1;
            let text = raw.as_ref().trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let (id, pattern) = split_id(text, line)?;
            let template = parse_template(pattern)
                .map_err(|source| TemplateFileError::Template { line, source })?
                .with_id(id.clone());
            if !seen.insert(id.clone()) {
                return Err(TemplateFileError::DuplicateId { line, id });
            }
            templates.push(template);
        }
        TemplateSet::new(templates)
    }

    pub fn parse_file(text: &str) -> Result<Self, TemplateFileError> {
        TemplateSet::from_lines(text.lines())
    }

    pub fn with_determiners<I, S>(mut self, determiners: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.determiners = determiners
            .into_iter()
            .map(|d| d.into().to_ascii_lowercase())
            .collect();
        self
    }

    pub fn determiners(&self) -> &[String] {
        &self.determiners
    }

    pub fn is_determiner(&self, word: &str) -> bool {
        self.determiners.iter().any(|d| d == word)
    }

    /// Templates in declaration order.
    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    /// Templates in the order the matcher tries them.
    pub fn in_matching_order(&self) -> impl Iterator<Item = &Template> + '_ {
        self.order.iter().map(move |&i| &self.templates[i])
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Source lines suitable for [`TemplateSet::from_lines`]. Ids that differ
    /// from the positional default are written with a `name:` prefix.
    pub fn to_lines(&self) -> Vec<String> {
        self.templates
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if t.id == format!("t{}", i + 1) {
                    t.source.clone()
                } else {
                    format!("{}: {}", t.id, t.source)
                }
            })
            .collect()
    }
}

fn split_id(text: &str, line: usize) -> Result<(String, &str), TemplateFileError> {
    let first = text.split_whitespace().next().unwrap_or_default();
    match first.strip_suffix(':') {
        Some(id) => {
            if !is_template_id(id) {
                return Err(TemplateFileError::BadId {
                    line,
                    id: id.to_string(),
                });
            }
            Ok((id.to_string(), text[first.len()..].trim_start()))
        }
        None => Ok((format!("t{line}"), text)),
    }
}
