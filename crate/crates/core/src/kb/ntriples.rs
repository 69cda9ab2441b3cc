//! Canonical N-Triples output and a line-oriented N-Triples reader.
//!
//! Output is one triple per line sorted by (subject, predicate, object) in
//! their N-Triples spelling, every literal carrying an explicit datatype or
//! language tag. Blank nodes are rejected on input since knowledge base
//! terms are always IRIs or literals.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Iri, KbTriple, KnowledgeBase, Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("E_NT_SYNTAX at line {line}: {message}")]
pub struct NtError {
    pub line: usize,
    pub message: String,
}

impl NtError {
    pub fn code(&self) -> &'static str {
        "E_NT_SYNTAX"
    }
}

fn escape_literal(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}

pub(super) fn term_to_string(term: &Term) -> String {
    let mut out = String::new();
    match term {
        Term::Iri(iri) => {
            let _ = write!(out, "<{iri}>");
        }
        Term::Literal(lit) => {
            out.push('"');
            escape_literal(&mut out, lit.lexical());
            out.push('"');
            match lit.lang() {
                Some(lang) => {
                    let _ = write!(out, "@{lang}");
                }
                None => {
                    let _ = write!(out, "^^<{}>", lit.datatype());
                }
            }
        }
    }
    out
}

/// Byte-deterministic N-Triples text for `kb`.
pub fn serialize_ntriples(kb: &KnowledgeBase) -> Vec<u8> {
    let mut lines: Vec<(String, String, String)> = kb
        .triples()
        .map(|t| {
            (
                format!("<{}>", t.subject),
                format!("<{}>", t.predicate),
                term_to_string(&t.object),
            )
        })
        .collect();
    lines.sort();
    let mut out = String::new();
    for (s, p, o) in lines {
        let _ = writeln!(out, "{s} {p} {o} .");
    }
    out.into_bytes()
}

struct LineParser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
}

impl LineParser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, NtError> {
        Err(NtError {
            line: self.line,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.next_if(|(_, c)| *c == ' ' || *c == '\t').is_some() {}
    }

    fn expect(&mut self, wanted: char) -> Result<(), NtError> {
        match self.chars.next() {
            Some((_, c)) if c == wanted => Ok(()),
            Some((_, c)) => self.err(format!("expected {wanted:?}, found {c:?}")),
            None => self.err(format!("expected {wanted:?}, found end of line")),
        }
    }

    fn hex_escape(&mut self, len: usize) -> Result<char, NtError> {
        let mut code = 0u32;
        for _ in 0..len {
            let Some((_, c)) = self.chars.next() else {
                return self.err("truncated unicode escape");
            };
            let Some(d) = c.to_digit(16) else {
                return self.err(format!("invalid hex digit {c:?}"));
            };
            code = code * 16 + d;
        }
        match char::from_u32(code) {
            Some(c) => Ok(c),
            None => self.err(format!("invalid code point U+{code:X}")),
        }
    }

    fn iri(&mut self) -> Result<Iri, NtError> {
        self.expect('<')?;
        let mut text = String::new();
        loop {
            match self.chars.next() {
                None => return self.err("unterminated IRI"),
                Some((_, '>')) => break,
                Some((_, '\\')) => {
                    let c = match self.chars.next() {
                        Some((_, 'u')) => self.hex_escape(4)?,
                        Some((_, 'U')) => self.hex_escape(8)?,
                        _ => return self.err("only \\u and \\U escapes are allowed in IRIs"),
                    };
                    text.push(c);
                }
                Some((_, c)) => text.push(c),
            }
        }
        match Iri::new(text) {
            Ok(iri) => Ok(iri),
            Err(e) => self.err(e.to_string()),
        }
    }

    fn literal(&mut self) -> Result<Literal, NtError> {
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.chars.next() {
                None => return self.err("unterminated string literal"),
                Some((_, '"')) => break,
                Some((_, '\\')) => {
                    let c = match self.chars.next() {
                        Some((_, 't')) => '\t',
                        Some((_, 'b')) => '\u{8}',
                        Some((_, 'n')) => '\n',
                        Some((_, 'r')) => '\r',
                        Some((_, 'f')) => '\u{c}',
                        Some((_, '"')) => '"',
                        Some((_, '\'')) => '\'',
                        Some((_, '\\')) => '\\',
                        Some((_, 'u')) => self.hex_escape(4)?,
                        Some((_, 'U')) => self.hex_escape(8)?,
                        Some((_, c)) => return self.err(format!("invalid escape \\{c}")),
                        None => return self.err("unterminated escape"),
                    };
                    lexical.push(c);
                }
                Some((_, c @ ('\n' | '\r'))) => {
                    return self.err(format!("raw {c:?} inside a string literal"))
                }
                Some((_, c)) => lexical.push(c),
            }
        }
        match self.chars.peek().copied() {
            Some((_, '^')) => {
                self.chars.next();
                self.expect('^')?;
                let datatype = self.iri()?;
                Literal::typed(lexical, datatype).or_else(|msg| self.err(msg))
            }
            Some((_, '@')) => {
                self.chars.next();
                let mut tag = String::new();
                while let Some((_, c)) = self
                    .chars
                    .next_if(|(_, c)| c.is_ascii_alphanumeric() || *c == '-')
                {
                    tag.push(c);
                }
                let valid = !tag.is_empty()
                    && tag.split('-').all(|part| !part.is_empty())
                    && tag.split('-').next().is_some_and(|p| p.chars().all(|c| c.is_ascii_alphabetic()));
                if !valid {
                    return self.err(format!("invalid language tag {tag:?}"));
                }
                Ok(Literal::lang_string(lexical, tag))
            }
            _ => Ok(Literal::string(lexical)),
        }
    }

    fn object(&mut self) -> Result<Term, NtError> {
        match self.chars.peek().copied() {
            Some((_, '<')) => Ok(Term::Iri(self.iri()?)),
            Some((_, '"')) => Ok(Term::Literal(self.literal()?)),
            Some((_, '_')) => self.err("blank nodes are not supported"),
            Some((_, c)) => self.err(format!("unexpected {c:?} where an object was expected")),
            None => self.err("missing object"),
        }
    }

    fn subject(&mut self) -> Result<Iri, NtError> {
        match self.chars.peek().copied() {
            Some((_, '_')) => self.err("blank nodes are not supported"),
            _ => self.iri(),
        }
    }

    fn triple(&mut self) -> Result<KbTriple, NtError> {
        let subject = self.subject()?;
        self.skip_ws();
        let predicate = self.iri()?;
        self.skip_ws();
        let object = self.object()?;
        self.skip_ws();
        self.expect('.')?;
        self.skip_ws();
        match self.chars.peek().copied() {
            None | Some((_, '#')) => Ok(KbTriple {
                subject,
                predicate,
                object,
            }),
            Some((_, c)) => self.err(format!("trailing {c:?} after '.'")),
        }
    }
}

/// Reads N-Triples into a knowledge base. Comment and blank lines are
/// skipped; plain literals become `xsd:string`.
pub fn parse_ntriples(bytes: &[u8]) -> Result<KnowledgeBase, NtError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        NtError {
            line,
            message: "input is not valid UTF-8".into(),
        }
    })?;

    let mut triples = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim_matches([' ', '\t']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parser = LineParser {
            chars: trimmed.char_indices().peekable(),
            line: idx + 1,
        };
        triples.push(parser.triple()?);
    }
    Ok(KnowledgeBase::from_triples(triples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    #[test]
    fn empty_kb_is_empty_bytes() {
        assert!(serialize_ntriples(&KnowledgeBase::default()).is_empty());
        assert!(parse_ntriples(b"").unwrap().is_empty());
    }

    #[test]
    fn line_format() {
        let kb = KnowledgeBase::from_triples([
            KbTriple::new(iri("urn:x#s"), iri("urn:x#p"), iri("urn:x#o")),
            KbTriple::new(iri("urn:x#s"), iri("urn:x#n"), Literal::integer(7)),
            KbTriple::new(iri("urn:x#a"), iri("urn:x#n"), Literal::string("say \"hi\"\n")),
        ]);
        let text = String::from_utf8(serialize_ntriples(&kb)).unwrap();
        assert_eq!(
            text,
            "<urn:x#a> <urn:x#n> \"say \\\"hi\\\"\\n\"^^<http://www.w3.org/2001/XMLSchema#string> .\n\
             <urn:x#s> <urn:x#n> \"7\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n\
             <urn:x#s> <urn:x#p> <urn:x#o> .\n"
        );
        assert_eq!(parse_ntriples(text.as_bytes()).unwrap(), kb);
    }

    #[test]
    fn accepts_general_ntriples() {
        let input = "# comment\n\
            <http://e.org/a>\t<http://e.org/b>   \"plain\" .  # trailing\n\
            \n\
            <http://e.org/a> <http://e.org/c> \"hola\"@es-ES .\r\n\
            <http://e.org/\\u0041> <http://e.org/d> \"\\u00e9\\t\" .\n";
        let kb = parse_ntriples(input.as_bytes()).unwrap();
        assert_eq!(kb.len(), 3);
        let objects: Vec<String> = kb.triples().map(|t| t.object.to_ntriples()).collect();
        assert!(objects.contains(&"\"plain\"^^<http://www.w3.org/2001/XMLSchema#string>".into()));
        assert!(objects.contains(&"\"hola\"@es-ES".into()));
        assert!(kb.triples().any(|t| t.subject.as_str() == "http://e.org/A"));
        // canonical output parses back to the same set
        let canon = serialize_ntriples(&kb);
        assert_eq!(parse_ntriples(&canon).unwrap(), kb);
    }

    fn error_line(input: &str) -> usize {
        parse_ntriples(input.as_bytes()).unwrap_err().line
    }

    #[test]
    fn syntax_errors_report_line() {
        assert_eq!(error_line("<a:b> <a:c> <a:d> .\n<a:b> <a:c> <a:d>\n"), 2);
        assert_eq!(error_line("\n\n_:b0 <a:c> <a:d> .\n"), 3);
        assert_eq!(error_line("<a:b> <a:c> _:x .\n"), 1);
        assert_eq!(error_line("<a:b> <a:c> \"x\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"), 1);
        assert_eq!(error_line("<a:b> <a:c> \"unterminated .\n"), 1);
        assert_eq!(error_line("<relative> <a:c> <a:d> .\n"), 1);
        assert_eq!(error_line("<a:b> <a:c> <a:d> . extra\n"), 1);
        assert_eq!(error_line("<a:b> \"lit\" <a:d> .\n"), 1);
        assert_eq!(error_line("<a:b> <a:c> \"x\"@ .\n"), 1);
        let err = parse_ntriples(b"<a:b> <a:c> .\n").unwrap_err();
        assert_eq!(err.code(), "E_NT_SYNTAX");
    }

    #[test]
    fn namespace_is_inferred_from_declarations() {
        let kb = parse_ntriples(
            b"<urn:ucat:proj:t5#Actor> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <urn:ucat:vocab:1#Class> .\n",
        )
        .unwrap();
        assert_eq!(kb.namespace.as_deref(), Some("urn:ucat:proj:t5#"));
    }
}
