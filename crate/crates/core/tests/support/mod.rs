#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::Rng;
use rusforge_core::document::validate_project;
use rusforge_core::extraction::{assign_types, effective_assignment, extract};
use rusforge_core::kb::{build_kb, vocab, Iri, KbTriple, Literal, Term};
use rusforge_core::project_file::load_project;
use rusforge_core::query::{PatternTerm, SelectQuery, SolutionMapping, TriplePattern};
use rusforge_core::{ExtractionReport, KnowledgeBase, Project, RawTriple, TemplateSet};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).expect("fixture readable")
}

pub fn load_fixture(name: &str) -> Project {
    load_project(&fixture_bytes(name)).expect("fixture loads")
}

pub struct Built {
    pub project: Project,
    pub report: ExtractionReport,
    pub kb: KnowledgeBase,
}

/// Validate, extract, type with the project's own assignment, build.
pub fn build_fixture(name: &str) -> Built {
    let mut project = load_fixture(name);
    let verdict = validate_project(&mut project);
    assert!(verdict.valid, "{name} does not validate");
    let report = extract(&project).expect("validated");
    let typed = assign_types(&report, &effective_assignment(&project), None).expect("typed");
    let kb = build_kb(&project, &typed).expect("kb builds");
    Built {
        project,
        report,
        kb,
    }
}

pub fn all_triples(project: &Project) -> Vec<RawTriple> {
    project
        .steps()
        .flat_map(|(_, s)| s.matched.as_ref().expect("validated").triples.clone())
        .collect()
}

// ---------------------------------------------------------------------------
// Matcher oracle: enumerate every way of cutting the token list into spans,
// one per template element, and keep the cuts in which every span is
// acceptable for its element.

const DETERMINERS: [&str; 3] = ["a", "an", "the"];

fn is_det(tok: &str) -> bool {
    DETERMINERS.contains(&tok)
}

fn is_content(tok: &str) -> bool {
    tok != "," && !is_det(tok)
}

#[derive(Debug, Clone, PartialEq)]
enum Item {
    Lit(String),
    S,
    P,
    O,
    OPlus,
}

fn items(source: &str) -> Vec<Item> {
    source
        .split_whitespace()
        .map(|w| match w {
            "<S>" => Item::S,
            "<P>" => Item::P,
            "<O>" => Item::O,
            "<O>+" => Item::OPlus,
            lit => Item::Lit(lit.to_ascii_lowercase()),
        })
        .collect()
}

/// A placeholder span: `W` or `det W`.
fn single(span: &[String]) -> Option<String> {
    match span {
        [w] if is_content(w) => Some(w.clone()),
        [d, w] if is_det(d) && is_content(w) => Some(w.clone()),
        _ => None,
    }
}

/// Every object list the span can be read as under
/// `det? W (, det? W)* (and det? W)?`.
fn lists(span: &[String]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for first in 1..=span.len().min(2) {
        let Some(w) = single(&span[..first]) else {
            continue;
        };
        for mut rest in tails(&span[first..], false) {
            rest.insert(0, w.clone());
            out.push(rest);
        }
    }
    out
}

fn tails(span: &[String], after_and: bool) -> Vec<Vec<String>> {
    if span.is_empty() {
        return vec![Vec::new()];
    }
    if after_and {
        return Vec::new();
    }
    let sep = span[0].as_str();
    if sep != "," && sep != "and" {
        return Vec::new();
    }
    let mut out = Vec::new();
    for len in 1..=(span.len() - 1).min(2) {
        let Some(w) = single(&span[1..1 + len]) else {
            continue;
        };
        for mut rest in tails(&span[1 + len..], sep == "and") {
            rest.insert(0, w.clone());
            out.push(rest);
        }
    }
    out
}

type Parse = (String, String, Vec<String>);

fn parses(items: &[Item], tokens: &[String]) -> Vec<Parse> {
    let mut out = Vec::new();
    cut(items, tokens, &mut Vec::new(), &mut out);
    out
}

fn cut(items: &[Item], tokens: &[String], bound: &mut Vec<(Item, Vec<String>)>, out: &mut Vec<Parse>) {
    let Some((item, rest)) = items.split_first() else {
        if tokens.is_empty() {
            let mut s = String::new();
            let mut p = String::new();
            let mut o = Vec::new();
            for (it, words) in bound.iter() {
                match it {
                    Item::S => s = words[0].clone(),
                    Item::P => p = words[0].clone(),
                    Item::O | Item::OPlus => o.extend(words.iter().cloned()),
                    Item::Lit(_) => {}
                }
            }
            out.push((s, p, o));
        }
        return;
    };
    for len in 0..=tokens.len() {
        let span = &tokens[..len];
        let readings: Vec<Vec<String>> = match item {
            Item::Lit(w) => {
                if span.len() == 1 && span[0] == *w {
                    vec![Vec::new()]
                } else {
                    Vec::new()
                }
            }
            Item::S | Item::P | Item::O => single(span).map(|w| vec![vec![w]]).unwrap_or_default(),
            Item::OPlus => lists(span),
        };
        for words in readings {
            bound.push((item.clone(), words));
            cut(rest, &tokens[len..], bound, out);
            bound.pop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Match { template_id: String, triples: Vec<RawTriple> },
    NoMatch,
    /// The winning template admits two readings with different triples.
    Ambiguous(String),
}

/// `templates` is `(id, source)` in declaration order.
pub fn oracle_match(templates: &[(String, String)], tokens: &[String]) -> OracleVerdict {
    let mut order: Vec<usize> = (0..templates.len()).collect();
    let literals = |src: &str| items(src).iter().filter(|i| matches!(i, Item::Lit(_))).count();
    order.sort_by(|&a, &b| {
        literals(&templates[b].1)
            .cmp(&literals(&templates[a].1))
            .then(a.cmp(&b))
    });
    for i in order {
        let (id, source) = &templates[i];
        let found: BTreeSet<Parse> = parses(&items(source), tokens).into_iter().collect();
        match found.len() {
            0 => continue,
            1 => {
                let (s, p, objects) = found.into_iter().next().unwrap();
                return OracleVerdict::Match {
                    template_id: id.clone(),
                    triples: objects.iter().map(|o| RawTriple::new(&s, &p, o)).collect(),
                };
            }
            _ => return OracleVerdict::Ambiguous(id.clone()),
        }
    }
    OracleVerdict::NoMatch
}

const CONTENT: [&str; 8] = ["user", "system", "clicks", "link", "list", "name", "email", "selects"];
const LITERALS: [&str; 6] = ["in", "the", "on", "to", "an", "and"];
const NOISE: [&str; 8] = ["user", "clicks", "in", "the", "a", "and", ",", "link"];

fn random_template(rng: &mut impl Rng) -> String {
    let mut out: Vec<String> = Vec::new();
    let lits = |rng: &mut dyn rand::RngCore, out: &mut Vec<String>, max: usize| {
        for _ in 0..rng.random_range(0..=max) {
            out.push(LITERALS.choose(rng).unwrap().to_string());
        }
    };
    lits(rng, &mut out, 1);
    out.push("<S>".into());
    lits(rng, &mut out, 1);
    out.push("<P>".into());
    lits(rng, &mut out, 2);
    out.push("<O>".into());
    if rng.random_bool(0.3) {
        lits(rng, &mut out, 1);
        out.push("<O>".into());
    }
    if rng.random_bool(0.4) {
        out.last_mut().unwrap().push('+');
    } else {
        lits(rng, &mut out, 1);
    }
    out.join(" ")
}

fn instantiate(source: &str, rng: &mut impl Rng) -> Vec<String> {
    let mut out = Vec::new();
    let word = |rng: &mut dyn rand::RngCore, out: &mut Vec<String>| {
        if rng.random_bool(0.3) {
            out.push(DETERMINERS.choose(rng).unwrap().to_string());
        }
        out.push(CONTENT.choose(rng).unwrap().to_string());
    };
    for item in items(source) {
        match item {
            Item::Lit(w) => out.push(w),
            Item::S | Item::P | Item::O => word(rng, &mut out),
            Item::OPlus => {
                let n = rng.random_range(1..=3);
                for k in 0..n {
                    if k > 0 {
                        let and = k == n - 1 && rng.random_bool(0.5);
                        out.push(if and { "and" } else { "," }.to_string());
                    }
                    word(rng, &mut out);
                }
            }
        }
    }
    out
}

pub struct MatcherCase {
    pub templates: Vec<(String, String)>,
    pub set: TemplateSet,
    pub tokens: Vec<String>,
    pub statement: String,
}

/// A template set of one to five templates and a statement of at most ten
/// tokens, usually derived from one of the templates.
pub fn random_matcher_case(rng: &mut impl Rng) -> MatcherCase {
    let n = rng.random_range(1..=5);
    let sources: Vec<String> = (0..n).map(|_| random_template(rng)).collect();
    let set = TemplateSet::from_lines(&sources).expect("generated templates are valid");
    let templates = set
        .templates()
        .iter()
        .map(|t| (t.id().to_string(), t.source().to_string()))
        .collect();
    let mut tokens = if rng.random_bool(0.75) {
        let mut t = instantiate(sources.choose(rng).unwrap(), rng);
        if rng.random_bool(0.3) {
            let at = rng.random_range(0..=t.len());
            match rng.random_range(0..3) {
                0 => t.insert(at, NOISE.choose(rng).unwrap().to_string()),
                1 if at < t.len() => {
                    t.remove(at);
                }
                _ if at < t.len() => t[at] = NOISE.choose(rng).unwrap().to_string(),
                _ => {}
            }
        }
        t
    } else {
        let len = rng.random_range(0..=10);
        (0..len).map(|_| NOISE.choose(rng).unwrap().to_string()).collect()
    };
    tokens.truncate(10);
    let statement = tokens.join(" ");
    MatcherCase {
        templates,
        set,
        tokens,
        statement,
    }
}

// ---------------------------------------------------------------------------
// Query oracle: try every assignment of one KB triple to each pattern, as a
// mixed-radix counter over |KB|^patterns, and keep the consistent ones.
// Terms are interned to integers and each pattern's reading of each triple
// is computed once, so a single assignment costs a few comparisons.

/// What pattern `i` says about one triple: `None` if a constant differs,
/// otherwise the (variable, term) pairs it would bind.
type Reading = Option<Vec<(usize, usize)>>;

pub fn oracle_evaluate(query: &SelectQuery, kb: &KnowledgeBase) -> Vec<SolutionMapping> {
    let triples: Vec<&KbTriple> = kb.triples().collect();
    if triples.is_empty() {
        return Vec::new();
    }
    let mut terms: Vec<Term> = Vec::new();
    let mut intern = |t: Term| match terms.iter().position(|x| *x == t) {
        Some(i) => i,
        None => {
            terms.push(t);
            terms.len() - 1
        }
    };
    let rows: Vec<[usize; 3]> = triples
        .iter()
        .map(|t| {
            [
                intern(Term::Iri(t.subject.clone())),
                intern(Term::Iri(t.predicate.clone())),
                intern(t.object.clone()),
            ]
        })
        .collect();
    let vars: Vec<&str> = query
        .patterns
        .iter()
        .flat_map(|p| p.terms())
        .filter_map(|t| t.var())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let var_index = |v: &str| vars.iter().position(|x| *x == v).unwrap();

    let readings: Vec<Vec<Reading>> = query
        .patterns
        .iter()
        .map(|pattern| {
            rows.iter()
                .map(|row| {
                    let mut binds = Vec::new();
                    for (term, &value) in pattern.terms().into_iter().zip(row) {
                        match term {
                            PatternTerm::Var(v) => binds.push((var_index(v), value)),
                            PatternTerm::Iri(iri) => {
                                if terms[value] != Term::Iri(iri.clone()) {
                                    return None;
                                }
                            }
                            PatternTerm::Lit(lit) => {
                                if terms[value] != Term::Literal(lit.clone()) {
                                    return None;
                                }
                            }
                        }
                    }
                    Some(binds)
                })
                .collect()
        })
        .collect();
    let predicate_vars: Vec<usize> = query
        .patterns
        .iter()
        .filter_map(|p| p.predicate.var())
        .map(var_index)
        .collect();

    let mut found: BTreeMap<Vec<String>, SolutionMapping> = BTreeMap::new();
    let mut counter = vec![0usize; query.patterns.len()];
    'outer: loop {
        if let Some(bindings) = consistent(&readings, &counter, vars.len()) {
            let domain_only = predicate_vars.iter().all(|&v| match &terms[bindings[v]] {
                Term::Iri(iri) => !vocab::is_vocabulary(iri.as_str()),
                Term::Literal(_) => false,
            });
            if domain_only {
                let row: SolutionMapping = query
                    .projection
                    .iter()
                    .map(|v| (v.clone(), terms[bindings[var_index(v)]].clone()))
                    .collect();
                let key = query.projection.iter().map(|v| row[v].to_ntriples()).collect();
                found.insert(key, row);
            }
        }
        for digit in counter.iter_mut() {
            *digit += 1;
            if *digit < rows.len() {
                continue 'outer;
            }
            *digit = 0;
        }
        break;
    }
    found.into_values().collect()
}

fn consistent(readings: &[Vec<Reading>], counter: &[usize], nvars: usize) -> Option<Vec<usize>> {
    let mut bindings = vec![usize::MAX; nvars];
    for (per_triple, &i) in readings.iter().zip(counter) {
        for &(var, value) in per_triple[i].as_ref()? {
            if bindings[var] == usize::MAX {
                bindings[var] = value;
            } else if bindings[var] != value {
                return None;
            }
        }
    }
    Some(bindings)
}

const NS: &str = "urn:ucat:proj:rand#";

fn ns(local: &str) -> Iri {
    Iri::new(format!("{NS}{local}")).unwrap()
}

fn random_subject(rng: &mut impl Rng) -> Iri {
    ns(&format!("e{}", rng.random_range(0..6)))
}

fn random_predicate(rng: &mut impl Rng) -> Iri {
    match rng.random_range(0..6) {
        0 => Iri::new(vocab::RDF_TYPE).unwrap(),
        1 => Iri::new(vocab::IN_STEP).unwrap(),
        k => ns(&format!("p{k}")),
    }
}

fn random_object(rng: &mut impl Rng) -> Term {
    match rng.random_range(0..10) {
        0 => Term::Literal(Literal::integer(rng.random_range(1..4))),
        1 => Term::Literal(Literal::string(format!("s{}", rng.random_range(0..2)))),
        2 => Term::Iri(ns(&format!("T{}", rng.random_range(0..2)))),
        _ => Term::Iri(random_subject(rng)),
    }
}

/// Up to 200 triples over a small vocabulary so that joins hit often.
pub fn random_kb(rng: &mut impl Rng) -> KnowledgeBase {
    let target = rng.random_range(0..=200);
    let mut kb = KnowledgeBase::new(Some(NS.to_string()));
    for _ in 0..target {
        let s = random_subject(rng);
        let p = random_predicate(rng);
        let o = random_object(rng);
        kb.insert(KbTriple::new(s, p, o));
    }
    kb
}

/// One to three patterns; the projection is a non-empty subset of the
/// variables used.
pub fn random_query(rng: &mut impl Rng) -> SelectQuery {
    const VARS: [&str; 4] = ["x", "y", "z", "w"];
    loop {
        let n = rng.random_range(1..=3);
        let var = |rng: &mut dyn rand::RngCore| PatternTerm::Var(VARS.choose(rng).unwrap().to_string());
        let patterns: Vec<TriplePattern> = (0..n)
            .map(|_| TriplePattern {
                subject: if rng.random_bool(0.7) { var(rng) } else { PatternTerm::Iri(random_subject(rng)) },
                predicate: if rng.random_bool(0.5) { var(rng) } else { PatternTerm::Iri(random_predicate(rng)) },
                object: if rng.random_bool(0.6) {
                    var(rng)
                } else {
                    match random_object(rng) {
                        Term::Iri(i) => PatternTerm::Iri(i),
                        Term::Literal(l) => PatternTerm::Lit(l),
                    }
                },
            })
            .collect();
        let used: BTreeSet<String> = patterns
            .iter()
            .flat_map(|p| p.terms())
            .filter_map(|t| t.var().map(str::to_string))
            .collect();
        if used.is_empty() {
            continue;
        }
        let mut projection: Vec<String> = used.into_iter().filter(|_| rng.random_bool(0.6)).collect();
        if projection.is_empty() {
            projection.push(patterns.iter().flat_map(|p| p.terms()).find_map(|t| t.var()).unwrap().to_string());
        }
        return SelectQuery {
            projection,
            patterns,
        };
    }
}
