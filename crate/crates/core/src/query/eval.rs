use std::collections::BTreeMap;

use super::{PatternTerm, PredicateScope, SelectQuery, SolutionMapping, TriplePattern};
use crate::kb::{vocab, KbTriple, KnowledgeBase, Term};

type Bindings = BTreeMap<String, Term>;

/// Evaluates with [`PredicateScope::Domain`].
pub fn evaluate(query: &SelectQuery, kb: &KnowledgeBase) -> Vec<SolutionMapping> {
    evaluate_with(query, kb, PredicateScope::Domain)
}

/// Distinct projected solutions, sorted by the N-Triples spelling of the
/// projected values in projection order.
pub fn evaluate_with(
    query: &SelectQuery,
    kb: &KnowledgeBase,
    scope: PredicateScope,
) -> Vec<SolutionMapping> {
    let triples: Vec<&KbTriple> = kb.triples().collect();
    let mut full = Vec::new();
    extend(&query.patterns, &triples, scope, Bindings::new(), &mut full);

    let mut keyed: BTreeMap<Vec<String>, SolutionMapping> = BTreeMap::new();
    for bindings in full {
        let projected: SolutionMapping = query
            .projection
            .iter()
            .filter_map(|v| bindings.get(v).map(|t| (v.clone(), t.clone())))
            .collect();
        let key = query
            .projection
            .iter()
            .map(|v| projected.get(v).map(Term::to_ntriples).unwrap_or_default())
            .collect();
        keyed.entry(key).or_insert(projected);
    }
    keyed.into_values().collect()
}

fn extend(
    patterns: &[TriplePattern],
    triples: &[&KbTriple],
    scope: PredicateScope,
    bindings: Bindings,
    out: &mut Vec<Bindings>,
) {
    let Some((first, rest)) = patterns.split_first() else {
        out.push(bindings);
        return;
    };
    for t in triples {
        if scope == PredicateScope::Domain
            && first.predicate.var().is_some()
            && vocab::is_vocabulary(t.predicate.as_str())
        {
            continue;
        }
        let mut next = bindings.clone();
        if unify(&first.subject, &Term::Iri(t.subject.clone()), &mut next)
            && unify(&first.predicate, &Term::Iri(t.predicate.clone()), &mut next)
            && unify(&first.object, &t.object, &mut next)
        {
            extend(rest, triples, scope, next, out);
        }
    }
}

fn unify(pattern: &PatternTerm, value: &Term, bindings: &mut Bindings) -> bool {
    match pattern {
        PatternTerm::Iri(iri) => matches!(value, Term::Iri(v) if v == iri),
        PatternTerm::Lit(lit) => matches!(value, Term::Literal(v) if v == lit),
        PatternTerm::Var(name) => match bindings.get(name) {
            Some(bound) => bound == value,
            None => {
                bindings.insert(name.clone(), value.clone());
                true
            }
        },
    }
}
