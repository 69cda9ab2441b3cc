use std::collections::BTreeSet;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use super::{vocab, Iri, KbError, KbTriple, KnowledgeBase, Literal};
use crate::document::{Project, ScenarioRef};
use crate::extraction::TypedReport;

/// Everything except RFC 3986 unreserved characters is percent-encoded.
const LOCAL_NAME: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

struct Minter<'a> {
    namespace: &'a str,
}

impl Minter<'_> {
    fn iri(&self, local: &str) -> Result<Iri, KbError> {
        if local.is_empty() {
            return Err(KbError::Iri("empty local name".into()));
        }
        let encoded = utf8_percent_encode(local, LOCAL_NAME).to_string();
        Iri::new(format!("{}{}", self.namespace, encoded))
    }

    fn scenario(&self, use_case: &str, scenario: ScenarioRef) -> Result<Iri, KbError> {
        self.iri(&format!("{use_case}_{scenario}"))
    }

    /// `<uc>_s<step>_<k>` for the main scenario, `<uc>_alt<j>_s<step>_<k>`
    /// for alternatives.
    fn statement(
        &self,
        use_case: &str,
        scenario: ScenarioRef,
        step: usize,
        k: usize,
    ) -> Result<Iri, KbError> {
        match scenario {
            ScenarioRef::Main => self.iri(&format!("{use_case}_s{step}_{k}")),
            ScenarioRef::Alt(_) => self.iri(&format!("{use_case}_{scenario}_s{step}_{k}")),
        }
    }
}

/// Generates the knowledge base of a validated project: class and property
/// declarations, instance typing, deduplicated domain assertions, and one
/// reified statement per (step, triple) occurrence.
pub fn build_kb(project: &Project, typed: &TypedReport) -> Result<KnowledgeBase, KbError> {
    let ns = Minter {
        namespace: &project.namespace,
    };
    let rdf_type = Iri::from_static(vocab::RDF_TYPE);
    let v = |iri: &'static str| Iri::from_static(iri);
    let mut kb = KnowledgeBase::new(Some(project.namespace.clone()));

    let report = typed.report();
    let types: BTreeSet<&str> = typed.types().map(|(_, t)| t).collect();
    for ty in types {
        kb.insert(KbTriple::new(ns.iri(ty)?, rdf_type.clone(), v(vocab::CLASS)));
    }
    for p in report.predicate_lexemes() {
        kb.insert(KbTriple::new(ns.iri(p)?, rdf_type.clone(), v(vocab::PROPERTY)));
    }
    for (entity, ty) in typed.types() {
        kb.insert(KbTriple::new(ns.iri(entity)?, rdf_type.clone(), ns.iri(ty)?));
    }

    for actor in &project.actors {
        let actor_iri = ns.iri(&actor.name)?;
        for uc in &actor.use_cases {
            let uc_iri = ns.iri(&uc.id)?;
            kb.insert(KbTriple::new(uc_iri.clone(), v(vocab::OWNED_BY), actor_iri.clone()));
            for (scenario_ref, scenario) in uc.scenarios() {
                let scenario_iri = ns.scenario(&uc.id, scenario_ref)?;
                kb.insert(KbTriple::new(
                    scenario_iri.clone(),
                    v(vocab::IN_USE_CASE),
                    uc_iri.clone(),
                ));
                if let ScenarioRef::Alt(j) = scenario_ref {
                    let branch = uc.alternatives[j - 1].branch_step as i64;
                    kb.insert(KbTriple::new(
                        scenario_iri.clone(),
                        v(vocab::BRANCHES_AT),
                        Literal::integer(branch),
                    ));
                }
                for step in &scenario.steps {
                    let Some(matched) = &step.matched else {
                        continue;
                    };
                    for (k, t) in matched.triples.iter().enumerate() {
                        let s = ns.iri(&t.subject)?;
                        let p = ns.iri(&t.predicate)?;
                        let o = ns.iri(&t.object)?;
                        kb.insert(KbTriple::new(s.clone(), p.clone(), o.clone()));

                        let node = ns.statement(&uc.id, scenario_ref, step.index, k + 1)?;
                        let facts = [
                            (rdf_type.clone(), v(vocab::STATEMENT).into()),
                            (v(vocab::HAS_SUBJECT), s.into()),
                            (v(vocab::HAS_PREDICATE), p.into()),
                            (v(vocab::HAS_OBJECT), o.into()),
                            (v(vocab::IN_STEP), Literal::integer(step.index as i64).into()),
                            (v(vocab::SIDE), Literal::string(step.side.as_str()).into()),
                            (v(vocab::IN_SCENARIO), scenario_iri.clone().into()),
                        ];
                        for (pred, obj) in facts {
                            kb.insert(KbTriple {
                                subject: node.clone(),
                                predicate: pred,
                                object: obj,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(kb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::{validate_project, Actor, AltScenario, Scenario, Side, UseCase};
    use crate::extraction::{assign_types, extract};
    use crate::kb::Term;

    fn typed(project: &Project) -> TypedReport {
        let report = extract(project).unwrap();
        assign_types(&report, &project.type_assignments, Some("Thing")).unwrap()
    }

    fn one_step(text: &str) -> Project {
        let mut p = Project::new("p").with_actor(Actor::new(
            "user",
            vec![UseCase::new("uc1", "", Scenario::from_rows([(Side::UserInput, text)]))],
        ));
        validate_project(&mut p);
        p
    }

    #[test]
    fn local_names_are_percent_encoded() {
        let m = Minter { namespace: "urn:x#" };
        assert_eq!(m.iri("search uc").unwrap().as_str(), "urn:x#search%20uc");
        assert_eq!(m.iri("a_b-c.d~e").unwrap().as_str(), "urn:x#a_b-c.d~e");
        assert_eq!(m.iri("").unwrap_err().code(), "E_IRI");
    }

    #[test]
    fn single_statement_layout() {
        let p = one_step("user checks list");
        let kb = build_kb(&p, &typed(&p)).unwrap();
        let ns = |l: &str| Iri::new(format!("urn:ucat:proj:p#{l}")).unwrap();
        let v = Iri::from_static;
        assert!(kb.contains(&KbTriple::new(ns("user"), ns("checks"), ns("list"))));
        assert!(kb.contains(&KbTriple::new(ns("Thing"), v(vocab::RDF_TYPE), v(vocab::CLASS))));
        assert!(kb.contains(&KbTriple::new(ns("checks"), v(vocab::RDF_TYPE), v(vocab::PROPERTY))));
        assert!(kb.contains(&KbTriple::new(ns("list"), v(vocab::RDF_TYPE), ns("Thing"))));
        let node = ns("uc1_s1_1");
        assert!(kb.contains(&KbTriple::new(node.clone(), v(vocab::RDF_TYPE), v(vocab::STATEMENT))));
        assert!(kb.contains(&KbTriple::new(node.clone(), v(vocab::IN_STEP), Literal::integer(1))));
        assert!(kb.contains(&KbTriple::new(node.clone(), v(vocab::SIDE), Literal::string("user"))));
        assert!(kb.contains(&KbTriple::new(node, v(vocab::IN_SCENARIO), ns("uc1_main"))));
        assert!(kb.contains(&KbTriple::new(ns("uc1_main"), v(vocab::IN_USE_CASE), ns("uc1"))));
        assert!(kb.contains(&KbTriple::new(ns("uc1"), v(vocab::OWNED_BY), ns("user"))));
        assert_eq!(kb.domain_assertions().count(), 1);
    }

    #[test]
    fn alternatives_get_their_own_nodes() {
        let mut p = one_step("user clicks register");
        p.actors[0].use_cases[0].alternatives.push(AltScenario {
            branch_step: 1,
            label: "private".into(),
            steps: Scenario::from_rows([(Side::SystemResponse, "system sends message")]),
        });
        validate_project(&mut p);
        let kb = build_kb(&p, &typed(&p)).unwrap();
        let ns = |l: &str| Iri::new(format!("urn:ucat:proj:p#{l}")).unwrap();
        let v = Iri::from_static;
        assert!(kb.contains(&KbTriple::new(ns("uc1_alt1"), v(vocab::BRANCHES_AT), Literal::integer(1))));
        assert!(kb.contains(&KbTriple::new(ns("uc1_alt1_s1_1"), v(vocab::IN_SCENARIO), ns("uc1_alt1"))));
        assert_eq!(kb.instances_of(vocab::STATEMENT).count(), 2);
    }

    #[test]
    fn repeated_triples_dedupe_but_keep_provenance() {
        let mut p = Project::new("p").with_actor(Actor::new(
            "user",
            vec![UseCase::new(
                "uc1",
                "",
                Scenario::from_rows([
                    (Side::SystemResponse, "system shows list"),
                    (Side::SystemResponse, "system shows the list"),
                ]),
            )],
        ));
        validate_project(&mut p);
        let kb = build_kb(&p, &typed(&p)).unwrap();
        assert_eq!(kb.domain_assertions().count(), 1);
        assert_eq!(kb.instances_of(vocab::STATEMENT).count(), 2);
    }

    #[test]
    fn empty_project_gives_empty_kb() {
        let p = Project::new("e");
        let kb = build_kb(&p, &typed(&p)).unwrap();
        assert!(kb.is_empty());
    }

    #[test]
    fn statement_objects_are_iris() {
        let p = one_step("user checks list");
        let kb = build_kb(&p, &typed(&p)).unwrap();
        let has_object = kb
            .triples()
            .find(|t| t.predicate.as_str() == vocab::HAS_OBJECT)
            .unwrap();
        assert!(matches!(has_object.object, Term::Iri(_)));
    }
}
