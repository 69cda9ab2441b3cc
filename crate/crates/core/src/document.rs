//! Projects of actors, use cases and two-column step tables, and their
//! validation against the project's template set.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::extraction::Glossary;
use crate::matcher::{match_tokens, MatchResult, RawTriple};
use crate::template::{is_word, tokenize, TemplateSet};

/// Prefix of the namespace a project gets when none is configured.
pub const DEFAULT_NAMESPACE_PREFIX: &str = "urn:ucat:proj:";

pub fn default_namespace(project_name: &str) -> String {
    format!("{DEFAULT_NAMESPACE_PREFIX}{project_name}#")
}

/// An IRI prefix: a scheme, no characters forbidden in IRIs, and a final
/// `:`, `/` or `#`.
pub fn is_valid_namespace(ns: &str) -> bool {
    let Some((scheme, _)) = ns.split_once(':') else {
        return false;
    };
    let scheme_ok = scheme
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic())
        && scheme
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    let body_ok = !ns
        .chars()
        .any(|c| c.is_whitespace() || c.is_control() || "<>\"{}|^`\\".contains(c));
    scheme_ok && body_ok && ns.ends_with([':', '/', '#'])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "user")]
    UserInput,
    #[serde(rename = "system")]
    SystemResponse,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::UserInput => "user",
            Side::SystemResponse => "system",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub index: usize,
    pub side: Side,
    pub text: String,
    /// Filled in by [`validate_project`].
    pub matched: Option<MatchResult>,
}

impl Step {
    pub fn new(index: usize, side: Side, text: impl Into<String>) -> Self {
        Step {
            index,
            side,
            text: text.into(),
            matched: None,
        }
    }

    pub fn user(index: usize, text: impl Into<String>) -> Self {
        Step::new(index, Side::UserInput, text)
    }

    pub fn system(index: usize, text: impl Into<String>) -> Self {
        Step::new(index, Side::SystemResponse, text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub steps: Vec<Step>,
}

impl Scenario {
    pub fn new(steps: Vec<Step>) -> Self {
        Scenario { steps }
    }

    /// Builds a scenario from `(side, text)` rows numbered from 1.
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = (Side, &'a str)>) -> Self {
        Scenario {
            steps: rows
                .into_iter()
                .enumerate()
                .map(|(i, (side, text))| Step::new(i + 1, side, text))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A variant step sequence that takes over from `branch_step` of the main
/// scenario. Its steps are numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltScenario {
    pub branch_step: usize,
    pub label: String,
    pub steps: Scenario,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UseCase {
    pub id: String,
    pub title: String,
    pub main: Scenario,
    pub alternatives: Vec<AltScenario>,
}

impl UseCase {
    pub fn new(id: impl Into<String>, title: impl Into<String>, main: Scenario) -> Self {
        UseCase {
            id: id.into(),
            title: title.into(),
            main,
            alternatives: Vec::new(),
        }
    }

    /// Main scenario first, then alternatives in declaration order.
    pub fn scenarios(&self) -> impl Iterator<Item = (ScenarioRef, &Scenario)> + '_ {
        std::iter::once((ScenarioRef::Main, &self.main)).chain(
            self.alternatives
                .iter()
                .enumerate()
                .map(|(j, alt)| (ScenarioRef::Alt(j + 1), &alt.steps)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Actor {
    pub name: String,
    pub use_cases: Vec<UseCase>,
}

impl Actor {
    pub fn new(name: impl Into<String>, use_cases: Vec<UseCase>) -> Self {
        Actor {
            name: name.into(),
            use_cases,
        }
    }
}

/// Which scenario of a use case a step belongs to; alternatives count from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioRef {
    Main,
    Alt(usize),
}

impl fmt::Display for ScenarioRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioRef::Main => f.write_str("main"),
            ScenarioRef::Alt(j) => write!(f, "alt{j}"),
        }
    }
}

impl Serialize for ScenarioRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Where a step lives in a project.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StepRef {
    pub actor: String,
    pub use_case: String,
    pub scenario: ScenarioRef,
    pub step: usize,
}

impl fmt::Display for StepRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}:{}", self.actor, self.use_case, self.scenario, self.step)
    }
}

pub type TypeAssignment = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Project {
    pub name: String,
    pub namespace: String,
    pub templates: TemplateSet,
    pub glossary: Glossary,
    pub actors: Vec<Actor>,
    pub type_assignments: TypeAssignment,
}

impl Project {
    /// An empty project with the seed template `<S> <P> <O>`.
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        Project {
            namespace: default_namespace(&name),
            name,
            templates: TemplateSet::default(),
            glossary: Glossary::default(),
            actors: Vec::new(),
            type_assignments: TypeAssignment::new(),
        }
    }

    pub fn with_templates(mut self, templates: TemplateSet) -> Self {
        self.templates = templates;
        self
    }

    pub fn with_actor(mut self, actor: Actor) -> Self {
        self.actors.push(actor);
        self
    }

    /// Sorts actors by name and use cases by id.
    pub fn canonicalize(&mut self) {
        self.actors.sort_by(|a, b| a.name.cmp(&b.name));
        for actor in &mut self.actors {
            actor.use_cases.sort_by(|a, b| a.id.cmp(&b.id));
        }
    }

    /// Every step with its location, in canonical traversal order.
    pub fn steps(&self) -> impl Iterator<Item = (StepRef, &Step)> + '_ {
        self.actors.iter().flat_map(|actor| {
            actor.use_cases.iter().flat_map(move |uc| {
                uc.scenarios().flat_map(move |(scenario, sc)| {
                    sc.steps.iter().map(move |step| {
                        (
                            StepRef {
                                actor: actor.name.clone(),
                                use_case: uc.id.clone(),
                                scenario,
                                step: step.index,
                            },
                            step,
                        )
                    })
                })
            })
        })
    }

    fn steps_mut(&mut self) -> impl Iterator<Item = &mut Step> + '_ {
        self.actors.iter_mut().flat_map(|actor| {
            actor.use_cases.iter_mut().flat_map(|uc| {
                uc.main
                    .steps
                    .iter_mut()
                    .chain(uc.alternatives.iter_mut().flat_map(|a| a.steps.steps.iter_mut()))
            })
        })
    }

    pub fn is_validated(&self) -> bool {
        self.steps().all(|(_, s)| s.matched.is_some())
    }

    /// Checks the structural invariants the project file format requires.
    /// Returns the path of the offending field and a message.
    pub fn check_structure(&self) -> Result<(), (String, String)> {
        if !is_valid_namespace(&self.namespace) {
            return Err((
                "namespace".into(),
                format!("{:?} is not an IRI prefix ending in ':', '/' or '#'", self.namespace),
            ));
        }
        let mut actor_names = HashSet::new();
        // Use case ids name knowledge base nodes, so they are unique project-wide.
        let mut ids = HashSet::new();
        for (ai, actor) in self.actors.iter().enumerate() {
            let apath = format!("actors[{ai}]");
            if !is_word(&actor.name) {
                return Err((format!("{apath}.name"), format!("{:?} is not a word", actor.name)));
            }
            if !actor_names.insert(&actor.name) {
                return Err((format!("{apath}.name"), format!("duplicate actor {:?}", actor.name)));
            }
            for (ui, uc) in actor.use_cases.iter().enumerate() {
                let upath = format!("{apath}.use_cases[{ui}]");
                if uc.id.trim().is_empty() {
                    return Err((format!("{upath}.id"), "use case id is empty".into()));
                }
                if !ids.insert(&uc.id) {
                    return Err((format!("{upath}.id"), format!("duplicate use case id {:?}", uc.id)));
                }
                if uc.main.is_empty() {
                    return Err((format!("{upath}.main"), "main scenario has no steps".into()));
                }
                check_indices(&uc.main, &format!("{upath}.main"))?;
                for (ji, alt) in uc.alternatives.iter().enumerate() {
                    let jpath = format!("{upath}.alternatives[{ji}]");
                    if alt.branch_step == 0 || alt.branch_step > uc.main.len() {
                        return Err((
                            format!("{jpath}.branch_step"),
                            format!(
                                "branch step {} outside 1..={}",
                                alt.branch_step,
                                uc.main.len()
                            ),
                        ));
                    }
                    check_indices(&alt.steps, &format!("{jpath}.steps"))?;
                }
            }
        }
        Ok(())
    }
}

fn check_indices(scenario: &Scenario, path: &str) -> Result<(), (String, String)> {
    for (i, step) in scenario.steps.iter().enumerate() {
        if step.index != i + 1 {
            return Err((
                format!("{path}[{i}].index"),
                format!("expected step index {}, found {}", i + 1, step.index),
            ));
        }
    }
    Ok(())
}

/// Why a step did not match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Failure {
    NoMatch,
    LexError { column: usize, found: char },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code")]
pub enum Lint {
    /// A user-side step whose subject is `system`, or a system-side step
    /// whose subject is `user`.
    #[serde(rename = "W_SIDE_SUBJECT")]
    SideSubject { side: Side, subject: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepVerdict {
    pub location: StepRef,
    pub side: Side,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triples: Option<Vec<RawTriple>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lints: Vec<Lint>,
}

impl StepVerdict {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub steps: Vec<StepVerdict>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &StepVerdict> + '_ {
        self.steps.iter().filter(|v| !v.is_ok())
    }

    pub fn match_count(&self) -> usize {
        self.steps.iter().filter(|v| v.is_ok()).count()
    }

    pub fn lints(&self) -> impl Iterator<Item = (&StepRef, &Lint)> + '_ {
        self.steps
            .iter()
            .flat_map(|v| v.lints.iter().map(move |l| (&v.location, l)))
    }
}

fn side_lint(side: Side, subject: &str) -> Option<Lint> {
    let clash = match side {
        Side::UserInput => subject == "system",
        Side::SystemResponse => subject == "user",
    };
    clash.then(|| Lint::SideSubject {
        side,
        subject: subject.to_string(),
    })
}

/// Matches every step of every scenario, storing each step's match (or
/// clearing it) and reporting a verdict per step.
pub fn validate_project(project: &mut Project) -> ValidationReport {
    let templates = project.templates.clone();
    for step in project.steps_mut() {
        step.matched = tokenize(&step.text)
            .ok()
            .and_then(|tokens| match_tokens(&tokens, &templates).into_option());
    }

    let steps: Vec<StepVerdict> = project
        .steps()
        .map(|(location, step)| {
            let (template_id, triples, failure, lints) = match &step.matched {
                Some(m) => (
                    Some(m.template_id.clone()),
                    Some(m.triples.clone()),
                    None,
                    side_lint(step.side, &m.triples[0].subject).into_iter().collect(),
                ),
                None => {
                    let failure = match tokenize(&step.text) {
                        Err(e) => Failure::LexError {
                            column: e.column,
                            found: e.found,
                        },
                        Ok(_) => Failure::NoMatch,
                    };
                    (None, None, Some(failure), Vec::new())
                }
            };
            StepVerdict {
                location,
                side: step.side,
                text: step.text.clone(),
                template_id,
                triples,
                failure,
                lints,
            }
        })
        .collect();

    ValidationReport {
        valid: steps.iter().all(StepVerdict::is_ok),
        steps,
    }
}
