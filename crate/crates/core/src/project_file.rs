//! The JSON project file.
//!
//! Keys are written in alphabetical order with two-space indentation and a
//! trailing newline; actors and use cases are stored in canonical order, so
//! saving is a pure function of the project's content.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{
    default_namespace, Actor, AltScenario, Project, Scenario, Side, Step, UseCase,
};
use crate::extraction::{Glossary, GlossaryEntry};
use crate::template::{is_word, TemplateSet};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectFileError {
    #[error("E_SCHEMA at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("E_VERSION: unsupported rusforge_version {0}")]
    Version(String),
}

impl ProjectFileError {
    pub fn code(&self) -> &'static str {
        match self {
            ProjectFileError::Schema { .. } => "E_SCHEMA",
            ProjectFileError::Version(_) => "E_VERSION",
        }
    }

    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ProjectFileError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileStep {
    index: usize,
    side: Side,
    text: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAlternative {
    branch_step: usize,
    #[serde(default)]
    label: String,
    steps: Vec<FileStep>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileUseCase {
    id: String,
    #[serde(default)]
    title: String,
    main: Vec<FileStep>,
    #[serde(default)]
    alternatives: Vec<FileAlternative>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileActor {
    name: String,
    #[serde(default)]
    use_cases: Vec<FileUseCase>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectDoc {
    rusforge_version: u64,
    name: String,
    #[serde(default)]
    namespace: Option<String>,
    #[serde(default)]
    templates: Option<Vec<String>>,
    #[serde(default)]
    determiners: Option<Vec<String>>,
    #[serde(default)]
    glossary: Vec<GlossaryEntry>,
    #[serde(default)]
    actors: Vec<FileActor>,
    #[serde(default)]
    type_assignments: BTreeMap<String, String>,
}

fn steps_from_file(steps: Vec<FileStep>) -> Scenario {
    Scenario::new(
        steps
            .into_iter()
            .map(|s| Step::new(s.index, s.side, s.text))
            .collect(),
    )
}

fn steps_to_file(scenario: &Scenario) -> Vec<FileStep> {
    scenario
        .steps
        .iter()
        .map(|s| FileStep {
            index: s.index,
            side: s.side,
            text: s.text.clone(),
        })
        .collect()
}

/// Parses and checks a project file. Actors and use cases come back in
/// canonical order; steps carry no match until validated.
pub fn load_project(bytes: &[u8]) -> Result<Project, ProjectFileError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| ProjectFileError::schema("$", format!("invalid JSON: {e}")))?;
    match value.get("rusforge_version") {
        None => return Err(ProjectFileError::schema("rusforge_version", "missing field")),
        Some(v) if v.as_u64() == Some(FORMAT_VERSION) => {}
        Some(v) => return Err(ProjectFileError::Version(v.to_string())),
    }

    let doc: ProjectDoc = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ProjectFileError::schema(path, e.into_inner().to_string())
    })?;

    let templates = match &doc.templates {
        Some(lines) => TemplateSet::from_lines(lines).map_err(|e| {
            ProjectFileError::schema(format!("templates[{}]", e.line() - 1), e.to_string())
        })?,
        None => TemplateSet::default(),
    };
    let templates = match doc.determiners {
        Some(dets) => {
            if let Some((i, d)) = dets.iter().enumerate().find(|(_, d)| !is_word(d)) {
                return Err(ProjectFileError::schema(
                    format!("determiners[{i}]"),
                    format!("{d:?} is not a word"),
                ));
            }
            templates.with_determiners(dets)
        }
        None => templates,
    };

    if let Some((i, e)) = doc.glossary.iter().enumerate().find(|(_, e)| !is_word(&e.term)) {
        return Err(ProjectFileError::schema(
            format!("glossary[{i}].term"),
            format!("{:?} is not a word", e.term),
        ));
    }
    if let Some((i, e)) = doc
        .glossary
        .iter()
        .enumerate()
        .find(|(_, e)| e.suggested_type.as_deref().is_some_and(|t| !is_word(t)))
    {
        return Err(ProjectFileError::schema(
            format!("glossary[{i}].type"),
            format!("{:?} is not a valid type name", e.suggested_type),
        ));
    }
    let glossary = Glossary::from_entries(doc.glossary)
        .map_err(|t| ProjectFileError::schema("glossary", format!("duplicate term {t:?}")))?;

    for (entity, ty) in &doc.type_assignments {
        if !is_word(entity) {
            return Err(ProjectFileError::schema(
                format!("type_assignments.{entity}"),
                "key is not a word",
            ));
        }
        if !is_word(ty) {
            return Err(ProjectFileError::schema(
                format!("type_assignments.{entity}"),
                format!("{ty:?} is not a valid type name"),
            ));
        }
    }
    let type_assignments = doc
        .type_assignments
        .into_iter()
        .map(|(k, v)| (k.to_ascii_lowercase(), v))
        .collect();

    let actors = doc
        .actors
        .into_iter()
        .map(|a| {
            Actor::new(
                a.name,
                a.use_cases
                    .into_iter()
                    .map(|uc| UseCase {
                        id: uc.id,
                        title: uc.title,
                        main: steps_from_file(uc.main),
                        alternatives: uc
                            .alternatives
                            .into_iter()
                            .map(|alt| AltScenario {
                                branch_step: alt.branch_step,
                                label: alt.label,
                                steps: steps_from_file(alt.steps),
                            })
                            .collect(),
                    })
                    .collect(),
            )
        })
        .collect();

    let mut project = Project {
        namespace: doc.namespace.unwrap_or_else(|| default_namespace(&doc.name)),
        name: doc.name,
        templates,
        glossary,
        actors,
        type_assignments,
    };
    if !is_word(&project.name) {
        return Err(ProjectFileError::schema(
            "name",
            format!("{:?} is not a word", project.name),
        ));
    }
    project
        .check_structure()
        .map_err(|(path, message)| ProjectFileError::schema(path, message))?;
    project.canonicalize();
    Ok(project)
}

/// Writes the canonical project file.
pub fn save_project(project: &Project) -> Vec<u8> {
    let mut project = project.clone();
    project.canonicalize();
    let doc = ProjectDoc {
        rusforge_version: FORMAT_VERSION,
        name: project.name.clone(),
        namespace: Some(project.namespace.clone()),
        templates: Some(project.templates.to_lines()),
        determiners: Some(project.templates.determiners().to_vec()),
        glossary: project.glossary.entries(),
        actors: project
            .actors
            .iter()
            .map(|a| FileActor {
                name: a.name.clone(),
                use_cases: a
                    .use_cases
                    .iter()
                    .map(|uc| FileUseCase {
                        id: uc.id.clone(),
                        title: uc.title.clone(),
                        main: steps_to_file(&uc.main),
                        alternatives: uc
                            .alternatives
                            .iter()
                            .map(|alt| FileAlternative {
                                branch_step: alt.branch_step,
                                label: alt.label.clone(),
                                steps: steps_to_file(&alt.steps),
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
        type_assignments: project.type_assignments.clone(),
    };
    // Going through Value sorts object keys alphabetically.
    let value = serde_json::to_value(&doc).expect("project document serializes");
    let mut out = serde_json::to_vec_pretty(&value).expect("value serializes");
    out.push(b'\n');
    out
}
