//! The whole chain from a project document to a knowledge base, with one
//! error type for callers that only need to report what stopped it.

use thiserror::Error;

use crate::document::{validate_project, Project, ValidationReport};
use crate::extraction::{assign_types, effective_assignment, extract, ExtractionReport, TypingError};
use crate::kb::{build_kb, KbError, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("E_UNVALIDATED: {} step(s) match no template", .0.failures().count())]
    Unvalidated(ValidationReport),
    #[error(transparent)]
    Typing(#[from] TypingError),
    #[error(transparent)]
    Kb(#[from] KbError),
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Unvalidated(_) => "E_UNVALIDATED",
            PipelineError::Typing(e) => e.code(),
            PipelineError::Kb(e) => e.code(),
        }
    }
}

/// A validated copy of `project`, or the report explaining why it is not valid.
pub fn validated(project: &Project) -> Result<Project, PipelineError> {
    let mut p = project.clone();
    let report = validate_project(&mut p);
    if report.valid {
        Ok(p)
    } else {
        Err(PipelineError::Unvalidated(report))
    }
}

pub fn extraction(project: &Project) -> Result<(Project, ExtractionReport), PipelineError> {
    let p = validated(project)?;
    let report = extract(&p).expect("project was just validated");
    Ok((p, report))
}

/// Types come from the project's assignment, then glossary suggestions, then
/// `default_type`.
pub fn knowledge_base(project: &Project, default_type: Option<&str>) -> Result<KnowledgeBase, PipelineError> {
    let (p, report) = extraction(project)?;
    let typed = assign_types(&report, &effective_assignment(&p), default_type)?;
    Ok(build_kb(&p, &typed)?)
}
