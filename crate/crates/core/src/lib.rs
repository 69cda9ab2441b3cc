//! Controlled-language use case specifications turned into a queryable
//! knowledge base.
//!
//! The pipeline is: statements are tokenized and matched against a
//! [`TemplateSet`](template::TemplateSet) ([`matcher`]), the project is
//! validated step by step ([`document`]), entities and predicates are
//! collected and typed ([`extraction`]), a typed triple graph with per-step
//! provenance is generated ([`kb`]), and conjunctive graph patterns are
//! evaluated over it ([`query`]). [`pipeline`] chains the stages.

pub mod document;
pub mod extraction;
pub mod kb;
pub mod matcher;
pub mod pipeline;
pub mod project_file;
pub mod query;
pub mod template;

pub use document::{Project, ValidationReport};
pub use extraction::{ExtractionReport, TypedReport};
pub use kb::KnowledgeBase;
pub use matcher::{match_against_set, MatchOutcome, MatchResult, RawTriple};
pub use template::{parse_template, tokenize, Template, TemplateSet};
