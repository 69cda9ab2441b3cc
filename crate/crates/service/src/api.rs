use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use rusforge_core::document::validate_project;
use rusforge_core::extraction::check_glossary;
use rusforge_core::kb::{export_graph, serialize_ntriples, GraphOptions};
use rusforge_core::pipeline::{self, PipelineError};
use rusforge_core::project_file::{load_project, save_project, ProjectFileError};
use rusforge_core::query::{evaluate, parse_query, Prefixes, QueryError, ResultTable};
use rusforge_core::template::is_word;
use rusforge_core::{match_against_set, MatchOutcome, Project};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::store::{is_valid_id, Entry, Store, StoreError};

/// A JSON error body: always `code` and `message`, plus optional details.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Map<String, Value>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        let mut body = Map::new();
        body.insert("code".into(), code.into());
        body.insert("message".into(), Value::String(message.into()));
        ApiError { status, body }
    }

    fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.body.insert(key.into(), value.into());
        self
    }

    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "E_SCHEMA", message).with("path", path.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(Value::Object(self.body))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "E_NOT_FOUND", message),
            StoreError::Exists(_) => ApiError::new(StatusCode::CONFLICT, "E_EXISTS", message),
            StoreError::Conflict { current, .. } => {
                ApiError::new(StatusCode::CONFLICT, "E_CONFLICT", message).with("revision", current)
            }
            StoreError::Corrupt { .. } | StoreError::Io(_) => {
                tracing::error!("storage failure: {message}");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "E_INTERNAL", message)
            }
        }
    }
}

fn file_error(e: ProjectFileError, prefix: &str) -> ApiError {
    match e {
        ProjectFileError::Schema { path, message } => ApiError::schema(format!("{prefix}{path}"), message),
        ProjectFileError::Version(_) => {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
        }
    }
}

fn pipeline_error(e: PipelineError) -> ApiError {
    let err = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string());
    match e {
        PipelineError::Unvalidated(report) => err.with("report", json!(report)),
        PipelineError::Typing(rusforge_core::extraction::TypingError::Untyped(entities)) => {
            err.with("entities", json!(entities))
        }
        _ => err,
    }
}

fn query_error(e: QueryError) -> ApiError {
    let err = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string());
    match e {
        QueryError::Syntax { position, .. } => err.with("position", position),
        QueryError::Unbound(var) => err.with("variable", var),
    }
}

fn parse_body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::schema("$", e.to_string()))
}

fn document(project: &Project) -> Value {
    serde_json::from_slice(&save_project(project)).expect("saved projects are JSON")
}

fn entry_body(id: &str, entry: &Entry) -> Value {
    json!({ "id": id, "revision": entry.revision, "project": document(&entry.project) })
}

type AppState = Arc<Store>;
type ApiResult = Result<Response, ApiError>;

pub fn routes(store: AppState) -> Router {
    Router::new()
        .route("/projects", get(list_projects).post(create_project))
        .route(
            "/projects/{id}",
            get(get_project).put(replace_project).delete(delete_project),
        )
        .route("/projects/{id}/validate-statement", post(validate_statement))
        .route("/projects/{id}/validate", post(validate))
        .route("/projects/{id}/extraction", get(extraction))
        .route("/projects/{id}/types", put(replace_types))
        .route("/projects/{id}/kb", post(knowledge_base))
        .route("/projects/{id}/query", post(query))
        .with_state(store)
}

async fn list_projects(State(store): State<AppState>) -> Json<Value> {
    let projects: Vec<Value> = store
        .list()
        .iter()
        .map(|(id, e)| json!({ "id": id, "name": e.project.name, "revision": e.revision }))
        .collect();
    Json(json!({ "projects": projects }))
}

async fn create_project(State(store): State<AppState>, body: Bytes) -> ApiResult {
    let project = load_project(&body).map_err(|e| file_error(e, ""))?;
    let id = project.name.clone();
    if !is_valid_id(&id) {
        return Err(ApiError::schema("name", "project names used as ids may contain only letters, digits, '_' and '-'"));
    }
    let entry = store.create(&id, project)?;
    Ok((StatusCode::CREATED, Json(entry_body(&id, &entry))).into_response())
}

async fn get_project(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let entry = store.get(&id)?;
    Ok(Json(entry_body(&id, &entry)).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplaceBody {
    revision: u64,
    project: Value,
}

async fn replace_project(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let ReplaceBody { revision, project } = parse_body(&body)?;
    let bytes = serde_json::to_vec(&project).expect("value serializes");
    let project = load_project(&bytes).map_err(|e| file_error(e, "project."))?;
    if project.name != id {
        return Err(ApiError::schema("project.name", format!("name must stay {id:?}")));
    }
    let entry = store
        .update(&id, Some(revision), |p| {
            *p = project;
            Ok::<_, ApiError>(())
        })??;
    Ok(Json(entry_body(&id, &entry)).into_response())
}

async fn delete_project(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult {
    store.delete(&id)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

#[derive(Deserialize)]
struct StatementBody {
    text: String,
}

async fn validate_statement(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let entry = store.get(&id)?;
    let StatementBody { text } = parse_body(&body)?;
    let verdict = match match_against_set(&text, &entry.project.templates) {
        Ok(MatchOutcome::Matched(m)) => {
            let triples: Vec<[&str; 3]> = m
                .triples
                .iter()
                .map(|t| [t.subject.as_str(), t.predicate.as_str(), t.object.as_str()])
                .collect();
            json!({ "ok": true, "template_id": m.template_id, "triples": triples })
        }
        Ok(MatchOutcome::NoMatch) => json!({ "ok": false, "reason": "no_match" }),
        Err(e) => json!({ "ok": false, "reason": "lex_error", "column": e.column, "found": e.found.to_string() }),
    };
    Ok(Json(verdict).into_response())
}

async fn validate(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let mut project = store.get(&id)?.project;
    let report = validate_project(&mut project);
    Ok(Json(json!(report)).into_response())
}

async fn extraction(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let project = store.get(&id)?.project;
    let (project, report) = pipeline::extraction(&project).map_err(pipeline_error)?;
    let mut body = report.to_json();
    body["warnings"] = json!(check_glossary(&report, &project.glossary));
    Ok(Json(body).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TypesBody {
    #[serde(default)]
    revision: Option<u64>,
    types: BTreeMap<String, String>,
}

async fn replace_types(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let TypesBody { revision, types } = parse_body(&body)?;
    let mut assignment = BTreeMap::new();
    for (entity, ty) in types {
        if !is_word(&entity) {
            return Err(ApiError::schema(format!("types.{entity}"), format!("{entity:?} is not a word")));
        }
        if !is_word(&ty) {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "E_BAD_TYPE",
                format!("{ty:?} is not a valid type name"),
            )
            .with("path", format!("types.{entity}")));
        }
        assignment.insert(entity.to_ascii_lowercase(), ty);
    }
    let entry = store
        .update(&id, revision, |p| {
            p.type_assignments = assignment;
            Ok::<_, ApiError>(())
        })??;
    Ok(Json(entry_body(&id, &entry)).into_response())
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct KbBody {
    #[serde(default)]
    default_type: Option<String>,
    #[serde(default)]
    include_provenance: bool,
}

fn optional_body<T: DeserializeOwned + Default>(bytes: &[u8]) -> Result<T, ApiError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        Ok(T::default())
    } else {
        parse_body(bytes)
    }
}

async fn knowledge_base(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let KbBody {
        default_type,
        include_provenance,
    } = optional_body(&body)?;
    let project = store.get(&id)?.project;
    let kb = pipeline::knowledge_base(&project, default_type.as_deref()).map_err(pipeline_error)?;
    let ntriples = String::from_utf8(serialize_ntriples(&kb)).expect("N-Triples output is UTF-8");
    let dot = String::from_utf8(export_graph(&kb, GraphOptions { include_provenance })).expect("DOT output is UTF-8");
    Ok(Json(json!({ "ntriples": ntriples, "dot": dot })).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryBody {
    query: String,
    #[serde(default)]
    default_type: Option<String>,
}

async fn query(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let QueryBody { query, default_type } = parse_body(&body)?;
    let project = store.get(&id)?.project;
    let parsed = parse_query(&query, &Prefixes::new(Some(&project.namespace))).map_err(query_error)?;
    let kb = pipeline::knowledge_base(&project, default_type.as_deref()).map_err(pipeline_error)?;
    let table = ResultTable::new(&parsed, &evaluate(&parsed, &kb));
    Ok(Json(json!(table)).into_response())
}
