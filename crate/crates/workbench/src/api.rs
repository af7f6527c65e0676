//! JSON HTTP API over a workspace.
//!
//! | method | path | response |
//! |---|---|---|
//! | GET | `/datasets` | `[DatasetSummary]` |
//! | GET | `/datasets/{dataset}/models` | `[ModelSummary]` |
//! | GET | `/models/{model}/topics` | `TopicsPayload` |
//! | GET | `/models/{model}/chord?threshold=τ` | `ChordGraph` |
//! | GET | `/models/{model}/topics/{topic}/documents?limit=k` | `DocumentsPayload` |
//! | GET | `/rankings?dataset=d` | `[RankingRecord]` |
//! | POST | `/rankings` | `201 RankingRecord` |
//! | GET | `/desirability-words` | `WordList` |
//!
//! Errors are `{"error": message}`; validation failures (422) add
//! `"fields": [{"field", "message"}]`.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use topicbench_core::ingest::Thread;
use topicbench_core::metrics::{load_reports, MetricsReport};
use topicbench_core::models::{Keyword, Method, TopicModelResult};
use tower_http::services::ServeDir;

use crate::chord::{chord_graph, memberships, ChordGraph, DEFAULT_THRESHOLD};
use crate::error::Error;
use crate::ranking::{validate_submission, FieldError, RankingRecord, RankingStore, RankingSubmission, WordList};
use crate::workspace::{read_json, DatasetEntry, ModelEntry, Registry, Workspace};

pub const DEFAULT_DOCUMENT_LIMIT: usize = 20;
pub const MAX_DOCUMENT_LIMIT: usize = 1000;

pub struct AppState {
    pub workspace: Workspace,
    pub rankings: RankingStore,
    pub words: WordList,
    pub default_limit: usize,
}

impl AppState {
    pub fn new(workspace: Workspace, words: WordList) -> Self {
        let rankings = RankingStore::new(workspace.rankings_path());
        Self {
            workspace,
            rankings,
            words,
            default_limit: DEFAULT_DOCUMENT_LIMIT,
        }
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fields: Vec<FieldError>,
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Validation(Vec<FieldError>),
    Internal(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotFound(what) => ApiError::NotFound(format!("{what} not found")),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<topicbench_core::Error> for ApiError {
    fn from(e: topicbench_core::Error) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error, fields) = match self {
            ApiError::NotFound(msg) => (StatusCode::NOT_FOUND, msg, Vec::new()),
            ApiError::Validation(fields) => (StatusCode::UNPROCESSABLE_ENTITY, "validation failed".into(), fields),
            ApiError::Internal(msg) => {
                log::error!("{msg}");
                (StatusCode::INTERNAL_SERVER_ERROR, msg, Vec::new())
            }
        };
        (status, Json(ErrorBody { error, fields })).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub run_id: String,
    pub num_documents: usize,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub id: String,
    pub dataset: String,
    pub method: Method,
    pub num_topics: usize,
    pub metrics: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub size: usize,
    pub keywords: Vec<Keyword>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsPayload {
    pub model_id: String,
    pub dataset: String,
    pub method: Method,
    pub topics: Vec<TopicSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentSample {
    pub id: String,
    pub membership: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentsPayload {
    pub model_id: String,
    pub topic_id: usize,
    /// Documents assigned to the topic before `limit` is applied.
    pub total: usize,
    pub limit: usize,
    pub documents: Vec<DocumentSample>,
}

#[derive(Debug, Deserialize)]
struct ChordQuery {
    threshold: Option<String>,
}

#[derive(Debug, Deserialize)]
struct DocumentsQuery {
    limit: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RankingsQuery {
    dataset: Option<String>,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/datasets", get(list_datasets))
        .route("/datasets/{dataset}/models", get(list_models))
        .route("/models/{model}/topics", get(model_topics))
        .route("/models/{model}/chord", get(model_chord))
        .route("/models/{model}/topics/{topic}/documents", get(topic_documents))
        .route("/rankings", get(list_rankings).post(post_ranking))
        .route("/desirability-words", get(desirability_words))
        .with_state(state)
}

/// The API plus a static UI build served for every other path.
pub fn router_with_assets(state: Arc<AppState>, assets: PathBuf) -> Router {
    router(state).fallback_service(ServeDir::new(assets))
}

fn registry(state: &AppState) -> ApiResult<Registry> {
    Ok(state.workspace.registry()?)
}

fn find_model(state: &AppState, id: &str) -> ApiResult<(String, DatasetEntry, ModelEntry, TopicModelResult)> {
    let reg = registry(state)?;
    let (name, dataset, entry) = reg
        .model(id)
        .ok_or_else(|| ApiError::NotFound(format!("model {id:?} not found")))?;
    let model = TopicModelResult::load(state.workspace.resolve(&entry.path))?;
    Ok((name.to_string(), dataset.clone(), entry.clone(), model))
}

fn field_error(field: &str, message: impl Into<String>) -> ApiError {
    ApiError::Validation(vec![FieldError::new(field, message)])
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<DatasetSummary>>> {
    let reg = registry(&state)?;
    Ok(Json(
        reg.datasets
            .into_iter()
            .map(|(name, d)| DatasetSummary {
                name,
                run_id: d.run_id,
                num_documents: d.num_documents,
                methods: d.models.iter().map(|m| m.method).collect(),
            })
            .collect(),
    ))
}

async fn list_models(
    State(state): State<Arc<AppState>>,
    Path(dataset): Path<String>,
) -> ApiResult<Json<Vec<ModelSummary>>> {
    let reg = registry(&state)?;
    let entry = reg
        .datasets
        .get(&dataset)
        .ok_or_else(|| ApiError::NotFound(format!("dataset {dataset:?} not found")))?;
    let reports = load_reports(state.workspace.resolve(&entry.metrics))?;
    Ok(Json(
        entry
            .models
            .iter()
            .map(|m| ModelSummary {
                id: m.id.clone(),
                dataset: dataset.clone(),
                method: m.method,
                num_topics: m.num_topics,
                metrics: reports
                    .iter()
                    .find(|r| r.dataset == dataset && r.method == m.method)
                    .cloned(),
            })
            .collect(),
    ))
}

async fn model_topics(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<TopicsPayload>> {
    let (dataset, _, entry, model) = find_model(&state, &id)?;
    Ok(Json(TopicsPayload {
        model_id: entry.id,
        dataset,
        method: model.method,
        topics: model
            .topics
            .into_iter()
            .map(|t| TopicSummary {
                topic_id: t.topic_id,
                size: t.size,
                keywords: t.keywords,
            })
            .collect(),
    }))
}

async fn model_chord(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<ChordQuery>,
) -> ApiResult<Json<ChordGraph>> {
    let threshold = match q.threshold.as_deref() {
        None => DEFAULT_THRESHOLD,
        Some(raw) => match raw.parse::<f64>() {
            Ok(t) if (0.0..=1.0).contains(&t) => t,
            _ => return Err(field_error("threshold", format!("must be a number in [0, 1], got {raw:?}"))),
        },
    };
    let (_, _, _, model) = find_model(&state, &id)?;
    Ok(Json(chord_graph(&model, threshold)))
}

async fn topic_documents(
    State(state): State<Arc<AppState>>,
    Path((id, topic)): Path<(String, String)>,
    Query(q): Query<DocumentsQuery>,
) -> ApiResult<Json<DocumentsPayload>> {
    let limit = match q.limit.as_deref() {
        None => state.default_limit,
        Some(raw) => match raw.parse::<usize>() {
            Ok(n) if (1..=MAX_DOCUMENT_LIMIT).contains(&n) => n,
            _ => {
                return Err(field_error(
                    "limit",
                    format!("must be an integer in 1..={MAX_DOCUMENT_LIMIT}, got {raw:?}"),
                ))
            }
        },
    };
    let (_, dataset, entry, model) = find_model(&state, &id)?;
    let position = topic
        .parse::<usize>()
        .ok()
        .and_then(|t| model.topics.iter().position(|x| x.topic_id == t))
        .ok_or_else(|| ApiError::NotFound(format!("topic {topic:?} of model {id:?} not found")))?;
    let topic_id = model.topics[position].topic_id;

    let threads: Vec<Thread> = read_json(&state.workspace.resolve(&dataset.threads))?;
    let text_of = |doc_id: &str| {
        threads
            .iter()
            .find(|t| t.id == doc_id)
            .map(|t| t.text.clone())
            .unwrap_or_default()
    };
    // Hard models list the topic's members; soft models list documents whose
    // membership clears the default chord threshold.
    let members = memberships(&model, DEFAULT_THRESHOLD);
    let mut docs: Vec<(usize, f64)> = members
        .iter()
        .enumerate()
        .filter(|(_, ts)| ts.contains(&position))
        .map(|(d, _)| (d, model.doc_topic.membership(d).get(position).copied().unwrap_or(0.0)))
        .collect();
    docs.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| model.doc_ids[a.0].cmp(&model.doc_ids[b.0])));
    let total = docs.len();
    Ok(Json(DocumentsPayload {
        model_id: entry.id,
        topic_id,
        total,
        limit,
        documents: docs
            .into_iter()
            .take(limit)
            .map(|(d, membership)| DocumentSample {
                id: model.doc_ids[d].clone(),
                membership,
                text: text_of(&model.doc_ids[d]),
            })
            .collect(),
    }))
}

async fn list_rankings(
    State(state): State<Arc<AppState>>,
    Query(q): Query<RankingsQuery>,
) -> ApiResult<Json<Vec<RankingRecord>>> {
    Ok(Json(state.rankings.list(q.dataset.as_deref())?))
}

async fn post_ranking(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<RankingRecord>)> {
    let sub: RankingSubmission =
        serde_json::from_slice(&body).map_err(|e| field_error("body", format!("invalid ranking JSON: {e}")))?;
    let reg = registry(&state)?;
    let available: Option<Vec<Method>> = reg
        .datasets
        .get(&sub.dataset)
        .map(|d| d.models.iter().map(|m| m.method).collect());
    let record =
        validate_submission(&sub, available.as_deref(), &state.words, Utc::now()).map_err(ApiError::Validation)?;
    state.rankings.append(&record)?;
    Ok((StatusCode::CREATED, Json(record)))
}

async fn desirability_words(State(state): State<Arc<AppState>>) -> Json<WordList> {
    Json(state.words.clone())
}
