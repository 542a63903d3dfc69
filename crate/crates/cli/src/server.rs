//! JSON API over a [`Pipeline`]: search, taxonomy, profiles, visits, health.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use isf_core::index::SourceTag;
use isf_core::personalization::{init_profile, UserProfile};
use isf_core::pipeline::{Pipeline, SearchRequest, VisitResult};
use isf_core::Error;
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

pub type AppState = Arc<Pipeline>;

pub struct ApiError {
    status: StatusCode,
    field: Option<&'static str>,
    message: String,
}

impl ApiError {
    fn bad(field: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            field: Some(field),
            message: message.into(),
        }
    }
}

fn root_cause(e: &Error) -> &Error {
    match e {
        Error::Stage { source, .. } => root_cause(source),
        other => other,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, field) = match root_cause(&e) {
            Error::InvalidRequest { field, .. } => (StatusCode::BAD_REQUEST, Some(*field)),
            Error::UnknownCategory(_) => (StatusCode::BAD_REQUEST, Some("cats")),
            Error::InvalidTopic(_) | Error::DuplicateTopic(_) | Error::NegativeWeight { .. } => {
                (StatusCode::BAD_REQUEST, Some("topics"))
            }
            Error::InvalidUser(_) => (StatusCode::BAD_REQUEST, Some("user")),
            Error::NoBackends => (StatusCode::SERVICE_UNAVAILABLE, None),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, None),
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!("request failed: {e}");
        }
        ApiError {
            status,
            field,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message, "field": self.field }))).into_response()
    }
}

fn split_list(s: Option<&str>) -> Vec<String> {
    s.map(|s| {
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(String::from)
            .collect()
    })
    .unwrap_or_default()
}

#[derive(Debug, Deserialize)]
pub struct SearchParams {
    q: Option<String>,
    user: Option<String>,
    cats: Option<String>,
    sources: Option<String>,
    topic: Option<String>,
    k: Option<String>,
    token: Option<String>,
}

impl SearchParams {
    fn into_request(self) -> Result<SearchRequest, ApiError> {
        let query = self
            .q
            .filter(|q| !q.trim().is_empty())
            .ok_or_else(|| ApiError::bad("q", "missing query parameter q"))?;
        let sources = match self.sources.as_deref() {
            None => None,
            Some(s) => Some(
                split_list(Some(s))
                    .iter()
                    .map(|x| x.parse::<SourceTag>().map_err(|e| ApiError::bad("sources", e.to_string())))
                    .collect::<Result<BTreeSet<_>, _>>()?,
            ),
        };
        let results = match self.k.as_deref() {
            None => None,
            Some(k) => match k.parse::<usize>() {
                Ok(n) if (1..=1000).contains(&n) => Some(n),
                _ => return Err(ApiError::bad("k", "k must be an integer in 1..=1000")),
            },
        };
        Ok(SearchRequest {
            query,
            user: self.user.filter(|u| !u.is_empty()),
            categories: split_list(self.cats.as_deref()),
            sources,
            topic: self.topic.filter(|t| !t.is_empty()),
            results,
            token: self.token,
        })
    }
}

async fn search(State(p): State<AppState>, Query(params): Query<SearchParams>) -> Result<Response, ApiError> {
    let req = params.into_request()?;
    let resp = p.run(&req).await?;
    Ok(Json(resp).into_response())
}

async fn categories(State(p): State<AppState>) -> Response {
    Json(p.taxonomy().tree()).into_response()
}

#[derive(Debug, Deserialize)]
pub struct UserParam {
    user: Option<String>,
}

async fn get_profile(State(p): State<AppState>, Query(u): Query<UserParam>) -> Result<Response, ApiError> {
    let user = u.user.filter(|u| !u.is_empty()).ok_or_else(|| ApiError::bad("user", "missing user"))?;
    let profile = p.profiles().get_or_empty(&user)?;
    Ok(Json(&*profile).into_response())
}

#[derive(Debug, Deserialize)]
pub struct ProfileBody {
    user: String,
    #[serde(default)]
    topics: BTreeMap<String, i64>,
}

async fn post_profile(State(p): State<AppState>, Json(body): Json<ProfileBody>) -> Result<Response, ApiError> {
    let topics: Vec<(String, i64)> = body.topics.into_iter().collect();
    let profile: UserProfile = init_profile(&body.user, &topics, p.taxonomy())?;
    let stored = tokio::task::spawn_blocking(move || p.profiles().put(profile))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            field: None,
            message: e.to_string(),
        })??;
    Ok(Json(&*stored).into_response())
}

#[derive(Debug, Deserialize)]
pub struct VisitBody {
    user: String,
    url: String,
}

async fn visit(State(p): State<AppState>, Json(body): Json<VisitBody>) -> Result<Response, ApiError> {
    let outcome = tokio::task::spawn_blocking(move || p.visit(&body.user, &body.url))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            field: None,
            message: e.to_string(),
        })??;
    Ok(match outcome {
        VisitResult::Recorded(_) => StatusCode::NO_CONTENT.into_response(),
        VisitResult::NoOp => (StatusCode::OK, Json(json!({ "noop": true }))).into_response(),
        VisitResult::UnknownResult => (
            StatusCode::NOT_FOUND,
            Json(json!({ "error": "unknown result reference", "field": "url" })),
        )
            .into_response(),
    })
}

async fn health() -> &'static str {
    "ok"
}

pub fn router(pipeline: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/search", get(search))
        .route("/categories", get(categories))
        .route("/profile", get(get_profile).post(post_profile))
        .route("/visit", axum::routing::post(visit))
        .route("/health", get(health))
        .with_state(pipeline);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(pipeline: Pipeline, bind: &str) -> anyhow::Result<()> {
    pipeline.registry().refresh_health().await;
    let ui = pipeline.config().ui_dir.clone();
    let app = router(Arc::new(pipeline), ui);
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|e| anyhow::anyhow!("cannot bind {bind}: {e}"))?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
