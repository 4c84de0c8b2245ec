//! HTTP/JSON API over a loaded corpus.
//!
//! Routes (field names and codes are documented in `docs/API.md`):
//!
//! * `POST /api/suggest`
//! * `GET  /api/tropes/{id}` and `GET /api/movies/{id}`, both with `?index_filter=`
//! * `GET  /api/search?q=&limit=`
//! * `PUT|GET /api/canvases/{id}`
//! * `GET  /api/stats`
//!
//! Every response carries the corpus fingerprint in `x-corpus-fingerprint`.

use std::collections::{HashMap, HashSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, LazyLock, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;
use tower_http::set_header::SetResponseHeaderLayer;

use crate::corpus::{Corpus, CorpusError, IndexIx, StatsSummary, TropeIx};
use crate::ingest::{fingerprint, load_dataset};
use crate::suggest::{Engine, SuggestError, SuggestionOutcome, SuggestionQuery};

pub const FINGERPRINT_HEADER: &str = "x-corpus-fingerprint";
const DEFAULT_SEARCH_LIMIT: usize = 10;

static CANVAS_ID: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z0-9_\-]{1,128}$").unwrap());

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub error: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        ApiError { status: status.as_u16(), error: error.into(), message: message.into(), id: None }
    }

    fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    fn not_found(what: &str, id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} `{id}`")).with_id(id)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<SuggestError> for ApiError {
    fn from(e: SuggestError) -> Self {
        let status = match e {
            SuggestError::EmptyCandidateSet | SuggestError::AllZeroScores => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        let err = ApiError::new(status, e.code(), e.to_string());
        match e {
            SuggestError::Corpus(CorpusError::NotFound { id, .. }) => err.with_id(id),
            _ => err,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CardType {
    Trope,
    Text,
    Movie,
    Title,
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Card {
    pub card_id: String,
    pub card_type: CardType,
    pub position: Position,
    /// Trope id, free text, movie id, title string or image URL.
    pub payload: String,
    #[serde(default)]
    pub selected_for_input: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanvasDocument {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub cards: Vec<Card>,
    pub updated_at: DateTime<Utc>,
    /// Breaks ties between writes with the same `updated_at`; larger wins.
    #[serde(default)]
    pub writer: String,
}

impl CanvasDocument {
    fn version(&self) -> (DateTime<Utc>, &str) {
        (self.updated_at, &self.writer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanvasPutResponse {
    pub accepted: bool,
    pub warnings: Vec<String>,
    pub document: CanvasDocument,
}

/// One JSON file per canvas under a directory. Writes to one canvas id are
/// serialized; the stored document only moves forward in
/// `(updated_at, writer)` order.
#[derive(Debug)]
pub struct CanvasStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl CanvasStore {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(CanvasStore { dir, locks: Mutex::new(HashMap::new()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().unwrap();
        Arc::clone(locks.entry(id.to_owned()).or_default())
    }

    pub async fn get(&self, id: &str) -> std::io::Result<Option<CanvasDocument>> {
        match tokio::fs::read(self.path(id)).await {
            Ok(bytes) => serde_json::from_slice(&bytes).map(Some).map_err(std::io::Error::other),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Stores `doc` unless a newer version is already stored. Returns whether
    /// it was accepted and the document now stored.
    pub async fn put(&self, doc: CanvasDocument) -> std::io::Result<(bool, CanvasDocument)> {
        let lock = self.lock(&doc.id);
        let _guard = lock.lock().await;
        if let Some(current) = self.get(&doc.id).await? {
            if doc.version() < current.version() {
                return Ok((false, current));
            }
        }
        let bytes = serde_json::to_vec_pretty(&doc).map_err(std::io::Error::other)?;
        let tmp = self.dir.join(format!(".{}.json.tmp", doc.id));
        tokio::fs::write(&tmp, bytes).await?;
        tokio::fs::rename(&tmp, self.path(&doc.id)).await?;
        Ok((true, doc))
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub fingerprint: Arc<str>,
    pub canvases: Arc<CanvasStore>,
    pub default_seed: Option<u64>,
}

impl AppState {
    pub fn new(engine: Engine, canvases: CanvasStore, default_seed: Option<u64>) -> Self {
        let fingerprint = fingerprint(engine.corpus()).into();
        AppState { engine: Arc::new(engine), fingerprint, canvases: Arc::new(canvases), default_seed }
    }

    fn corpus(&self) -> &Corpus {
        self.engine.corpus()
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub data: PathBuf,
    pub canvas_dir: PathBuf,
    pub port: u16,
    pub host: String,
    pub default_seed: Option<u64>,
    pub cors_origin: Option<String>,
    pub static_dir: Option<PathBuf>,
}

/// Builds the API router. CORS and static files are added by [`serve`].
pub fn router(state: AppState) -> Router {
    let fingerprint = HeaderValue::from_str(&state.fingerprint).expect("hex fingerprint is a valid header");
    Router::new()
        .route("/api/suggest", post(suggest_handler))
        .route("/api/tropes/{*id}", get(trope_handler))
        .route("/api/movies/{*id}", get(movie_handler))
        .route("/api/search", get(search_handler))
        .route("/api/canvases/{id}", get(get_canvas).put(put_canvas))
        .route("/api/stats", get(stats_handler))
        .layer(SetResponseHeaderLayer::overriding(HeaderName::from_static(FINGERPRINT_HEADER), fingerprint))
        .with_state(state)
}

/// Loads the dataset, fits the engine and serves until interrupted.
pub async fn serve(config: ServerConfig) -> anyhow::Result<()> {
    let data = config.data.clone();
    let (corpus, report) = tokio::task::spawn_blocking(move || load_dataset(&data, false)).await??;
    tracing::info!(tropes = report.tropes, indexes = report.indexes, movies = report.movies, "dataset loaded");
    let engine = tokio::task::spawn_blocking(move || Engine::new(corpus)).await?;
    let state = AppState::new(engine, CanvasStore::new(&config.canvas_dir)?, config.default_seed);

    let mut app = router(state);
    if let Some(origin) = &config.cors_origin {
        let cors = CorsLayer::new()
            .allow_origin(origin.parse::<HeaderValue>()?)
            .allow_methods([axum::http::Method::GET, axum::http::Method::POST, axum::http::Method::PUT])
            .allow_headers([axum::http::header::CONTENT_TYPE]);
        app = app.layer(cors);
    }
    if let Some(dir) = &config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }

    let addr: SocketAddr = format!("{}:{}", config.host, config.port).parse()?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SuggestResponse {
    pub corpus_fingerprint: String,
    #[serde(flatten)]
    pub outcome: SuggestionOutcome,
}

async fn suggest_handler(
    State(state): State<AppState>,
    body: Result<Json<SuggestionQuery>, JsonRejection>,
) -> Result<Json<SuggestResponse>, ApiError> {
    let Json(mut query) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", e.body_text()))?;
    if query.seed.is_none() {
        query.seed = state.default_seed;
    }
    let outcome = state.engine.suggest(&query)?;
    Ok(Json(SuggestResponse { corpus_fingerprint: state.fingerprint.to_string(), outcome }))
}

#[derive(Debug, Default, Deserialize)]
struct IndexFilterParams {
    index_filter: Option<String>,
}

impl IndexFilterParams {
    fn resolve(&self, corpus: &Corpus) -> Result<Vec<IndexIx>, ApiError> {
        let Some(raw) = &self.index_filter else { return Ok(Vec::new()) };
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|id| {
                corpus.index_ix(id).map_err(|_| {
                    ApiError::new(StatusCode::BAD_REQUEST, "unknown_id", format!("unknown index `{id}`")).with_id(id)
                })
            })
            .collect()
    }
}

fn in_any_index(corpus: &Corpus, trope: TropeIx, filters: &[IndexIx]) -> bool {
    filters.iter().any(|&i| corpus.index(i).members.binary_search(&trope).is_ok())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TropeOccurrence {
    pub movie: String,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TropeDetail {
    pub id: String,
    pub name: String,
    pub laconic: String,
    pub is_index: bool,
    pub indexes: Vec<Link>,
    pub description_tropes: Vec<Link>,
    pub sub_tropes: Vec<Link>,
    pub occurrences: Vec<TropeOccurrence>,
}

fn trope_link(corpus: &Corpus, t: TropeIx) -> Link {
    let trope = corpus.trope(t);
    Link { id: trope.id.clone(), name: trope.name.clone() }
}

/// Trope detail. With `index_filter`, only occurrences in movies holding at
/// least one trope of the listed indexes are kept.
pub fn trope_detail(corpus: &Corpus, id: &str, filters: &[IndexIx]) -> Result<TropeDetail, CorpusError> {
    let t = corpus.trope_ix(id)?;
    let trope = corpus.trope(t);
    let occurrences = trope
        .occurrences
        .iter()
        .filter(|o| filters.is_empty() || corpus.movie(o.movie).tropes.iter().any(|&m| in_any_index(corpus, m, filters)))
        .map(|o| {
            let movie = corpus.movie(o.movie);
            TropeOccurrence { movie: movie.id.clone(), title: movie.title.clone(), text: o.text.clone() }
        })
        .collect();
    Ok(TropeDetail {
        id: trope.id.clone(),
        name: trope.name.clone(),
        laconic: trope.laconic.clone(),
        is_index: corpus.index_ix(id).is_ok(),
        indexes: trope
            .indexes
            .iter()
            .map(|&i| Link { id: corpus.index(i).id.clone(), name: corpus.index(i).name.clone() })
            .collect(),
        description_tropes: trope.description_tropes.iter().map(|&d| trope_link(corpus, d)).collect(),
        sub_tropes: corpus.sub_tropes(id)?.into_iter().map(|s| trope_link(corpus, s)).collect(),
        occurrences,
    })
}

async fn trope_handler(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(params): Query<IndexFilterParams>,
) -> Result<Json<TropeDetail>, ApiError> {
    let corpus = state.corpus();
    let filters = params.resolve(corpus)?;
    trope_detail(corpus, &id, &filters).map(Json).map_err(|_| ApiError::not_found("trope", &id))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieTrope {
    pub trope: String,
    pub name: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieDetail {
    pub id: String,
    pub title: String,
    pub year: Option<i32>,
    pub synopsis: Option<String>,
    pub genres: Option<Vec<String>>,
    pub tropes: Vec<MovieTrope>,
}

/// Movie detail. With `index_filter`, only tropes belonging to at least one
/// listed index are kept.
pub fn movie_detail(corpus: &Corpus, id: &str, filters: &[IndexIx]) -> Result<MovieDetail, CorpusError> {
    let m = corpus.movie_ix(id)?;
    let movie = corpus.movie(m);
    let tropes = movie
        .tropes
        .iter()
        .filter(|&&t| filters.is_empty() || in_any_index(corpus, t, filters))
        .map(|&t| {
            let trope = corpus.trope(t);
            let text = trope.occurrence_in(m).map(|o| o.text.clone()).unwrap_or_default();
            MovieTrope { trope: trope.id.clone(), name: trope.name.clone(), text }
        })
        .collect();
    Ok(MovieDetail {
        id: movie.id.clone(),
        title: movie.title.clone(),
        year: movie.year,
        synopsis: movie.synopsis.clone(),
        genres: movie.genres.clone(),
        tropes,
    })
}

async fn movie_handler(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(params): Query<IndexFilterParams>,
) -> Result<Json<MovieDetail>, ApiError> {
    let corpus = state.corpus();
    let filters = params.resolve(corpus)?;
    movie_detail(corpus, &id, &filters).map(Json).map_err(|_| ApiError::not_found("movie", &id))
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    #[serde(default)]
    q: String,
    limit: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SearchResponse {
    pub results: Vec<Link>,
}

async fn search_handler(State(state): State<AppState>, Query(params): Query<SearchParams>) -> Json<SearchResponse> {
    let corpus = state.corpus();
    let hits = state.engine.name_search(&params.q, params.limit.unwrap_or(DEFAULT_SEARCH_LIMIT));
    Json(SearchResponse { results: hits.into_iter().map(|t| trope_link(corpus, t)).collect() })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatsResponse {
    pub corpus_fingerprint: String,
    pub stats: StatsSummary,
}

async fn stats_handler(State(state): State<AppState>) -> Json<StatsResponse> {
    Json(StatsResponse { corpus_fingerprint: state.fingerprint.to_string(), stats: state.corpus().stats() })
}

fn check_canvas_id(id: &str) -> Result<(), ApiError> {
    if CANVAS_ID.is_match(id) {
        Ok(())
    } else {
        Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid_id", format!("invalid canvas id `{id}`")).with_id(id))
    }
}

fn io_error(e: std::io::Error) -> ApiError {
    tracing::error!(error = %e, "canvas storage failure");
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", e.to_string())
}

async fn get_canvas(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<CanvasDocument>, ApiError> {
    check_canvas_id(&id)?;
    match state.canvases.get(&id).await.map_err(io_error)? {
        Some(doc) => Ok(Json(doc)),
        None => Err(ApiError::not_found("canvas", &id)),
    }
}

/// Dangling trope or movie payloads. They are reported, not rejected.
pub fn canvas_warnings(corpus: &Corpus, doc: &CanvasDocument) -> Vec<String> {
    doc.cards
        .iter()
        .filter_map(|c| match c.card_type {
            CardType::Trope if corpus.trope_ix(&c.payload).is_err() => {
                Some(format!("card {}: unknown trope `{}`", c.card_id, c.payload))
            }
            CardType::Movie if corpus.movie_ix(&c.payload).is_err() => {
                Some(format!("card {}: unknown movie `{}`", c.card_id, c.payload))
            }
            _ => None,
        })
        .collect()
}

async fn put_canvas(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<CanvasDocument>, JsonRejection>,
) -> Result<Response, ApiError> {
    check_canvas_id(&id)?;
    let Json(doc) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", e.body_text()))?;
    if doc.id != id {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "id_mismatch", "document id differs from the URL").with_id(id));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = doc.cards.iter().find(|c| !seen.insert(c.card_id.as_str())) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "duplicate_card", "card ids must be unique")
            .with_id(dup.card_id.clone()));
    }
    let warnings = canvas_warnings(state.corpus(), &doc);
    let (accepted, stored) = state.canvases.put(doc).await.map_err(io_error)?;
    let status = if accepted { StatusCode::OK } else { StatusCode::CONFLICT };
    Ok((status, Json(CanvasPutResponse { accepted, warnings, document: stored })).into_response())
}
