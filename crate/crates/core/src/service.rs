//! Review-session API.
//!
//! Transport-agnostic: [`Service::handle`] maps a method, a path with query
//! and a body to an [`ApiResponse`]. The CLI wraps it in an HTTP server.
//!
//! | Method | Path | Body |
//! |---|---|---|
//! | GET  | `/v1/health` | |
//! | GET  | `/v1/codebook` | |
//! | POST | `/v1/sessions` | `{"text": ...}` or `{"title": ...}` |
//! | GET  | `/v1/sessions/{id}` | |
//! | POST | `/v1/sessions/{id}/clues` | `{"keyword", "styles": [...], "n"}` |
//! | POST | `/v1/sessions/{id}/puzzle` | `{"seed"?, "max_width"?, "max_height"?}` |
//! | GET  | `/v1/clues/{id}` | |
//! | POST | `/v1/clues/{id}/decision` | `{"decision": "accept"\|"reject"\|"edit", "text"?, "session_id"?}` |
//! | POST | `/v1/clues/{id}/rating` | `{"rating": "A".."E"}` |
//! | GET  | `/v1/puzzles/{id}?format=text\|json\|html` | |
//!
//! Errors are JSON objects `{"error": <reason code>, "message": ...}` with
//! status 400 for bad input, 404 for unknown ids and 502 for failures of the
//! LLM endpoint or Wikipedia.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::clock::{Clock, FixedClock, SystemClock};
use crate::config::AppConfig;
use crate::curation::{filter_article, CurationVerdict};
use crate::dataset::{ClueRecord, DatasetError, DatasetStore};
use crate::fsutil::write_atomic;
use crate::gateway::{Gateway, GatewayConfig, GatewayError, GatewayMode};
use crate::grid::{self, Entry, GridConfig, PuzzleDocument, RenderFormat};
use crate::http::{HttpTransport, NoSleep, ReqwestTransport, RetryPolicy};
use crate::replay::{FixtureStore, ReplayTransport};
use crate::rouge::score_pair;
use crate::styles::ClueStyle;
use crate::validator::{rating_codebook, validate, ItalianLexicon, Rating};
use crate::wiki::{ArticleRecord, WikiClient, WikiError};

pub const MAX_CLUES_PER_STYLE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiResponse {
    pub status: u16,
    pub content_type: &'static str,
    pub body: Vec<u8>,
}

impl ApiResponse {
    pub fn json(status: u16, value: &impl Serialize) -> Self {
        let mut body = serde_json::to_vec_pretty(value).expect("response serialises");
        body.push(b'\n');
        ApiResponse { status, content_type: "application/json", body }
    }

    pub fn json_value(&self) -> Option<Value> {
        serde_json::from_slice(&self.body).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
    pub details: Option<Value>,
}

impl ApiError {
    fn new(status: u16, code: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError { status, code: code.into(), message: message.into(), details: None }
    }

    fn bad(code: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(400, code, message)
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(404, "NotFound", format!("unknown {what} {id:?}"))
    }

    fn with(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(500, "Internal", e.to_string())
    }

    fn into_response(self) -> ApiResponse {
        let mut body = json!({ "error": self.code, "message": self.message });
        if let Some(Value::Object(extra)) = self.details {
            body.as_object_mut().unwrap().extend(extra);
        }
        ApiResponse::json(self.status, &body)
    }
}

impl From<GatewayError> for ApiError {
    fn from(e: GatewayError) -> Self {
        let status = if e.is_upstream() { 502 } else { 400 };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<WikiError> for ApiError {
    fn from(e: WikiError) -> Self {
        let status = match e {
            WikiError::NotFound(_) => 404,
            WikiError::Cache(_) => 500,
            _ => 502,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<DatasetError> for ApiError {
    fn from(e: DatasetError) -> Self {
        let status = match e {
            DatasetError::UnknownId(_) => 404,
            DatasetError::Io(_) => 500,
            _ => 400,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<grid::GridError> for ApiError {
    fn from(e: grid::GridError) -> Self {
        ApiError::bad(e.code(), e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionSource {
    Text { text: String },
    Title { title: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    Accepted,
    Rejected,
    Edited { text: String },
}

impl Decision {
    pub fn selects(&self) -> bool {
        !matches!(self, Decision::Rejected)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub source: SessionSource,
    pub article: ArticleRecord,
    pub curation: Option<CurationVerdict>,
    pub selected_styles: BTreeSet<ClueStyle>,
    pub clue_ids: Vec<String>,
    pub decisions: BTreeMap<String, Decision>,
    pub puzzle_id: Option<String>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    text: Option<String>,
    title: Option<String>,
}

fn default_n() -> usize {
    3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateRequest {
    keyword: String,
    styles: Vec<String>,
    #[serde(default = "default_n")]
    n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecisionRequest {
    decision: String,
    text: Option<String>,
    session_id: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingRequest {
    rating: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PuzzleRequest {
    seed: Option<u64>,
    max_width: Option<usize>,
    max_height: Option<usize>,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("gateway: {0}")]
    Gateway(#[from] GatewayError),
    #[error("dataset: {0}")]
    Dataset(#[from] DatasetError),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Gateway(e) => e.code(),
            ServiceError::Dataset(e) => e.code(),
            ServiceError::Io(_) => "IoError",
        }
    }
}

#[derive(Default)]
struct State {
    next_session: u64,
    next_puzzle: u64,
    clue_sessions: HashMap<String, Vec<String>>,
    locks: HashMap<String, Arc<Mutex<()>>>,
}

pub struct Service {
    cfg: AppConfig,
    store: DatasetStore,
    gateway: Gateway,
    wiki: WikiClient,
    clock: Arc<dyn Clock>,
    lex: &'static ItalianLexicon,
    sessions_dir: PathBuf,
    puzzles_dir: PathBuf,
    state: Mutex<State>,
}

fn max_numbered(dir: &Path, prefix: &str) -> u64 {
    std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            name.strip_prefix(prefix)?.strip_suffix(".json")?.parse::<u64>().ok()
        })
        .max()
        .unwrap_or(0)
}

impl Service {
    /// Wires the gateway and Wikipedia client from `cfg`. In replay mode both
    /// read from `llm.fixtures_dir`, the clock is pinned and retries never sleep,
    /// so identical request sequences give identical responses.
    pub fn from_config(mut cfg: AppConfig) -> Result<Self, ServiceError> {
        if cfg.llm.transcript_path.is_none() {
            cfg.llm.transcript_path = Some(cfg.store.transcript_path());
        }
        if cfg.wiki.cache_dir.is_none() {
            cfg.wiki.cache_dir = Some(cfg.store.wiki_cache_dir());
        }
        let replay = cfg.llm.mode == GatewayMode::Replay;
        let mut gateway = Gateway::from_config(cfg.llm.clone())?;
        let wiki_transport: Arc<dyn HttpTransport> = match (&cfg.llm.mode, &cfg.llm.fixtures_dir) {
            (GatewayMode::Replay, Some(dir)) => Arc::new(ReplayTransport::new(FixtureStore::new(dir.clone()))),
            _ => Arc::new(
                ReqwestTransport::new(&cfg.wiki.user_agent, std::time::Duration::from_secs(30))
                    .map_err(|e| GatewayError::Network(e.to_string()))?,
            ),
        };
        let mut wiki = WikiClient::new(cfg.wiki.clone(), wiki_transport);
        let clock: Arc<dyn Clock> = if replay {
            let sleeper = Arc::new(NoSleep::default());
            gateway = gateway.with_sleeper(sleeper.clone()).with_retry(RetryPolicy::default());
            wiki = wiki.with_sleeper(sleeper);
            Arc::new(FixedClock::epoch())
        } else {
            Arc::new(SystemClock)
        };
        gateway = gateway.with_clock(clock.clone());
        wiki = wiki.with_clock(clock.clone());
        Self::with_parts(cfg, gateway, wiki, clock)
    }

    pub fn with_parts(cfg: AppConfig, gateway: Gateway, wiki: WikiClient, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let sessions_dir = cfg.store.sessions_dir();
        let puzzles_dir = cfg.store.puzzles_dir();
        std::fs::create_dir_all(&sessions_dir)?;
        std::fs::create_dir_all(&puzzles_dir)?;
        let store = DatasetStore::open(cfg.store.clues_dir())?;
        let mut state = State {
            next_session: max_numbered(&sessions_dir, "sess-") + 1,
            next_puzzle: max_numbered(&puzzles_dir, "puz-") + 1,
            ..Default::default()
        };
        for n in 1..state.next_session {
            let id = format!("sess-{n:06}");
            if let Ok(bytes) = std::fs::read(sessions_dir.join(format!("{id}.json"))) {
                if let Ok(s) = serde_json::from_slice::<Session>(&bytes) {
                    for c in s.clue_ids {
                        state.clue_sessions.entry(c).or_default().push(id.clone());
                    }
                }
            }
        }
        Ok(Service {
            cfg,
            store,
            gateway,
            wiki,
            clock,
            lex: ItalianLexicon::builtin(),
            sessions_dir,
            puzzles_dir,
            state: Mutex::new(state),
        })
    }

    pub fn config(&self) -> &AppConfig {
        &self.cfg
    }

    pub fn store(&self) -> &DatasetStore {
        &self.store
    }

    pub fn gateway_config(&self) -> &GatewayConfig {
        self.gateway.config()
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn wiki(&self) -> &WikiClient {
        &self.wiki
    }

    pub fn now(&self) -> chrono::DateTime<chrono::Utc> {
        self.clock.now()
    }

    pub fn handle(&self, method: &str, target: &str, body: &[u8]) -> ApiResponse {
        let (path, query) = target.split_once('?').unwrap_or((target, ""));
        let segments: Vec<&str> = path.trim_matches('/').split('/').collect();
        let result = match (method, segments.as_slice()) {
            ("GET", ["v1", "health"]) => Ok(ApiResponse::json(200, &json!({"status": "ok"}))),
            ("GET", ["v1", "codebook"]) => Ok(self.codebook()),
            ("POST", ["v1", "sessions"]) => parse_body(body).and_then(|r| self.create_session(r)),
            ("GET", ["v1", "sessions", id]) => self.get_session(id),
            ("POST", ["v1", "sessions", id, "clues"]) => parse_body(body).and_then(|r| self.generate(id, r)),
            ("POST", ["v1", "sessions", id, "puzzle"]) => parse_body_or_default(body).and_then(|r| self.build_puzzle(id, r)),
            ("GET", ["v1", "clues", id]) => self.get_clue(id),
            ("POST", ["v1", "clues", id, "decision"]) => parse_body(body).and_then(|r| self.decide(id, r)),
            ("POST", ["v1", "clues", id, "rating"]) => parse_body(body).and_then(|r| self.rate(id, r)),
            ("GET", ["v1", "puzzles", id]) => self.get_puzzle(id, query),
            (_, ["v1", ..]) => Err(ApiError::new(404, "NoRoute", format!("no route for {method} {path}"))),
            _ => Err(ApiError::new(404, "NoRoute", "API paths start with /v1")),
        };
        result.unwrap_or_else(|e| {
            if e.status >= 500 {
                log::error!("{method} {path}: {} {}", e.code, e.message);
            }
            e.into_response()
        })
    }

    fn codebook(&self) -> ApiResponse {
        let items: Vec<Value> = rating_codebook()
            .iter()
            .map(|(r, d)| json!({"rating": r.to_string(), "description": d}))
            .collect();
        ApiResponse::json(200, &json!({ "ratings": items }))
    }

    fn session_path(&self, id: &str) -> PathBuf {
        self.sessions_dir.join(format!("{id}.json"))
    }

    fn valid_id(id: &str, prefix: &str) -> bool {
        id.strip_prefix(prefix).is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
    }

    fn session_lock(&self, id: &str) -> Arc<Mutex<()>> {
        self.state.lock().unwrap().locks.entry(id.to_string()).or_default().clone()
    }

    fn load_session(&self, id: &str) -> Result<Session, ApiError> {
        if !Self::valid_id(id, "sess-") {
            return Err(ApiError::not_found("session", id));
        }
        let bytes = std::fs::read(self.session_path(id)).map_err(|_| ApiError::not_found("session", id))?;
        serde_json::from_slice(&bytes).map_err(ApiError::internal)
    }

    fn save_session(&self, session: &Session) -> Result<(), ApiError> {
        let mut bytes = serde_json::to_vec_pretty(session).map_err(ApiError::internal)?;
        bytes.push(b'\n');
        write_atomic(&self.session_path(&session.id), &bytes).map_err(ApiError::internal)
    }

    fn session_view(&self, session: &Session) -> Value {
        let clues: Vec<ClueRecord> = session.clue_ids.iter().filter_map(|id| self.store.get(id)).collect();
        json!({ "session": session, "clues": clues })
    }

    fn create_session(&self, req: CreateSession) -> Result<ApiResponse, ApiError> {
        let (source, article, curation) = match (req.text, req.title) {
            (Some(text), None) => {
                let text = text.trim().to_string();
                if text.is_empty() {
                    return Err(ApiError::bad("EmptyContext", "text is empty"));
                }
                let article = ArticleRecord { intro_text: text.clone(), ..Default::default() };
                (SessionSource::Text { text }, article, None)
            }
            (None, Some(title)) => {
                let article = self.wiki.ingest(&title)?;
                let verdict = filter_article(&article, &self.cfg.curation);
                if !verdict.accepted {
                    let codes: Vec<&str> = verdict.reasons.iter().map(|r| r.code()).collect();
                    return Err(ApiError::bad("CurationRejected", format!("article {title:?} rejected: {}", codes.join(", ")))
                        .with(json!({ "reasons": codes, "keywords": verdict.keywords })));
                }
                (SessionSource::Title { title }, article, Some(verdict))
            }
            _ => return Err(ApiError::bad("InvalidBody", "give exactly one of \"text\" or \"title\"")),
        };
        let id = {
            let mut st = self.state.lock().unwrap();
            let id = format!("sess-{:06}", st.next_session);
            st.next_session += 1;
            id
        };
        let now = self.clock.now();
        let session = Session {
            id,
            source,
            article,
            curation,
            selected_styles: BTreeSet::new(),
            clue_ids: Vec::new(),
            decisions: BTreeMap::new(),
            puzzle_id: None,
            created_at: now,
            updated_at: now,
        };
        self.save_session(&session)?;
        Ok(ApiResponse::json(201, &self.session_view(&session)))
    }

    fn get_session(&self, id: &str) -> Result<ApiResponse, ApiError> {
        let session = self.load_session(id)?;
        Ok(ApiResponse::json(200, &self.session_view(&session)))
    }

    fn generate(&self, id: &str, req: GenerateRequest) -> Result<ApiResponse, ApiError> {
        let lock = self.session_lock(id);
        let _guard = lock.lock().unwrap();
        let mut session = self.load_session(id)?;
        if req.styles.is_empty() {
            return Err(ApiError::bad("NoStyles", "choose at least one clue style"));
        }
        if req.n == 0 || req.n > MAX_CLUES_PER_STYLE {
            return Err(ApiError::bad("ZeroClues", format!("n must be between 1 and {MAX_CLUES_PER_STYLE}")));
        }
        let mut styles = Vec::new();
        for s in &req.styles {
            let style: ClueStyle = s.parse().map_err(|e: crate::styles::StyleError| ApiError::bad(e.code(), e.to_string()))?;
            if !styles.contains(&style) {
                styles.push(style);
            }
        }
        let mut produced = Vec::new();
        let mut shortfall = BTreeMap::new();
        for style in styles {
            let batch = self.gateway.generate_clues(&session.article, &req.keyword, style, req.n, &self.cfg.generation)?;
            shortfall.insert(style, batch.shortfall);
            session.selected_styles.insert(style);
            for draft in &batch.drafts {
                let report = validate(&draft.clue, &draft.keyword, style, self.lex);
                let scores = score_pair(&draft.clue, &draft.context);
                let record = ClueRecord::from_draft(draft, report, Some(scores), self.clock.now());
                let clue_id = match self.store.append(record) {
                    Ok(cid) => cid,
                    Err(DatasetError::DuplicateRecord(existing)) => existing,
                    Err(e) => return Err(e.into()),
                };
                if !session.clue_ids.contains(&clue_id) {
                    session.clue_ids.push(clue_id.clone());
                    self.state.lock().unwrap().clue_sessions.entry(clue_id.clone()).or_default().push(session.id.clone());
                }
                if let Some(r) = self.store.get(&clue_id) {
                    produced.push(r);
                }
            }
        }
        session.updated_at = self.clock.now();
        self.save_session(&session)?;
        Ok(ApiResponse::json(200, &json!({ "session_id": session.id, "clues": produced, "shortfall": shortfall })))
    }

    fn get_clue(&self, id: &str) -> Result<ApiResponse, ApiError> {
        let record = self.store.get(id).ok_or_else(|| ApiError::not_found("clue", id))?;
        Ok(ApiResponse::json(200, &record))
    }

    fn owning_session(&self, clue_id: &str, requested: Option<&str>) -> Result<String, ApiError> {
        let st = self.state.lock().unwrap();
        let owners = st.clue_sessions.get(clue_id).cloned().unwrap_or_default();
        match requested {
            Some(s) if owners.iter().any(|o| o == s) => Ok(s.to_string()),
            Some(s) => Err(ApiError::not_found("session for this clue", s)),
            None => owners.last().cloned().ok_or_else(|| ApiError::not_found("clue", clue_id)),
        }
    }

    fn decide(&self, clue_id: &str, req: DecisionRequest) -> Result<ApiResponse, ApiError> {
        let mut record = self.store.get(clue_id).ok_or_else(|| ApiError::not_found("clue", clue_id))?;
        let session_id = self.owning_session(clue_id, req.session_id.as_deref())?;
        let lock = self.session_lock(&session_id);
        let _guard = lock.lock().unwrap();
        let mut session = self.load_session(&session_id)?;
        let decision = match req.decision.as_str() {
            "accept" => {
                if record.validation.answer_leak {
                    return Err(ApiError::bad("AnswerLeak", "the clue gives away its answer").with(json!({ "clue": record })));
                }
                if !record.validation.passed {
                    return Err(ApiError::bad("ValidationFailed", "the clue failed validation").with(json!({ "clue": record })));
                }
                Decision::Accepted
            }
            "reject" => Decision::Rejected,
            "edit" => {
                let text = req.text.as_deref().map(str::trim).unwrap_or("");
                if text.is_empty() {
                    return Err(ApiError::bad("EmptyClue", "edit needs a non-empty \"text\""));
                }
                record.clue = text.to_string();
                record.validation = validate(text, &record.keyword, record.style, self.lex);
                let scores = score_pair(text, &record.context);
                record.rouge1 = Some(scores.rouge1.f1);
                record.rouge2 = Some(scores.rouge2.f1);
                record.rouge_l = Some(scores.rouge_l.f1);
                record = self.store.update(record)?;
                if !record.validation.passed {
                    session.decisions.remove(clue_id);
                    session.updated_at = self.clock.now();
                    self.save_session(&session)?;
                    let code = if record.validation.answer_leak { "AnswerLeak" } else { "ValidationFailed" };
                    return Err(ApiError::bad(code, "the edited clue failed validation").with(json!({ "clue": record })));
                }
                Decision::Edited { text: text.to_string() }
            }
            other => return Err(ApiError::bad("InvalidDecision", format!("unknown decision {other:?}"))),
        };
        session.decisions.insert(clue_id.to_string(), decision.clone());
        session.updated_at = self.clock.now();
        self.save_session(&session)?;
        Ok(ApiResponse::json(200, &json!({ "session_id": session_id, "clue": record, "decision": decision })))
    }

    fn rate(&self, clue_id: &str, req: RatingRequest) -> Result<ApiResponse, ApiError> {
        let mut record = self.store.get(clue_id).ok_or_else(|| ApiError::not_found("clue", clue_id))?;
        let rating: Rating = req.rating.parse().map_err(|e: crate::validator::InvalidRating| ApiError::bad("InvalidRating", e.to_string()))?;
        record.rating = Some(rating);
        let record = self.store.update(record)?;
        Ok(ApiResponse::json(200, &json!({ "clue": record })))
    }

    fn build_puzzle(&self, id: &str, req: PuzzleRequest) -> Result<ApiResponse, ApiError> {
        let lock = self.session_lock(id);
        let _guard = lock.lock().unwrap();
        let mut session = self.load_session(id)?;
        let mut entries = Vec::new();
        for clue_id in &session.clue_ids {
            if !session.decisions.get(clue_id).is_some_and(Decision::selects) {
                continue;
            }
            let record = self.store.get(clue_id).ok_or_else(|| ApiError::not_found("clue", clue_id))?;
            entries.push(Entry::new(clue_id.clone(), &record.keyword, record.clue.clone())?);
        }
        if entries.is_empty() {
            return Err(ApiError::bad("EmptySelection", "no accepted clues in this session"));
        }
        let defaults = &self.cfg.grid;
        let grid_cfg = GridConfig {
            max_width: req.max_width.unwrap_or(defaults.max_width),
            max_height: req.max_height.unwrap_or(defaults.max_height),
            node_budget: defaults.node_budget,
            seed: req.seed.unwrap_or(defaults.seed),
        };
        let layout = grid::build(&entries, &grid_cfg)?;
        let doc = PuzzleDocument::from_layout(&layout, &entries)?;
        let puzzle_id = {
            let mut st = self.state.lock().unwrap();
            let pid = format!("puz-{:06}", st.next_puzzle);
            st.next_puzzle += 1;
            pid
        };
        let bytes = grid::render(&layout, &entries, RenderFormat::Json)?;
        write_atomic(&self.puzzles_dir.join(format!("{puzzle_id}.json")), &bytes).map_err(ApiError::internal)?;
        session.puzzle_id = Some(puzzle_id.clone());
        session.updated_at = self.clock.now();
        self.save_session(&session)?;
        Ok(ApiResponse::json(
            201,
            &json!({ "puzzle_id": puzzle_id, "session_id": id, "layout": doc, "unplaced": layout.unplaced }),
        ))
    }

    fn get_puzzle(&self, id: &str, query: &str) -> Result<ApiResponse, ApiError> {
        if !Self::valid_id(id, "puz-") {
            return Err(ApiError::not_found("puzzle", id));
        }
        let format = query
            .split('&')
            .find_map(|kv| kv.strip_prefix("format="))
            .unwrap_or("json");
        let format: RenderFormat = format.parse().map_err(|e: grid::GridError| ApiError::bad("InvalidFormat", e.to_string()))?;
        let bytes = std::fs::read(self.puzzles_dir.join(format!("{id}.json"))).map_err(|_| ApiError::not_found("puzzle", id))?;
        let doc = grid::parse_puzzle_json(&bytes)?;
        let (layout, entries) = doc.to_layout()?;
        let body = grid::render(&layout, &entries, format)?;
        let content_type = match format {
            RenderFormat::Text => "text/plain; charset=utf-8",
            RenderFormat::Json => "application/json",
            RenderFormat::PrintableHtml => "text/html; charset=utf-8",
        };
        Ok(ApiResponse { status: 200, content_type, body })
    }
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad("InvalidBody", e.to_string()))
}

fn parse_body_or_default<T: DeserializeOwned + Default>(body: &[u8]) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        Ok(T::default())
    } else {
        parse_body(body)
    }
}
