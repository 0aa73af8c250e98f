//! Chat-completions client used to generate clues.
//!
//! Requests follow the common `/chat/completions` JSON schema. Every call
//! writes an intent line to the transcript store before the request leaves and
//! a completion (or failure) line before returning, so the JSONL transcript
//! never holds a response without its request.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{Clock, SystemClock};
use crate::curation::{filter_keyword, CurationConfig};
use crate::http::{
    send_with_retry, HttpRequest, HttpTransport, ReqwestTransport, RetryError, RetryPolicy, Semaphore,
    Sleeper, ThreadSleeper, TransportError,
};
use crate::replay::{FixtureStore, RecordingTransport, ReplayTransport};
use crate::styles::{parse_clue_list, ClueStyle, StyleError, TemplateSet};
use crate::wiki::ArticleRecord;

pub const API_BASE_ENV: &str = "CRUCIVERBA_LLM_API_BASE";
pub const API_KEY_ENV: &str = "CRUCIVERBA_LLM_API_KEY";
pub const MODEL_ENV: &str = "CRUCIVERBA_LLM_MODEL";

/// Sampling configuration. Defaults are the inference settings used for the
/// fine-tuned clue generators: temperature 0.1, top-p 0.95, top-k 50.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationParams {
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: u32,
    pub max_tokens: u32,
    pub model_id: String,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            temperature: 0.1,
            top_p: 0.95,
            top_k: 50,
            max_tokens: 512,
            model_id: "gpt-4o".into(),
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), GatewayError> {
        let bad = |m: &str| Err(GatewayError::InvalidParams(m.to_string()));
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be a finite value >= 0");
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return bad("top_p must be in (0, 1]");
        }
        if self.top_k == 0 {
            return bad("top_k must be positive");
        }
        if self.max_tokens == 0 {
            return bad("max_tokens must be positive");
        }
        if self.model_id.trim().is_empty() {
            return bad("model_id is empty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GatewayMode {
    #[default]
    Live,
    /// Serve responses from `fixtures_dir`; no network, no credentials needed.
    Replay,
    /// Call the live endpoint and record every response into `fixtures_dir`.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    pub mode: GatewayMode,
    pub fixtures_dir: Option<PathBuf>,
    pub api_base: String,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    /// Whether the endpoint accepts a `top_k` field.
    pub supports_top_k: bool,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
    pub transcript_path: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            api_base: "https://api.openai.com/v1".into(),
            api_key: None,
            supports_top_k: false,
            timeout_secs: 60,
            max_in_flight: 2,
            transcript_path: None,
            mode: GatewayMode::Live,
            fixtures_dir: None,
        }
    }
}

impl GatewayConfig {
    /// Fills base, key and model from `CRUCIVERBA_LLM_*` environment variables.
    pub fn with_env(mut self, params: &mut GenerationParams) -> Self {
        if let Ok(base) = std::env::var(API_BASE_ENV) {
            if !base.trim().is_empty() {
                self.api_base = base;
            }
        }
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            if !key.trim().is_empty() {
                self.api_key = Some(key);
            }
        }
        if let Ok(model) = std::env::var(MODEL_ENV) {
            if !model.trim().is_empty() {
                params.model_id = model;
            }
        }
        self
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.api_base.trim_end_matches('/'))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("authentication failed{0}")]
    AuthFailure(String),
    #[error("rate limited after {retries} retries")]
    RateLimited { retries: u32 },
    #[error("request timed out")]
    Timeout,
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("server error {0} after retries")]
    ServerError(u16),
    #[error("endpoint answered HTTP {status}: {body}")]
    HttpStatus { status: u16, body: String },
    #[error("network failure: {0}")]
    Network(String),
    #[error("replay fixture missing: {0}")]
    ReplayMiss(String),
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("keyword {0:?} is not a valid crossword answer")]
    InvalidKeyword(String),
    #[error(transparent)]
    Style(#[from] StyleError),
    #[error("transcript store: {0}")]
    Io(String),
}

impl GatewayError {
    pub fn code(&self) -> &'static str {
        match self {
            GatewayError::EmptyPrompt => "EmptyPrompt",
            GatewayError::AuthFailure(_) => "AuthFailure",
            GatewayError::RateLimited { .. } => "RateLimited",
            GatewayError::Timeout => "Timeout",
            GatewayError::MalformedResponse(_) => "MalformedResponse",
            GatewayError::ServerError(_) => "ServerError",
            GatewayError::HttpStatus { .. } => "HttpStatus",
            GatewayError::Network(_) => "Network",
            GatewayError::ReplayMiss(_) => "ReplayMiss",
            GatewayError::InvalidParams(_) => "InvalidParams",
            GatewayError::InvalidKeyword(_) => "InvalidKeyword",
            GatewayError::Style(e) => e.code(),
            GatewayError::Io(_) => "IoError",
        }
    }

    /// Failures of the upstream endpoint, as opposed to bad input.
    pub fn is_upstream(&self) -> bool {
        matches!(
            self,
            GatewayError::AuthFailure(_)
                | GatewayError::RateLimited { .. }
                | GatewayError::Timeout
                | GatewayError::MalformedResponse(_)
                | GatewayError::ServerError(_)
                | GatewayError::HttpStatus { .. }
                | GatewayError::Network(_)
                | GatewayError::ReplayMiss(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationTranscript {
    pub request_id: String,
    pub prompt: String,
    pub raw_response: String,
    pub params: GenerationParams,
    pub latency_ms: u64,
    pub retries: u32,
    pub endpoint: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranscriptEntry {
    Intent {
        request_id: String,
        endpoint: String,
        prompt: String,
        params: GenerationParams,
        timestamp: DateTime<Utc>,
    },
    Completion(GenerationTranscript),
    Failure {
        request_id: String,
        error: String,
        code: String,
        timestamp: DateTime<Utc>,
    },
}

/// Append-only JSONL transcript log. Writers serialise on an internal lock;
/// each line is flushed and synced before the call returns.
pub struct TranscriptStore {
    inner: Mutex<StoreInner>,
}

struct StoreInner {
    file: Option<File>,
    entries: Vec<TranscriptEntry>,
    next_id: u64,
}

impl TranscriptStore {
    pub fn in_memory() -> Self {
        TranscriptStore {
            inner: Mutex::new(StoreInner {
                file: None,
                entries: Vec::new(),
                next_id: 1,
            }),
        }
    }

    pub fn open(path: &Path) -> std::io::Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let existing = std::fs::read_to_string(path).unwrap_or_default();
        let entries: Vec<TranscriptEntry> = existing
            .lines()
            .filter_map(|l| serde_json::from_str(l).ok())
            .collect();
        let next_id = entries
            .iter()
            .filter(|e| matches!(e, TranscriptEntry::Intent { .. }))
            .count() as u64
            + 1;
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(TranscriptStore {
            inner: Mutex::new(StoreInner {
                file: Some(file),
                entries,
                next_id,
            }),
        })
    }

    fn next_request_id(&self) -> String {
        let mut g = self.inner.lock().unwrap();
        let id = g.next_id;
        g.next_id += 1;
        format!("req-{id:06}")
    }

    pub fn append(&self, entry: TranscriptEntry) -> std::io::Result<()> {
        let mut g = self.inner.lock().unwrap();
        if let Some(f) = g.file.as_mut() {
            let mut line = serde_json::to_string(&entry)?;
            line.push('\n');
            f.write_all(line.as_bytes())?;
            f.sync_data()?;
        }
        g.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> Vec<TranscriptEntry> {
        self.inner.lock().unwrap().entries.clone()
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    top_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_k: Option<u32>,
    max_tokens: u32,
}

/// Extracts `choices[0].message.content` from a chat-completions response body.
pub fn parse_chat_response(body: &[u8]) -> Result<String, GatewayError> {
    let v: serde_json::Value =
        serde_json::from_slice(body).map_err(|e| GatewayError::MalformedResponse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| GatewayError::MalformedResponse("no choices[0].message.content".into()))
}

/// Builds the JSON body sent for `prompt`.
pub fn chat_request_body(prompt: &str, params: &GenerationParams, supports_top_k: bool) -> Vec<u8> {
    let req = ChatRequest {
        model: &params.model_id,
        messages: vec![ChatMessage {
            role: "user",
            content: prompt,
        }],
        temperature: params.temperature,
        top_p: params.top_p,
        top_k: supports_top_k.then_some(params.top_k),
        max_tokens: params.max_tokens,
    };
    serde_json::to_vec(&req).expect("request serialises")
}

pub struct Gateway {
    cfg: GatewayConfig,
    transport: Arc<dyn HttpTransport>,
    store: Arc<TranscriptStore>,
    retry: RetryPolicy,
    sleeper: Arc<dyn Sleeper>,
    clock: Arc<dyn Clock>,
    in_flight: Semaphore,
    templates: TemplateSet,
}

impl Gateway {
    /// Builds the transport implied by `cfg.mode`.
    pub fn from_config(cfg: GatewayConfig) -> Result<Self, GatewayError> {
        let fixtures = || {
            cfg.fixtures_dir
                .clone()
                .map(FixtureStore::new)
                .ok_or_else(|| GatewayError::InvalidParams("replay/record mode needs fixtures_dir".into()))
        };
        let transport: Arc<dyn HttpTransport> = match cfg.mode {
            GatewayMode::Replay => Arc::new(ReplayTransport::new(fixtures()?)),
            GatewayMode::Live => Arc::new(live_transport(&cfg)?),
            GatewayMode::Record => Arc::new(RecordingTransport::new(Arc::new(live_transport(&cfg)?), fixtures()?)),
        };
        let store = match &cfg.transcript_path {
            Some(p) => TranscriptStore::open(p).map_err(|e| GatewayError::Io(e.to_string()))?,
            None => TranscriptStore::in_memory(),
        };
        Ok(Self::with_transport(cfg, transport, Arc::new(store)))
    }

    pub fn with_transport(cfg: GatewayConfig, transport: Arc<dyn HttpTransport>, store: Arc<TranscriptStore>) -> Self {
        let in_flight = Semaphore::new(cfg.max_in_flight);
        Gateway {
            cfg,
            transport,
            store,
            retry: RetryPolicy::jittered(),
            sleeper: Arc::new(ThreadSleeper),
            clock: Arc::new(SystemClock),
            in_flight,
            templates: TemplateSet::builtin(),
        }
    }

    pub fn with_sleeper(mut self, sleeper: Arc<dyn Sleeper>) -> Self {
        self.sleeper = sleeper;
        self
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_templates(mut self, templates: TemplateSet) -> Self {
        self.templates = templates;
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn store(&self) -> &Arc<TranscriptStore> {
        &self.store
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.cfg
    }

    fn is_replay(&self) -> bool {
        self.cfg.mode == GatewayMode::Replay
    }

    fn record_failure(&self, request_id: &str, err: &GatewayError) {
        let entry = TranscriptEntry::Failure {
            request_id: request_id.to_string(),
            error: err.to_string(),
            code: err.code().to_string(),
            timestamp: self.clock.now(),
        };
        if let Err(e) = self.store.append(entry) {
            log::error!("could not persist failure for {request_id}: {e}");
        }
    }

    pub fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<GenerationTranscript, GatewayError> {
        if prompt.trim().is_empty() {
            return Err(GatewayError::EmptyPrompt);
        }
        params.validate()?;
        let api_key = self.cfg.api_key.as_deref().filter(|k| !k.trim().is_empty());
        if api_key.is_none() && !self.is_replay() {
            return Err(GatewayError::AuthFailure(format!(": no API key (set {API_KEY_ENV})")));
        }

        let endpoint = self.cfg.endpoint();
        let body = chat_request_body(prompt, params, self.cfg.supports_top_k);
        let mut request = HttpRequest::post_json(&endpoint, body);
        if let Some(key) = api_key {
            request = request.header("authorization", format!("Bearer {key}"));
        }

        let _permit = self.in_flight.acquire();
        let request_id = self.store.next_request_id();
        let started = self.clock.now();
        self.store
            .append(TranscriptEntry::Intent {
                request_id: request_id.clone(),
                endpoint: endpoint.clone(),
                prompt: prompt.to_string(),
                params: params.clone(),
                timestamp: started,
            })
            .map_err(|e| GatewayError::Io(e.to_string()))?;

        let outcome = self.exchange(&request);
        let (raw_response, retries) = match outcome {
            Ok(ok) => ok,
            Err(e) => {
                self.record_failure(&request_id, &e);
                return Err(e);
            }
        };
        let finished = self.clock.now();
        let transcript = GenerationTranscript {
            request_id,
            prompt: prompt.to_string(),
            raw_response,
            params: params.clone(),
            latency_ms: (finished - started).num_milliseconds().max(0) as u64,
            retries,
            endpoint,
            timestamp: finished,
        };
        self.store
            .append(TranscriptEntry::Completion(transcript.clone()))
            .map_err(|e| GatewayError::Io(e.to_string()))?;
        if retries > 0 {
            log::info!("{} succeeded after {} retries", transcript.request_id, retries);
        }
        Ok(transcript)
    }

    fn exchange(&self, request: &HttpRequest) -> Result<(String, u32), GatewayError> {
        let attempted = send_with_retry(self.transport.as_ref(), request, &self.retry, self.sleeper.as_ref())
            .map_err(|e| match e {
                RetryError::Exhausted(r) if r.status == 429 => GatewayError::RateLimited {
                    retries: self.retry.max_attempts - 1,
                },
                RetryError::Exhausted(r) => GatewayError::ServerError(r.status),
                RetryError::Transport(TransportError::Timeout) => GatewayError::Timeout,
                RetryError::Transport(TransportError::ReplayMiss(m)) => GatewayError::ReplayMiss(m),
                RetryError::Transport(TransportError::Network(m)) => GatewayError::Network(m),
            })?;
        let resp = attempted.response;
        match resp.status {
            401 | 403 => {
                return Err(GatewayError::AuthFailure(format!(" (HTTP {})", resp.status)));
            }
            s if !(200..300).contains(&s) => {
                let body: String = String::from_utf8_lossy(&resp.body).chars().take(200).collect();
                return Err(GatewayError::HttpStatus { status: s, body });
            }
            _ => {}
        }
        Ok((parse_chat_response(&resp.body)?, attempted.retries))
    }

    /// Renders the prompt for `style`, calls the endpoint and parses up to `n`
    /// clues. Fewer than `n` parsed clues is reported through `shortfall`.
    pub fn generate_clues(
        &self,
        article: &ArticleRecord,
        keyword: &str,
        style: ClueStyle,
        n: usize,
        params: &GenerationParams,
    ) -> Result<ClueBatch, GatewayError> {
        let keyword = keyword.trim();
        if !filter_keyword(keyword, &CurationConfig::default()) {
            return Err(GatewayError::InvalidKeyword(keyword.to_string()));
        }
        let prompt = self.templates.render(&article.intro_text, keyword, n, style)?;
        let transcript = self.generate(&prompt, params)?;
        let clues = parse_clue_list(&transcript.raw_response, n)?;
        let shortfall = n - clues.len();
        if shortfall > 0 {
            log::warn!(
                "{}: asked for {n} {style} clues for {keyword:?}, parsed {}",
                transcript.request_id,
                clues.len()
            );
        }
        let drafts = clues
            .into_iter()
            .map(|clue| ClueDraft {
                title: article.title.clone(),
                url: article.url.clone(),
                category: article.categories.first().cloned().unwrap_or_default(),
                context: article.intro_text.clone(),
                keyword: keyword.to_string(),
                style,
                clue,
                model_id: params.model_id.clone(),
                request_id: transcript.request_id.clone(),
            })
            .collect();
        Ok(ClueBatch {
            drafts,
            shortfall,
            transcript,
        })
    }
}

fn live_transport(cfg: &GatewayConfig) -> Result<ReqwestTransport, GatewayError> {
    ReqwestTransport::new(
        concat!("cruciverba/", env!("CARGO_PKG_VERSION")),
        Duration::from_secs(cfg.timeout_secs),
    )
    .map_err(|e| GatewayError::Network(e.to_string()))
}

/// An unvalidated, unrated generated clue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClueDraft {
    pub title: String,
    pub url: String,
    pub category: String,
    pub context: String,
    pub keyword: String,
    pub style: ClueStyle,
    pub clue: String,
    pub model_id: String,
    pub request_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClueBatch {
    pub drafts: Vec<ClueDraft>,
    pub shortfall: usize,
    pub transcript: GenerationTranscript,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FixedClock;
    use crate::http::testing::ScriptedTransport;
    use crate::http::{HttpResponse, NoSleep};

    fn chat(content: &str) -> HttpResponse {
        HttpResponse::new(
            200,
            serde_json::json!({"choices":[{"message":{"role":"assistant","content":content}}]}).to_string(),
        )
    }

    fn gateway(script: Vec<Result<HttpResponse, TransportError>>) -> (Gateway, Arc<ScriptedTransport>) {
        let t = Arc::new(ScriptedTransport::new(script));
        let cfg = GatewayConfig {
            api_base: "http://llm.test/v1".into(),
            api_key: Some("k".into()),
            ..GatewayConfig::default()
        };
        let g = Gateway::with_transport(cfg, t.clone(), Arc::new(TranscriptStore::in_memory()))
            .with_sleeper(Arc::new(NoSleep::default()))
            .with_clock(Arc::new(FixedClock::epoch()));
        (g, t)
    }

    fn article() -> ArticleRecord {
        ArticleRecord {
            title: "Uzbekistan".into(),
            intro_text: "L'Uzbekistan è uno stato dell'Asia centrale con capitale Tashkent.".into(),
            bold_keywords: vec!["Uzbekistan".into()],
            ..ArticleRecord::default()
        }
    }

    #[test]
    fn default_params_match_inference_setup() {
        let p = GenerationParams::default();
        assert_eq!((p.temperature, p.top_p, p.top_k, p.max_tokens), (0.1, 0.95, 50, 512));
        assert!(p.validate().is_ok());
        assert!(GenerationParams { top_p: 0.0, ..p.clone() }.validate().is_err());
        assert!(GenerationParams { temperature: -1.0, ..p }.validate().is_err());
    }

    #[test]
    fn auth_failure_is_terminal() {
        let (g, t) = gateway(vec![Ok(HttpResponse::new(401, "nope")), Ok(chat("1. x"))]);
        let err = g.generate("ciao", &GenerationParams::default()).unwrap_err();
        assert!(matches!(err, GatewayError::AuthFailure(_)));
        assert_eq!(t.calls(), 1);
        assert!(matches!(g.store().entries().last(), Some(TranscriptEntry::Failure { .. })));
    }

    #[test]
    fn missing_key_fails_before_network() {
        let t = Arc::new(ScriptedTransport::new(vec![]));
        let g = Gateway::with_transport(GatewayConfig::default(), t.clone(), Arc::new(TranscriptStore::in_memory()));
        assert!(matches!(g.generate("ciao", &GenerationParams::default()), Err(GatewayError::AuthFailure(_))));
        assert_eq!(t.calls(), 0);
    }

    #[test]
    fn retries_logged_in_transcript() {
        let (g, _) = gateway(vec![Ok(HttpResponse::new(429, "")), Ok(HttpResponse::new(429, "")), Ok(chat("ok"))]);
        let tr = g.generate("ciao", &GenerationParams::default()).unwrap();
        assert_eq!(tr.retries, 2);
        assert_eq!(tr.raw_response, "ok");
    }

    #[test]
    fn rate_limit_exhausted() {
        let (g, _) = gateway(vec![
            Ok(HttpResponse::new(429, "")),
            Ok(HttpResponse::new(429, "")),
            Ok(HttpResponse::new(429, "")),
        ]);
        assert_eq!(
            g.generate("ciao", &GenerationParams::default()),
            Err(GatewayError::RateLimited { retries: 2 })
        );
    }

    #[test]
    fn malformed_and_timeout() {
        let (g, _) = gateway(vec![Ok(HttpResponse::new(200, "{\"choices\":[]}"))]);
        assert!(matches!(g.generate("p", &GenerationParams::default()), Err(GatewayError::MalformedResponse(_))));
        let (g, _) = gateway(vec![
            Err(TransportError::Timeout),
            Err(TransportError::Timeout),
            Err(TransportError::Timeout),
        ]);
        assert_eq!(g.generate("p", &GenerationParams::default()), Err(GatewayError::Timeout));
    }

    #[test]
    fn intent_precedes_completion() {
        let (g, _) = gateway(vec![Ok(chat("ok"))]);
        g.generate("ciao", &GenerationParams::default()).unwrap();
        let e = g.store().entries();
        assert!(matches!(&e[0], TranscriptEntry::Intent { request_id, .. } if request_id == "req-000001"));
        assert!(matches!(&e[1], TranscriptEntry::Completion(t) if t.request_id == "req-000001"));
    }

    #[test]
    fn request_body_shape() {
        let p = GenerationParams::default();
        let v: serde_json::Value = serde_json::from_slice(&chat_request_body("hi", &p, false)).unwrap();
        assert_eq!(v["messages"][0]["content"], "hi");
        assert_eq!(v["temperature"], 0.1);
        assert!(v.get("top_k").is_none());
        let v: serde_json::Value = serde_json::from_slice(&chat_request_body("hi", &p, true)).unwrap();
        assert_eq!(v["top_k"], 50);
    }

    #[test]
    fn clue_generation_and_shortfall() {
        let (g, _) = gateway(vec![Ok(chat("1. La repubblica con capitale Tashkent\n2. Stato dell'Asia centrale"))]);
        let batch = g
            .generate_clues(&article(), "Uzbekistan", ClueStyle::DefiniteDeterminerPhrase, 3, &GenerationParams::default())
            .unwrap();
        assert_eq!(batch.drafts.len(), 2);
        assert_eq!(batch.shortfall, 1);
        assert!(batch.drafts.iter().all(|d| d.style == ClueStyle::DefiniteDeterminerPhrase));
    }

    #[test]
    fn empty_context_rejected_before_network() {
        let (g, t) = gateway(vec![]);
        let mut a = article();
        a.intro_text.clear();
        let err = g
            .generate_clues(&a, "Uzbekistan", ClueStyle::Unrestricted, 3, &GenerationParams::default())
            .unwrap_err();
        assert_eq!(err, GatewayError::Style(StyleError::EmptyContext));
        assert_eq!(t.calls(), 0);
    }

    #[test]
    fn transcript_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let store = TranscriptStore::open(&path).unwrap();
        store
            .append(TranscriptEntry::Failure {
                request_id: "req-000001".into(),
                error: "x".into(),
                code: "Timeout".into(),
                timestamp: FixedClock::epoch().0,
            })
            .unwrap();
        drop(store);
        let reopened = TranscriptStore::open(&path).unwrap();
        assert_eq!(reopened.entries().len(), 1);
    }
}
