//! Italian Wikipedia ingestion: fetch rendered article HTML through the
//! MediaWiki Action API, pull out the lead section and its bold terms, and
//! collect the page metadata the curation step ranks on.
//!
//! Every HTTP response is cached on disk (one file per request, addressed by
//! SHA-256 of kind and key), so a warm cache replays offline with no network.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, LazyLock, Mutex};

use chrono::{DateTime, Utc};
use regex::Regex;
use reqwest::Url;
use scraper::{ElementRef, Html, Node};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::clock::{Clock, SystemClock};
use crate::fsutil::write_atomic;
use crate::http::{
    send_with_retry, HttpRequest, HttpTransport, RetryError, RetryPolicy, Sleeper, ThreadSleeper,
    TransportError,
};
use crate::text::normalize_whitespace;

pub const DEFAULT_API_BASE: &str = "https://it.wikipedia.org/w/api.php";
pub const DEFAULT_ARTICLE_BASE: &str = "https://it.wikipedia.org/wiki/";
pub const DEFAULT_PAGEVIEWS_BASE: &str =
    "https://wikimedia.org/api/rest_v1/metrics/pageviews/per-article/it.wikipedia/all-access/user";
pub const API_BASE_ENV: &str = "CRUCIVERBA_WIKI_API";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawArticle {
    pub title: String,
    pub html: String,
    pub fetched_at: DateTime<Utc>,
    pub source_url: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArticleRecord {
    pub title: String,
    pub intro_text: String,
    pub bold_keywords: Vec<String>,
    pub view_count: u64,
    /// False when the pageviews service could not be reached and `view_count` is a placeholder 0.
    pub view_count_available: bool,
    pub summary: String,
    pub categories: Vec<String>,
    pub url: String,
    /// Free-form pass-through; never computed.
    pub relevance: Option<String>,
    pub headlines: Vec<String>,
    pub related_terms: Vec<String>,
}

#[derive(Debug, Error)]
pub enum WikiError {
    #[error("article not found: {0:?}")]
    NotFound(String),
    #[error("network failure: {0}")]
    Network(String),
    #[error("rate limited: retry budget exhausted")]
    RateLimited,
    #[error("could not parse article HTML: {0}")]
    ParseFailure(String),
    #[error("cache I/O: {0}")]
    Cache(#[from] std::io::Error),
}

impl WikiError {
    pub fn code(&self) -> &'static str {
        match self {
            WikiError::NotFound(_) => "NotFound",
            WikiError::Network(_) => "Network",
            WikiError::RateLimited => "RateLimited",
            WikiError::ParseFailure(_) => "ParseFailure",
            WikiError::Cache(_) => "CacheError",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WikiConfig {
    pub api_base: String,
    pub article_base: String,
    pub pageviews_base: String,
    /// Inclusive month range summed for `view_count`, as `YYYYMMDD`.
    pub pageviews_start: String,
    pub pageviews_end: String,
    pub user_agent: String,
    pub max_in_flight: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for WikiConfig {
    fn default() -> Self {
        WikiConfig {
            api_base: DEFAULT_API_BASE.into(),
            article_base: DEFAULT_ARTICLE_BASE.into(),
            pageviews_base: DEFAULT_PAGEVIEWS_BASE.into(),
            pageviews_start: "20240101".into(),
            pageviews_end: "20241231".into(),
            user_agent: concat!(
                "cruciverba/",
                env!("CARGO_PKG_VERSION"),
                " (educational crossword generator)"
            )
            .into(),
            max_in_flight: 4,
            cache_dir: None,
        }
    }
}

impl WikiConfig {
    /// Applies the `CRUCIVERBA_WIKI_API` override when set.
    pub fn with_env(mut self) -> Self {
        if let Ok(base) = std::env::var(API_BASE_ENV) {
            if !base.trim().is_empty() {
                self.api_base = base;
            }
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub kind: String,
    pub key: String,
    pub source_url: String,
    pub fetched_at: DateTime<Utc>,
    pub status: u16,
    pub body: String,
}

/// Content-addressed response cache: `<dir>/<hh>/<sha256>.json`.
#[derive(Debug, Clone)]
pub struct ArticleCache {
    dir: PathBuf,
}

impl ArticleCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ArticleCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, kind: &str, key: &str) -> PathBuf {
        let mut h = Sha256::new();
        h.update(kind.as_bytes());
        h.update([0]);
        h.update(key.as_bytes());
        let digest = hex::encode(h.finalize());
        self.dir.join(&digest[..2]).join(format!("{digest}.json"))
    }

    pub fn get(&self, kind: &str, key: &str) -> Option<CacheEntry> {
        let bytes = std::fs::read(self.path_for(kind, key)).ok()?;
        let entry: CacheEntry = serde_json::from_slice(&bytes).ok()?;
        (entry.kind == kind && entry.key == key).then_some(entry)
    }

    pub fn put(&self, entry: &CacheEntry) -> std::io::Result<()> {
        let bytes = serde_json::to_vec_pretty(entry)?;
        write_atomic(&self.path_for(&entry.kind, &entry.key), &bytes)
    }
}

static CITATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\[\s*(?:\d+|[a-zA-Z]|nota\s*\d+|N\s*\d+|senza fonte|citazione necessaria)\s*\]")
        .unwrap()
});

/// Lead-section content: the paragraphs before the first heading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntroParts {
    pub text: String,
    pub bold: Vec<String>,
    pub headlines: Vec<String>,
}

fn is_heading(name: &str) -> bool {
    matches!(name, "h1" | "h2" | "h3" | "h4" | "h5" | "h6")
}

fn has_class(el: &ElementRef<'_>, class: &str) -> bool {
    el.value().classes().any(|c| c == class)
}

/// Elements whose content never belongs to the running text.
fn is_skipped(el: &ElementRef<'_>) -> bool {
    let name = el.value().name();
    matches!(
        name,
        "table" | "figure" | "style" | "script" | "noscript" | "aside" | "link" | "meta"
    ) || (name == "sup" && (has_class(el, "reference") || has_class(el, "noprint")))
        || has_class(el, "mw-editsection")
        || has_class(el, "infobox")
        || has_class(el, "navbox")
        || has_class(el, "hatnote")
        || has_class(el, "noprint")
        || has_class(el, "mw-empty-elt")
        || has_class(el, "reference")
}

fn is_heading_block(el: &ElementRef<'_>) -> bool {
    is_heading(el.value().name()) || has_class(el, "mw-heading")
}

/// Appends cleaned text of `el`; bold descendants are reported through `bold`.
fn collect_text(el: ElementRef<'_>, out: &mut String, bold: &mut Vec<String>) {
    for child in el.children() {
        match child.value() {
            Node::Text(t) => {
                out.push_str(&CITATION.replace_all(t, ""));
            }
            Node::Element(_) => {
                let Some(child_el) = ElementRef::wrap(child) else { continue };
                if is_skipped(&child_el) {
                    continue;
                }
                let name = child_el.value().name();
                if name == "br" {
                    out.push(' ');
                } else if name == "b" || name == "strong" {
                    let mut inner = String::new();
                    let mut nested = Vec::new();
                    collect_text(child_el, &mut inner, &mut nested);
                    bold.push(normalize_whitespace(&inner));
                    out.push_str(&inner);
                } else {
                    collect_text(child_el, out, bold);
                }
            }
            _ => {}
        }
    }
}

/// Returns true once a heading is reached.
fn walk_lead(node: ElementRef<'_>, paragraphs: &mut Vec<String>, bold: &mut Vec<String>) -> bool {
    for child in node.children() {
        let Some(el) = ElementRef::wrap(child) else { continue };
        if is_heading_block(&el) {
            return true;
        }
        if is_skipped(&el) {
            continue;
        }
        if el.value().name() == "p" {
            let mut text = String::new();
            collect_text(el, &mut text, bold);
            let text = normalize_whitespace(&text);
            if !text.is_empty() {
                paragraphs.push(text);
            }
        } else if walk_lead(el, paragraphs, bold) {
            return true;
        }
    }
    false
}

/// Parses article HTML and returns its lead section.
pub fn parse_intro(html: &str) -> Result<IntroParts, WikiError> {
    if html.trim().is_empty() {
        return Err(WikiError::ParseFailure("empty document".into()));
    }
    if html.contains('\0') {
        return Err(WikiError::ParseFailure("NUL byte in document".into()));
    }
    let doc = Html::parse_document(html);
    let output_sel = scraper::Selector::parse(".mw-parser-output").unwrap();
    let root = doc
        .select(&output_sel)
        .next()
        .unwrap_or_else(|| doc.root_element());

    let mut paragraphs = Vec::new();
    let mut bold_raw = Vec::new();
    walk_lead(root, &mut paragraphs, &mut bold_raw);

    let mut bold: Vec<String> = Vec::new();
    for b in bold_raw {
        if !b.is_empty() && !bold.contains(&b) {
            bold.push(b);
        }
    }

    let h2 = scraper::Selector::parse("h2").unwrap();
    let headlines = root
        .select(&h2)
        .map(|h| {
            let mut t = String::new();
            collect_text(h, &mut t, &mut Vec::new());
            normalize_whitespace(&t)
        })
        .filter(|t| !t.is_empty())
        .collect();

    Ok(IntroParts {
        text: paragraphs.join(" "),
        bold,
        headlines,
    })
}

pub fn extract_intro(raw: &RawArticle) -> Result<String, WikiError> {
    parse_intro(&raw.html).map(|p| p.text)
}

pub fn extract_bold_keywords(raw: &RawArticle) -> Result<Vec<String>, WikiError> {
    parse_intro(&raw.html).map(|p| p.bold)
}

fn first_sentence(text: &str) -> String {
    let bytes = text.as_bytes();
    for (i, c) in text.char_indices() {
        if c == '.' && (i + 1 == text.len() || bytes[i + 1] == b' ') {
            return text[..=i].to_string();
        }
    }
    text.to_string()
}

pub struct WikiClient {
    cfg: WikiConfig,
    transport: Arc<dyn HttpTransport>,
    cache: Option<ArticleCache>,
    retry: RetryPolicy,
    sleeper: Arc<dyn Sleeper>,
    clock: Arc<dyn Clock>,
}

impl WikiClient {
    pub fn new(cfg: WikiConfig, transport: Arc<dyn HttpTransport>) -> Self {
        let cache = cfg.cache_dir.clone().map(ArticleCache::new);
        WikiClient {
            cfg,
            transport,
            cache,
            retry: RetryPolicy::default(),
            sleeper: Arc::new(ThreadSleeper),
            clock: Arc::new(SystemClock),
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

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn config(&self) -> &WikiConfig {
        &self.cfg
    }

    fn parse_url(&self, title: &str) -> Result<Url, WikiError> {
        Url::parse_with_params(
            &self.cfg.api_base,
            &[
                ("action", "parse"),
                ("page", title),
                ("prop", "text"),
                ("redirects", "1"),
                ("format", "json"),
                ("formatversion", "2"),
            ],
        )
        .map_err(|e| WikiError::Network(format!("bad API base: {e}")))
    }

    /// GET through cache and retry policy. Only successful bodies are cached.
    fn cached_get(&self, kind: &str, key: &str, url: &str) -> Result<CacheEntry, WikiError> {
        if let Some(entry) = self.cache.as_ref().and_then(|c| c.get(kind, key)) {
            return Ok(entry);
        }
        let req = HttpRequest::get(url).header("accept", "application/json");
        let resp = match send_with_retry(self.transport.as_ref(), &req, &self.retry, self.sleeper.as_ref()) {
            Ok(a) => a.response,
            Err(RetryError::Exhausted(r)) if r.status == 429 => return Err(WikiError::RateLimited),
            Err(RetryError::Exhausted(r)) => {
                return Err(WikiError::Network(format!("HTTP {} after retries", r.status)))
            }
            Err(RetryError::Transport(TransportError::Timeout)) => {
                return Err(WikiError::Network("timeout".into()))
            }
            Err(RetryError::Transport(e)) => return Err(WikiError::Network(e.to_string())),
        };
        if resp.status == 404 {
            return Err(WikiError::NotFound(key.to_string()));
        }
        if !resp.is_success() {
            return Err(WikiError::Network(format!("HTTP {}", resp.status)));
        }
        let entry = CacheEntry {
            kind: kind.to_string(),
            key: key.to_string(),
            source_url: url.to_string(),
            fetched_at: self.clock.now(),
            status: resp.status,
            body: String::from_utf8(resp.body)
                .map_err(|_| WikiError::ParseFailure("response is not UTF-8".into()))?,
        };
        if let Some(cache) = &self.cache {
            cache.put(&entry)?;
        }
        Ok(entry)
    }

    pub fn fetch_article(&self, title: &str) -> Result<RawArticle, WikiError> {
        let title = title.trim();
        if title.is_empty() {
            return Err(WikiError::NotFound("invalid-title: empty".into()));
        }
        let url = self.parse_url(title)?;
        let entry = self.cached_get("parse", title, url.as_str())?;
        let json: serde_json::Value = serde_json::from_str(&entry.body)
            .map_err(|e| WikiError::ParseFailure(format!("API response: {e}")))?;
        if let Some(code) = json.pointer("/error/code").and_then(|c| c.as_str()) {
            return match code {
                "missingtitle" | "invalidtitle" | "missing" => Err(WikiError::NotFound(title.to_string())),
                other => Err(WikiError::Network(format!("API error {other}"))),
            };
        }
        let html = json
            .pointer("/parse/text")
            .and_then(|t| t.as_str().or_else(|| t.get("*").and_then(|s| s.as_str())))
            .ok_or_else(|| WikiError::ParseFailure("missing parse.text".into()))?;
        if html.trim().is_empty() {
            return Err(WikiError::ParseFailure("empty page HTML".into()));
        }
        let resolved = json
            .pointer("/parse/title")
            .and_then(|t| t.as_str())
            .unwrap_or(title);
        Ok(RawArticle {
            title: resolved.to_string(),
            html: html.to_string(),
            fetched_at: entry.fetched_at,
            source_url: entry.source_url,
        })
    }

    /// Fetches several titles with at most `max_in_flight` concurrent requests.
    /// Results keep the input order.
    pub fn fetch_many(&self, titles: &[String]) -> Vec<Result<RawArticle, WikiError>> {
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Result<RawArticle, WikiError>>>> =
            Mutex::new((0..titles.len()).map(|_| None).collect());
        let workers = self.cfg.max_in_flight.clamp(1, titles.len().max(1));
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= titles.len() {
                        break;
                    }
                    let r = self.fetch_article(&titles[i]);
                    results.lock().unwrap()[i] = Some(r);
                });
            }
        });
        results
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|r| r.expect("every index visited"))
            .collect()
    }

    fn page_url(&self, title: &str) -> String {
        format!("{}{}", self.cfg.article_base, title.replace(' ', "_"))
    }

    fn fetch_pageviews(&self, title: &str) -> Option<u64> {
        let mut url = Url::parse(&self.cfg.pageviews_base).ok()?;
        url.path_segments_mut()
            .ok()?
            .push(&title.replace(' ', "_"))
            .push("monthly")
            .push(&self.cfg.pageviews_start)
            .push(&self.cfg.pageviews_end);
        let entry = match self.cached_get("pageviews", title, url.as_str()) {
            Ok(e) => e,
            Err(e) => {
                log::warn!("pageviews unavailable for {title:?}: {e}");
                return None;
            }
        };
        let json: serde_json::Value = serde_json::from_str(&entry.body).ok()?;
        let items = json.get("items")?.as_array()?;
        Some(items.iter().filter_map(|i| i.get("views")?.as_u64()).sum())
    }

    fn fetch_page_info(&self, title: &str) -> (Vec<String>, Option<String>) {
        let Ok(url) = Url::parse_with_params(
            &self.cfg.api_base,
            &[
                ("action", "query"),
                ("prop", "categories|extracts"),
                ("titles", title),
                ("clshow", "!hidden"),
                ("cllimit", "max"),
                ("exintro", "1"),
                ("explaintext", "1"),
                ("exsentences", "2"),
                ("format", "json"),
                ("formatversion", "2"),
            ],
        ) else {
            return (Vec::new(), None);
        };
        let entry = match self.cached_get("query", title, url.as_str()) {
            Ok(e) => e,
            Err(e) => {
                log::warn!("page info unavailable for {title:?}: {e}");
                return (Vec::new(), None);
            }
        };
        let Ok(json) = serde_json::from_str::<serde_json::Value>(&entry.body) else {
            return (Vec::new(), None);
        };
        let page = json.pointer("/query/pages/0");
        let categories = page
            .and_then(|p| p.get("categories"))
            .and_then(|c| c.as_array())
            .map(|cats| {
                cats.iter()
                    .filter_map(|c| c.get("title")?.as_str())
                    .map(|t| t.split_once(':').map_or(t, |(_, name)| name).to_string())
                    .collect()
            })
            .unwrap_or_default();
        let summary = page
            .and_then(|p| p.get("extract"))
            .and_then(|e| e.as_str())
            .map(normalize_whitespace)
            .filter(|s| !s.is_empty());
        (categories, summary)
    }

    /// Assembles the full record. Metadata failures degrade to defaults:
    /// `view_count = 0` with `view_count_available = false`, empty categories,
    /// and a summary taken from the first sentence of the intro.
    pub fn extract_metadata(&self, raw: &RawArticle) -> Result<ArticleRecord, WikiError> {
        let intro = parse_intro(&raw.html)?;
        let views = self.fetch_pageviews(&raw.title);
        let (categories, summary) = self.fetch_page_info(&raw.title);
        Ok(ArticleRecord {
            title: raw.title.clone(),
            summary: summary.unwrap_or_else(|| first_sentence(&intro.text)),
            intro_text: intro.text,
            bold_keywords: intro.bold,
            view_count: views.unwrap_or(0),
            view_count_available: views.is_some(),
            categories,
            url: self.page_url(&raw.title),
            relevance: None,
            headlines: intro.headlines,
            related_terms: Vec::new(),
        })
    }

    pub fn ingest(&self, title: &str) -> Result<ArticleRecord, WikiError> {
        let raw = self.fetch_article(title)?;
        self.extract_metadata(&raw)
    }
}
