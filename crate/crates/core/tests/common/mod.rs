#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use cruciverba::clock::FixedClock;
use cruciverba::gateway::{Gateway, GatewayConfig, GatewayMode, GenerationParams, TranscriptStore};
use cruciverba::http::{HttpRequest, HttpResponse, HttpTransport, Method, TransportError};
use cruciverba::replay::{FixtureStore, RecordingTransport};
use cruciverba::styles::{style_descriptor, ClueStyle};
use cruciverba::wiki::{WikiClient, WikiConfig};
use serde::Deserialize;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn sources() -> PathBuf {
    fixtures().join("sources")
}

pub fn replay_dir() -> PathBuf {
    fixtures().join("replay")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn blessing() -> bool {
    std::env::var_os("CRUCIVERBA_BLESS").is_some()
}

/// Compares `actual` with a checked-in golden file, or rewrites it when
/// `CRUCIVERBA_BLESS` is set.
pub fn assert_golden(name: &str, actual: &[u8]) {
    let path = golden_dir().join(name);
    if blessing() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        expected == actual,
        "{name} differs from golden file\n--- expected\n{}\n--- actual\n{}",
        String::from_utf8_lossy(&expected),
        String::from_utf8_lossy(actual)
    );
}

#[derive(Debug, Clone, Deserialize)]
pub struct Script {
    pub style: ClueStyle,
    pub n: usize,
    pub response: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LlmScripts {
    pub keyword: String,
    pub scripts: Vec<Script>,
}

pub fn llm_scripts() -> LlmScripts {
    serde_json::from_slice(&std::fs::read(sources().join("llm_scripts.json")).unwrap()).unwrap()
}

pub fn context_text() -> String {
    std::fs::read_to_string(sources().join("context.txt")).unwrap().trim_end().to_string()
}

fn chat_body(content: &str) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "id": "chatcmpl-fixture",
        "object": "chat.completion",
        "model": "gpt-4o",
        "choices": [{
            "index": 0,
            "message": { "role": "assistant", "content": content },
            "finish_reason": "stop"
        }]
    }))
    .unwrap()
}

/// Answers requests from the readable files under `sources/`.
pub struct SourceTransport {
    scripts: LlmScripts,
}

impl SourceTransport {
    pub fn new() -> Self {
        SourceTransport { scripts: llm_scripts() }
    }

    fn file(name: &str) -> HttpResponse {
        HttpResponse::new(200, std::fs::read(sources().join(name)).unwrap())
    }
}

impl HttpTransport for SourceTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        match request.method {
            Method::Get if request.url.contains("action=parse") => Ok(Self::file("uzbekistan_parse.json")),
            Method::Get if request.url.contains("action=query") => Ok(Self::file("uzbekistan_query.json")),
            Method::Get if request.url.contains("/monthly/") => Ok(Self::file("uzbekistan_pageviews.json")),
            Method::Post => {
                let body: serde_json::Value = serde_json::from_slice(request.body.as_deref().unwrap()).unwrap();
                let prompt = body["messages"][0]["content"].as_str().unwrap();
                let script = self
                    .scripts
                    .scripts
                    .iter()
                    .find(|s| prompt.contains(style_descriptor(s.style)) && prompt.contains(&format!("Scrivi {} ", s.n)))
                    .expect("a script matches the prompt");
                Ok(HttpResponse::new(200, chat_body(&script.response)))
            }
            _ => Ok(HttpResponse::new(404, "{}")),
        }
    }
}

/// Records every request the pipeline makes for the fixture scenario into `dir`.
pub fn record_fixtures(dir: &Path) {
    let recorder: Arc<dyn HttpTransport> =
        Arc::new(RecordingTransport::new(Arc::new(SourceTransport::new()), FixtureStore::new(dir)));
    let clock = Arc::new(FixedClock::epoch());
    let wiki = WikiClient::new(WikiConfig::default(), recorder.clone()).with_clock(clock.clone());
    let article = wiki.ingest("Uzbekistan").unwrap();
    assert_eq!(article.intro_text, context_text());
    let cfg = GatewayConfig { mode: GatewayMode::Replay, ..Default::default() };
    let gateway = Gateway::with_transport(cfg, recorder, Arc::new(TranscriptStore::in_memory())).with_clock(clock);
    let scripts = llm_scripts();
    for s in &scripts.scripts {
        gateway
            .generate_clues(&article, &scripts.keyword, s.style, s.n, &GenerationParams::default())
            .unwrap();
    }
}

/// Replay-mode app config rooted at `data_dir`.
pub fn replay_config(data_dir: &Path) -> cruciverba::config::AppConfig {
    let mut cfg = cruciverba::config::AppConfig::default();
    cfg.llm.mode = GatewayMode::Replay;
    cfg.llm.fixtures_dir = Some(replay_dir());
    cfg.store.data_dir = data_dir.to_path_buf();
    cfg
}

pub struct E2eOutputs {
    /// Every API exchange as `METHOD target -> status` followed by the body.
    pub api_log: String,
    pub puzzle_text: Vec<u8>,
    pub puzzle_json: Vec<u8>,
    pub puzzle_html: Vec<u8>,
    pub clues_jsonl: Vec<u8>,
}

/// Pasted text, three styles, accept two clues, reject one, build and render.
pub fn run_e2e(data_dir: &Path) -> E2eOutputs {
    use cruciverba::dataset::ExportFilter;
    use cruciverba::service::Service;

    let svc = Service::from_config(replay_config(data_dir)).unwrap();
    let mut log = String::new();
    let mut call = |method: &str, target: &str, body: serde_json::Value| {
        let body = if body.is_null() { Vec::new() } else { body.to_string().into_bytes() };
        let resp = svc.handle(method, target, &body);
        log.push_str(&format!("{method} {target} -> {}\n", resp.status));
        log.push_str(&String::from_utf8_lossy(&resp.body));
        resp
    };
    let scripts = llm_scripts();
    let r = call("POST", "/v1/sessions", serde_json::json!({ "text": context_text() }));
    assert_eq!(r.status, 201);
    let r = call(
        "POST",
        "/v1/sessions/sess-000001/clues",
        serde_json::json!({
            "keyword": scripts.keyword,
            "styles": ["bare_noun_phrase", "definite_determiner_phrase", "copular_sentence"],
            "n": 1
        }),
    );
    assert_eq!(r.status, 200, "{}", String::from_utf8_lossy(&r.body));
    for (id, d) in [("clue-000001", "accept"), ("clue-000002", "accept"), ("clue-000003", "reject")] {
        let r = call("POST", &format!("/v1/clues/{id}/decision"), serde_json::json!({ "decision": d }));
        assert_eq!(r.status, 200);
    }
    let r = call("POST", "/v1/sessions/sess-000001/puzzle", serde_json::Value::Null);
    assert_eq!(r.status, 201);
    let get = |fmt: &str| {
        let r = svc.handle("GET", &format!("/v1/puzzles/puz-000001?format={fmt}"), b"");
        assert_eq!(r.status, 200);
        r.body
    };
    let puzzle_text = get("text");
    let puzzle_json = get("json");
    let puzzle_html = get("html");
    let export = data_dir.join("export.jsonl");
    svc.store().export_jsonl(&ExportFilter::default(), &export).unwrap();
    E2eOutputs {
        api_log: log,
        puzzle_text,
        puzzle_json,
        puzzle_html,
        clues_jsonl: std::fs::read(export).unwrap(),
    }
}
