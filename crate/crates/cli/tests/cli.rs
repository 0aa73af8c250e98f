use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cruciverba"))
        .args(args)
        .env_remove("CRUCIVERBA_LLM_API_KEY")
        .env_remove("CRUCIVERBA_LLM_API_BASE")
        .env_remove("CRUCIVERBA_WIKI_API")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = cli(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(data: &Path) -> String {
    let replay = fixtures().join("replay");
    let context = fixtures().join("sources/context.txt");
    ok(&[
        "gen",
        "--replay",
        s(&replay),
        "--data-dir",
        s(data),
        "--text-file",
        s(&context),
        "--keyword",
        "Uzbekistan",
        "--style",
        "bare_noun_phrase",
        "--style",
        "definite_determiner_phrase",
        "--style",
        "copular_sentence",
        "--save",
        "--json",
    ])
}

#[test]
fn gen_without_credentials_exits_with_auth_failure() {
    let dir = tempfile::tempdir().unwrap();
    let context = fixtures().join("sources/context.txt");
    let out = cli(&["gen", "--data-dir", s(dir.path()), "--text-file", s(&context), "--keyword", "Uzbekistan"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("AuthFailure"));
    let out = cli(&["gen", "--json", "--data-dir", s(dir.path()), "--text-file", s(&context), "--keyword", "Uzbekistan"]);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "AuthFailure");
}

#[test]
fn replay_gen_export_grid_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let records: serde_json::Value = serde_json::from_str(&generate(&data)).unwrap();
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), 3);
    assert!(records.iter().all(|r| r["validation"]["passed"] == true));
    assert_eq!(records[0]["id"], "clue-000001");

    let exported = dir.path().join("clues.jsonl");
    ok(&["export", "--data-dir", s(&data), "--out", s(&exported), "--style", "bare_noun_phrase", "--style", "definite_determiner_phrase"]);
    assert_eq!(std::fs::read_to_string(&exported).unwrap().lines().count(), 2);

    let puzzle = dir.path().join("puzzle.txt");
    let summary = ok(&["grid", "--in", s(&exported), "--out", s(&puzzle), "--json"]);
    let summary: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(summary["placed"], 2);
    let text = std::fs::read_to_string(&puzzle).unwrap();
    assert!(text.contains("2 Across: Stato dell'Asia centrale con capitale Tashkent (10)"), "{text}");
    let html = ok(&["grid", "--in", s(&exported), "--format", "html"]);
    assert!(html.starts_with("<!DOCTYPE html>"));

    let validated = ok(&["validate", "--in", s(&exported), "--json"]);
    let validated: serde_json::Value = serde_json::from_str(&validated).unwrap();
    assert_eq!(validated.as_array().unwrap().len(), 2);

    let copy = dir.path().join("copy");
    let report = ok(&["import", "--data-dir", s(&copy), "--in", s(&exported), "--json"]);
    assert_eq!(serde_json::from_str::<serde_json::Value>(&report).unwrap()["imported"], 2);
    let stats = ok(&["stats", "--data-dir", s(&copy), "--json"]);
    assert_eq!(serde_json::from_str::<serde_json::Value>(&stats).unwrap()["record_count"], 2);

    let training = dir.path().join("training");
    ok(&["export", "--data-dir", s(&data), "--training", s(&training)]);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(training.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["lora_r"], 16);
    assert_eq!(manifest["lora_alpha"], 32);
}

#[test]
fn grid_from_plain_answers() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("accepted.jsonl");
    std::fs::write(
        &input,
        "{\"answer\":\"Roma\",\"clue\":\"La capitale\"}\n{\"answer\":\"Amore\",\"clue\":\"Sentimento\"}\n",
    )
    .unwrap();
    let out = dir.path().join("puzzle.txt");
    ok(&["grid", "--in", s(&input), "--out", s(&out)]);
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("Across") && text.contains("Down"), "{text}");

    std::fs::write(&input, "{\"answer\":\"R2\",\"clue\":\"x\"}\n").unwrap();
    let bad = cli(&["grid", "--in", s(&input)]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("InvalidAnswer"));
}

#[test]
fn rouge_and_compare_reports() {
    let table = ok(&["rouge", "--pairs", s(&fixtures().join("rouge_pairs.jsonl"))]);
    assert!(table.starts_with("Model"), "{table}");
    assert!(table.contains("0.546    0.327    0.523     20"), "{table}");

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    std::fs::write(&a, "{\"context_id\":\"c1\",\"clue\":\"Stato dell'Asia centrale\"}\n").unwrap();
    let report = ok(&["compare", "--candidate", s(&a), "--reference", s(&a), "--json"]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["mean_rougeL"], 1.0);

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let out = cli(&["rouge", "--pairs", s(&empty)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("EmptyCorpus"));
}

#[test]
fn curate_reports_reasons_and_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("articles.jsonl");
    let long = vec!["parola"; 60].join(" ");
    let rows = [
        serde_json::json!({ "title": "Breve", "intro_text": "poche parole", "bold_keywords": ["Breve"], "view_count": 900 }),
        serde_json::json!({ "title": "Roma", "intro_text": long, "bold_keywords": ["Roma"], "view_count": 10 }),
        serde_json::json!({ "title": "Milano", "intro_text": long, "bold_keywords": ["Milano"], "view_count": 20 }),
    ];
    let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
    std::fs::write(&input, text).unwrap();
    let out: serde_json::Value = serde_json::from_str(&ok(&["curate", "--in", s(&input), "--json"])).unwrap();
    assert_eq!(out["selected"], serde_json::json!(["Milano", "Roma"]));
    assert_eq!(out["articles"][0]["verdict"]["reasons"], serde_json::json!(["TooShort"]));
    let top: serde_json::Value = serde_json::from_str(&ok(&["curate", "--in", s(&input), "--top", "1", "--json"])).unwrap();
    assert_eq!(top["selected"], serde_json::json!(["Milano"]));
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[grid]\nmax_width = 0\n").unwrap();
    let out = cli(&["--config", s(&cfg), "stats", "--data-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ConfigInvalid"));
    std::fs::write(&cfg, "[grid\n").unwrap();
    let out = cli(&["stats", "--config", s(&cfg)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ConfigSyntax"));
}

#[test]
fn serve_answers_http_requests() {
    let dir = tempfile::tempdir().unwrap();
    let replay = fixtures().join("replay");
    let mut child = Command::new(env!("CARGO_BIN_EXE_cruciverba"))
        .args(["serve", "--bind", "127.0.0.1:0", "--replay", s(&replay), "--data-dir", s(dir.path())])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.as_mut().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().rsplit("http://").next().unwrap().to_string();

    let request = |method: &str, path: &str, body: &str| -> String {
        let mut stream = TcpStream::connect(&addr).unwrap();
        write!(
            stream,
            "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        let mut resp = String::new();
        stream.read_to_string(&mut resp).unwrap();
        resp
    };
    let health = request("GET", "/v1/health", "");
    assert!(health.starts_with("HTTP/1.1 200"), "{health}");
    let created = request("POST", "/v1/sessions", "{\"text\":\"Roma è la capitale d'Italia.\"}");
    assert!(created.starts_with("HTTP/1.1 201"), "{created}");
    assert!(created.contains("sess-000001"));
    let missing = request("GET", "/v1/clues/clue-999999", "");
    assert!(missing.starts_with("HTTP/1.1 404"), "{missing}");
    child.kill().unwrap();
    child.wait().unwrap();
}
