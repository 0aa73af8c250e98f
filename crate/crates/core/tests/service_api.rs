mod common;

use cruciverba::service::Service;
use serde_json::{json, Value};

fn service(dir: &std::path::Path) -> Service {
    Service::from_config(common::replay_config(dir)).unwrap()
}

fn call(svc: &Service, method: &str, target: &str, body: Value) -> (u16, Value) {
    let bytes = if body.is_null() { Vec::new() } else { body.to_string().into_bytes() };
    let r = svc.handle(method, target, &bytes);
    (r.status, r.json_value().unwrap_or(Value::Null))
}

fn session_with_clues(svc: &Service) {
    let (s, _) = call(svc, "POST", "/v1/sessions", json!({ "text": common::context_text() }));
    assert_eq!(s, 201);
    let (s, body) = call(
        svc,
        "POST",
        "/v1/sessions/sess-000001/clues",
        json!({ "keyword": "Uzbekistan", "styles": ["bare_noun_phrase", "definite_determiner_phrase", "copular_sentence"], "n": 1 }),
    );
    assert_eq!(s, 200, "{body}");
}

#[test]
fn every_clue_carries_its_validation_report() {
    let tmp = tempfile::tempdir().unwrap();
    let svc = service(tmp.path());
    session_with_clues(&svc);
    let (_, body) = call(&svc, "GET", "/v1/sessions/sess-000001", Value::Null);
    let clues = body["clues"].as_array().unwrap();
    assert_eq!(clues.len(), 3);
    for c in clues {
        assert!(c["validation"]["passed"].is_boolean());
        assert!(c["rougeL"].is_number());
    }
    let (s, c) = call(&svc, "GET", "/v1/clues/clue-000003", Value::Null);
    assert_eq!(s, 200);
    assert_eq!(c["validation"]["detected_style"], "copular_sentence");
}

#[test]
fn unknown_ids_are_404() {
    let tmp = tempfile::tempdir().unwrap();
    let svc = service(tmp.path());
    let (s, body) = call(&svc, "POST", "/v1/clues/clue-424242/decision", json!({ "decision": "accept" }));
    assert_eq!(s, 404);
    assert_eq!(body["error"], "NotFound");
    assert_eq!(call(&svc, "GET", "/v1/sessions/sess-000009", Value::Null).0, 404);
    assert_eq!(call(&svc, "GET", "/v1/sessions/../../etc", Value::Null).0, 404);
    assert_eq!(call(&svc, "GET", "/v1/puzzles/puz-000001", Value::Null).0, 404);
    assert_eq!(call(&svc, "GET", "/v1/nowhere", Value::Null).0, 404);
}

#[test]
fn empty_selection_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let svc = service(tmp.path());
    session_with_clues(&svc);
    let (s, body) = call(&svc, "POST", "/v1/sessions/sess-000001/puzzle", Value::Null);
    assert_eq!(s, 400);
    assert_eq!(body["error"], "EmptySelection");
}

#[test]
fn leaking_edit_is_flagged_and_not_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let svc = service(tmp.path());
    session_with_clues(&svc);
    let (s, body) = call(
        &svc,
        "POST",
        "/v1/clues/clue-000003/decision",
        json!({ "decision": "edit", "text": "è l'Uzbekistan, stato asiatico" }),
    );
    assert_eq!(s, 400);
    assert_eq!(body["error"], "AnswerLeak");
    assert_eq!(body["clue"]["validation"]["answer_leak"], true);
    assert_eq!(body["clue"]["revision"], 1);
    let (s, body) = call(&svc, "POST", "/v1/clues/clue-000003/decision", json!({ "decision": "accept" }));
    assert_eq!(s, 400);
    assert_eq!(body["error"], "AnswerLeak");
    let (_, session) = call(&svc, "GET", "/v1/sessions/sess-000001", Value::Null);
    assert!(session["session"]["decisions"].get("clue-000003").is_none());

    let (s, body) = call(
        &svc,
        "POST",
        "/v1/clues/clue-000003/decision",
        json!({ "decision": "edit", "text": "è il paese di Samarcanda" }),
    );
    assert_eq!(s, 200, "{body}");
    assert_eq!(body["decision"], json!({ "decision": "edited", "text": "è il paese di Samarcanda" }));
    let (s, body) = call(&svc, "POST", "/v1/sessions/sess-000001/puzzle", json!({}));
    assert_eq!(s, 201);
    assert_eq!(body["layout"]["across"].as_array().unwrap().len() + body["layout"]["down"].as_array().unwrap().len(), 1);
}

#[test]
fn ratings_follow_the_codebook() {
    let tmp = tempfile::tempdir().unwrap();
    let svc = service(tmp.path());
    session_with_clues(&svc);
    let (s, body) = call(&svc, "POST", "/v1/clues/clue-000001/rating", json!({ "rating": "B" }));
    assert_eq!(s, 200);
    assert_eq!(body["clue"]["rating"], "B");
    let (s, body) = call(&svc, "POST", "/v1/clues/clue-000001/rating", json!({ "rating": "F" }));
    assert_eq!(s, 400);
    assert_eq!(body["error"], "InvalidRating");
    let (_, book) = call(&svc, "GET", "/v1/codebook", Value::Null);
    assert_eq!(book["ratings"].as_array().unwrap().len(), 5);
}

#[test]
fn bad_requests_carry_reason_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let svc = service(tmp.path());
    assert_eq!(call(&svc, "POST", "/v1/sessions", json!({})).1["error"], "InvalidBody");
    assert_eq!(call(&svc, "POST", "/v1/sessions", json!({ "text": "  " })).1["error"], "EmptyContext");
    session_with_clues(&svc);
    let gen = |body: Value| call(&svc, "POST", "/v1/sessions/sess-000001/clues", body);
    assert_eq!(gen(json!({ "keyword": "R2-D2", "styles": ["copular"], "n": 1 })).1["error"], "InvalidKeyword");
    assert_eq!(gen(json!({ "keyword": "Uzbekistan", "styles": ["haiku"], "n": 1 })).1["error"], "UnknownStyle");
    assert_eq!(gen(json!({ "keyword": "Uzbekistan", "styles": [], "n": 1 })).1["error"], "NoStyles");
    assert_eq!(gen(json!({ "keyword": "Uzbekistan", "styles": ["copular"], "n": 0 })).1["error"], "ZeroClues");
    let (s, body) = gen(json!({ "keyword": "Tashkent", "styles": ["copular"], "n": 1 }));
    assert_eq!(s, 502);
    assert_eq!(body["error"], "ReplayMiss");
}

#[test]
fn title_sessions_go_through_ingest_and_curation() {
    let tmp = tempfile::tempdir().unwrap();
    let svc = service(tmp.path());
    let (s, body) = call(&svc, "POST", "/v1/sessions", json!({ "title": "Uzbekistan" }));
    assert_eq!(s, 201, "{body}");
    let article = &body["session"]["article"];
    assert_eq!(article["view_count"], 1234);
    assert_eq!(article["intro_text"], common::context_text());
    assert_eq!(body["session"]["curation"]["keywords"], json!(["Uzbekistan", "Samarcanda"]));
    assert_eq!(article["categories"], json!(["Stati asiatici", "Asia centrale"]));
    let (s, body) = call(&svc, "POST", "/v1/sessions", json!({ "title": "Atlantide" }));
    assert_eq!(s, 502, "{body}");
    assert_eq!(body["error"], "Network");
}

#[test]
fn strict_curation_surfaces_reasons() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = common::replay_config(tmp.path());
    cfg.curation.min_words = 100;
    let svc = Service::from_config(cfg).unwrap();
    let (s, body) = call(&svc, "POST", "/v1/sessions", json!({ "title": "Uzbekistan" }));
    assert_eq!(s, 400);
    assert_eq!(body["error"], "CurationRejected");
    assert_eq!(body["reasons"], json!(["TooShort"]));
}

#[test]
fn live_mode_without_key_is_an_auth_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = common::replay_config(tmp.path());
    cfg.llm.mode = cruciverba::gateway::GatewayMode::Live;
    cfg.llm.api_key = None;
    let svc = Service::from_config(cfg).unwrap();
    call(&svc, "POST", "/v1/sessions", json!({ "text": common::context_text() }));
    let (s, body) = call(
        &svc,
        "POST",
        "/v1/sessions/sess-000001/clues",
        json!({ "keyword": "Uzbekistan", "styles": ["copular"], "n": 1 }),
    );
    assert_eq!(s, 502);
    assert_eq!(body["error"], "AuthFailure");
}

#[test]
fn state_survives_a_restart() {
    let tmp = tempfile::tempdir().unwrap();
    {
        let svc = service(tmp.path());
        session_with_clues(&svc);
        call(&svc, "POST", "/v1/clues/clue-000002/decision", json!({ "decision": "accept" }));
    }
    let svc = service(tmp.path());
    let (s, body) = call(&svc, "POST", "/v1/sessions/sess-000001/puzzle", Value::Null);
    assert_eq!(s, 201, "{body}");
    let (s, _) = call(&svc, "POST", "/v1/clues/clue-000001/decision", json!({ "decision": "accept" }));
    assert_eq!(s, 200);
    let (s, body) = call(&svc, "POST", "/v1/sessions", json!({ "text": "altro testo" }));
    assert_eq!(s, 201);
    assert_eq!(body["session"]["id"], "sess-000002");
}

#[test]
fn concurrent_decisions_on_one_session_all_persist() {
    let tmp = tempfile::tempdir().unwrap();
    let svc = service(tmp.path());
    session_with_clues(&svc);
    std::thread::scope(|s| {
        for id in ["clue-000001", "clue-000002", "clue-000003"] {
            let svc = &svc;
            s.spawn(move || {
                let (st, _) = call(svc, "POST", &format!("/v1/clues/{id}/decision"), json!({ "decision": "accept" }));
                assert_eq!(st, 200);
            });
        }
    });
    let (_, body) = call(&svc, "GET", "/v1/sessions/sess-000001", Value::Null);
    assert_eq!(body["session"]["decisions"].as_object().unwrap().len(), 3);
}
