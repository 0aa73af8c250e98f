//! Runs every checked-in fuzz seed through the same assertions as the fuzz targets.

use std::path::{Path, PathBuf};

use cruciverba::config::AppConfig;
use cruciverba::dataset::parse_record_line;
use cruciverba::gateway::parse_chat_response;
use cruciverba::grid::{parse_puzzle_json, render, validate_layout, RenderFormat};
use cruciverba::replay::Fixture;
use cruciverba::styles::{parse_clue_list, ClueStyle, PromptTemplate, LIST_MARKER};
use cruciverba::validator::{classify_structure, contains_answer_leak, validate, ItalianLexicon};
use cruciverba::wiki::parse_intro;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn html_intro() {
    for (p, data) in seeds("html_intro") {
        let intro = parse_intro(text(&data)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(!intro.text.is_empty(), "{}", p.display());
    }
}

#[test]
fn clue_list() {
    for (p, data) in seeds("clue_list") {
        let (n, rest) = data.split_first().unwrap();
        let n = usize::from(n % 21);
        let clues = parse_clue_list(text(rest), n).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(clues.len() <= n);
        assert!(clues.iter().all(|c| !LIST_MARKER.is_match(c)));
    }
}

#[test]
fn lexicon() {
    for (p, data) in seeds("lexicon") {
        let lex = ItalianLexicon::parse(text(&data)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(lex.definite_articles.is_subset(&lex.determiner_set));
        let _ = classify_structure("La capitale d'Italia", &lex);
    }
}

#[test]
fn prompt_template() {
    for (p, data) in seeds("prompt_template") {
        let (s, rest) = data.split_first().unwrap();
        let t = PromptTemplate::parse(ClueStyle::ALL[usize::from(*s) % 4], text(rest))
            .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let out = t.render("testo {keyword}", "Parola", 3).unwrap();
        assert_eq!(out.matches("Parola").count(), 1 + text(rest).matches("Parola").count());
    }
}

#[test]
fn record_line() {
    for (p, data) in seeds("record_line") {
        let r = parse_record_line(text(&data)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(parse_record_line(&serde_json::to_string(&r).unwrap()).unwrap(), r);
    }
}

#[test]
fn layout_json() {
    for (p, data) in seeds("layout_json") {
        let doc = parse_puzzle_json(&data).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let (layout, entries) = doc.to_layout().unwrap();
        assert!(validate_layout(&layout, &entries).valid);
        for format in [RenderFormat::Text, RenderFormat::Json, RenderFormat::PrintableHtml] {
            render(&layout, &entries, format).unwrap();
        }
    }
}

#[test]
fn chat_response() {
    let mut parsed = 0;
    for (_, data) in seeds("chat_response") {
        parsed += parse_chat_response(&data).is_ok() as usize;
    }
    assert!(parsed > 0);
}

#[test]
fn config_toml() {
    let mut ok = 0;
    for (_, data) in seeds("config_toml") {
        if let Ok(cfg) = AppConfig::from_toml_str(text(&data)) {
            assert!(cfg.check().is_ok());
            ok += 1;
        }
    }
    assert!(ok > 0);
}

#[test]
fn classify_leak() {
    let lex = ItalianLexicon::builtin();
    for (_, data) in seeds("classify_leak") {
        let t = text(&data);
        let (clue, answer) = t.split_once('\n').unwrap_or((t, ""));
        for style in ClueStyle::ALL {
            let report = validate(clue, answer, style, lex);
            assert!(!(report.answer_leak && report.passed));
        }
        if !answer.trim().is_empty() {
            assert!(contains_answer_leak(&format!("{clue} {answer}"), answer));
        }
    }
}

#[test]
fn replay_fixture() {
    for (p, data) in seeds("replay_fixture") {
        serde_json::from_slice::<Fixture>(&data).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
