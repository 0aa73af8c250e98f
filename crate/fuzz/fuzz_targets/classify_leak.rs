#![no_main]

use cruciverba::styles::ClueStyle;
use cruciverba::validator::{contains_answer_leak, validate, ItalianLexicon};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (clue, answer) = text.split_once('\n').unwrap_or((text, ""));
    let lex = ItalianLexicon::builtin();
    for style in ClueStyle::ALL {
        let report = validate(clue, answer, style, lex);
        assert!(!(report.answer_leak && report.passed));
    }
    if !answer.trim().is_empty() {
        assert!(contains_answer_leak(&format!("{clue} {answer}"), answer));
    }
});
