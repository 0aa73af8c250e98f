#![no_main]

use cruciverba::styles::{ClueStyle, PromptTemplate};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&s, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let style = ClueStyle::ALL[usize::from(s) % 4];
    if let Ok(t) = PromptTemplate::parse(style, text) {
        let out = t.render("testo {keyword}", "Parola", 3).unwrap();
        assert_eq!(out.matches("Parola").count(), 1 + text.matches("Parola").count());
    }
});
