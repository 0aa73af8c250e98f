#![no_main]

use cruciverba::validator::{classify_structure, ItalianLexicon};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(lex) = ItalianLexicon::parse(text) {
        assert!(lex.definite_articles.is_subset(&lex.determiner_set));
        let _ = classify_structure("La capitale d'Italia", &lex);
    }
});
