#![no_main]

use cruciverba::styles::{parse_clue_list, LIST_MARKER};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n = usize::from(n % 21);
    if let Ok(clues) = parse_clue_list(text, n) {
        assert!(clues.len() <= n);
        for c in clues {
            assert!(!LIST_MARKER.is_match(&c));
        }
    }
});
