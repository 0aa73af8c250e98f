#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(html) = std::str::from_utf8(data) else { return };
    if let Ok(intro) = cruciverba::wiki::parse_intro(html) {
        for b in &intro.bold {
            assert!(!b.is_empty());
        }
    }
});
