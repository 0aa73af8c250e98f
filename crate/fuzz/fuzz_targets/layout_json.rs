#![no_main]

use cruciverba::grid::{parse_puzzle_json, render, validate_layout, RenderFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(doc) = parse_puzzle_json(data) {
        let (layout, entries) = doc.to_layout().unwrap();
        assert!(validate_layout(&layout, &entries).valid);
        for format in [RenderFormat::Text, RenderFormat::Json, RenderFormat::PrintableHtml] {
            render(&layout, &entries, format).unwrap();
        }
    }
});
