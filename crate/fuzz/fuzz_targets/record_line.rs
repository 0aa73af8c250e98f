#![no_main]

use cruciverba::dataset::parse_record_line;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(record) = parse_record_line(line) {
        let again = serde_json::to_string(&record).unwrap();
        assert_eq!(parse_record_line(&again).unwrap(), record);
    }
});
