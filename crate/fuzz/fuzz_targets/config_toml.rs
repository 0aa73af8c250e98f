#![no_main]

use cruciverba::config::AppConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = AppConfig::from_toml_str(text) {
        assert!(cfg.check().is_ok());
    }
});
