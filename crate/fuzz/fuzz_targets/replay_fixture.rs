#![no_main]

use cruciverba::replay::Fixture;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = serde_json::from_slice::<Fixture>(data);
});
