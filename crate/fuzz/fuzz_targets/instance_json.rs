#![no_main]

use libfuzzer_sys::fuzz_target;
use ntc_core::Instance;

// Anything that parses must serialize to a document that parses to itself.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(instance) = Instance::parse(text) {
        let json = instance.to_json();
        let again = Instance::parse(&json).expect("re-parse of emitted instance");
        assert_eq!(again.to_json(), json);
    }
});
