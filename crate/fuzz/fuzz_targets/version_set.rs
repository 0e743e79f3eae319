#![no_main]

use libfuzzer_sys::fuzz_target;
use ntc_bench::parse_versions;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(versions) = parse_versions(&text) {
        assert!(!versions.is_empty());
        assert!(versions.iter().all(|&v| v <= 10));
        let mut sorted = versions.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), versions.len());
    }
});
