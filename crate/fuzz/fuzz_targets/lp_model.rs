#![no_main]

use libfuzzer_sys::fuzz_target;
use ntc_core::oracle::LpModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = LpModel::parse(text) {
        let emitted = model.to_lp_string();
        let again = LpModel::parse(&emitted).expect("re-parse of emitted model");
        assert_eq!(again.to_lp_string(), emitted);
    }
});
