#![no_main]

use libfuzzer_sys::fuzz_target;
use ntc_bench::{read_records, write_records};

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_records(data) {
        let mut first = Vec::new();
        write_records(&mut first, &records).unwrap();
        let again = read_records(first.as_slice()).expect("re-read of written records");
        let mut second = Vec::new();
        write_records(&mut second, &again).unwrap();
        assert_eq!(first, second);
    }
});
