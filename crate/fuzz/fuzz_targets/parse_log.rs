#![no_main]

use fclcheck::compliance::parse_log;
use fclcheck::model::is_consistent;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    match parse_log(data) {
        Ok(events) => {
            for e in &events {
                assert!(is_consistent(&e.annotations));
            }
        }
        Err(e) => assert!(e.line >= 1 && e.column >= 1),
    }
});
