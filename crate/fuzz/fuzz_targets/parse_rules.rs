#![no_main]

use fclcheck::fcl::parse_rules;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Err(e) = parse_rules(data) {
        assert!(e.line >= 1 && e.column >= 1, "unpositioned: {e}");
        assert!(e.line <= data.lines().count().max(1) + 1);
    }
});
