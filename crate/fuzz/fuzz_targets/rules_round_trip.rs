#![no_main]

use fclcheck::fcl::{parse_rules, serialize_rules};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(rs) = parse_rules(data) else { return };
    let printed = serialize_rules(&rs);
    let again = parse_rules(&printed).expect("printed rules parse");
    assert_eq!(again, rs);
    assert_eq!(serialize_rules(&again), printed);
});
