#![no_main]

use fclcheck::model::{enumerate_traces, parse_model, validate_graph, ModelError};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    match parse_model(data) {
        Ok(g) => {
            let again = parse_model(&g.to_json()).expect("printed model parses");
            assert_eq!(again, g);
            if validate_graph(&g).is_empty() {
                // small cap: only checks that enumeration terminates cleanly
                let _ = enumerate_traces(&g, 1, 256);
            }
        }
        Err(ModelError::Syntax { line, column, .. }) => assert!(line >= 1 && column >= 1),
        Err(e) => assert!(!e.location().is_empty()),
    }
});
