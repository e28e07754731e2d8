#![no_main]

use chansel::evaluator::protocol::{parse_hello, parse_response};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|line: &str| {
    let _ = parse_hello(line);
    if let Ok(r) = parse_response(line, 1) {
        assert_eq!(r.id, 1);
        assert!((0.0..=1.0).contains(&r.fitness));
    }
});
