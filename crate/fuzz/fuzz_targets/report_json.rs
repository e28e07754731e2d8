#![no_main]

use chansel::RunReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(r) = RunReport::from_json(s) {
        let again = RunReport::from_json(&r.to_json()).expect("own output parses");
        assert_eq!(again.to_json(), r.to_json());
    }
});
