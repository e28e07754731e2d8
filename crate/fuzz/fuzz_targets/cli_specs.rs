#![no_main]

use chansel::dgaff::Chromosome;
use chansel::evaluator::PluginCommand;
use chansel::pipeline::EvaluatorSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    let _ = EvaluatorSpec::parse(s, Some(vec![0, 1]), 0.1);
    let _ = PluginCommand::parse(s);
    if let Some(c) = Chromosome::parse(s) {
        assert_eq!(c.to_string(), s);
    }
});
