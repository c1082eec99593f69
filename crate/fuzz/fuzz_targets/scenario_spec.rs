#![no_main]

use edusim::experiments::ScenarioSpec;
use edusim::SimulationParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = ScenarioSpec::parse(text) {
        if let Ok(params) = spec.apply(&SimulationParams::default()) {
            params.validate().expect("applied scenarios are valid");
        }
    }
});
