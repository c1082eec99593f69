#![no_main]

use edusim::SimulationParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(params) = SimulationParams::from_toml_str(text) {
        params.validate().expect("parsed configs are valid");
        let again =
            SimulationParams::from_toml_str(&params.to_toml_string()).expect("round trip parses");
        assert_eq!(params, again);
    }
});
