#![no_main]

use edusim::params::parse_override;
use edusim::SimulationParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((path, value)) = parse_override(text) else {
        return;
    };
    let mut params = SimulationParams::default();
    let before = params.clone();
    match params.set_path(&path, &value) {
        Ok(()) => params
            .validate()
            .expect("accepted overrides keep params valid"),
        Err(_) => assert_eq!(params, before),
    }
});
