#![no_main]

use extrad::scenario::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ScenarioConfig::from_toml_str(text) {
        if let Ok(scenario) = cfg.build() {
            let _ = ScenarioConfig::from_scenario(&scenario).to_toml();
        }
    }
});
