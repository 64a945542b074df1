#![no_main]

use libfuzzer_sys::fuzz_target;
use star_noma::scenario::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((config, _warnings)) = ScenarioConfig::from_toml_str(text) {
        // anything that parses must serialize and parse back to itself
        let rendered = config.to_toml_string().expect("valid config serializes");
        let (again, _) = ScenarioConfig::from_toml_str(&rendered).expect("rendered config parses");
        assert_eq!(again, config);
    }
});
