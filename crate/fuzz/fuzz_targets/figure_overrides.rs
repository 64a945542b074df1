#![no_main]

use libfuzzer_sys::fuzz_target;
use star_noma_cli::overrides::Overrides;
use star_noma_cli::presets::{plan, Figure};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(overrides) = Overrides::parse_str(s) else { return };
    for figure in [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5] {
        if let Ok(p) = plan(figure, &overrides) {
            for curve in &p.curves {
                curve.spec.validate(&curve.config).expect("planned curve is valid");
            }
        }
    }
});
