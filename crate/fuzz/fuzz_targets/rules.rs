#![no_main]

use libfuzzer_sys::fuzz_target;
use patience::rules::parse_rules;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rules) = parse_rules(text) {
        let _ = patience::dominance::applicable_dominances(&rules);
        if rules.max_rank <= 4 {
            let _ = patience::deal::deal(&rules, 1);
        }
    }
});
