#![no_main]

use libfuzzer_sys::fuzz_target;
use patience::engine::{format_solution, parse_solution};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(moves) = parse_solution(text) {
        assert_eq!(parse_solution(&format_solution(&moves)).unwrap(), moves);
    }
});
