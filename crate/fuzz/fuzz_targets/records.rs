#![no_main]

use libfuzzer_sys::fuzz_target;
use patience_cli::{parse_line, read_records, summarize, Display};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        for line in text.lines() {
            let _ = parse_line(line);
        }
    }
    if let Ok(records) = read_records(data) {
        let _ = summarize(&records, Display::default());
    }
});
