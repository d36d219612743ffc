#![no_main]

use libfuzzer_sys::fuzz_target;
use patience::deal::Layout;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(layout) = Layout::from_json(text) {
        let again = Layout::from_json(&layout.to_json()).expect("printed layout parses");
        assert_eq!(layout, again);
    }
});
