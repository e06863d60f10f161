#![no_main]

use dribbleforge_core::document::{parse_grid, parse_pair, MAX_GRID};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = parse_pair(text) {
        assert!(p.is_finite());
    }
    if let Ok((nx, ny)) = parse_grid(text) {
        assert!((1..=MAX_GRID).contains(&nx) && (1..=MAX_GRID).contains(&ny));
    }
});
