#![no_main]

use dribbleforge_core::document::{parse_plan, plan_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(plan) = parse_plan(text) {
        let saved = plan_to_json(&plan);
        let reloaded = parse_plan(&saved).expect("saved plan reloads");
        assert_eq!(reloaded, plan);
        assert_eq!(plan_to_json(&reloaded), saved);
    }
});
