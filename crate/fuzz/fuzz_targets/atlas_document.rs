#![no_main]

use dribbleforge_core::document::{atlas_to_json, parse_atlas};
use dribbleforge_core::geometry::Point2;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(atlas) = parse_atlas(text) {
        let saved = atlas_to_json(&atlas);
        assert_eq!(parse_atlas(&saved).expect("saved atlas reloads"), atlas);
        for anchor in atlas.anchors() {
            assert_eq!(atlas.resolve_plan(anchor.obstacle_position), anchor.plan);
            let _ = atlas.dribble_action(Point2::new(-3.0, 1.0), anchor.obstacle_position);
        }
    }
});
