#![no_main]

use dribbleforge_core::geometry::{triangulate, Location, Point2};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: (Vec<(i16, i16)>, (f32, f32))| {
    let (coords, query) = input;
    // a small integer lattice hits duplicates and co-circular sets often
    let points: Vec<Point2> = coords
        .iter()
        .take(64)
        .map(|&(x, y)| Point2::new(f64::from(x % 64) * 0.5, f64::from(y % 64) * 0.5))
        .collect();
    if let Ok(tri) = triangulate(&points) {
        let h = tri.hull_vertices().len();
        assert_eq!(tri.len(), 2 * points.len() - h - 2);
        let q = Point2::new(f64::from(query.0), f64::from(query.1));
        if q.is_finite() {
            if let Location::Triangle(t) = tri.locate(q) {
                assert!(tri.contains(t, q));
            }
            let _ = tri.nearest_vertex(q);
        }
    }
});
