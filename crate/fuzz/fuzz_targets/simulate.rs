#![no_main]

use arbitrary::Arbitrary;
use dribbleforge_core::fixtures;
use dribbleforge_core::geometry::Point2;
use dribbleforge_core::simulation::{simulate, trace_metrics, SimConfig};
use libfuzzer_sys::fuzz_target;

#[derive(Debug, Arbitrary)]
struct Request {
    start: (f64, f64),
    v0: (f64, f64),
    dt: f64,
    max_steps: u8,
    max_speed: f64,
}

fuzz_target!(|req: Request| {
    let plan = fixtures::seed_plan();
    let cfg = SimConfig {
        dt: req.dt,
        max_steps: usize::from(req.max_steps),
        max_speed: req.max_speed,
        ..SimConfig::default()
    };
    let start = Point2::new(req.start.0, req.start.1);
    let v0 = Point2::new(req.v0.0, req.v0.1);
    if let Ok(trace) = simulate(&plan, start, v0, &cfg) {
        assert_eq!(trace.states.len(), trace.commands.len());
        let m = trace_metrics(&trace, Point2::ORIGIN).expect("non-empty trace");
        assert!(m.path_length >= 0.0 || m.path_length.is_nan());
    }
});
