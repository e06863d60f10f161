#![no_main]

use dribbleforge_core::document::{parse_fitness_config, parse_ga_config};
use dribbleforge_core::simulation::SimConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ga) = parse_ga_config(text) {
        let _ = ga.validate();
        let _ = ga.mating_pool_size();
    }
    if let Ok(fit) = parse_fitness_config(text) {
        let _ = fit.validate();
    }
    if let Ok(sim) = serde_json::from_str::<SimConfig>(text) {
        let _ = sim.validate();
    }
});
