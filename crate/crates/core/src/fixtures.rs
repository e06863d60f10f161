//! Bundled example data: a hand-tuned 25-node seed plan and a four-anchor
//! field atlas built from variations of it.

use crate::atlas::FieldAtlas;
use crate::document::{parse_atlas, parse_plan};
use crate::plan::TrajectoryPlan;

pub const SEED_PLAN_JSON: &str = include_str!("../fixtures/seed_plan.json");
pub const ATLAS_JSON: &str = include_str!("../fixtures/atlas.json");

/// Two rings of eight nodes (radius 2 and 5) around the obstacle plus an
/// outer frame. Steers gently to +y ahead of the obstacle.
pub fn seed_plan() -> TrajectoryPlan {
    parse_plan(SEED_PLAN_JSON).expect("bundled seed plan is valid")
}

pub fn example_atlas() -> FieldAtlas {
    parse_atlas(ATLAS_JSON).expect("bundled atlas is valid")
}
