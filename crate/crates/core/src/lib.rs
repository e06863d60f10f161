//! Trajectory plans for dribbling past a single obstacle.
//!
//! A plan is a set of nodes around the obstacle, each carrying an
//! acceleration, a body direction and a ball direction. The nodes are
//! Delaunay-triangulated and an agent inside a triangle acts on the
//! inverse-distance blend of its three corners. Plans are tuned with a
//! genetic algorithm ([`evolution`]), checked with a point-agent simulator
//! ([`simulation`]) and combined across obstacle positions by a
//! [`atlas::FieldAtlas`].

pub mod atlas;
pub mod document;
pub mod evolution;
pub mod fixtures;
pub mod geometry;
pub mod plan;
pub mod simulation;

pub use atlas::{AnchorPlan, DribbleAction, FieldAtlas, ObstacleFrame};
pub use evolution::{
    evolve, evolve_with, EvolutionResult, FitnessConfig, GaConfig, SelectionMethod,
};
pub use geometry::{triangulate, Point2, Triangulation};
pub use plan::{NodeParams, PlanError, PlanLimits, PlanNode, TrajectoryPlan};
pub use simulation::{simulate, SimConfig, Trace};
