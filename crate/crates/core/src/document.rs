//! File formats: plan, atlas and run-report JSON documents, CSV exports, and
//! the small text forms used on the command line (`x,y` pairs, `NxM` grids).
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so a document written by [`plan_to_json`] reloads bit-exact.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atlas::{AnchorPlan, AtlasError, FieldAtlas};
use crate::evolution::{EvolutionResult, FitnessConfig, GaConfig, GenerationStats};
use crate::geometry::Point2;
use crate::plan::{NodeParams, PlanError, PlanLimits, PlanNode, TrajectoryPlan};
use crate::simulation::{FieldSample, Termination, Trace, TraceMetrics};

pub const PLAN_FORMAT: &str = "dribbleforge-plan/1";
pub const ATLAS_FORMAT: &str = "dribbleforge-atlas/1";
pub const REPORT_FORMAT: &str = "dribbleforge-report/1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("unsupported format tag {found:?}, expected {expected:?}")]
    UnsupportedFormat {
        found: String,
        expected: &'static str,
    },
    #[error("invalid plan: {0}")]
    Plan(PlanError),
    #[error("invalid plan for anchor {anchor}: {error}")]
    AnchorPlan { anchor: usize, error: PlanError },
    #[error("invalid atlas: {0}")]
    Atlas(AtlasError),
    #[error("cannot parse {0:?}")]
    BadValue(String),
}

// Manual conversions: the message already embeds the cause, so no `source`
// chain (which would print it twice).
impl From<PlanError> for DocumentError {
    fn from(e: PlanError) -> Self {
        DocumentError::Plan(e)
    }
}

impl From<AtlasError> for DocumentError {
    fn from(e: AtlasError) -> Self {
        DocumentError::Atlas(e)
    }
}

impl From<serde_json::Error> for DocumentError {
    fn from(e: serde_json::Error) -> Self {
        DocumentError::Syntax(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub x: f64,
    pub y: f64,
    pub acceleration: f64,
    pub body_dir: f64,
    pub ball_dir: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDocument {
    pub format: String,
    pub limits: PlanLimits,
    pub nodes: Vec<NodeRecord>,
}

fn check_format(found: &str, expected: &'static str) -> Result<(), DocumentError> {
    if found == expected {
        Ok(())
    } else {
        Err(DocumentError::UnsupportedFormat {
            found: found.to_string(),
            expected,
        })
    }
}

impl PlanDocument {
    pub fn from_plan(plan: &TrajectoryPlan) -> Self {
        Self {
            format: PLAN_FORMAT.to_string(),
            limits: *plan.limits(),
            nodes: plan
                .nodes()
                .iter()
                .map(|n| NodeRecord {
                    x: n.position.x,
                    y: n.position.y,
                    acceleration: n.params.acceleration,
                    body_dir: n.params.body_dir,
                    ball_dir: n.params.ball_dir,
                })
                .collect(),
        }
    }

    pub fn to_plan(&self) -> Result<TrajectoryPlan, DocumentError> {
        check_format(&self.format, PLAN_FORMAT)?;
        let nodes = self
            .nodes
            .iter()
            .map(|r| {
                PlanNode::new(
                    Point2::new(r.x, r.y),
                    NodeParams::new(r.acceleration, r.body_dir, r.ball_dir),
                )
            })
            .collect();
        Ok(TrajectoryPlan::new(nodes, self.limits)?)
    }
}

pub fn parse_plan(text: &str) -> Result<TrajectoryPlan, DocumentError> {
    serde_json::from_str::<PlanDocument>(text)?.to_plan()
}

pub fn plan_to_json(plan: &TrajectoryPlan) -> String {
    to_pretty(&PlanDocument::from_plan(plan))
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorRecord {
    pub obstacle_position: Point2,
    pub plan: PlanDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasDocument {
    pub format: String,
    pub goal: Point2,
    pub anchors: Vec<AnchorRecord>,
}

impl AtlasDocument {
    pub fn from_atlas(atlas: &FieldAtlas) -> Self {
        Self {
            format: ATLAS_FORMAT.to_string(),
            goal: atlas.goal(),
            anchors: atlas
                .anchors()
                .iter()
                .map(|a| AnchorRecord {
                    obstacle_position: a.obstacle_position,
                    plan: PlanDocument::from_plan(&a.plan),
                })
                .collect(),
        }
    }

    pub fn to_atlas(&self) -> Result<FieldAtlas, DocumentError> {
        check_format(&self.format, ATLAS_FORMAT)?;
        if !self.goal.is_finite() {
            return Err(DocumentError::BadValue("goal".into()));
        }
        let anchors = self
            .anchors
            .iter()
            .enumerate()
            .map(|(anchor, r)| {
                if !r.obstacle_position.is_finite() {
                    return Err(DocumentError::BadValue(format!("anchor {anchor} position")));
                }
                let plan = r.plan.to_plan().map_err(|e| match e {
                    DocumentError::Plan(error) => DocumentError::AnchorPlan { anchor, error },
                    other => other,
                })?;
                Ok(AnchorPlan {
                    obstacle_position: r.obstacle_position,
                    plan,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FieldAtlas::new(anchors, self.goal)?)
    }
}

pub fn parse_atlas(text: &str) -> Result<FieldAtlas, DocumentError> {
    serde_json::from_str::<AtlasDocument>(text)?.to_atlas()
}

pub fn atlas_to_json(atlas: &FieldAtlas) -> String {
    to_pretty(&AtlasDocument::from_atlas(atlas))
}

pub fn parse_ga_config(text: &str) -> Result<GaConfig, DocumentError> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_fitness_config(text: &str) -> Result<FitnessConfig, DocumentError> {
    Ok(serde_json::from_str(text)?)
}

/// GA run report: configuration echo, fitness history and the best plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub format: String,
    pub ga: GaConfig,
    pub fitness: FitnessConfig,
    pub rng_seed: u64,
    pub cancelled: bool,
    pub seed_fitness: f64,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
    pub best_plan: PlanDocument,
}

impl RunReport {
    pub fn new(ga: &GaConfig, fitness: &FitnessConfig, result: &EvolutionResult) -> Self {
        Self {
            format: REPORT_FORMAT.to_string(),
            ga: *ga,
            fitness: *fitness,
            rng_seed: result.rng_seed,
            cancelled: result.cancelled,
            seed_fitness: result.seed_fitness,
            best_fitness: result.best_fitness,
            history: result.history.clone(),
            best_plan: PlanDocument::from_plan(&result.best_plan),
        }
    }

    pub fn to_json(&self) -> String {
        to_pretty(self)
    }
}

pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best,mean,worst\n");
    for h in history {
        let _ = writeln!(out, "{},{},{},{}", h.generation, h.best, h.mean, h.worst);
    }
    out
}

/// One row of a trace export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub accel_cmd: f64,
    pub body_dir_cmd: f64,
    pub ball_dir_cmd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub termination: Termination,
    pub fallback_used: bool,
    pub metrics: Option<TraceMetrics>,
    pub states: Vec<TraceRow>,
}

pub fn trace_rows(trace: &Trace) -> Vec<TraceRow> {
    trace
        .states
        .iter()
        .zip(&trace.commands)
        .map(|(s, c)| TraceRow {
            t: s.time,
            x: s.position.x,
            y: s.position.y,
            vx: s.velocity.x,
            vy: s.velocity.y,
            accel_cmd: c.acceleration,
            body_dir_cmd: c.body_dir,
            ball_dir_cmd: c.ball_dir,
        })
        .collect()
}

impl TraceDocument {
    pub fn new(trace: &Trace, metrics: Option<TraceMetrics>) -> Self {
        Self {
            termination: trace.termination,
            fallback_used: trace.fallback_used,
            metrics,
            states: trace_rows(trace),
        }
    }
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("t,x,y,vx,vy,accel_cmd,body_dir_cmd,ball_dir_cmd\n");
    for r in trace_rows(trace) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t, r.x, r.y, r.vx, r.vy, r.accel_cmd, r.body_dir_cmd, r.ball_dir_cmd
        );
    }
    out
}

/// Field samples as CSV; cells no simulated run reached leave `speed` empty.
pub fn field_csv(samples: &[FieldSample]) -> String {
    let mut out = String::from("x,y,accel,body_dir,speed\n");
    for s in samples {
        let speed = s.speed.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", s.x, s.y, s.accel, s.body_dir, speed);
    }
    out
}

/// Parses `"x,y"` (whitespace allowed around either number).
pub fn parse_pair(text: &str) -> Result<Point2, DocumentError> {
    let bad = || DocumentError::BadValue(text.to_string());
    let (x, y) = text.split_once(',').ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    let p = Point2::new(x, y);
    if p.is_finite() {
        Ok(p)
    } else {
        Err(bad())
    }
}

/// Largest grid accepted by [`parse_grid`], per axis.
pub const MAX_GRID: usize = 1000;

/// Parses `"NxM"` into `(columns, rows)`. Both must be in `1..=MAX_GRID`.
pub fn parse_grid(text: &str) -> Result<(usize, usize), DocumentError> {
    let bad = || DocumentError::BadValue(text.to_string());
    let (nx, ny) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let nx: usize = nx.trim().parse().map_err(|_| bad())?;
    let ny: usize = ny.trim().parse().map_err(|_| bad())?;
    if (1..=MAX_GRID).contains(&nx) && (1..=MAX_GRID).contains(&ny) {
        Ok((nx, ny))
    } else {
        Err(bad())
    }
}
