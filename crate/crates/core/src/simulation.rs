//! Kinematic rollout of a dribbler following a trajectory plan.
//!
//! Each step the commanded acceleration is split between turning and
//! speeding up: the heading may rotate toward `body_dir` by at most
//! `acceleration / max(speed, 0.1)` rad/s, and whatever share of that turn
//! budget goes unused is spent on speed. Speed never decreases. Positions
//! advance by explicit Euler.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

use crate::geometry::Point2;
use crate::plan::{NodeParams, TrajectoryPlan};

const MIN_TURN_SPEED: f64 = 0.1;
const TURN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub max_steps: usize,
    pub max_speed: f64,
    pub kickable_radius: f64,
    pub finish_x: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            max_steps: 300,
            max_speed: 10.0,
            kickable_radius: 1.085,
            finish_x: 12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    #[error("trace has no states")]
    EmptyTrace,
    #[error("start state must be finite")]
    NonFiniteStart,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::InvalidConfig("dt must be > 0"));
        }
        if self.max_steps < 1 {
            return Err(SimError::InvalidConfig("max_steps must be >= 1"));
        }
        if !(self.max_speed.is_finite() && self.max_speed > 0.0) {
            return Err(SimError::InvalidConfig("max_speed must be > 0"));
        }
        if !(self.kickable_radius.is_finite() && self.finish_x.is_finite()) {
            return Err(SimError::InvalidConfig(
                "kickable_radius and finish_x must be finite",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Point2,
    pub velocity: Point2,
    pub time: f64,
}

impl AgentState {
    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Finished,
    StepLimit,
}

/// States of one run. `commands[i]` is what the plan returned at
/// `states[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub states: Vec<AgentState>,
    pub commands: Vec<NodeParams>,
    pub termination: Termination,
    pub fallback_used: bool,
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Advances one time step under the given command. `time` is left to the
/// caller.
pub fn step(state: &AgentState, params: &NodeParams, cfg: &SimConfig) -> AgentState {
    let speed = state.speed();
    let heading = if speed > 0.0 {
        state.velocity.y.atan2(state.velocity.x)
    } else {
        params.body_dir
    };
    let accel = params.acceleration.max(0.0);
    let max_turn = accel / speed.max(MIN_TURN_SPEED) * cfg.dt;
    let turn = wrap_angle(params.body_dir - heading).clamp(-max_turn, max_turn);
    let throttle = 1.0 - turn.abs() / (max_turn + TURN_EPSILON);
    let new_speed = (speed + accel * cfg.dt * throttle.max(0.0)).min(cfg.max_speed);
    let new_heading = heading + turn;
    AgentState {
        position: Point2::new(
            state.position.x + state.velocity.x * cfg.dt,
            state.position.y + state.velocity.y * cfg.dt,
        ),
        velocity: Point2::new(new_speed * new_heading.cos(), new_speed * new_heading.sin()),
        time: state.time + cfg.dt,
    }
}

pub fn simulate(
    plan: &TrajectoryPlan,
    start: Point2,
    v0: Point2,
    cfg: &SimConfig,
) -> Result<Trace, SimError> {
    cfg.validate()?;
    if !start.is_finite() || !v0.is_finite() {
        return Err(SimError::NonFiniteStart);
    }
    let mut state = AgentState {
        position: start,
        velocity: v0,
        time: 0.0,
    };
    if state.speed() > cfg.max_speed {
        let s = cfg.max_speed / state.speed();
        state.velocity = Point2::new(v0.x * s, v0.y * s);
    }
    let mut states = vec![state];
    let mut commands = Vec::new();
    let mut fallback_used = false;
    let mut termination = Termination::StepLimit;
    for k in 1..=cfg.max_steps {
        let sample = plan.sample(state.position);
        fallback_used |= sample.fallback;
        commands.push(sample.params);
        if state.position.x >= cfg.finish_x {
            termination = Termination::Finished;
            break;
        }
        state = step(&state, &sample.params, cfg);
        // index-based time keeps the spacing exact
        state.time = k as f64 * cfg.dt;
        states.push(state);
    }
    if commands.len() < states.len() {
        let sample = plan.sample(state.position);
        fallback_used |= sample.fallback;
        commands.push(sample.params);
        if state.position.x >= cfg.finish_x {
            termination = Termination::Finished;
        }
    }
    Ok(Trace {
        states,
        commands,
        termination,
        fallback_used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceMetrics {
    pub min_obstacle_distance: f64,
    pub path_length: f64,
    pub finish_time: Option<f64>,
    pub mean_speed_before: Option<f64>,
    pub mean_speed_after: Option<f64>,
    pub fallback_used: bool,
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let ap = p - a;
    let t = ((ap.x * ab.x + ap.y * ab.y) / len2).clamp(0.0, 1.0);
    p.distance(Point2::new(a.x + t * ab.x, a.y + t * ab.y))
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn trace_metrics(trace: &Trace, obstacle: Point2) -> Result<TraceMetrics, SimError> {
    let states = &trace.states;
    let first = states.first().ok_or(SimError::EmptyTrace)?;
    let mut min_obstacle_distance = first.position.distance(obstacle);
    let mut path_length = 0.0;
    for w in states.windows(2) {
        let (a, b) = (w[0].position, w[1].position);
        path_length += a.distance(b);
        min_obstacle_distance = min_obstacle_distance.min(segment_distance(obstacle, a, b));
    }
    let finish_time =
        (trace.termination == Termination::Finished).then(|| states[states.len() - 1].time);
    Ok(TraceMetrics {
        min_obstacle_distance,
        path_length,
        finish_time,
        mean_speed_before: mean(
            states
                .iter()
                .filter(|s| s.position.x < obstacle.x)
                .map(AgentState::speed),
        ),
        mean_speed_after: mean(
            states
                .iter()
                .filter(|s| s.position.x > obstacle.x)
                .map(AgentState::speed),
        ),
        fallback_used: trace.fallback_used,
    })
}

/// One cell of a sampled action field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub accel: f64,
    pub body_dir: f64,
    /// Mean speed of simulated runs passing through the cell, if any did.
    pub speed: Option<f64>,
}

/// Samples the plan on an `nx` by `ny` grid spanning its node bounds, row by
/// row from the lowest `y`. Speeds come from one run per grid row started at
/// the left edge with velocity `v0`; each trace state is binned into its
/// nearest cell.
pub fn sample_field(
    plan: &TrajectoryPlan,
    nx: usize,
    ny: usize,
    v0: Point2,
    cfg: &SimConfig,
) -> Result<Vec<FieldSample>, SimError> {
    cfg.validate()?;
    let (lo, hi) = plan.bounds();
    let coord = |lo: f64, hi: f64, n: usize, i: usize| {
        if n <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let xs: Vec<f64> = (0..nx).map(|i| coord(lo.x, hi.x, nx, i)).collect();
    let ys: Vec<f64> = (0..ny).map(|j| coord(lo.y, hi.y, ny, j)).collect();

    let traces: Vec<Trace> = ys
        .par_iter()
        .map(|&y| simulate(plan, Point2::new(lo.x, y), v0, cfg))
        .collect::<Result<_, _>>()?;

    let cell = |v: f64, lo: f64, hi: f64, n: usize| -> Option<usize> {
        if n == 0 || v < lo || v > hi {
            return None;
        }
        if n == 1 || hi == lo {
            return Some(0);
        }
        Some((((v - lo) / (hi - lo)) * (n - 1) as f64).round() as usize)
    };
    let mut sums = vec![(0.0, 0usize); nx * ny];
    for s in traces.iter().flat_map(|t| &t.states) {
        if let (Some(i), Some(j)) = (
            cell(s.position.x, lo.x, hi.x, nx),
            cell(s.position.y, lo.y, hi.y, ny),
        ) {
            let slot = &mut sums[j * nx + i];
            slot.0 += s.speed();
            slot.1 += 1;
        }
    }

    let mut out = Vec::with_capacity(nx * ny);
    for (j, &y) in ys.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            let params = plan.query(Point2::new(x, y));
            let (sum, n) = sums[j * nx + i];
            out.push(FieldSample {
                x,
                y,
                accel: params.acceleration,
                body_dir: params.body_dir,
                speed: (n > 0).then(|| sum / n as f64),
            });
        }
    }
    Ok(out)
}
