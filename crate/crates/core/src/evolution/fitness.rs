//! Plan fitness: a sum of per-node Gaussian-shaped scores whose exponent
//! trades straight running (`alpha` term) against obstacle-aware heading and
//! ball placement.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::plan::NodeParams;

use super::EvolutionError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitnessConfig {
    pub alpha_user: f64,
    pub beta_user: f64,
    /// Width of the fitness exponent, radians.
    pub rho: f64,
    /// Radius of the disc around the obstacle the preferred heading steers
    /// clear of, meters.
    pub clearance_radius: f64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self {
            alpha_user: 0.66,
            beta_user: 0.33,
            rho: PI,
            clearance_radius: 2.0,
        }
    }
}

impl FitnessConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !nonneg(self.alpha_user) || !nonneg(self.beta_user) {
            return Err(EvolutionError::InvalidConfig(
                "alpha_user and beta_user must be finite and >= 0".into(),
            ));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(EvolutionError::InvalidConfig(
                "rho must be finite and > 0".into(),
            ));
        }
        if !nonneg(self.clearance_radius) {
            return Err(EvolutionError::InvalidConfig(
                "clearance_radius must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Everything the per-node score looks at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeContext {
    pub body_dir: f64,
    pub ball_dir: f64,
    /// Preferred body heading relative to the obstacle.
    pub body_rel_obs: f64,
    /// Angle between the ball direction and the direction of the obstacle,
    /// in `[0, 2π)`.
    pub ball_rel_obs: f64,
    /// Distance from the node to the obstacle.
    pub dist: f64,
}

impl NodeContext {
    /// Builds the context of a node in the obstacle-centric frame (obstacle
    /// at the origin, goal along +x).
    pub fn at(position: Point2, params: &NodeParams, clearance_radius: f64) -> Self {
        let bearing = bearing_to_obstacle(position);
        Self {
            body_dir: params.body_dir,
            ball_dir: params.ball_dir,
            body_rel_obs: clearance_heading(position, clearance_radius),
            ball_rel_obs: (bearing - params.ball_dir).rem_euclid(TAU),
            dist: position.norm(),
        }
    }
}

/// Bearing from a node to the obstacle at the origin.
pub fn bearing_to_obstacle(position: Point2) -> f64 {
    (-position.y).atan2(-position.x)
}

/// The heading closest to the goal axis (+x) that keeps the clearance disc
/// out of the agent's way.
///
/// The disc subtends a cone of half-angle `asin(r / d)` around the bearing to
/// the obstacle (a half-plane once the node is inside the disc). If the goal
/// axis is outside that cone the answer is 0; otherwise it is the cone edge
/// counter-clockwise of the bearing, so the obstacle is always passed on its
/// +y side.
pub fn clearance_heading(position: Point2, clearance_radius: f64) -> f64 {
    let dist = position.norm();
    let bearing = bearing_to_obstacle(position);
    let half_angle = if dist > clearance_radius {
        (clearance_radius / dist).asin()
    } else {
        PI / 2.0
    };
    if bearing.abs() < half_angle {
        bearing + half_angle
    } else {
        0.0
    }
}

/// Distance-dependent weights of the straightness (`alpha`) and ball
/// (`beta`) terms. Both grow sharply near the obstacle.
pub fn coeff_alpha_beta(cfg: &FitnessConfig, dist: f64) -> (f64, f64) {
    let shape = 0.1 + 50.0 * (-2.0 * dist).exp();
    (cfg.alpha_user * shape, cfg.beta_user * shape)
}

/// Exponent of the node score.
pub fn desired(ctx: &NodeContext, cfg: &FitnessConfig) -> f64 {
    let (alpha, beta) = coeff_alpha_beta(cfg, ctx.dist);
    alpha * ctx.body_dir.powi(2)
        - (ctx.body_dir - ctx.body_rel_obs).powi(2)
        - beta * ctx.ball_dir.powi(2)
        - (ctx.ball_rel_obs - PI).powi(2)
}

pub fn node_fitness(ctx: &NodeContext, cfg: &FitnessConfig) -> f64 {
    (desired(ctx, cfg) / (cfg.rho * cfg.rho)).exp()
}

/// Sum of node scores for a flat parameter vector laid out as
/// `[acceleration, body_dir, ball_dir]` per node.
pub fn plan_fitness(
    params: &[f64],
    layout: &[Point2],
    cfg: &FitnessConfig,
) -> Result<f64, EvolutionError> {
    if params.len() != 3 * layout.len() {
        return Err(EvolutionError::LengthMismatch {
            expected: 3 * layout.len(),
            got: params.len(),
        });
    }
    Ok(layout
        .iter()
        .zip(params.chunks_exact(3))
        .map(|(&pos, p)| {
            let node = NodeParams::new(p[0], p[1], p[2]);
            node_fitness(&NodeContext::at(pos, &node, cfg.clearance_radius), cfg)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn ctx(
        body_dir: f64,
        body_rel_obs: f64,
        ball_dir: f64,
        ball_rel_obs: f64,
        dist: f64,
    ) -> NodeContext {
        NodeContext {
            body_dir,
            ball_dir,
            body_rel_obs,
            ball_rel_obs,
            dist,
        }
    }

    #[test]
    fn alpha_beta_limits() {
        let cfg = FitnessConfig::default();
        let (a, b) = coeff_alpha_beta(&cfg, 100.0);
        assert!((a - 0.066).abs() < 1e-12);
        assert!((b - 0.033).abs() < 1e-12);
        let (a0, _) = coeff_alpha_beta(&cfg, 0.0);
        assert!((a0 - 33.066).abs() < 1e-12);
        let zero = FitnessConfig {
            alpha_user: 0.0,
            ..cfg
        };
        for d in [0.0, 0.5, 3.0, 50.0] {
            assert_eq!(coeff_alpha_beta(&zero, d).0, 0.0);
        }
    }

    #[test]
    fn neutral_node_scores_one() {
        let cfg = FitnessConfig::default();
        assert_eq!(node_fitness(&ctx(0.0, 0.0, 0.0, PI, 3.0), &cfg), 1.0);
    }

    #[test]
    fn turned_body_near_obstacle() {
        // desired = (33.066 - 1) * (pi/4)^2
        let cfg = FitnessConfig::default();
        let c = ctx(FRAC_PI_4, 0.0, 0.0, PI, 0.0);
        assert!((desired(&c, &cfg) - 19.779_920_920_333_21).abs() < 1e-9);
        assert!((node_fitness(&c, &cfg) - 7.419_598_906_570_764).abs() < 1e-9);
    }

    #[test]
    fn wide_rho_flattens_fitness() {
        let cfg = FitnessConfig {
            rho: 1e8,
            ..FitnessConfig::default()
        };
        let c = ctx(1.2, -0.4, -1.0, 0.3, 0.2);
        assert!((node_fitness(&c, &cfg) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clearance_heading_cases() {
        let r = 2.0;
        // far behind the obstacle: free to run along the goal axis
        assert_eq!(clearance_heading(Point2::new(5.0, 0.0), r), 0.0);
        // well off to the side: goal axis already clear
        assert_eq!(clearance_heading(Point2::new(-3.0, 5.0), r), 0.0);
        // head-on: steer to the cone edge
        let h = clearance_heading(Point2::new(-4.0, 0.0), r);
        assert!((h - (0.5f64).asin()).abs() < 1e-15);
        // inside the disc in front: perpendicular
        assert!((clearance_heading(Point2::new(-1.0, 0.0), r) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let err = plan_fitness(
            &[0.0; 5],
            &[Point2::ORIGIN, Point2::new(1.0, 0.0)],
            &FitnessConfig::default(),
        );
        assert!(matches!(
            err,
            Err(EvolutionError::LengthMismatch {
                expected: 6,
                got: 5
            })
        ));
    }
}
