//! Online stage: plans optimized for several obstacle positions on the field
//! are blended by a second Delaunay layer over those positions.

use thiserror::Error;

use crate::geometry::{
    nearest_index, triangulate, IdwWeights, Location, Point2, Triangulation, POINT_TOLERANCE,
};
use crate::plan::{NodeParams, PlanSample, TrajectoryPlan};

/// A plan tied to the field position of the obstacle it was optimized for.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorPlan {
    pub obstacle_position: Point2,
    pub plan: TrajectoryPlan,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AtlasError {
    #[error("an atlas needs at least one anchor")]
    EmptyAnchors,
    #[error("anchor {anchor} does not share the layout of anchor 0: {detail}")]
    LayoutMismatch { anchor: usize, detail: String },
    #[error("goal and obstacle coincide")]
    CoincidentGoalObstacle,
}

/// Frame with the obstacle at the origin and +x pointing at the goal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleFrame {
    pub origin: Point2,
    /// World bearing of the frame's +x axis.
    pub rotation: f64,
    cos: f64,
    sin: f64,
}

impl ObstacleFrame {
    pub fn new(obstacle: Point2, goal: Point2) -> Result<Self, AtlasError> {
        let d = goal - obstacle;
        let len = d.norm();
        if len.is_nan() || len <= POINT_TOLERANCE {
            return Err(AtlasError::CoincidentGoalObstacle);
        }
        Ok(Self {
            origin: obstacle,
            rotation: d.y.atan2(d.x),
            cos: d.x / len,
            sin: d.y / len,
        })
    }

    pub fn to_local(&self, world: Point2) -> Point2 {
        let d = world - self.origin;
        Point2::new(
            d.x * self.cos + d.y * self.sin,
            -d.x * self.sin + d.y * self.cos,
        )
    }

    pub fn to_world(&self, local: Point2) -> Point2 {
        Point2::new(
            self.origin.x + local.x * self.cos - local.y * self.sin,
            self.origin.y + local.x * self.sin + local.y * self.cos,
        )
    }
}

pub fn to_obstacle_frame(
    world_point: Point2,
    obstacle: Point2,
    goal: Point2,
) -> Result<Point2, AtlasError> {
    Ok(ObstacleFrame::new(obstacle, goal)?.to_local(world_point))
}

#[derive(Debug, Clone, PartialEq)]
enum FieldMesh {
    Triangulated(Triangulation),
    /// Fewer than three anchors or a collinear/duplicate arrangement.
    NearestAnchor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldAtlas {
    anchors: Vec<AnchorPlan>,
    mesh: FieldMesh,
    goal: Point2,
}

/// How an obstacle position maps onto anchors.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Blend {
    Single(usize),
    Triangle([usize; 3], IdwWeights),
}

/// Output of [`FieldAtlas::dribble_action`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DribbleAction {
    /// Parameters in the obstacle frame.
    pub params: NodeParams,
    /// The agent was outside the plan's node hull.
    pub fallback: bool,
    /// Agent position in the obstacle frame.
    pub local_position: Point2,
    /// World bearing of the obstacle frame's +x axis; add it to `body_dir`
    /// or `ball_dir` to get world bearings.
    pub frame_rotation: f64,
}

impl DribbleAction {
    pub fn world_body_dir(&self) -> f64 {
        self.params.body_dir + self.frame_rotation
    }

    pub fn world_ball_dir(&self) -> f64 {
        self.params.ball_dir + self.frame_rotation
    }
}

impl FieldAtlas {
    pub fn new(anchors: Vec<AnchorPlan>, goal: Point2) -> Result<Self, AtlasError> {
        let first = anchors.first().ok_or(AtlasError::EmptyAnchors)?;
        for (k, anchor) in anchors.iter().enumerate().skip(1) {
            let mismatch = |detail: String| AtlasError::LayoutMismatch { anchor: k, detail };
            if anchor.plan.len() != first.plan.len() {
                return Err(mismatch(format!(
                    "{} nodes instead of {}",
                    anchor.plan.len(),
                    first.plan.len()
                )));
            }
            if anchor.plan.limits() != first.plan.limits() {
                return Err(mismatch("parameter limits differ".into()));
            }
            for (i, (a, b)) in anchor
                .plan
                .nodes()
                .iter()
                .zip(first.plan.nodes())
                .enumerate()
            {
                if a.position.distance(b.position) > POINT_TOLERANCE {
                    return Err(mismatch(format!(
                        "node {i} at {} instead of {}",
                        a.position, b.position
                    )));
                }
            }
        }
        let positions: Vec<Point2> = anchors.iter().map(|a| a.obstacle_position).collect();
        let mesh = match triangulate(&positions) {
            Ok(t) => FieldMesh::Triangulated(t),
            Err(_) => FieldMesh::NearestAnchor,
        };
        Ok(Self {
            anchors,
            mesh,
            goal,
        })
    }

    pub fn anchors(&self) -> &[AnchorPlan] {
        &self.anchors
    }

    pub fn goal(&self) -> Point2 {
        self.goal
    }

    pub fn field_triangulation(&self) -> Option<&Triangulation> {
        match &self.mesh {
            FieldMesh::Triangulated(t) => Some(t),
            FieldMesh::NearestAnchor => None,
        }
    }

    pub fn is_nearest_anchor_mode(&self) -> bool {
        matches!(self.mesh, FieldMesh::NearestAnchor)
    }

    fn blend_for(&self, obstacle: Point2) -> Blend {
        if let FieldMesh::Triangulated(tri) = &self.mesh {
            if let Location::Triangle(t) = tri.locate(obstacle) {
                let weights = IdwWeights::new(tri.corners(t), obstacle);
                return match weights {
                    IdwWeights::Vertex(k) => Blend::Single(tri.triangles()[t][k]),
                    w => Blend::Triangle(tri.triangles()[t], w),
                };
            }
        }
        let positions: Vec<Point2> = self.anchors.iter().map(|a| a.obstacle_position).collect();
        Blend::Single(nearest_index(&positions, obstacle))
    }

    fn blend_node(&self, blend: &Blend, node: usize) -> NodeParams {
        match *blend {
            Blend::Single(a) => self.anchors[a].plan.nodes()[node].params,
            Blend::Triangle(corners, weights) => {
                let values = corners.map(|a| self.anchors[a].plan.nodes()[node].params.to_array());
                let blended: [f64; 3] =
                    std::array::from_fn(|k| weights.apply(values.map(|v| v[k])));
                NodeParams::from_array(blended).clamp_to(self.anchors[0].plan.limits())
            }
        }
    }

    /// The plan for an obstacle at `obstacle`: the anchors around it blended
    /// node by node and parameter by parameter. The node layout and its
    /// triangulation are shared with the anchors.
    pub fn resolve_plan(&self, obstacle: Point2) -> TrajectoryPlan {
        let blend = self.blend_for(obstacle);
        if let Blend::Single(a) = blend {
            return self.anchors[a].plan.clone();
        }
        let base = &self.anchors[0].plan;
        let params: Vec<NodeParams> = (0..base.len())
            .map(|i| self.blend_node(&blend, i))
            .collect();
        base.with_params(&params)
            .expect("blended parameters stay within shared limits")
    }

    /// The action for an agent at `agent_world` facing an obstacle at
    /// `obstacle_world`. Only the nodes of the plan triangle containing the
    /// agent are blended.
    pub fn dribble_action(
        &self,
        agent_world: Point2,
        obstacle_world: Point2,
    ) -> Result<DribbleAction, AtlasError> {
        let frame = ObstacleFrame::new(obstacle_world, self.goal)?;
        let local = frame.to_local(agent_world);
        let blend = self.blend_for(obstacle_world);
        let base = &self.anchors[0].plan;
        let tri = base.triangulation();
        let sample = match tri.locate(local) {
            Location::Triangle(t) => {
                let corners = tri.triangles()[t];
                let weights = IdwWeights::new(tri.corners(t), local);
                let values = corners.map(|i| self.blend_node(&blend, i).to_array());
                let params: [f64; 3] = std::array::from_fn(|k| weights.apply(values.map(|v| v[k])));
                PlanSample {
                    params: NodeParams::from_array(params).clamp_to(base.limits()),
                    fallback: false,
                }
            }
            Location::Outside => PlanSample {
                params: self.blend_node(&blend, tri.nearest_vertex(local)),
                fallback: true,
            },
        };
        Ok(DribbleAction {
            params: sample.params,
            fallback: sample.fallback,
            local_position: local,
            frame_rotation: frame.rotation,
        })
    }
}
