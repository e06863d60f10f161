//! Trajectory plans: an obstacle-centric node set carrying motion parameters,
//! triangulated so the parameters can be queried anywhere in the plane.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    triangulate, Degeneracy, GeometryError, IdwWeights, Location, Point2, Triangulation,
};

/// Minimum separation between two nodes of one plan.
pub const NODE_SEPARATION: f64 = 1e-6;

/// Motion parameters attached to a plan node. Angles are radians in the plan
/// frame, `acceleration` is m/s².
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeParams {
    pub acceleration: f64,
    pub body_dir: f64,
    pub ball_dir: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Acceleration,
    BodyDir,
    BallDir,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::Acceleration, Param::BodyDir, Param::BallDir];

    pub fn name(self) -> &'static str {
        match self {
            Param::Acceleration => "acceleration",
            Param::BodyDir => "body_dir",
            Param::BallDir => "ball_dir",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl NodeParams {
    pub const fn new(acceleration: f64, body_dir: f64, ball_dir: f64) -> Self {
        Self {
            acceleration,
            body_dir,
            ball_dir,
        }
    }

    pub fn get(&self, param: Param) -> f64 {
        match param {
            Param::Acceleration => self.acceleration,
            Param::BodyDir => self.body_dir,
            Param::BallDir => self.ball_dir,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.acceleration, self.body_dir, self.ball_dir]
    }

    pub fn from_array(values: [f64; 3]) -> Self {
        Self::new(values[0], values[1], values[2])
    }

    pub fn clamp_to(self, limits: &PlanLimits) -> Self {
        let [a, b, c] = self.to_array();
        Self::new(
            a.clamp(0.0, limits.max_acceleration),
            b.clamp(limits.body_dir_range[0], limits.body_dir_range[1]),
            c.clamp(limits.ball_dir_range[0], limits.ball_dir_range[1]),
        )
    }
}

/// Parameter bounds shared by every node of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanLimits {
    pub max_acceleration: f64,
    pub body_dir_range: [f64; 2],
    pub ball_dir_range: [f64; 2],
}

impl Default for PlanLimits {
    fn default() -> Self {
        Self {
            max_acceleration: 3.0,
            body_dir_range: [-FRAC_PI_2, FRAC_PI_2],
            ball_dir_range: [-FRAC_PI_2, FRAC_PI_2],
        }
    }
}

impl PlanLimits {
    pub fn range(&self, param: Param) -> [f64; 2] {
        match param {
            Param::Acceleration => [0.0, self.max_acceleration],
            Param::BodyDir => self.body_dir_range,
            Param::BallDir => self.ball_dir_range,
        }
    }

    fn validate(&self) -> Result<(), PlanError> {
        let ok = self.max_acceleration.is_finite()
            && self.max_acceleration >= 0.0
            && [self.body_dir_range, self.ball_dir_range]
                .iter()
                .all(|[lo, hi]| lo.is_finite() && hi.is_finite() && lo <= hi);
        if ok {
            Ok(())
        } else {
            Err(PlanError::InvalidLimits)
        }
    }

    fn check(&self, node: usize, params: &NodeParams) -> Result<(), PlanError> {
        for param in Param::ALL {
            let value = params.get(param);
            let [min, max] = self.range(param);
            if !(value >= min && value <= max) {
                return Err(PlanError::ParamOutOfRange {
                    node,
                    param,
                    value,
                    min,
                    max,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanNode {
    pub position: Point2,
    pub params: NodeParams,
}

impl PlanNode {
    pub const fn new(position: Point2, params: NodeParams) -> Self {
        Self { position, params }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("a plan needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("degenerate node layout: {0}")]
    DegenerateLayout(Degeneracy),
    #[error("node {node}: {param} = {value} outside [{min}, {max}]")]
    ParamOutOfRange {
        node: usize,
        param: Param,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("limits must be finite with min <= max and max_acceleration >= 0")]
    InvalidLimits,
    #[error("no node with index {0}")]
    UnknownNode(usize),
    #[error("expected {expected} parameter sets, got {got}")]
    ParamCountMismatch { expected: usize, got: usize },
}

impl PlanError {
    /// The node the error refers to, when there is one.
    pub fn node(&self) -> Option<usize> {
        match *self {
            PlanError::ParamOutOfRange { node, .. } | PlanError::UnknownNode(node) => Some(node),
            PlanError::DegenerateLayout(Degeneracy::Duplicate { second, .. }) => Some(second),
            PlanError::DegenerateLayout(Degeneracy::NonFinite(node)) => Some(node),
            _ => None,
        }
    }
}

impl From<GeometryError> for PlanError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::TooFewPoints(n) => PlanError::TooFewNodes(n),
            GeometryError::DegenerateInput(d) => PlanError::DegenerateLayout(d),
        }
    }
}

/// An edit applied by [`TrajectoryPlan::edit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeEdit {
    /// Appends a node.
    Insert(PlanNode),
    Update {
        index: usize,
        node: PlanNode,
    },
    Remove(usize),
}

/// Parameters sampled from a plan, with a flag telling whether the query
/// fell outside the triangulated region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanSample {
    pub params: NodeParams,
    pub fallback: bool,
}

/// A validated, triangulated plan. Immutable; edits return a new plan.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    nodes: Vec<PlanNode>,
    limits: PlanLimits,
    triangulation: Arc<Triangulation>,
}

impl TrajectoryPlan {
    pub fn new(nodes: Vec<PlanNode>, limits: PlanLimits) -> Result<Self, PlanError> {
        limits.validate()?;
        if nodes.len() < 3 {
            return Err(PlanError::TooFewNodes(nodes.len()));
        }
        for (i, node) in nodes.iter().enumerate() {
            if !node.position.is_finite() {
                return Err(PlanError::DegenerateLayout(Degeneracy::NonFinite(i)));
            }
            limits.check(i, &node.params)?;
        }
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if nodes[i].position.distance(nodes[j].position) <= NODE_SEPARATION {
                    return Err(PlanError::DegenerateLayout(Degeneracy::Duplicate {
                        first: i,
                        second: j,
                    }));
                }
            }
        }
        let positions: Vec<Point2> = nodes.iter().map(|n| n.position).collect();
        let triangulation = Arc::new(triangulate(&positions)?);
        Ok(Self {
            nodes,
            limits,
            triangulation,
        })
    }

    pub fn nodes(&self) -> &[PlanNode] {
        &self.nodes
    }

    pub fn limits(&self) -> &PlanLimits {
        &self.limits
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.triangulation
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.nodes.iter().map(|n| n.position).collect()
    }

    pub fn params(&self) -> Vec<NodeParams> {
        self.nodes.iter().map(|n| n.params).collect()
    }

    /// Returns a copy of the plan with the edit applied and the node set
    /// re-triangulated. `self` is left untouched.
    pub fn edit(&self, edit: NodeEdit) -> Result<Self, PlanError> {
        let mut nodes = self.nodes.clone();
        match edit {
            NodeEdit::Insert(node) => nodes.push(node),
            NodeEdit::Update { index, node } => {
                *nodes.get_mut(index).ok_or(PlanError::UnknownNode(index))? = node;
                if node.position == self.nodes[index].position {
                    self.limits.check(index, &node.params)?;
                    return Ok(Self {
                        nodes,
                        limits: self.limits,
                        triangulation: Arc::clone(&self.triangulation),
                    });
                }
            }
            NodeEdit::Remove(index) => {
                if index >= nodes.len() {
                    return Err(PlanError::UnknownNode(index));
                }
                nodes.remove(index);
            }
        }
        Self::new(nodes, self.limits)
    }

    /// Same layout and triangulation, new parameters. Used by the optimizer
    /// and the atlas, which never move nodes.
    pub fn with_params(&self, params: &[NodeParams]) -> Result<Self, PlanError> {
        if params.len() != self.nodes.len() {
            return Err(PlanError::ParamCountMismatch {
                expected: self.nodes.len(),
                got: params.len(),
            });
        }
        let nodes: Vec<PlanNode> = self
            .nodes
            .iter()
            .zip(params)
            .map(|(n, &p)| PlanNode::new(n.position, p))
            .collect();
        for (i, node) in nodes.iter().enumerate() {
            self.limits.check(i, &node.params)?;
        }
        Ok(Self {
            nodes,
            limits: self.limits,
            triangulation: Arc::clone(&self.triangulation),
        })
    }

    /// Parameters at `p`: inverse-distance interpolation over the containing
    /// triangle, or the nearest node's parameters outside the hull.
    pub fn sample(&self, p: Point2) -> PlanSample {
        match self.triangulation.locate(p) {
            Location::Triangle(t) => {
                let weights = IdwWeights::new(self.triangulation.corners(t), p);
                let params = self.interpolate(self.triangulation.triangles()[t], weights);
                PlanSample {
                    params,
                    fallback: false,
                }
            }
            Location::Outside => {
                let params = self.nodes[self.triangulation.nearest_vertex(p)].params;
                PlanSample {
                    params,
                    fallback: true,
                }
            }
        }
    }

    pub fn query(&self, p: Point2) -> NodeParams {
        self.sample(p).params
    }

    pub(crate) fn interpolate(&self, corners: [usize; 3], weights: IdwWeights) -> NodeParams {
        let values = corners.map(|i| self.nodes[i].params.to_array());
        let blended: [f64; 3] = std::array::from_fn(|k| weights.apply(values.map(|v| v[k])));
        NodeParams::from_array(blended).clamp_to(&self.limits)
    }

    /// Axis-aligned bounds of the node positions as `(min, max)`.
    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for n in &self.nodes {
            lo.x = lo.x.min(n.position.x);
            lo.y = lo.y.min(n.position.y);
            hi.x = hi.x.max(n.position.x);
            hi.y = hi.y.max(n.position.y);
        }
        (lo, hi)
    }
}
