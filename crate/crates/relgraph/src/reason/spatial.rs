//! Grid-direction solver for the step-game domain.
//!
//! Every direction label is a unit offset on an integer grid with x growing
//! rightward and y growing upward. An edge `(X, r, Y)` pins the displacement
//! `pos(X) − pos(Y)` to `offset(r)`. Walking a path source→target and
//! summing per-step offsets (negated when an edge is crossed against its
//! stored direction) telescopes to `pos(source) − pos(target)`; the sign of
//! that sum names the answer direction, with the all-zero sum mapping to
//! `overlap`.

use crate::graph::{Orientation, RelationGraph};
use crate::paths::{PathStep, ReasoningPath};
use crate::reason::ReasonError;
use crate::vocab::{Domain, STEPGAME_OVERLAP};

/// Unit offset `(dx, dy)` for a direction label.
pub fn offset(label: &str) -> Option<(i64, i64)> {
    Some(match label {
        "top" => (0, 1),
        "down" => (0, -1),
        "left" => (-1, 0),
        "right" => (1, 0),
        "top_left" => (-1, 1),
        "top_right" => (1, 1),
        "down_left" => (-1, -1),
        "down_right" => (1, -1),
        _ => return None,
    })
}

/// The label whose offset is the sign pattern of `(dx, dy)`; `overlap` for
/// the origin.
pub fn label_for_displacement(dx: i64, dy: i64) -> &'static str {
    match (dx.signum(), dy.signum()) {
        (0, 1) => "top",
        (0, -1) => "down",
        (-1, 0) => "left",
        (1, 0) => "right",
        (-1, 1) => "top_left",
        (1, 1) => "top_right",
        (-1, -1) => "down_left",
        (1, -1) => "down_right",
        _ => STEPGAME_OVERLAP,
    }
}

/// The direction label naming the opposite displacement.
pub fn opposite(label: &str) -> Option<&'static str> {
    let (dx, dy) = offset(label)?;
    Some(label_for_displacement(-dx, -dy))
}

/// Offset contributed by one path step: the edge's offset when crossed
/// head→tail, its negation when crossed tail→head.
pub fn step_offset(graph: &RelationGraph, step: &PathStep) -> Result<(i64, i64), ReasonError> {
    let edge = graph.edge(step.edge);
    let (dx, dy) = offset(&edge.relation).ok_or_else(|| ReasonError::UnknownRelationLabel {
        label: edge.relation.clone(),
        domain: Domain::Stepgame,
    })?;
    Ok(match step.orientation {
        Orientation::Forward => (dx, dy),
        Orientation::Backward => (-dx, -dy),
    })
}

/// Resolve a path to the direction from its source entity to its target
/// entity.
pub fn spatial_solve(graph: &RelationGraph, path: &ReasoningPath) -> Result<String, ReasonError> {
    let mut sum = (0i64, 0i64);
    for step in &path.steps {
        let (dx, dy) = step_offset(graph, step)?;
        sum.0 += dx;
        sum.1 += dy;
    }
    Ok(label_for_displacement(sum.0, sum.1).to_string())
}
