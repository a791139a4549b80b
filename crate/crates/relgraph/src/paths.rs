//! Reasoning-path identification.
//!
//! Between the query's source and target entities we enumerate simple paths
//! (no repeated node), treating every edge as traversable in both
//! directions. Enumeration order is deterministic: shorter paths first, ties
//! broken by the lexicographic sequence of node ids, so truncation by
//! `max_paths` always keeps the same prefix.

use crate::graph::{NodeId, Orientation, RelationGraph, RelationQuery};

/// One traversal step: which edge was crossed and in which direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub edge: usize,
    pub orientation: Orientation,
}

/// A simple path from the query source to the query target.
///
/// `nodes` lists the visited entities in order; `steps[i]` crosses from
/// `nodes[i]` to `nodes[i + 1]`, so `nodes.len() == steps.len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReasoningPath {
    pub nodes: Vec<NodeId>,
    pub steps: Vec<PathStep>,
}

impl ReasoningPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn source(&self) -> &NodeId {
        self.nodes.first().expect("path has at least two nodes")
    }

    pub fn target(&self) -> &NodeId {
        self.nodes.last().expect("path has at least two nodes")
    }
}

/// Errors from path enumeration and chain reconstruction.
#[derive(Debug, thiserror::Error)]
pub enum PathError {
    #[error("query node `{0}` is not in the graph")]
    UnknownNode(NodeId),
    #[error("invalid gold chain: {0}")]
    InvalidChain(String),
}

/// Enumerate simple paths from `query.source` to `query.target`.
///
/// Paths are produced shortest-first; equal-length paths are ordered by
/// their node-id sequences, and at most `max_paths` paths of at most
/// `max_len` steps are returned. Errors if either endpoint is missing from
/// the graph; endpoints in different components yield an empty list.
pub fn find_paths(
    graph: &RelationGraph,
    query: &RelationQuery,
    max_len: usize,
    max_paths: usize,
) -> Result<Vec<ReasoningPath>, PathError> {
    for id in [&query.source, &query.target] {
        if !graph.contains_node(id) {
            return Err(PathError::UnknownNode(id.clone()));
        }
    }
    let mut out = Vec::new();
    if max_paths == 0 || query.source == query.target {
        return Ok(out);
    }
    // Iterative deepening gives shortest-first order without enumerating
    // everything up front; each depth pass emits paths in lexicographic
    // node-sequence order because candidates are expanded sorted.
    for target_len in 1..=max_len {
        let mut walk = Walk {
            graph,
            target: &query.target,
            target_len,
            max_paths,
            nodes: vec![query.source.clone()],
            steps: Vec::new(),
            out: &mut out,
        };
        walk.descend();
        if out.len() >= max_paths {
            break;
        }
    }
    Ok(out)
}

struct Walk<'a> {
    graph: &'a RelationGraph,
    target: &'a NodeId,
    target_len: usize,
    max_paths: usize,
    nodes: Vec<NodeId>,
    steps: Vec<PathStep>,
    out: &'a mut Vec<ReasoningPath>,
}

impl Walk<'_> {
    fn descend(&mut self) {
        if self.out.len() >= self.max_paths {
            return;
        }
        let here = self.nodes.last().expect("walk starts non-empty").clone();
        if self.steps.len() == self.target_len {
            if &here == self.target {
                self.out.push(ReasoningPath {
                    nodes: self.nodes.clone(),
                    steps: self.steps.clone(),
                });
            }
            return;
        }
        let mut candidates: Vec<(NodeId, usize, Orientation)> = self
            .graph
            .incident_edges(&here)
            .expect("walk only visits graph nodes")
            .iter()
            .filter_map(|&(edge, orientation)| {
                let next = self.graph.step_target(edge, orientation);
                // Simple paths only; also refuse to pass through the target
                // before the final step.
                if self.nodes.contains(next)
                    || (next == self.target && self.steps.len() + 1 != self.target_len)
                {
                    None
                } else {
                    Some((next.clone(), edge, orientation))
                }
            })
            .collect();
        candidates.sort();
        for (next, edge, orientation) in candidates {
            self.nodes.push(next);
            self.steps.push(PathStep { edge, orientation });
            self.descend();
            self.steps.pop();
            self.nodes.pop();
            if self.out.len() >= self.max_paths {
                return;
            }
        }
    }
}

/// Rebuild a [`ReasoningPath`] from edge indices, inferring each step's
/// orientation by chaining from `query.source` to `query.target`.
///
/// Used to recover a gold sample's annotated main chain. Errors if the
/// indices do not form a connected simple chain between the endpoints.
pub fn reconstruct_chain(
    graph: &RelationGraph,
    edge_indices: &[usize],
    query: &RelationQuery,
) -> Result<ReasoningPath, PathError> {
    if edge_indices.is_empty() {
        return Err(PathError::InvalidChain("chain has no edges".into()));
    }
    let mut nodes = vec![query.source.clone()];
    let mut steps = Vec::new();
    for &edge in edge_indices {
        if edge >= graph.edges().len() {
            return Err(PathError::InvalidChain(format!(
                "edge index {edge} out of range ({} edges)",
                graph.edges().len()
            )));
        }
        let here = nodes.last().expect("nodes starts non-empty");
        let e = graph.edge(edge);
        let orientation = if &e.head == here {
            Orientation::Forward
        } else if &e.tail == here {
            Orientation::Backward
        } else {
            return Err(PathError::InvalidChain(format!(
                "edge {edge} ({} {} {}) does not touch `{here}`",
                e.head, e.relation, e.tail
            )));
        };
        let next = graph.step_target(edge, orientation).clone();
        if nodes.contains(&next) {
            return Err(PathError::InvalidChain(format!(
                "chain revisits node `{next}`"
            )));
        }
        steps.push(PathStep { edge, orientation });
        nodes.push(next);
    }
    if nodes.last() != Some(&query.target) {
        return Err(PathError::InvalidChain(format!(
            "chain ends at `{}`, query target is `{}`",
            nodes.last().expect("non-empty"),
            query.target
        )));
    }
    Ok(ReasoningPath { nodes, steps })
}

/// Render a path as `src -[rel>]- mid -[<rel]- tar`, with the angle bracket
/// marking the stored edge direction relative to travel.
pub fn format_path(graph: &RelationGraph, path: &ReasoningPath) -> String {
    let mut out = path.source().to_string();
    for (i, step) in path.steps.iter().enumerate() {
        let rel = &graph.edge(step.edge).relation;
        match step.orientation {
            Orientation::Forward => out.push_str(&format!(" -[{rel}>]- ")),
            Orientation::Backward => out.push_str(&format!(" -[<{rel}]- ")),
        }
        out.push_str(path.nodes[i + 1].as_str());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RelationEdge;
    use crate::vocab::Domain;

    fn diamond() -> RelationGraph {
        // A→B→D and A→C→D, with the B edge stored against travel direction.
        let mut g = RelationGraph::new(Domain::Stepgame);
        g.add_edge(RelationEdge::new("B", "down", "A")).unwrap();
        g.add_edge(RelationEdge::new("B", "top", "D")).unwrap();
        g.add_edge(RelationEdge::new("A", "left", "C")).unwrap();
        g.add_edge(RelationEdge::new("C", "top", "D")).unwrap();
        g
    }

    #[test]
    fn finds_all_simple_paths_shortest_first() {
        let g = diamond();
        let paths = find_paths(&g, &RelationQuery::new("A", "D"), 8, 64).unwrap();
        assert_eq!(paths.len(), 2);
        // Both length 2; B-route sorts before C-route by node sequence.
        let seqs: Vec<Vec<&str>> = paths
            .iter()
            .map(|p| p.nodes.iter().map(NodeId::as_str).collect())
            .collect();
        assert_eq!(seqs, vec![vec!["A", "B", "D"], vec!["A", "C", "D"]]);
        assert_eq!(paths[0].steps[0].orientation, Orientation::Backward);
        assert_eq!(paths[0].steps[1].orientation, Orientation::Forward);
    }

    #[test]
    fn max_paths_truncates_deterministically() {
        let g = diamond();
        let all = find_paths(&g, &RelationQuery::new("A", "D"), 8, 64).unwrap();
        let one = find_paths(&g, &RelationQuery::new("A", "D"), 8, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0], all[0]);
    }

    #[test]
    fn missing_endpoint_errors_and_disconnection_is_empty() {
        let g = diamond();
        assert!(matches!(
            find_paths(&g, &RelationQuery::new("A", "Z"), 8, 64),
            Err(PathError::UnknownNode(_))
        ));
        let mut g2 = diamond();
        g2.add_edge(RelationEdge::new("X", "top", "Y")).unwrap();
        let paths = find_paths(&g2, &RelationQuery::new("A", "X"), 8, 64).unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn reconstruct_chain_infers_orientations() {
        let g = diamond();
        let q = RelationQuery::new("A", "D");
        let path = reconstruct_chain(&g, &[0, 1], &q).unwrap();
        assert_eq!(path.steps[0].orientation, Orientation::Backward);
        assert_eq!(path.target().as_str(), "D");

        assert!(reconstruct_chain(&g, &[1, 0], &q).is_err());
        assert!(reconstruct_chain(&g, &[], &q).is_err());
        assert!(reconstruct_chain(&g, &[99], &q).is_err());
    }

    #[test]
    fn format_path_marks_edge_direction() {
        let g = diamond();
        let q = RelationQuery::new("A", "D");
        let path = reconstruct_chain(&g, &[0, 1], &q).unwrap();
        assert_eq!(format_path(&g, &path), "A -[<down]- B -[top>]- D");
    }
}
