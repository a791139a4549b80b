//! Whole-graph solving: the monolithic baseline that path-based reasoning
//! is compared against under noise.
//!
//! Instead of isolating a reasoning path, this solver consumes every edge
//! in the graph at once, the way a logic-program translation of the full
//! story would, and therefore inherits the full graph's inconsistencies:
//!
//! * grid domain — assign integer grid positions by propagation, then
//!   check every edge's direction label against the assigned positions;
//! * kinship domain — saturate pairwise relation facts under the rule
//!   table (including inverse readings), then look for pairs carrying
//!   incompatible labels or labels contradicting a declared gender.
//!
//! Any inconsistency yields [`WholeGraphOutcome::Conflict`]; a clean graph
//! yields the derived answer set for the query pair.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::graph::{Gender, NodeId, Orientation, RelationGraph, RelationQuery};
use crate::reason::kinship::KinshipRuleTable;
use crate::reason::spatial::{label_for_displacement, offset};
use crate::reason::ReasonError;
use crate::vocab::Domain;

/// Outcome of solving the full graph for a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WholeGraphOutcome {
    /// Derived relation labels for the query pair; empty when the endpoints
    /// are disconnected.
    Answers(BTreeSet<String>),
    /// The graph as a whole is inconsistent.
    Conflict,
}

/// Solve the complete graph for the query pair.
pub fn whole_graph_solve(
    graph: &RelationGraph,
    query: &RelationQuery,
    table: &KinshipRuleTable,
) -> Result<WholeGraphOutcome, ReasonError> {
    match graph.domain() {
        Domain::Stepgame => spatial_whole(graph, query),
        Domain::Clutrr => Ok(kinship_whole(graph, query, table)),
        other => Err(ReasonError::UnsupportedDomain(other)),
    }
}

/// Grid positions per node, assigned by breadth-first propagation from the
/// first node of each connected component. Positions are unique up to
/// per-component translation, so displacement between connected nodes is
/// well-defined.
pub fn spatial_positions(
    graph: &RelationGraph,
) -> Result<HashMap<NodeId, (i64, i64)>, ReasonError> {
    let mut pos: HashMap<NodeId, (i64, i64)> = HashMap::new();
    for start in graph.nodes() {
        if pos.contains_key(&start.id) {
            continue;
        }
        pos.insert(start.id.clone(), (0, 0));
        let mut queue = VecDeque::from([start.id.clone()]);
        while let Some(here) = queue.pop_front() {
            let at = pos[&here];
            for &(edge, orientation) in graph.incident_edges(&here).expect("node exists") {
                let e = graph.edge(edge);
                let (dx, dy) =
                    offset(&e.relation).ok_or_else(|| ReasonError::UnknownRelationLabel {
                        label: e.relation.clone(),
                        domain: Domain::Stepgame,
                    })?;
                // pos(head) − pos(tail) = offset, so leaving the head
                // subtracts the offset and leaving the tail adds it.
                let next = graph.step_target(edge, orientation).clone();
                if pos.contains_key(&next) {
                    continue;
                }
                let next_pos = match orientation {
                    Orientation::Forward => (at.0 - dx, at.1 - dy),
                    Orientation::Backward => (at.0 + dx, at.1 + dy),
                };
                pos.insert(next.clone(), next_pos);
                queue.push_back(next);
            }
        }
    }
    Ok(pos)
}

fn spatial_whole(
    graph: &RelationGraph,
    query: &RelationQuery,
) -> Result<WholeGraphOutcome, ReasonError> {
    let pos = spatial_positions(graph)?;
    // Every edge pins an exact unit displacement. Positions within a
    // component are unique up to translation, so checking each edge against
    // the propagated assignment decides feasibility of the whole constraint
    // system — independently of which propagation tree was used, and a
    // violation can never be masked by later additions.
    for e in graph.edges() {
        let (dx, dy) = offset(&e.relation).expect("validated above");
        let (hx, hy) = pos[&e.head];
        let (tx, ty) = pos[&e.tail];
        if (hx - tx, hy - ty) != (dx, dy) {
            return Ok(WholeGraphOutcome::Conflict);
        }
    }
    let (Some(&(sx, sy)), Some(&(tx, ty))) = (pos.get(&query.source), pos.get(&query.target))
    else {
        return Ok(WholeGraphOutcome::Answers(BTreeSet::new()));
    };
    // Disconnected endpoints live in different components; their positions
    // are not comparable.
    if !connected(graph, &query.source, &query.target) {
        return Ok(WholeGraphOutcome::Answers(BTreeSet::new()));
    }
    let label = label_for_displacement(sx - tx, sy - ty);
    Ok(WholeGraphOutcome::Answers(BTreeSet::from([
        label.to_string()
    ])))
}

fn connected(graph: &RelationGraph, a: &NodeId, b: &NodeId) -> bool {
    if !graph.contains_node(a) || !graph.contains_node(b) {
        return false;
    }
    let mut seen = BTreeSet::from([a.clone()]);
    let mut queue = VecDeque::from([a.clone()]);
    while let Some(here) = queue.pop_front() {
        if &here == b {
            return true;
        }
        for &(edge, orientation) in graph.incident_edges(&here).expect("node exists") {
            let next = graph.step_target(edge, orientation);
            if seen.insert(next.clone()) {
                queue.push_back(next.clone());
            }
        }
    }
    false
}

/// Fixpoint of pairwise derivation as bit masks over the table's interned
/// label universe: `facts[x * n + y]` holds the candidate-label mask for
/// "x's ⟨label⟩ is y".
struct MaskClosure {
    node_ids: Vec<NodeId>,
    genders: Vec<Gender>,
    facts: Vec<u64>,
}

fn closure_masks(graph: &RelationGraph, table: &KinshipRuleTable) -> MaskClosure {
    let dense = table.dense();
    let nodes = graph.nodes();
    let node_ids: Vec<NodeId> = nodes.iter().map(|n| n.id.clone()).collect();
    let genders: Vec<Gender> = nodes.iter().map(|n| n.gender).collect();
    let index: HashMap<&NodeId, usize> =
        node_ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let n = node_ids.len();
    let mut facts = vec![0u64; n * n];
    for e in graph.edges() {
        let (h, t) = (index[&e.head], index[&e.tail]);
        if h == t {
            continue;
        }
        let Some(label) = dense.id_of(&e.relation) else {
            continue;
        };
        facts[h * n + t] |= 1 << label;
        facts[t * n + h] |= dense.inverse_mask(label, genders[h]);
    }
    // Worklist to the least fixpoint: whenever a pair gains labels, retry
    // every composition that reads that pair, on either side.
    let mut queued = vec![false; n * n];
    let mut work: VecDeque<(usize, usize)> = VecDeque::new();
    for x in 0..n {
        for y in 0..n {
            if facts[x * n + y] != 0 {
                work.push_back((x, y));
                queued[x * n + y] = true;
            }
        }
    }
    while let Some((x, w)) = work.pop_front() {
        queued[x * n + w] = false;
        let fxw = facts[x * n + w];
        for y in 0..n {
            if y == x || y == w {
                continue;
            }
            // Extend right: (x,w) ∘ (w,y) → (x,y).
            let fwy = facts[w * n + y];
            if fwy != 0 {
                let add = dense.compose_masks(fxw, fwy, genders[y]) & !facts[x * n + y];
                if add != 0 {
                    facts[x * n + y] |= add;
                    if !queued[x * n + y] {
                        queued[x * n + y] = true;
                        work.push_back((x, y));
                    }
                }
            }
            // Extend left: (y,x) ∘ (x,w) → (y,w).
            let fyx = facts[y * n + x];
            if fyx != 0 {
                let add = dense.compose_masks(fyx, fxw, genders[w]) & !facts[y * n + w];
                if add != 0 {
                    facts[y * n + w] |= add;
                    if !queued[y * n + w] {
                        queued[y * n + w] = true;
                        work.push_back((y, w));
                    }
                }
            }
        }
    }
    MaskClosure {
        node_ids,
        genders,
        facts,
    }
}

/// All derivable pairwise relation facts: `(x, y) → labels` meaning "x's
/// ⟨label⟩ is y". Edges seed the map directly and via gendered inverses;
/// composition through intermediate nodes runs to fixpoint.
pub fn kinship_closure(
    graph: &RelationGraph,
    table: &KinshipRuleTable,
) -> HashMap<(NodeId, NodeId), BTreeSet<String>> {
    let closure = closure_masks(graph, table);
    let dense = table.dense();
    let n = closure.node_ids.len();
    let mut out = HashMap::new();
    for x in 0..n {
        for y in 0..n {
            let mask = closure.facts[x * n + y];
            if mask != 0 {
                out.insert(
                    (closure.node_ids[x].clone(), closure.node_ids[y].clone()),
                    dense.set_from_mask(mask),
                );
            }
        }
    }
    out
}

fn kinship_whole(
    graph: &RelationGraph,
    query: &RelationQuery,
    table: &KinshipRuleTable,
) -> WholeGraphOutcome {
    let closure = closure_masks(graph, table);
    let dense = table.dense();
    let n = closure.node_ids.len();
    // A label pointing at y that disagrees with y's declared gender or with
    // another derived label for the same pair is a contradiction.
    for y in 0..n {
        let declared = closure.genders[y];
        for x in 0..n {
            let mask = closure.facts[x * n + y];
            if mask != 0 && dense.conflicts(mask, declared) {
                return WholeGraphOutcome::Conflict;
            }
        }
    }
    let position = |id: &NodeId| closure.node_ids.iter().position(|n| n == id);
    let answers = match (position(&query.source), position(&query.target)) {
        (Some(s), Some(t)) => dense.set_from_mask(closure.facts[s * n + t]),
        _ => BTreeSet::new(),
    };
    WholeGraphOutcome::Answers(answers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EntityNode, RelationEdge};

    #[test]
    fn consistent_grid_graph_answers_from_positions() {
        let mut g = RelationGraph::new(Domain::Stepgame);
        g.add_edge(RelationEdge::new("A", "top_left", "D")).unwrap();
        g.add_edge(RelationEdge::new("D", "top", "J")).unwrap();
        g.add_edge(RelationEdge::new("J", "down_left", "S"))
            .unwrap();
        // Hanging irrelevant edge.
        g.add_edge(RelationEdge::new("Q", "left", "D")).unwrap();
        let out = whole_graph_solve(
            &g,
            &RelationQuery::new("A", "S"),
            KinshipRuleTable::builtin(),
        )
        .unwrap();
        assert_eq!(
            out,
            WholeGraphOutcome::Answers(BTreeSet::from(["top_left".to_string()]))
        );
    }

    #[test]
    fn contradictory_grid_pair_conflicts() {
        let mut g = RelationGraph::new(Domain::Stepgame);
        g.add_edge(RelationEdge::new("A", "top", "B")).unwrap();
        g.add_edge(RelationEdge::new("A", "down", "B")).unwrap();
        let out = whole_graph_solve(
            &g,
            &RelationQuery::new("A", "B"),
            KinshipRuleTable::builtin(),
        )
        .unwrap();
        assert_eq!(out, WholeGraphOutcome::Conflict);
    }

    #[test]
    fn disconnected_endpoints_answer_empty() {
        let mut g = RelationGraph::new(Domain::Stepgame);
        g.add_edge(RelationEdge::new("A", "top", "B")).unwrap();
        g.add_edge(RelationEdge::new("X", "left", "Y")).unwrap();
        let out = whole_graph_solve(
            &g,
            &RelationQuery::new("A", "X"),
            KinshipRuleTable::builtin(),
        )
        .unwrap();
        assert_eq!(out, WholeGraphOutcome::Answers(BTreeSet::new()));
    }

    #[test]
    fn clean_family_graph_derives_the_chain_answer() {
        let mut g = RelationGraph::new(Domain::Clutrr);
        for (n, gd) in [
            ("Marion", Gender::Female),
            ("Edd", Gender::Male),
            ("Washington", Gender::Male),
            ("Bird", Gender::Male),
        ] {
            g.upsert_node(EntityNode::with_gender(n, gd));
        }
        g.add_edge(RelationEdge::new("Edd", "sister", "Marion"))
            .unwrap();
        g.add_edge(RelationEdge::new("Washington", "father", "Edd"))
            .unwrap();
        g.add_edge(RelationEdge::new("Washington", "uncle", "Bird"))
            .unwrap();
        let out = whole_graph_solve(
            &g,
            &RelationQuery::new("Marion", "Bird"),
            KinshipRuleTable::builtin(),
        )
        .unwrap();
        match out {
            WholeGraphOutcome::Answers(set) => assert!(set.contains("brother"), "got {set:?}"),
            WholeGraphOutcome::Conflict => panic!("clean graph must not conflict"),
        }
    }

    #[test]
    fn incompatible_kinship_pair_conflicts() {
        let mut g = RelationGraph::new(Domain::Clutrr);
        g.upsert_node(EntityNode::with_gender("Ann", Gender::Female));
        g.upsert_node(EntityNode::with_gender("Bob", Gender::Male));
        g.upsert_node(EntityNode::with_gender("New", Gender::Male));
        // New cannot be both Ann's son and Ann's grandfather.
        g.add_edge(RelationEdge::new("Ann", "son", "New")).unwrap();
        g.add_edge(RelationEdge::new("Ann", "grandfather", "New"))
            .unwrap();
        g.add_edge(RelationEdge::new("Ann", "husband", "Bob"))
            .unwrap();
        let out = whole_graph_solve(
            &g,
            &RelationQuery::new("Ann", "Bob"),
            KinshipRuleTable::builtin(),
        )
        .unwrap();
        assert_eq!(out, WholeGraphOutcome::Conflict);
    }

    #[test]
    fn gender_contradicting_label_conflicts() {
        let mut g = RelationGraph::new(Domain::Clutrr);
        g.upsert_node(EntityNode::with_gender("Ann", Gender::Female));
        g.upsert_node(EntityNode::with_gender("Max", Gender::Male));
        // "Ann's sister is Max" contradicts Max's declared gender.
        g.add_edge(RelationEdge::new("Ann", "sister", "Max"))
            .unwrap();
        let out = whole_graph_solve(
            &g,
            &RelationQuery::new("Ann", "Max"),
            KinshipRuleTable::builtin(),
        )
        .unwrap();
        assert_eq!(out, WholeGraphOutcome::Conflict);
    }
}
