//! Entity-relation graph: the shared data model for every pipeline stage.
//!
//! A [`RelationGraph`] holds typed entity nodes and directed, labeled edges.
//! An edge `(head, relation, tail)` reads "head's ⟨relation⟩ is tail": the
//! kinship edge `(Edd, sister, Marion)` states that Edd's sister is Marion,
//! and the grid edge `(A, top_left, D)` states that A sits to the top-left
//! of D. Edges are traversable in both directions; consumers receive an
//! [`Orientation`] telling them which way a traversal crossed the edge.

use std::collections::HashMap;
use std::fmt;

use crate::vocab::{Domain, Vocabulary};

/// Opaque node identifier. Single letters in the grid domain, person names
/// in the kinship domains, normalized noun phrases in the region domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// Gender attribute carried by kinship entities; `Unknown` when the text
/// gives no tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Some(Gender::Male),
            "female" | "f" => Some(Gender::Female),
            "unknown" => Some(Gender::Unknown),
            _ => None,
        }
    }
}

/// Relative-age attribute from `<older>` / `<younger>` tags in the Chinese
/// kinship prompts. On an edge it orders head against tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelativeAge {
    Older,
    Younger,
    Unknown,
}

impl RelativeAge {
    pub fn as_str(&self) -> &'static str {
        match self {
            RelativeAge::Older => "older",
            RelativeAge::Younger => "younger",
            RelativeAge::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<RelativeAge> {
        match s.trim().to_ascii_lowercase().as_str() {
            "older" => Some(RelativeAge::Older),
            "younger" => Some(RelativeAge::Younger),
            "unknown" => Some(RelativeAge::Unknown),
            _ => None,
        }
    }
}

/// One entity in the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityNode {
    pub id: NodeId,
    pub gender: Gender,
    pub relative_age: RelativeAge,
}

impl EntityNode {
    pub fn new(id: impl Into<NodeId>) -> Self {
        EntityNode {
            id: id.into(),
            gender: Gender::Unknown,
            relative_age: RelativeAge::Unknown,
        }
    }

    pub fn with_gender(id: impl Into<NodeId>, gender: Gender) -> Self {
        EntityNode {
            id: id.into(),
            gender,
            relative_age: RelativeAge::Unknown,
        }
    }
}

/// One directed, labeled edge: "head's ⟨relation⟩ is tail".
///
/// `seniority` carries an `<older>`/`<younger>` tag attached to the relation
/// token where the source text provides one (head relative to tail); it is
/// auxiliary and does not participate in edge identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationEdge {
    pub head: NodeId,
    pub relation: String,
    pub tail: NodeId,
    pub seniority: RelativeAge,
}

impl RelationEdge {
    pub fn new(
        head: impl Into<NodeId>,
        relation: impl Into<String>,
        tail: impl Into<NodeId>,
    ) -> Self {
        RelationEdge {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
            seniority: RelativeAge::Unknown,
        }
    }
}

/// The question attached to a story: what relation holds from `source` to
/// `target`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationQuery {
    pub source: NodeId,
    pub target: NodeId,
}

impl RelationQuery {
    pub fn new(source: impl Into<NodeId>, target: impl Into<NodeId>) -> Self {
        RelationQuery {
            source: source.into(),
            target: target.into(),
        }
    }
}

/// Which way a traversal crossed an edge: `Forward` runs head→tail,
/// `Backward` runs tail→head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Forward,
    Backward,
}

/// Result of [`RelationGraph::add_edge`]: the edge's index, plus whether it
/// was newly stored or an exact duplicate of an existing edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOutcome {
    Added(usize),
    Duplicate(usize),
}

impl EdgeOutcome {
    pub fn index(&self) -> usize {
        match *self {
            EdgeOutcome::Added(i) | EdgeOutcome::Duplicate(i) => i,
        }
    }
}

/// Errors from graph construction and (de)serialization.
#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("relation label `{label}` is not in the {domain} vocabulary")]
    UnknownRelationLabel { label: String, domain: Domain },
    #[error("node `{0}` is not in the graph")]
    UnknownNode(NodeId),
    #[error("graph record line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },
}

/// Directed multigraph of entities and relations for one story.
///
/// Nodes and edges keep insertion order; exact duplicate edges (same head,
/// relation, and tail) are stored once, while parallel edges that differ in
/// relation are all kept. Once built, a graph is read-only and safe to share
/// across threads.
#[derive(Debug, Clone)]
pub struct RelationGraph {
    domain: Domain,
    nodes: Vec<EntityNode>,
    node_index: HashMap<NodeId, usize>,
    edges: Vec<RelationEdge>,
    adjacency: HashMap<NodeId, Vec<(usize, Orientation)>>,
}

impl RelationGraph {
    pub fn new(domain: Domain) -> Self {
        RelationGraph {
            domain,
            nodes: Vec::new(),
            node_index: HashMap::new(),
            edges: Vec::new(),
            adjacency: HashMap::new(),
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn nodes(&self) -> &[EntityNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RelationEdge] {
        &self.edges
    }

    pub fn node(&self, id: &NodeId) -> Option<&EntityNode> {
        self.node_index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.node_index.contains_key(id)
    }

    pub fn edge(&self, index: usize) -> &RelationEdge {
        &self.edges[index]
    }

    /// Insert a node, or merge attributes into an existing node with the
    /// same id. Known gender/age win over `Unknown`; when two known values
    /// disagree the first one sticks and the conflict is reported back so
    /// callers can surface a warning.
    pub fn upsert_node(&mut self, node: EntityNode) -> Option<String> {
        match self.node_index.get(&node.id) {
            Some(&i) => {
                let existing = &mut self.nodes[i];
                let mut conflict = None;
                match (existing.gender, node.gender) {
                    (Gender::Unknown, g) => existing.gender = g,
                    (have, got) if got != Gender::Unknown && got != have => {
                        conflict = Some(format!(
                            "node `{}`: gender {} conflicts with earlier {}; keeping {}",
                            node.id,
                            got.as_str(),
                            have.as_str(),
                            have.as_str()
                        ));
                    }
                    _ => {}
                }
                if existing.relative_age == RelativeAge::Unknown {
                    existing.relative_age = node.relative_age;
                }
                conflict
            }
            None => {
                self.node_index.insert(node.id.clone(), self.nodes.len());
                self.adjacency.entry(node.id.clone()).or_default();
                self.nodes.push(node);
                None
            }
        }
    }

    /// Add an edge, validating the relation label against the domain
    /// vocabulary and auto-creating endpoints that are not yet present.
    /// Re-adding an exact duplicate is a no-op returning the original index.
    pub fn add_edge(&mut self, edge: RelationEdge) -> Result<EdgeOutcome, GraphError> {
        let vocab = Vocabulary::for_domain(self.domain);
        let relation = vocab.normalize_edge_label(&edge.relation).ok_or_else(|| {
            GraphError::UnknownRelationLabel {
                label: edge.relation.clone(),
                domain: self.domain,
            }
        })?;
        if let Some(i) = self.find_edge(&edge.head, &relation, &edge.tail) {
            return Ok(EdgeOutcome::Duplicate(i));
        }
        self.upsert_node(EntityNode::new(edge.head.clone()));
        self.upsert_node(EntityNode::new(edge.tail.clone()));
        let index = self.edges.len();
        // Forward entry first so that a self-loop lists head→tail before
        // tail→head.
        self.adjacency
            .get_mut(&edge.head)
            .expect("endpoint upserted above")
            .push((index, Orientation::Forward));
        self.adjacency
            .get_mut(&edge.tail)
            .expect("endpoint upserted above")
            .push((index, Orientation::Backward));
        self.edges.push(RelationEdge {
            head: edge.head,
            relation,
            tail: edge.tail,
            seniority: edge.seniority,
        });
        Ok(EdgeOutcome::Added(index))
    }

    /// Index of the edge with exactly this head, relation, and tail.
    pub fn find_edge(&self, head: &NodeId, relation: &str, tail: &NodeId) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| &e.head == head && e.relation == relation && &e.tail == tail)
    }

    /// Edges incident to a node as `(edge index, orientation)` pairs, where
    /// the orientation is the direction that leaves the node. Ordered by
    /// edge insertion, forward entry before backward when an edge touches
    /// the node at both ends.
    pub fn incident_edges(&self, id: &NodeId) -> Result<&[(usize, Orientation)], GraphError> {
        self.adjacency
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| GraphError::UnknownNode(id.clone()))
    }

    /// The node reached by crossing `edge_index` with the given orientation.
    pub fn step_target(&self, edge_index: usize, orientation: Orientation) -> &NodeId {
        let e = &self.edges[edge_index];
        match orientation {
            Orientation::Forward => &e.tail,
            Orientation::Backward => &e.head,
        }
    }

    /// The node a traversal of `edge_index` starts from.
    pub fn step_source(&self, edge_index: usize, orientation: Orientation) -> &NodeId {
        let e = &self.edges[edge_index];
        match orientation {
            Orientation::Forward => &e.head,
            Orientation::Backward => &e.tail,
        }
    }

    /// Serialize to the line-oriented text form. Fields are tab-separated so
    /// multi-word region-domain identifiers survive; `read_graph_text`
    /// restores the result bit-exactly.
    ///
    /// ```text
    /// N⇥id⇥gender=female⇥age=unknown
    /// E⇥head⇥relation⇥tail
    /// Q⇥source⇥target
    /// ```
    pub fn to_text(&self, query: Option<&RelationQuery>) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            out.push_str(&format!(
                "N\t{}\tgender={}\tage={}\n",
                n.id,
                n.gender.as_str(),
                n.relative_age.as_str()
            ));
        }
        for e in &self.edges {
            out.push_str(&format!("E\t{}\t{}\t{}", e.head, e.relation, e.tail));
            if e.seniority != RelativeAge::Unknown {
                out.push_str(&format!("\tage={}", e.seniority.as_str()));
            }
            out.push('\n');
        }
        if let Some(q) = query {
            out.push_str(&format!("Q\t{}\t{}\n", q.source, q.target));
        }
        out
    }
}

/// Parse the text form produced by [`RelationGraph::to_text`].
///
/// Lines are `N` (node), `E` (edge), or `Q` (query) records; blank lines and
/// `#` comments are skipped. Tab-separated fields are authoritative; plain
/// spaces also work when identifiers are single words.
pub fn read_graph_text(
    domain: Domain,
    text: &str,
) -> Result<(RelationGraph, Option<RelationQuery>), GraphError> {
    let mut graph = RelationGraph::new(domain);
    let mut query = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields = split_record(line);
        let err = |reason: &str| GraphError::InvalidRecord {
            line: lineno + 1,
            reason: reason.to_string(),
        };
        match fields.first().map(String::as_str) {
            Some("N") => {
                let (id, gender, age) = parse_node_fields(&fields[1..])
                    .ok_or_else(|| err("expected `N <id> gender=<g> age=<a>`"))?;
                graph.upsert_node(EntityNode {
                    id: NodeId::new(id),
                    gender,
                    relative_age: age,
                });
            }
            Some("E") => {
                let (head, relation, tail, seniority) = parse_edge_fields(domain, &fields[1..])
                    .ok_or_else(|| err("expected `E <head> <relation> <tail>`"))?;
                let mut edge = RelationEdge::new(head, relation, tail);
                edge.seniority = seniority;
                graph.add_edge(edge).map_err(|e| match e {
                    GraphError::UnknownRelationLabel { label, domain } => {
                        GraphError::InvalidRecord {
                            line: lineno + 1,
                            reason: format!("relation `{label}` not in {domain} vocabulary"),
                        }
                    }
                    other => other,
                })?;
            }
            Some("Q") => {
                if fields.len() != 3 {
                    return Err(err("expected `Q <source> <target>`"));
                }
                query = Some(RelationQuery::new(fields[1].as_str(), fields[2].as_str()));
            }
            _ => return Err(err("unknown record type (want N, E, or Q)")),
        }
    }
    Ok((graph, query))
}

/// Split a record line into fields: tabs are the canonical separator; a line
/// without tabs falls back to whitespace splitting.
fn split_record(line: &str) -> Vec<String> {
    if line.contains('\t') {
        line.split('\t').map(|s| s.trim().to_string()).collect()
    } else {
        line.split_whitespace().map(str::to_string).collect()
    }
}

fn parse_node_fields(fields: &[String]) -> Option<(String, Gender, RelativeAge)> {
    // Trailing `gender=` / `age=` fields; everything before them is the id
    // (space-joined when the line was not tab-separated).
    let mut gender = Gender::Unknown;
    let mut age = RelativeAge::Unknown;
    let mut id_end = fields.len();
    for (i, f) in fields.iter().enumerate() {
        if let Some(v) = f.strip_prefix("gender=") {
            gender = Gender::parse(v)?;
            id_end = id_end.min(i);
        } else if let Some(v) = f.strip_prefix("age=") {
            age = RelativeAge::parse(v)?;
            id_end = id_end.min(i);
        }
    }
    if id_end == 0 {
        return None;
    }
    Some((fields[..id_end].join(" "), gender, age))
}

fn parse_edge_fields(
    domain: Domain,
    fields: &[String],
) -> Option<(String, String, String, RelativeAge)> {
    let mut fields = fields.to_vec();
    let mut seniority = RelativeAge::Unknown;
    if let Some(last) = fields.last() {
        if let Some(v) = last.strip_prefix("age=") {
            seniority = RelativeAge::parse(v)?;
            fields.pop();
        }
    }
    if fields.len() == 3 {
        return Some((
            fields[0].clone(),
            fields[1].clone(),
            fields[2].clone(),
            seniority,
        ));
    }
    // Space-split line with multi-word identifiers: locate the relation as
    // the first interior token that normalizes into the vocabulary.
    let vocab = Vocabulary::for_domain(domain);
    for i in 1..fields.len().saturating_sub(1) {
        if vocab.normalize_edge_label(&fields[i]).is_some() {
            return Some((
                fields[..i].join(" "),
                fields[i].clone(),
                fields[i + 1..].join(" "),
                seniority,
            ));
        }
    }
    None
}
