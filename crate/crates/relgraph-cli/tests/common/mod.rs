//! Independent oracles the acceptance suite checks the library against.
//!
//! Each oracle re-derives its answer from first principles — exhaustive
//! search, coordinate arithmetic, or an explicit genealogy — sharing no
//! code with the implementations under test.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use relgraph::graph::{Gender, NodeId, Orientation, RelationGraph, RelationQuery};
use relgraph::paths::ReasoningPath;

/// A path as (node ids, (edge index, forward?) steps), the comparison
/// currency between [`oracle_simple_paths`] and `find_paths`.
pub type FlatPath = (Vec<String>, Vec<(usize, bool)>);

pub fn flatten(path: &ReasoningPath) -> FlatPath {
    (
        path.nodes.iter().map(|n| n.as_str().to_string()).collect(),
        path.steps
            .iter()
            .map(|s| (s.edge, s.orientation == Orientation::Forward))
            .collect(),
    )
}

/// Every simple path between the query endpoints, by brute force: a
/// recursive walk over the raw edge list trying both directions of every
/// edge at every step.
pub fn oracle_simple_paths(graph: &RelationGraph, query: &RelationQuery) -> Vec<FlatPath> {
    fn walk(
        graph: &RelationGraph,
        current: &NodeId,
        target: &NodeId,
        nodes: &mut Vec<String>,
        steps: &mut Vec<(usize, bool)>,
        out: &mut Vec<FlatPath>,
    ) {
        for (i, edge) in graph.edges().iter().enumerate() {
            let (next, forward) = if &edge.head == current {
                (&edge.tail, true)
            } else if &edge.tail == current {
                (&edge.head, false)
            } else {
                continue;
            };
            if nodes.iter().any(|n| n == next.as_str()) {
                continue;
            }
            nodes.push(next.as_str().to_string());
            steps.push((i, forward));
            if next == target {
                out.push((nodes.clone(), steps.clone()));
            } else {
                walk(graph, next, target, nodes, steps, out);
            }
            nodes.pop();
            steps.pop();
        }
    }
    let mut out = Vec::new();
    if !graph.contains_node(&query.source)
        || !graph.contains_node(&query.target)
        || query.source == query.target
    {
        return out;
    }
    let mut nodes = vec![query.source.as_str().to_string()];
    let mut steps = Vec::new();
    walk(
        graph,
        &query.source,
        &query.target,
        &mut nodes,
        &mut steps,
        &mut out,
    );
    out
}

/// Independent coordinate-arithmetic answer for a grid path: re-derives
/// every direction as an (east, north) unit vector, sums them with signs
/// from the traversal direction, and maps the total back to a direction
/// name by quadrant.
pub fn oracle_spatial(graph: &RelationGraph, path: &ReasoningPath) -> String {
    let mut east = 0i64;
    let mut north = 0i64;
    for step in &path.steps {
        let edge = graph.edge(step.edge);
        let (de, dn) = match edge.relation.as_str() {
            "top" => (0, 1),
            "down" => (0, -1),
            "left" => (-1, 0),
            "right" => (1, 0),
            "top_left" => (-1, 1),
            "top_right" => (1, 1),
            "down_left" => (-1, -1),
            "down_right" => (1, -1),
            other => panic!("oracle given non-grid relation {other}"),
        };
        match step.orientation {
            Orientation::Forward => {
                east += de;
                north += dn;
            }
            Orientation::Backward => {
                east -= de;
                north -= dn;
            }
        }
    }
    match (east.signum(), north.signum()) {
        (0, 0) => "overlap",
        (0, 1) => "top",
        (0, -1) => "down",
        (1, 0) => "right",
        (-1, 0) => "left",
        (1, 1) => "top_right",
        (-1, 1) => "top_left",
        (1, -1) => "down_right",
        (-1, -1) => "down_left",
        _ => unreachable!("signum is -1, 0, or 1"),
    }
    .to_string()
}

/// One person in an explicit genealogy.
pub struct Person {
    pub name: String,
    pub male: bool,
    /// (father, mother) indices; founders and married-in spouses have none.
    pub parents: Option<(usize, usize)>,
    pub spouse: Option<usize>,
}

/// An explicit family: relations are *derived from structure*, never from
/// composition rules, making this an independent referee for the kinship
/// algebra.
pub struct Family {
    pub people: Vec<Person>,
}

impl Family {
    fn add(&mut self, male: bool, parents: Option<(usize, usize)>) -> usize {
        let id = self.people.len();
        self.people.push(Person {
            name: format!("p{id}"),
            male,
            parents,
            spouse: None,
        });
        id
    }

    fn marry(&mut self, a: usize, b: usize) {
        self.people[a].spouse = Some(b);
        self.people[b].spouse = Some(a);
    }

    pub fn gender(&self, x: usize) -> Gender {
        if self.people[x].male {
            Gender::Male
        } else {
            Gender::Female
        }
    }

    fn parents_of(&self, x: usize) -> Vec<usize> {
        self.people[x]
            .parents
            .map(|(f, m)| vec![f, m])
            .unwrap_or_default()
    }

    fn ancestors_at(&self, x: usize, depth: u32) -> Vec<usize> {
        if depth == 0 {
            return vec![x];
        }
        self.parents_of(x)
            .into_iter()
            .flat_map(|p| self.ancestors_at(p, depth - 1))
            .collect()
    }

    fn children_of(&self, x: usize) -> Vec<usize> {
        (0..self.people.len())
            .filter(|&c| self.parents_of(c).contains(&x))
            .collect()
    }

    fn descendants_at(&self, x: usize, depth: u32) -> Vec<usize> {
        if depth == 0 {
            return vec![x];
        }
        self.children_of(x)
            .into_iter()
            .flat_map(|c| self.descendants_at(c, depth - 1))
            .collect()
    }

    fn full_siblings(&self, x: usize) -> Vec<usize> {
        match self.people[x].parents {
            None => Vec::new(),
            Some(pair) => (0..self.people.len())
                .filter(|&s| s != x && self.people[s].parents == Some(pair))
                .collect(),
        }
    }

    /// The label `l` such that "x's `l` is y", derived purely from the
    /// family structure; `None` when the pair has no name in the closed
    /// label vocabulary (e.g. cousins).
    pub fn relation_label(&self, x: usize, y: usize) -> Option<&'static str> {
        if x == y {
            return None;
        }
        let male = self.people[y].male;
        let pick = |m: &'static str, f: &'static str| if male { m } else { f };
        if self.parents_of(x).contains(&y) {
            return Some(pick("father", "mother"));
        }
        if self.parents_of(y).contains(&x) {
            return Some(pick("son", "daughter"));
        }
        if self.full_siblings(x).contains(&y) {
            return Some(pick("brother", "sister"));
        }
        if self.people[x].spouse == Some(y) {
            return Some(pick("husband", "wife"));
        }
        if self.ancestors_at(x, 2).contains(&y) {
            return Some(pick("grandfather", "grandmother"));
        }
        if self.descendants_at(x, 2).contains(&y) {
            return Some(pick("grandson", "granddaughter"));
        }
        if self.ancestors_at(x, 3).contains(&y) {
            return Some(pick("greatgrandfather", "greatgrandmother"));
        }
        if self.descendants_at(x, 3).contains(&y) {
            return Some(pick("greatgrandson", "greatgranddaughter"));
        }
        // Blood uncle/aunt only: a parent's full sibling.
        if self
            .parents_of(x)
            .iter()
            .any(|&p| self.full_siblings(p).contains(&y))
        {
            return Some(pick("uncle", "aunt"));
        }
        if self
            .full_siblings(x)
            .iter()
            .any(|&s| self.children_of(s).contains(&y))
        {
            return Some(pick("nephew", "niece"));
        }
        if let Some(spouse) = self.people[x].spouse {
            if self.parents_of(spouse).contains(&y) {
                return Some(pick("father-in-law", "mother-in-law"));
            }
        }
        if self
            .children_of(x)
            .iter()
            .any(|&c| self.people[c].spouse == Some(y))
        {
            return Some(pick("son-in-law", "daughter-in-law"));
        }
        None
    }
}

/// Grow a random family: one founding couple, then up to three children
/// per couple, most of whom marry fresh outsiders (so in-law relations
/// exist but no blood lines cross).
pub fn random_family(rng: &mut ChaCha8Rng, max_people: usize) -> Family {
    let mut family = Family { people: Vec::new() };
    let father = family.add(true, None);
    let mother = family.add(false, None);
    family.marry(father, mother);
    let mut couples = vec![(father, mother)];
    for _generation in 0..3 {
        let mut next = Vec::new();
        for &(f, m) in &couples {
            for _ in 0..rng.gen_range(1..=3) {
                if family.people.len() + 2 > max_people {
                    break;
                }
                let male = rng.gen_bool(0.5);
                let child = family.add(male, Some((f, m)));
                if rng.gen_bool(0.7) {
                    let spouse = family.add(!male, None);
                    family.marry(child, spouse);
                    next.push(if male {
                        (child, spouse)
                    } else {
                        (spouse, child)
                    });
                }
            }
        }
        couples = next;
        if couples.is_empty() {
            break;
        }
    }
    family
}

/// Every simple index-path of length ≤ `max_len` whose consecutive pairs
/// all have a named relation.
pub fn labeled_paths(family: &Family, max_len: usize) -> Vec<Vec<usize>> {
    fn extend(family: &Family, path: &mut Vec<usize>, max_len: usize, out: &mut Vec<Vec<usize>>) {
        if path.len() > 1 {
            out.push(path.clone());
        }
        if path.len() > max_len {
            return;
        }
        let last = *path.last().expect("non-empty");
        for next in 0..family.people.len() {
            if path.contains(&next) || family.relation_label(last, next).is_none() {
                continue;
            }
            path.push(next);
            extend(family, path, max_len, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for start in 0..family.people.len() {
        let mut path = vec![start];
        extend(family, &mut path, max_len, &mut out);
    }
    out
}
