//! Gold-sample generation and graph-noise injection.
//!
//! A [`GoldSample`] is a synthetic story graph with a known main chain (the
//! path that justifies the answer), hanging irrelevant branches, a query,
//! and the gold answer set. Seven noise types perturb everything *except*
//! the main chain, which is preserved verbatim so that path-based
//! reasoning has an intact route to the answer while whole-graph solvers
//! see increasingly broken input:
//!
//! | type | effect                                                        |
//! |------|---------------------------------------------------------------|
//! | A    | flip the direction of an irrelevant edge                      |
//! | B    | add a new node with one edge to an existing node              |
//! | C    | add a new node with two mutually contradictory edges          |
//! | D    | add a consistent edge between two existing irrelevant nodes   |
//! | E    | add a random-relation shortcut between two main-chain nodes   |
//! | F    | rewrite an irrelevant edge's relation (direction kept)        |
//! | G    | add two new nodes joined by one edge, disconnected            |
//!
//! Types A and F mutate only edges untouched by earlier noise, and types B,
//! D, F, and G draw labels consistent with node genders (kinship) or
//! current grid positions (type D), so the *types designed to contradict*
//! — C always, E with high probability — are the ones that break
//! whole-graph consistency, and repeated injection can only ever degrade a
//! whole-graph solver, never repair it.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::graph::{EntityNode, Gender, NodeId, RelationEdge, RelationGraph, RelationQuery};
use crate::paths::reconstruct_chain;
use crate::reason::kinship::{implied_gender, labels_incompatible, KinshipRuleTable};
use crate::reason::spatial::{label_for_displacement, spatial_solve};
use crate::reason::whole::{kinship_closure, spatial_positions};
use crate::vocab::{Domain, Vocabulary, CLUTRR_LABELS};

/// One synthetic evaluation instance with known structure.
#[derive(Debug, Clone)]
pub struct GoldSample {
    pub id: String,
    pub graph: RelationGraph,
    /// Indices into `graph.edges()` forming the source→target chain.
    pub main_chain: Vec<usize>,
    pub query: RelationQuery,
    pub answers: BTreeSet<String>,
    pub hops: u32,
    /// Number of edges present before any noise; only these are eligible
    /// for mutation (types A and F).
    pub pristine_edges: usize,
    /// Original edges already mutated by noise, never mutated again.
    pub touched: BTreeSet<usize>,
}

/// The seven noise types, named by their single-letter protocol codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl NoiseType {
    pub fn all() -> [NoiseType; 7] {
        [
            NoiseType::A,
            NoiseType::B,
            NoiseType::C,
            NoiseType::D,
            NoiseType::E,
            NoiseType::F,
            NoiseType::G,
        ]
    }

    pub fn letter(&self) -> char {
        match self {
            NoiseType::A => 'A',
            NoiseType::B => 'B',
            NoiseType::C => 'C',
            NoiseType::D => 'D',
            NoiseType::E => 'E',
            NoiseType::F => 'F',
            NoiseType::G => 'G',
        }
    }

    pub fn parse(s: &str) -> Option<NoiseType> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Some(NoiseType::A),
            "B" => Some(NoiseType::B),
            "C" => Some(NoiseType::C),
            "D" => Some(NoiseType::D),
            "E" => Some(NoiseType::E),
            "F" => Some(NoiseType::F),
            "G" => Some(NoiseType::G),
            _ => None,
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            NoiseType::A => "flip direction of an irrelevant edge",
            NoiseType::B => "attach a new node to an existing node",
            NoiseType::C => "attach a new node via two contradictory edges",
            NoiseType::D => "add an edge between two irrelevant nodes",
            NoiseType::E => "add a random shortcut between main-chain nodes",
            NoiseType::F => "rewrite an irrelevant edge's relation",
            NoiseType::G => "add a disconnected two-node component",
        }
    }
}

impl fmt::Display for NoiseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Errors from generation, injection, and corpus (de)serialization.
#[derive(Debug, thiserror::Error)]
pub enum NoiseError {
    #[error("noise type {noise_type} is not applicable: {reason}")]
    NotApplicable {
        noise_type: NoiseType,
        reason: String,
    },
    #[error("invalid gold sample: {0}")]
    InvalidGold(String),
    #[error("corpus line {line}: {reason}")]
    InvalidCorpus { line: usize, reason: String },
    #[error("gold-sample generation is not supported for the {0} domain")]
    UnsupportedDomain(Domain),
}

/// Deterministic per-stream RNG: one substream per (seed, stream id), so
/// sample N's draws are independent of how many draws earlier samples made.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(b":");
    hasher.update(stream.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

// ====== Gold-corpus generation ======

const NAME_POOL: [&str; 48] = [
    "Alba", "Aldo", "Anya", "Basil", "Bern", "Brit", "Cato", "Celia", "Dara", "Dino", "Edith",
    "Elio", "Fern", "Fiona", "Garth", "Gilda", "Hattie", "Hugo", "Ines", "Ivo", "Jade", "Jasper",
    "Kara", "Kent", "Lena", "Louis", "Mara", "Milo", "Nadia", "Nils", "Olive", "Oscar", "Petra",
    "Pierce", "Quinn", "Ralph", "Rhea", "Sana", "Silas", "Tessa", "Tobias", "Una", "Umber", "Vera",
    "Victor", "Wanda", "Wes", "Yara",
];

/// Generate `count` clean samples for a domain.
///
/// Each sample's main chain has a hop count drawn from `hops`; two or more
/// irrelevant nodes hang off the graph as tree branches, so every noise
/// type except the chain-dependent ones is applicable. Sample `i` draws
/// from substream `(seed, i)`: regenerating any prefix of the corpus
/// yields identical samples.
pub fn generate_gold_corpus(
    domain: Domain,
    count: usize,
    hops: RangeInclusive<u32>,
    seed: u64,
) -> Result<Vec<GoldSample>, NoiseError> {
    (0..count)
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let k = rng.gen_range(hops.clone());
            let id = format!("{}-{:04}", domain.as_str(), i);
            match domain {
                Domain::Stepgame => Ok(stepgame_sample(id, k, &mut rng)),
                Domain::Clutrr => Ok(clutrr_sample(id, k, &mut rng)),
                other => Err(NoiseError::UnsupportedDomain(other)),
            }
        })
        .collect()
}

fn letter_id(i: usize) -> String {
    let alphabet = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    if i < 26 {
        (alphabet[i] as char).to_string()
    } else {
        format!(
            "{}{}",
            alphabet[(i / 26 - 1) % 26] as char,
            alphabet[i % 26] as char
        )
    }
}

fn stepgame_sample(id: String, k: u32, rng: &mut ChaCha8Rng) -> GoldSample {
    let labels = Vocabulary::for_domain(Domain::Stepgame)
        .edge_labels()
        .to_vec();
    let mut nodes: Vec<EntityNode> = Vec::new();
    let mut edges: Vec<RelationEdge> = Vec::new();
    let mut main_chain = Vec::new();
    let chain_len = k as usize;
    for i in 0..=chain_len {
        nodes.push(EntityNode::new(letter_id(i)));
    }
    for i in 0..chain_len {
        let u = nodes[i].id.clone();
        let v = nodes[i + 1].id.clone();
        let label = *labels.choose(rng).expect("labels non-empty");
        // Store half the steps in flipped form so backward traversal is
        // exercised; the step's meaning is identical.
        let edge = if rng.gen_bool(0.5) {
            RelationEdge::new(u, label, v)
        } else {
            let flipped = crate::reason::spatial::opposite(label).expect("edge label");
            RelationEdge::new(v, flipped, u)
        };
        main_chain.push(edges.len());
        edges.push(edge);
    }
    // Irrelevant part: enough hanging tree branches that several noise
    // events can each find fresh material.
    let extra = 5 + rng.gen_range(0..=3);
    for e in 0..extra {
        let new_id = letter_id(chain_len + 1 + e);
        let anchor = nodes[rng.gen_range(0..nodes.len())].id.clone();
        nodes.push(EntityNode::new(new_id.clone()));
        let label = *labels.choose(rng).expect("labels non-empty");
        let edge = if rng.gen_bool(0.5) {
            RelationEdge::new(new_id, label, anchor)
        } else {
            RelationEdge::new(anchor, label, new_id)
        };
        edges.push(edge);
    }
    let query = RelationQuery::new(nodes[0].id.clone(), nodes[chain_len].id.clone());
    let graph = rebuild_graph(Domain::Stepgame, &nodes, &edges);
    let chain = reconstruct_chain(&graph, &main_chain, &query).expect("generated chain is valid");
    let answer = spatial_solve(&graph, &chain).expect("generated chain solves");
    let pristine_edges = graph.edges().len();
    GoldSample {
        id,
        graph,
        main_chain,
        query,
        answers: BTreeSet::from([answer]),
        hops: k,
        pristine_edges,
        touched: BTreeSet::new(),
    }
}

/// Candidate chain labels given the running composed set (`None` before the
/// first step) and the subject's gender: spousal labels require an
/// opposite-gendered subject, and every non-initial label must compose with
/// at least one running candidate.
fn clutrr_candidates(
    running: Option<&BTreeSet<String>>,
    subject_gender: Gender,
    table: &KinshipRuleTable,
) -> Vec<&'static str> {
    CLUTRR_LABELS
        .iter()
        .copied()
        .filter(|label| match *label {
            "husband" => subject_gender == Gender::Female,
            "wife" => subject_gender == Gender::Male,
            _ => true,
        })
        .filter(|label| match running {
            None => true,
            Some(set) => {
                let gender = implied_gender(label).expect("vocabulary label");
                set.iter()
                    .any(|s| !table.compose(s, label, gender).is_empty())
            }
        })
        .collect()
}

fn clutrr_sample(id: String, k: u32, rng: &mut ChaCha8Rng) -> GoldSample {
    let table = KinshipRuleTable::builtin();
    let mut pool: Vec<&str> = NAME_POOL.to_vec();
    pool.shuffle(rng);
    let mut next_name = 0usize;
    let fresh = |used: &mut usize| -> String {
        let name = if *used < pool.len() {
            pool[*used].to_string()
        } else {
            format!("P{}", *used + 1)
        };
        *used += 1;
        name
    };

    let chain_len = k as usize;
    let mut nodes: Vec<EntityNode> = Vec::new();
    let mut edges: Vec<RelationEdge> = Vec::new();
    let mut main_chain = Vec::new();
    let first = fresh(&mut next_name);
    let first_gender = if rng.gen_bool(0.5) {
        Gender::Male
    } else {
        Gender::Female
    };
    nodes.push(EntityNode::with_gender(first, first_gender));

    let mut running: Option<BTreeSet<String>> = None;
    for i in 0..chain_len {
        let subject_gender = nodes[i].gender;
        let candidates = clutrr_candidates(running.as_ref(), subject_gender, table);
        let label = *candidates
            .choose(rng)
            .expect("rule table is never a dead end");
        let gender = implied_gender(label).expect("vocabulary label");
        let name = fresh(&mut next_name);
        nodes.push(EntityNode::with_gender(name, gender));
        let (u, v) = (nodes[i].id.clone(), nodes[i + 1].id.clone());
        let edge = match inverse_label(table, label, subject_gender) {
            // Store half the steps flipped: (v, inverse, u) reads the same.
            Some(inv) if rng.gen_bool(0.5) => RelationEdge::new(v, inv, u),
            _ => RelationEdge::new(u, label, v),
        };
        main_chain.push(edges.len());
        edges.push(edge);
        running = Some(match running {
            None => BTreeSet::from([label.to_string()]),
            Some(set) => table.compose_sets(&set, &BTreeSet::from([label.to_string()]), gender),
        });
    }

    let extra = 5 + rng.gen_range(0..=3);
    for _ in 0..extra {
        let anchor = rng.gen_range(0..nodes.len());
        let anchor_id = nodes[anchor].id.clone();
        let anchor_gender = nodes[anchor].gender;
        let candidates = clutrr_candidates(None, anchor_gender, table);
        let label = *candidates.choose(rng).expect("non-empty");
        let gender = implied_gender(label).expect("vocabulary label");
        let name = fresh(&mut next_name);
        nodes.push(EntityNode::with_gender(name.clone(), gender));
        let edge = match inverse_label(table, label, anchor_gender) {
            Some(inv) if rng.gen_bool(0.5) => RelationEdge::new(name, inv, anchor_id),
            _ => RelationEdge::new(anchor_id, label, name),
        };
        edges.push(edge);
    }

    let query = RelationQuery::new(nodes[0].id.clone(), nodes[chain_len].id.clone());
    let graph = rebuild_graph(Domain::Clutrr, &nodes, &edges);
    let chain = reconstruct_chain(&graph, &main_chain, &query).expect("generated chain is valid");
    let answers = crate::reason::kinship::kinship_fold(&graph, &chain, table)
        .expect("generated chain composes");
    let pristine_edges = graph.edges().len();
    GoldSample {
        id,
        graph,
        main_chain,
        query,
        answers,
        hops: k,
        pristine_edges,
        touched: BTreeSet::new(),
    }
}

fn inverse_label(table: &KinshipRuleTable, label: &str, subject_gender: Gender) -> Option<String> {
    table.inverse(label, subject_gender).into_iter().next()
}

/// Rebuild a graph from explicit node and edge lists, preserving order.
fn rebuild_graph(domain: Domain, nodes: &[EntityNode], edges: &[RelationEdge]) -> RelationGraph {
    let mut graph = RelationGraph::new(domain);
    for node in nodes {
        graph.upsert_node(node.clone());
    }
    for edge in edges {
        graph
            .add_edge(edge.clone())
            .expect("rebuilt edges are valid");
    }
    graph
}

// ====== Noise injection ======

/// Apply one noise event of the given type.
///
/// The main chain's edges are never modified and its indices stay valid:
/// mutations happen in place and additions only append. Returns
/// `NotApplicable` when the sample lacks the required structure (for
/// example, no irrelevant edge is left untouched for types A and F).
pub fn inject(
    sample: &GoldSample,
    noise_type: NoiseType,
    rng: &mut ChaCha8Rng,
) -> Result<GoldSample, NoiseError> {
    let mut out = sample.clone();
    let domain = out.graph.domain();
    let chain_nodes = chain_node_ids(&out);
    let mut nodes: Vec<EntityNode> = out.graph.nodes().to_vec();
    let mut edges: Vec<RelationEdge> = out.graph.edges().to_vec();
    let not_applicable = |reason: &str| NoiseError::NotApplicable {
        noise_type,
        reason: reason.to_string(),
    };

    match noise_type {
        NoiseType::A => {
            let mut candidates = mutable_edge_indices(&out);
            // Flipping must not collide with an existing identical edge.
            candidates.retain(|&i| {
                let e = &edges[i];
                out.graph.find_edge(&e.tail, &e.relation, &e.head).is_none()
            });
            let &idx = candidates
                .choose(rng)
                .ok_or_else(|| not_applicable("no untouched irrelevant edge to flip"))?;
            let e = edges[idx].clone();
            edges[idx] = RelationEdge {
                head: e.tail,
                relation: e.relation,
                tail: e.head,
                seniority: e.seniority,
            };
            out.touched.insert(idx);
        }
        NoiseType::B => {
            let anchor = rng.gen_range(0..nodes.len());
            let anchor_id = nodes[anchor].id.clone();
            let anchor_gender = nodes[anchor].gender;
            let fresh = fresh_node_id(domain, &nodes);
            match domain {
                Domain::Stepgame => {
                    let label = random_grid_label(rng);
                    nodes.push(EntityNode::new(fresh.clone()));
                    edges.push(if rng.gen_bool(0.5) {
                        RelationEdge::new(fresh, label, anchor_id)
                    } else {
                        RelationEdge::new(anchor_id, label, fresh)
                    });
                }
                _ => {
                    let table = KinshipRuleTable::builtin();
                    let label = *clutrr_candidates(None, anchor_gender, table)
                        .choose(rng)
                        .expect("non-empty");
                    let gender = implied_gender(label).expect("vocabulary label");
                    nodes.push(EntityNode::with_gender(fresh.clone(), gender));
                    edges.push(match inverse_label(table, label, anchor_gender) {
                        Some(inv) if rng.gen_bool(0.5) => RelationEdge::new(fresh, inv, anchor_id),
                        _ => RelationEdge::new(anchor_id, label, fresh),
                    });
                }
            }
        }
        NoiseType::C => {
            let anchor = rng.gen_range(0..nodes.len());
            let anchor_id = nodes[anchor].id.clone();
            let fresh = fresh_node_id(domain, &nodes);
            let (r1, r2, gender) = match domain {
                Domain::Stepgame => {
                    let r1 = random_grid_label(rng);
                    let r2 = loop {
                        let r = random_grid_label(rng);
                        if r != r1 {
                            break r;
                        }
                    };
                    (r1, r2, Gender::Unknown)
                }
                _ => {
                    let r1 = *CLUTRR_LABELS.choose(rng).expect("non-empty");
                    let incompatible: Vec<&str> = CLUTRR_LABELS
                        .iter()
                        .copied()
                        .filter(|r| labels_incompatible(r1, r))
                        .collect();
                    let r2 = *incompatible.choose(rng).expect("every label has conflicts");
                    (r1, r2, implied_gender(r1).expect("vocabulary label"))
                }
            };
            nodes.push(EntityNode::with_gender(fresh.clone(), gender));
            edges.push(RelationEdge::new(anchor_id.clone(), r1, fresh.clone()));
            edges.push(RelationEdge::new(anchor_id, r2, fresh));
        }
        NoiseType::D => {
            let irrelevant: Vec<usize> = (0..nodes.len())
                .filter(|&i| !chain_nodes.contains(&nodes[i].id))
                .collect();
            if irrelevant.len() < 2 {
                return Err(not_applicable("fewer than two irrelevant nodes"));
            }
            // Enumerate every pair that admits a consistent novel edge, then
            // draw uniformly, so applicability is exact and deterministic.
            let mut candidates: Vec<(NodeId, String, NodeId)> = Vec::new();
            match domain {
                Domain::Stepgame => {
                    // Consistent by construction: label a pair with its
                    // actual relative position, which must be a unit
                    // displacement for a direction label to pin it exactly.
                    let pos = spatial_positions(&out.graph).expect("grid labels are valid");
                    for &ui in &irrelevant {
                        for &vi in &irrelevant {
                            if ui == vi {
                                continue;
                            }
                            let (u, v) = (&nodes[ui].id, &nodes[vi].id);
                            let (ux, uy) = pos[u];
                            let (vx, vy) = pos[v];
                            let (dx, dy) = (ux - vx, uy - vy);
                            if (dx, dy) == (0, 0) || dx.abs() > 1 || dy.abs() > 1 {
                                continue;
                            }
                            let label = label_for_displacement(dx, dy).to_string();
                            if out.graph.find_edge(u, &label, v).is_none() {
                                candidates.push((u.clone(), label, v.clone()));
                            }
                        }
                    }
                }
                _ => {
                    let table = KinshipRuleTable::builtin();
                    let closure = kinship_closure(&out.graph, table);
                    for &ui in &irrelevant {
                        for &vi in &irrelevant {
                            if ui == vi {
                                continue;
                            }
                            let (u, v) = (&nodes[ui].id, &nodes[vi].id);
                            let derived = closure.get(&(u.clone(), v.clone()));
                            let choices: Vec<String> = match derived {
                                Some(set) if !set.is_empty() => set.iter().cloned().collect(),
                                _ => {
                                    let gender = nodes[vi].gender;
                                    CLUTRR_LABELS
                                        .iter()
                                        .copied()
                                        .filter(|l| implied_gender(l) == Some(gender))
                                        .map(str::to_string)
                                        .collect()
                                }
                            };
                            for label in choices {
                                if out.graph.find_edge(u, &label, v).is_none() {
                                    candidates.push((u.clone(), label, v.clone()));
                                }
                            }
                        }
                    }
                }
            }
            let (u, label, v) = candidates
                .choose(rng)
                .cloned()
                .ok_or_else(|| not_applicable("no consistent irrelevant pair found"))?;
            edges.push(RelationEdge::new(u, label, v));
        }
        NoiseType::E => {
            let chain: Vec<&NodeId> = chain_nodes.iter().collect();
            let mut attempts = 0;
            let (u, label, v) = loop {
                attempts += 1;
                if attempts > 64 {
                    return Err(not_applicable("no novel chain shortcut found"));
                }
                let &u = chain.choose(rng).expect("chain non-empty");
                let &v = chain.choose(rng).expect("chain non-empty");
                if u == v {
                    continue;
                }
                let label = match domain {
                    Domain::Stepgame => random_grid_label(rng).to_string(),
                    _ => CLUTRR_LABELS.choose(rng).expect("non-empty").to_string(),
                };
                if out.graph.find_edge(u, &label, v).is_some() {
                    continue;
                }
                break (u.clone(), label, v.clone());
            };
            edges.push(RelationEdge::new(u, label, v));
        }
        NoiseType::F => {
            let candidates = mutable_edge_indices(&out);
            let mut viable: Vec<(usize, String)> = Vec::new();
            for &i in &candidates {
                let e = &edges[i];
                let labels: Vec<String> = match domain {
                    Domain::Stepgame => Vocabulary::for_domain(domain)
                        .edge_labels()
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                    _ => {
                        let gender = out
                            .graph
                            .node(&e.tail)
                            .map(|n| n.gender)
                            .unwrap_or(Gender::Unknown);
                        CLUTRR_LABELS
                            .iter()
                            .copied()
                            .filter(|l| {
                                gender == Gender::Unknown || implied_gender(l) == Some(gender)
                            })
                            .map(str::to_string)
                            .collect()
                    }
                };
                for label in labels {
                    if label != e.relation
                        && out.graph.find_edge(&e.head, &label, &e.tail).is_none()
                    {
                        viable.push((i, label));
                    }
                }
            }
            let (idx, label) = viable
                .choose(rng)
                .cloned()
                .ok_or_else(|| not_applicable("no untouched irrelevant edge to rewrite"))?;
            edges[idx].relation = label;
            out.touched.insert(idx);
        }
        NoiseType::G => {
            let a = fresh_node_id(domain, &nodes);
            match domain {
                Domain::Stepgame => {
                    nodes.push(EntityNode::new(a.clone()));
                    let b = fresh_node_id(domain, &nodes);
                    nodes.push(EntityNode::new(b.clone()));
                    edges.push(RelationEdge::new(a, random_grid_label(rng), b));
                }
                _ => {
                    let gender_a = if rng.gen_bool(0.5) {
                        Gender::Male
                    } else {
                        Gender::Female
                    };
                    nodes.push(EntityNode::with_gender(a.clone(), gender_a));
                    let table = KinshipRuleTable::builtin();
                    let label = *clutrr_candidates(None, gender_a, table)
                        .choose(rng)
                        .expect("non-empty");
                    let b = fresh_node_id(domain, &nodes);
                    nodes.push(EntityNode::with_gender(
                        b.clone(),
                        implied_gender(label).expect("vocabulary label"),
                    ));
                    edges.push(RelationEdge::new(a, label, b));
                }
            }
        }
    }

    out.graph = rebuild_graph(domain, &nodes, &edges);
    debug_assert!(
        reconstruct_chain(&out.graph, &out.main_chain, &out.query).is_ok(),
        "noise must preserve the main chain"
    );
    Ok(out)
}

/// Apply `n` noise events with types drawn uniformly from `types`.
///
/// A draw that is not applicable to the current sample is redrawn (other
/// types are tried); only if no configured type applies does the error
/// propagate. Returns the noisy sample and the types actually applied.
pub fn inject_n(
    sample: &GoldSample,
    types: &[NoiseType],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(GoldSample, Vec<NoiseType>), NoiseError> {
    if types.is_empty() {
        return Err(NoiseError::InvalidGold("empty noise-type list".into()));
    }
    let mut current = sample.clone();
    let mut applied = Vec::new();
    for _ in 0..n {
        let mut last_err = None;
        let mut done = false;
        for _ in 0..types.len() * 4 {
            let &ty = types.choose(rng).expect("non-empty");
            match inject(&current, ty, rng) {
                Ok(next) => {
                    current = next;
                    applied.push(ty);
                    done = true;
                    break;
                }
                Err(e @ NoiseError::NotApplicable { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        if !done {
            return Err(last_err.expect("at least one attempt was made"));
        }
    }
    Ok((current, applied))
}

fn chain_node_ids(sample: &GoldSample) -> Vec<NodeId> {
    reconstruct_chain(&sample.graph, &sample.main_chain, &sample.query)
        .map(|p| p.nodes)
        .unwrap_or_else(|_| vec![sample.query.source.clone(), sample.query.target.clone()])
}

/// Original (pre-noise) edges off the main chain that noise has not yet
/// mutated.
fn mutable_edge_indices(sample: &GoldSample) -> Vec<usize> {
    (0..sample.pristine_edges)
        .filter(|i| !sample.main_chain.contains(i) && !sample.touched.contains(i))
        .collect()
}

fn random_grid_label(rng: &mut ChaCha8Rng) -> &'static str {
    Vocabulary::for_domain(Domain::Stepgame)
        .edge_labels()
        .choose(rng)
        .copied()
        .expect("non-empty")
}

fn fresh_node_id(domain: Domain, nodes: &[EntityNode]) -> String {
    let taken: BTreeSet<&str> = nodes.iter().map(|n| n.id.as_str()).collect();
    match domain {
        Domain::Stepgame => (0..)
            .map(letter_id)
            .find(|id| !taken.contains(id.as_str()))
            .expect("unbounded id space"),
        _ => (1..)
            .map(|i| format!("N{i}"))
            .find(|id| !taken.contains(id.as_str()))
            .expect("unbounded id space"),
    }
}

// ====== Corpus serialization ======

/// Serialize samples to the corpus text format: per sample, an `S` header
/// (`S <id> hops=<k> pristine=<n>`), the graph's `N`/`E`/`Q` records, the
/// main chain as `M <edge-index>...`, the gold answers as
/// `A <label>[,<label>...]`, an optional `T <edge-index>...` listing
/// noise-touched edges, and a blank separator line.
pub fn write_corpus(samples: &[GoldSample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&format!(
            "S {} hops={} pristine={}\n",
            s.id, s.hops, s.pristine_edges
        ));
        out.push_str(&s.graph.to_text(Some(&s.query)));
        let chain: Vec<String> = s.main_chain.iter().map(usize::to_string).collect();
        out.push_str(&format!("M {}\n", chain.join(" ")));
        let answers: Vec<&str> = s.answers.iter().map(String::as_str).collect();
        out.push_str(&format!("A {}\n", answers.join(",")));
        if !s.touched.is_empty() {
            let touched: Vec<String> = s.touched.iter().map(usize::to_string).collect();
            out.push_str(&format!("T {}\n", touched.join(" ")));
        }
        out.push('\n');
    }
    out
}

/// Parse a corpus file produced by [`write_corpus`].
pub fn read_corpus(domain: Domain, text: &str) -> Result<Vec<GoldSample>, NoiseError> {
    let mut samples = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    for (lineno, line) in text.lines().enumerate().chain([(usize::MAX, "")]) {
        if !line.trim().is_empty() {
            block.push((lineno, line));
            continue;
        }
        if block.is_empty() {
            continue;
        }
        samples.push(parse_sample_block(domain, &block)?);
        block.clear();
    }
    Ok(samples)
}

fn parse_sample_block(domain: Domain, block: &[(usize, &str)]) -> Result<GoldSample, NoiseError> {
    let bad = |line: usize, reason: &str| NoiseError::InvalidCorpus {
        line: line + 1,
        reason: reason.to_string(),
    };
    let (first_line, header) = block[0];
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 || fields[0] != "S" {
        return Err(bad(first_line, "expected `S <id> hops=<k> pristine=<n>`"));
    }
    let id = fields[1].to_string();
    let mut hops = None;
    let mut pristine = None;
    for f in &fields[2..] {
        if let Some(v) = f.strip_prefix("hops=") {
            hops = v.parse::<u32>().ok();
        } else if let Some(v) = f.strip_prefix("pristine=") {
            pristine = v.parse::<usize>().ok();
        }
    }
    let hops = hops.ok_or_else(|| bad(first_line, "missing or invalid hops="))?;

    let mut graph_lines = String::new();
    let mut main_chain: Option<Vec<usize>> = None;
    let mut answers: Option<BTreeSet<String>> = None;
    let mut touched = BTreeSet::new();
    for &(lineno, line) in &block[1..] {
        match line.split_whitespace().next() {
            Some("M") => {
                let parsed: Result<Vec<usize>, _> =
                    line.split_whitespace().skip(1).map(str::parse).collect();
                main_chain =
                    Some(parsed.map_err(|_| bad(lineno, "invalid main-chain edge index"))?);
            }
            Some("A") => {
                let rest = line[1..].trim();
                let set: BTreeSet<String> = rest
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if set.is_empty() {
                    return Err(bad(lineno, "empty answer list"));
                }
                answers = Some(set);
            }
            Some("T") => {
                let parsed: Result<BTreeSet<usize>, _> =
                    line.split_whitespace().skip(1).map(str::parse).collect();
                touched = parsed.map_err(|_| bad(lineno, "invalid touched edge index"))?;
            }
            _ => {
                graph_lines.push_str(line);
                graph_lines.push('\n');
            }
        }
    }
    let (graph, query) = crate::graph::read_graph_text(domain, &graph_lines)
        .map_err(|e| NoiseError::InvalidGold(format!("sample `{id}`: {e}")))?;
    let query =
        query.ok_or_else(|| NoiseError::InvalidGold(format!("sample `{id}`: no Q record")))?;
    let main_chain =
        main_chain.ok_or_else(|| NoiseError::InvalidGold(format!("sample `{id}`: no M record")))?;
    let answers =
        answers.ok_or_else(|| NoiseError::InvalidGold(format!("sample `{id}`: no A record")))?;
    reconstruct_chain(&graph, &main_chain, &query)
        .map_err(|e| NoiseError::InvalidGold(format!("sample `{id}`: {e}")))?;
    let pristine_edges = pristine.unwrap_or(graph.edges().len());
    Ok(GoldSample {
        id,
        graph,
        main_chain,
        query,
        answers,
        hops,
        pristine_edges,
        touched,
    })
}
