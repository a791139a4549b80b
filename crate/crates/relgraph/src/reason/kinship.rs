//! Rule-table solver for English family relations.
//!
//! The engine folds a path left-to-right through a data-driven rule table
//! with two relation kinds of entries:
//!
//! * `COMPOSE r1 r2 gender -> results` — if X's r1 is W and W's r2 is Y,
//!   and Y's gender matches, then X's relation to Y is one of `results`.
//!   Entries are set-valued because a two-hop pattern can be genuinely
//!   ambiguous (a son's grandfather is a father or a father-in-law).
//! * `INVERSE r gender -> result` — if X's r is Y and X's gender matches,
//!   then Y's `result` is X. Used when a path crosses an edge against its
//!   stored direction.
//!
//! The shipped table is machine-derived by exhaustively reading relations
//! off closed, consistently-married family universes (see the
//! `kinship_tablegen` binary); its content hash is recorded in evaluation
//! reports.

use std::collections::{BTreeSet, HashMap};
use std::sync::{LazyLock, OnceLock};

use crate::graph::{Gender, Orientation, RelationGraph};
use crate::hash::sha256_hex;
use crate::paths::{PathStep, ReasoningPath};
use crate::reason::ReasonError;
use crate::vocab::Domain;

/// Gender implied of the person a label points at, and how many generations
/// up (+) or down (−) that person sits from the label's subject.
const LABEL_SIGNATURES: [(&str, Gender, i8); 24] = [
    ("father", Gender::Male, 1),
    ("mother", Gender::Female, 1),
    ("son", Gender::Male, -1),
    ("daughter", Gender::Female, -1),
    ("brother", Gender::Male, 0),
    ("sister", Gender::Female, 0),
    ("husband", Gender::Male, 0),
    ("wife", Gender::Female, 0),
    ("grandfather", Gender::Male, 2),
    ("grandmother", Gender::Female, 2),
    ("grandson", Gender::Male, -2),
    ("granddaughter", Gender::Female, -2),
    ("greatgrandfather", Gender::Male, 3),
    ("greatgrandmother", Gender::Female, 3),
    ("greatgrandson", Gender::Male, -3),
    ("greatgranddaughter", Gender::Female, -3),
    ("uncle", Gender::Male, 1),
    ("aunt", Gender::Female, 1),
    ("nephew", Gender::Male, -1),
    ("niece", Gender::Female, -1),
    ("father-in-law", Gender::Male, 1),
    ("mother-in-law", Gender::Female, 1),
    ("son-in-law", Gender::Male, -1),
    ("daughter-in-law", Gender::Female, -1),
];

/// Gender of the person an English kinship label refers to.
pub fn implied_gender(label: &str) -> Option<Gender> {
    LABEL_SIGNATURES
        .iter()
        .find(|(l, _, _)| *l == label)
        .map(|&(_, g, _)| g)
}

/// Generation offset of the referred person relative to the subject.
pub fn generation_delta(label: &str) -> Option<i8> {
    LABEL_SIGNATURES
        .iter()
        .find(|(l, _, _)| *l == label)
        .map(|&(_, _, d)| d)
}

/// Whether two labels cannot describe the same ordered person pair: they
/// disagree on the referred person's gender or generation. `father` vs
/// `father-in-law` is compatible (same gender, same generation); `father`
/// vs `mother` or vs `grandfather` is not.
pub fn labels_incompatible(a: &str, b: &str) -> bool {
    match (
        implied_gender(a),
        implied_gender(b),
        generation_delta(a),
        generation_delta(b),
    ) {
        (Some(ga), Some(gb), Some(da), Some(db)) => ga != gb || da != db,
        _ => false,
    }
}

/// Composition and inverse rules for the English kinship vocabulary.
pub struct KinshipRuleTable {
    compose: HashMap<(String, String, Gender), BTreeSet<String>>,
    inverse: HashMap<(String, Gender), String>,
    version_hash: String,
    dense: OnceLock<DenseAlgebra>,
}

impl KinshipRuleTable {
    /// Parse the `COMPOSE`/`INVERSE` line format. Blank lines and `#`
    /// comments are skipped; gender keys are `male` / `female`.
    pub fn parse(text: &str) -> Result<Self, ReasonError> {
        let mut compose: HashMap<(String, String, Gender), BTreeSet<String>> = HashMap::new();
        let mut inverse = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| ReasonError::InvalidRuleTable {
                line: lineno + 1,
                reason: reason.to_string(),
            };
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| bad("missing `->`"))?;
            let fields: Vec<&str> = lhs.split_whitespace().collect();
            let results: Vec<String> = rhs
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if results.is_empty() {
                return Err(bad("empty result list"));
            }
            match fields.as_slice() {
                ["COMPOSE", r1, r2, g] => {
                    let gender = Gender::parse(g)
                        .filter(|g| *g != Gender::Unknown)
                        .ok_or_else(|| bad("gender must be male or female"))?;
                    compose
                        .entry((r1.to_string(), r2.to_string(), gender))
                        .or_default()
                        .extend(results);
                }
                ["INVERSE", r, g] => {
                    let gender = Gender::parse(g)
                        .filter(|g| *g != Gender::Unknown)
                        .ok_or_else(|| bad("gender must be male or female"))?;
                    if results.len() != 1 {
                        return Err(bad("INVERSE entries must have exactly one result"));
                    }
                    inverse.insert((r.to_string(), gender), results[0].clone());
                }
                _ => return Err(bad("expected `COMPOSE r1 r2 g ->` or `INVERSE r g ->`")),
            }
        }
        Ok(KinshipRuleTable {
            compose,
            inverse,
            version_hash: sha256_hex(&[text]),
            dense: OnceLock::new(),
        })
    }

    /// Bit-packed projection of this table, built on first use.
    pub(crate) fn dense(&self) -> &DenseAlgebra {
        self.dense.get_or_init(|| DenseAlgebra::build(self))
    }

    /// The table shipped with the library.
    pub fn builtin() -> &'static KinshipRuleTable {
        static TABLE: LazyLock<KinshipRuleTable> = LazyLock::new(|| {
            KinshipRuleTable::parse(include_str!("../../assets/kinship_rules.txt"))
                .expect("bundled kinship rule table parses")
        });
        &TABLE
    }

    /// Content hash of the table source, for report provenance.
    pub fn version_hash(&self) -> &str {
        &self.version_hash
    }

    /// Results of composing `left` then `right` when the final person has
    /// the given gender; unknown gender widens to the union over both.
    pub fn compose(&self, left: &str, right: &str, gender: Gender) -> BTreeSet<String> {
        match gender {
            Gender::Unknown => {
                let mut out = self.compose(left, right, Gender::Male);
                out.extend(self.compose(left, right, Gender::Female));
                out
            }
            g => self
                .compose
                .get(&(left.to_string(), right.to_string(), g))
                .cloned()
                .unwrap_or_default(),
        }
    }

    /// The label(s) naming the subject from the object's viewpoint, given
    /// the subject's gender; unknown gender unions both possibilities.
    pub fn inverse(&self, label: &str, subject_gender: Gender) -> BTreeSet<String> {
        match subject_gender {
            Gender::Unknown => {
                let mut out = self.inverse(label, Gender::Male);
                out.extend(self.inverse(label, Gender::Female));
                out
            }
            g => self
                .inverse
                .get(&(label.to_string(), g))
                .cloned()
                .into_iter()
                .collect(),
        }
    }

    /// Pointwise composition of two candidate sets, unioned.
    pub fn compose_sets(
        &self,
        left: &BTreeSet<String>,
        right: &BTreeSet<String>,
        gender: Gender,
    ) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for l in left {
            for r in right {
                out.extend(self.compose(l, r, gender));
            }
        }
        out
    }

    /// Iterate all composition keys (for tooling and tests).
    pub fn compose_entries(
        &self,
    ) -> impl Iterator<Item = (&(String, String, Gender), &BTreeSet<String>)> {
        self.compose.iter()
    }

    /// Iterate all inverse entries (for tooling and tests).
    pub fn inverse_entries(&self) -> impl Iterator<Item = (&(String, Gender), &String)> {
        self.inverse.iter()
    }
}

/// Bit-packed projection of a rule table over an interned label universe.
///
/// The whole-graph solver composes label sets for every node pair to a
/// fixpoint — millions of operations per robustness study — and
/// string-keyed map lookups dominate that cost. Interning each label to a
/// bit position turns a candidate set into a `u64` and one composition
/// into an indexed load and OR.
pub(crate) struct DenseAlgebra {
    labels: Vec<String>,
    ids: HashMap<String, u8>,
    /// `compose[(l1 * len + l2) * 2 + g]`, gender slots male = 0, female = 1.
    compose: Vec<u64>,
    /// `inverse[l * 2 + g]`, same gender slots.
    inverse: Vec<u64>,
    /// Per label, the mask of labels that cannot describe the same pair.
    incompatible: Vec<u64>,
    implied: Vec<Option<Gender>>,
}

fn gender_slot(gender: Gender) -> usize {
    match gender {
        Gender::Male => 0,
        Gender::Female => 1,
        Gender::Unknown => unreachable!("unknown gender is widened before indexing"),
    }
}

impl DenseAlgebra {
    fn build(table: &KinshipRuleTable) -> DenseAlgebra {
        let mut labels: Vec<String> = Vec::new();
        let mut ids: HashMap<String, u8> = HashMap::new();
        {
            let mut intern = |label: &str| {
                if !ids.contains_key(label) {
                    assert!(labels.len() < 64, "kinship label universe exceeds 64");
                    ids.insert(label.to_string(), labels.len() as u8);
                    labels.push(label.to_string());
                }
            };
            for (label, _, _) in LABEL_SIGNATURES {
                intern(label);
            }
            for ((l1, l2, _), results) in &table.compose {
                intern(l1);
                intern(l2);
                for r in results {
                    intern(r);
                }
            }
            for ((l, _), r) in &table.inverse {
                intern(l);
                intern(r);
            }
        }
        let len = labels.len();
        let genders = [Gender::Male, Gender::Female];
        let mut compose = vec![0u64; len * len * 2];
        for (i, l1) in labels.iter().enumerate() {
            for (j, l2) in labels.iter().enumerate() {
                for g in genders {
                    let mut mask = 0u64;
                    for r in table.compose(l1, l2, g) {
                        mask |= 1 << ids[&r];
                    }
                    compose[(i * len + j) * 2 + gender_slot(g)] = mask;
                }
            }
        }
        let mut inverse = vec![0u64; len * 2];
        for (i, l) in labels.iter().enumerate() {
            for g in genders {
                let mut mask = 0u64;
                for r in table.inverse(l, g) {
                    mask |= 1 << ids[&r];
                }
                inverse[i * 2 + gender_slot(g)] = mask;
            }
        }
        let implied = labels.iter().map(|l| implied_gender(l)).collect();
        let mut incompatible = vec![0u64; len];
        for i in 0..len {
            for j in 0..len {
                if labels_incompatible(&labels[i], &labels[j]) {
                    incompatible[i] |= 1 << j;
                }
            }
        }
        DenseAlgebra {
            labels,
            ids,
            compose,
            inverse,
            incompatible,
            implied,
        }
    }

    pub(crate) fn id_of(&self, label: &str) -> Option<u8> {
        self.ids.get(label).copied()
    }

    /// Inverse readings of one label as a mask, widening unknown gender.
    pub(crate) fn inverse_mask(&self, label: u8, subject_gender: Gender) -> u64 {
        let at = label as usize * 2;
        match subject_gender {
            Gender::Male => self.inverse[at],
            Gender::Female => self.inverse[at + 1],
            Gender::Unknown => self.inverse[at] | self.inverse[at + 1],
        }
    }

    /// Union of all pairwise compositions between two candidate masks.
    pub(crate) fn compose_masks(&self, left: u64, right: u64, gender: Gender) -> u64 {
        let len = self.labels.len();
        let mut out = 0u64;
        let mut a = left;
        while a != 0 {
            let i = a.trailing_zeros() as usize;
            a &= a - 1;
            let row = i * len;
            let mut b = right;
            while b != 0 {
                let j = b.trailing_zeros() as usize;
                b &= b - 1;
                let at = (row + j) * 2;
                out |= match gender {
                    Gender::Male => self.compose[at],
                    Gender::Female => self.compose[at + 1],
                    Gender::Unknown => self.compose[at] | self.compose[at + 1],
                };
            }
        }
        out
    }

    /// Whether a candidate mask for one ordered pair is self-contradictory
    /// or contradicts the referred person's declared gender.
    pub(crate) fn conflicts(&self, mask: u64, declared: Gender) -> bool {
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            if matches!(declared, Gender::Male | Gender::Female) {
                if let Some(implied) = self.implied[i] {
                    if implied != declared {
                        return true;
                    }
                }
            }
            if mask & self.incompatible[i] != 0 {
                return true;
            }
        }
        false
    }

    pub(crate) fn set_from_mask(&self, mask: u64) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            out.insert(self.labels[i].clone());
        }
        out
    }
}

/// Candidate relations expressed by one path step in travel direction.
///
/// Crossing an edge forward contributes its stored label. Crossing backward
/// enters the edge's head, so the stored label is inverted using the head's
/// gender; an unknown gender yields the union over both readings.
pub fn step_relation(
    graph: &RelationGraph,
    step: &PathStep,
    table: &KinshipRuleTable,
) -> Result<BTreeSet<String>, ReasonError> {
    let edge = graph.edge(step.edge);
    match step.orientation {
        Orientation::Forward => Ok(BTreeSet::from([edge.relation.clone()])),
        Orientation::Backward => {
            let subject = graph
                .node(&edge.head)
                .expect("edge endpoints exist in graph");
            let inv = table.inverse(&edge.relation, subject.gender);
            if inv.is_empty() {
                return Err(ReasonError::MissingInverse {
                    label: edge.relation.clone(),
                    gender: subject.gender.as_str(),
                });
            }
            Ok(inv)
        }
    }
}

/// Fold a path into the set of relations that may hold from its source to
/// its target.
///
/// The running candidate set starts from the first step and is composed
/// with each following step's candidates, keyed by the gender of the node
/// that step enters. An empty intermediate set aborts with the first
/// uncomposable label pair for diagnostics.
pub fn kinship_fold(
    graph: &RelationGraph,
    path: &ReasoningPath,
    table: &KinshipRuleTable,
) -> Result<BTreeSet<String>, ReasonError> {
    if graph.domain() != Domain::Clutrr {
        return Err(ReasonError::UnsupportedDomain(graph.domain()));
    }
    let mut steps = path.steps.iter();
    let first = steps.next().ok_or(ReasonError::AllPathsFailed)?;
    let mut acc = step_relation(graph, first, table)?;
    for (i, step) in steps.enumerate() {
        let next = step_relation(graph, step, table)?;
        let entered = graph
            .node(&path.nodes[i + 2])
            .expect("path nodes exist in graph");
        let composed = table.compose_sets(&acc, &next, entered.gender);
        if composed.is_empty() {
            return Err(ReasonError::CompositionGap {
                left: acc.iter().next().cloned().unwrap_or_default(),
                right: next.iter().next().cloned().unwrap_or_default(),
            });
        }
        acc = composed;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EntityNode, RelationEdge, RelationQuery};
    use crate::paths::reconstruct_chain;

    fn family() -> RelationGraph {
        // Edd's sister is Marion; Washington's father is Edd; Washington's
        // uncle is Bird.
        let mut g = RelationGraph::new(Domain::Clutrr);
        for (name, gender) in [
            ("Edd", Gender::Male),
            ("Marion", Gender::Female),
            ("Washington", Gender::Male),
            ("Bird", Gender::Male),
        ] {
            g.upsert_node(EntityNode::with_gender(name, gender));
        }
        g.add_edge(RelationEdge::new("Edd", "sister", "Marion"))
            .unwrap();
        g.add_edge(RelationEdge::new("Washington", "father", "Edd"))
            .unwrap();
        g.add_edge(RelationEdge::new("Washington", "uncle", "Bird"))
            .unwrap();
        g
    }

    #[test]
    fn forward_steps_pass_the_stored_label_through() {
        let g = family();
        let table = KinshipRuleTable::builtin();
        let q = RelationQuery::new("Washington", "Bird");
        let path = reconstruct_chain(&g, &[2], &q).unwrap();
        let rel = step_relation(&g, &path.steps[0], table).unwrap();
        assert_eq!(rel, BTreeSet::from(["uncle".to_string()]));
    }

    #[test]
    fn backward_steps_invert_by_subject_gender() {
        let g = family();
        let table = KinshipRuleTable::builtin();
        // Marion→Edd crosses (Edd, sister, Marion) backward; Edd is male,
        // so Marion's brother is Edd.
        let q = RelationQuery::new("Marion", "Edd");
        let path = reconstruct_chain(&g, &[0], &q).unwrap();
        let rel = step_relation(&g, &path.steps[0], table).unwrap();
        assert_eq!(rel, BTreeSet::from(["brother".to_string()]));
    }

    #[test]
    fn unknown_gender_widens_to_both_inverses() {
        let mut g = RelationGraph::new(Domain::Clutrr);
        g.add_edge(RelationEdge::new("Pat", "mother", "Ruth"))
            .unwrap();
        // Pat's gender is untagged: Ruth's child is a son or a daughter.
        let table = KinshipRuleTable::builtin();
        let q = RelationQuery::new("Ruth", "Pat");
        let path = reconstruct_chain(&g, &[0], &q).unwrap();
        let rel = step_relation(&g, &path.steps[0], table).unwrap();
        assert_eq!(
            rel,
            BTreeSet::from(["son".to_string(), "daughter".to_string()])
        );
    }

    #[test]
    fn fold_reproduces_the_worked_examples() {
        let g = family();
        let table = KinshipRuleTable::builtin();
        // Marion→Edd→Washington→Bird: brother, then brother∘son = nephew,
        // then nephew∘uncle must allow brother (Bird may be Marion's other
        // brother).
        let q = RelationQuery::new("Marion", "Bird");
        let path = reconstruct_chain(&g, &[0, 1, 2], &q).unwrap();
        let out = kinship_fold(&g, &path, table).unwrap();
        assert!(out.contains("brother"), "got {out:?}");

        // A grandson's sister, female target → granddaughter.
        assert!(table
            .compose("grandson", "sister", Gender::Female)
            .contains("granddaughter"));
    }

    #[test]
    fn composition_gap_reports_the_failing_pair() {
        let mut g = RelationGraph::new(Domain::Clutrr);
        g.upsert_node(EntityNode::with_gender("Ann", Gender::Female));
        g.upsert_node(EntityNode::with_gender("Bob", Gender::Male));
        g.upsert_node(EntityNode::with_gender("Cleo", Gender::Female));
        // Ann's brother is Bob, Bob's wife is Cleo: sister-in-law is not in
        // the vocabulary, so the fold cannot answer.
        g.add_edge(RelationEdge::new("Ann", "brother", "Bob"))
            .unwrap();
        g.add_edge(RelationEdge::new("Bob", "wife", "Cleo"))
            .unwrap();
        let q = RelationQuery::new("Ann", "Cleo");
        let path = reconstruct_chain(&g, &[0, 1], &q).unwrap();
        match kinship_fold(&g, &path, KinshipRuleTable::builtin()) {
            Err(ReasonError::CompositionGap { left, right }) => {
                assert_eq!(left, "brother");
                assert_eq!(right, "wife");
            }
            other => panic!("expected CompositionGap, got {other:?}"),
        }
    }

    #[test]
    fn label_signatures_classify_conflicts() {
        assert!(!labels_incompatible("father", "father-in-law"));
        assert!(labels_incompatible("father", "mother"));
        assert!(labels_incompatible("father", "grandfather"));
        assert!(labels_incompatible("son", "brother"));
        assert!(!labels_incompatible("uncle", "father"));
        assert_eq!(implied_gender("niece"), Some(Gender::Female));
        assert_eq!(generation_delta("greatgrandson"), Some(-3));
        assert_eq!(implied_gender("cousin"), None);
    }
}
