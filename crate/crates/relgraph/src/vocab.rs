//! Task domains and their closed relation vocabularies.
//!
//! Each supported dataset family fixes the set of relation labels that may
//! appear on graph edges, plus (for the grid domain) labels that are legal
//! answers but never edge labels. Extraction output is noisy, so every
//! vocabulary also knows how to normalize near-miss spellings (`bottom_left`
//! for `down_left`, `covered by` for `covered_by`, region-calculus concept
//! codes, ...) onto the canonical label set.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

/// Dataset families the pipeline understands.
///
/// `Stepgame` and `Spartun` are spatial; `Clutrr` and `ChineseKinship` are
/// family-relation domains. Symbolic per-path solving is available for
/// `Stepgame` and `Clutrr`; the other two go through the LLM reasoner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Stepgame,
    Clutrr,
    Spartun,
    ChineseKinship,
}

impl Domain {
    pub fn all() -> [Domain; 4] {
        [
            Domain::Stepgame,
            Domain::Clutrr,
            Domain::Spartun,
            Domain::ChineseKinship,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::Stepgame => "stepgame",
            Domain::Clutrr => "clutrr",
            Domain::Spartun => "spartun",
            Domain::ChineseKinship => "chinese_kinship",
        }
    }

    pub fn parse(s: &str) -> Option<Domain> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stepgame" => Some(Domain::Stepgame),
            "clutrr" => Some(Domain::Clutrr),
            "spartun" => Some(Domain::Spartun),
            "chinese_kinship" | "chinese-kinship" | "chinese" => Some(Domain::ChineseKinship),
            _ => None,
        }
    }

    /// True for the two family-relation domains, whose entity and relation
    /// tokens carry `<gender>` / `<older>` style tags.
    pub fn is_kinship(&self) -> bool {
        matches!(self, Domain::Clutrr | Domain::ChineseKinship)
    }

    /// True when deterministic per-path solving is implemented for this
    /// domain (grid directions and English kinship).
    pub fn supports_symbolic(&self) -> bool {
        matches!(self, Domain::Stepgame | Domain::Clutrr)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The eight grid directions usable as edge labels in the step-game domain.
pub const STEPGAME_EDGE_LABELS: [&str; 8] = [
    "top",
    "down",
    "left",
    "right",
    "top_left",
    "top_right",
    "down_left",
    "down_right",
];

/// Legal step-game answer when source and target coincide on the grid.
/// Never valid as an edge label.
pub const STEPGAME_OVERLAP: &str = "overlap";

/// English kinship labels (all gendered).
pub const CLUTRR_LABELS: [&str; 24] = [
    "son",
    "grandmother",
    "daughter-in-law",
    "grandson",
    "greatgrandson",
    "grandfather",
    "mother-in-law",
    "greatgranddaughter",
    "uncle",
    "son-in-law",
    "wife",
    "greatgrandfather",
    "brother",
    "husband",
    "daughter",
    "father-in-law",
    "sister",
    "greatgrandmother",
    "granddaughter",
    "aunt",
    "nephew",
    "niece",
    "mother",
    "father",
];

/// Topological / directional labels for the region domain.
pub const SPARTUN_LABELS: [&str; 15] = [
    "far",
    "in",
    "touch",
    "has",
    "covered_by",
    "right",
    "overlap",
    "front",
    "behind",
    "cover",
    "left",
    "disconnected_from",
    "below",
    "above",
    "near",
];

/// Region-calculus concept codes as annotated in the source dataset, mapped
/// to the relation names the prompts use.
const SPARTUN_CONCEPTS: [(&str, &str); 15] = [
    ("FAR", "far"),
    ("NTPP", "in"),
    ("EC", "touch"),
    ("NTPPI", "has"),
    ("TPP", "covered_by"),
    ("RIGHT", "right"),
    ("PO", "overlap"),
    ("FRONT", "front"),
    ("BEHIND", "behind"),
    ("TPPI", "cover"),
    ("LEFT", "left"),
    ("DC", "disconnected_from"),
    ("BELOW", "below"),
    ("ABOVE", "above"),
    ("NEAR", "near"),
];

/// Map a region-calculus concept code (`NTPP`, `EC`, `FAR`, ...) to its
/// relation name. Codes are matched case-insensitively; unknown codes yield
/// `None` so callers can warn without aborting.
pub fn map_spartun_concept(concept: &str) -> Option<&'static str> {
    let needle = concept.trim().to_ascii_uppercase();
    SPARTUN_CONCEPTS
        .iter()
        .find(|(code, _)| *code == needle)
        .map(|(_, name)| *name)
}

/// Closed (or, for Chinese kinship, open) label set for one domain.
pub struct Vocabulary {
    domain: Domain,
    edge_labels: Vec<&'static str>,
    answer_only: Vec<&'static str>,
    synonyms: BTreeMap<&'static str, &'static str>,
}

impl Vocabulary {
    /// Shared vocabulary instance for a domain.
    pub fn for_domain(domain: Domain) -> &'static Vocabulary {
        static STEPGAME: LazyLock<Vocabulary> = LazyLock::new(|| Vocabulary {
            domain: Domain::Stepgame,
            edge_labels: STEPGAME_EDGE_LABELS.to_vec(),
            answer_only: vec![STEPGAME_OVERLAP],
            synonyms: BTreeMap::from([
                ("bottom", "down"),
                ("bottom_left", "down_left"),
                ("bottom_right", "down_right"),
                ("lower_left", "down_left"),
                ("lower_right", "down_right"),
                ("upper_left", "top_left"),
                ("upper_right", "top_right"),
                ("above", "top"),
                ("below", "down"),
            ]),
        });
        static CLUTRR: LazyLock<Vocabulary> = LazyLock::new(|| Vocabulary {
            domain: Domain::Clutrr,
            edge_labels: CLUTRR_LABELS.to_vec(),
            answer_only: vec![],
            synonyms: BTreeMap::new(),
        });
        static SPARTUN: LazyLock<Vocabulary> = LazyLock::new(|| Vocabulary {
            domain: Domain::Spartun,
            edge_labels: SPARTUN_LABELS.to_vec(),
            answer_only: vec![],
            synonyms: BTreeMap::from([
                ("inside", "in"),
                ("touches", "touch"),
                ("covers", "cover"),
                ("covered", "covered_by"),
                ("in_front_of", "front"),
                ("in_front", "front"),
                ("disconnected", "disconnected_from"),
                ("over", "above"),
                ("under", "below"),
                ("overlaps", "overlap"),
                ("contains", "has"),
            ]),
        });
        static CHINESE: LazyLock<Vocabulary> = LazyLock::new(|| Vocabulary {
            domain: Domain::ChineseKinship,
            edge_labels: vec![],
            answer_only: vec![],
            synonyms: BTreeMap::new(),
        });
        match domain {
            Domain::Stepgame => &STEPGAME,
            Domain::Clutrr => &CLUTRR,
            Domain::Spartun => &SPARTUN,
            Domain::ChineseKinship => &CHINESE,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Chinese kinship has hundreds of address titles and no fixed list;
    /// any well-formed token is accepted there.
    pub fn is_open(&self) -> bool {
        self.domain == Domain::ChineseKinship
    }

    /// Canonical labels legal on edges, in declaration order.
    pub fn edge_labels(&self) -> &[&'static str] {
        &self.edge_labels
    }

    /// Labels legal as answers: edge labels plus answer-only ones.
    pub fn answer_labels(&self) -> Vec<&'static str> {
        let mut all = self.edge_labels.clone();
        all.extend(&self.answer_only);
        all
    }

    /// Normalize a raw relation token onto the canonical label set.
    ///
    /// Lowercases, squeezes separators (space / hyphen) to underscores,
    /// applies synonym and concept-code tables. Returns `None` when the token
    /// cannot be mapped to any canonical edge label. For the open Chinese
    /// vocabulary, any non-empty token without structural characters passes
    /// through trimmed.
    pub fn normalize_edge_label(&self, raw: &str) -> Option<String> {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return None;
        }
        if self.is_open() {
            if trimmed.contains(['(', ')', '[', ']', ',']) {
                return None;
            }
            return Some(trimmed.to_string());
        }
        let folded = fold_label(trimmed);
        let candidate = self
            .synonyms
            .get(folded.as_str())
            .copied()
            .unwrap_or(folded.as_str());
        if let Some(&hit) = self.edge_labels.iter().find(|&&l| l == candidate) {
            return Some(hit.to_string());
        }
        // Kinship spellings drift on hyphenation: "mother in law",
        // "great-grandson". Retry with hyphen/solid variants.
        if self.domain == Domain::Clutrr {
            let hyphenated = folded.replace('_', "-");
            if let Some(&hit) = self.edge_labels.iter().find(|&&l| l == hyphenated) {
                return Some(hit.to_string());
            }
            let solid = folded.replace('_', "");
            if let Some(&hit) = self.edge_labels.iter().find(|&&l| l == solid) {
                return Some(hit.to_string());
            }
        }
        if self.domain == Domain::Spartun {
            if let Some(name) = map_spartun_concept(trimmed) {
                return Some(name.to_string());
            }
        }
        None
    }

    /// Like [`normalize_edge_label`](Self::normalize_edge_label) but also
    /// accepts answer-only labels (`overlap` in the grid domain).
    pub fn normalize_answer_label(&self, raw: &str) -> Option<String> {
        if let Some(label) = self.normalize_edge_label(raw) {
            return Some(label);
        }
        let folded = fold_label(raw.trim());
        self.answer_only
            .iter()
            .find(|&&l| l == folded)
            .map(|&l| l.to_string())
    }
}

/// Lowercase and squeeze runs of spaces / hyphens into single underscores.
fn fold_label(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_sep = false;
    for ch in s.chars() {
        if ch == ' ' || ch == '-' || ch == '_' {
            pending_sep = !out.is_empty();
        } else {
            if pending_sep {
                out.push('_');
                pending_sep = false;
            }
            out.extend(ch.to_lowercase());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_parse_roundtrip() {
        for d in Domain::all() {
            assert_eq!(Domain::parse(d.as_str()), Some(d));
        }
        assert_eq!(Domain::parse("no_such_domain"), None);
    }

    #[test]
    fn stepgame_synonyms_fold_onto_canonical_labels() {
        let v = Vocabulary::for_domain(Domain::Stepgame);
        assert_eq!(
            v.normalize_edge_label("bottom_left").as_deref(),
            Some("down_left")
        );
        assert_eq!(
            v.normalize_edge_label("Bottom-Left").as_deref(),
            Some("down_left")
        );
        assert_eq!(
            v.normalize_edge_label("top left").as_deref(),
            Some("top_left")
        );
        assert_eq!(v.normalize_edge_label("right").as_deref(), Some("right"));
        assert_eq!(v.normalize_edge_label("overlap"), None);
        assert_eq!(
            v.normalize_answer_label("overlap").as_deref(),
            Some("overlap")
        );
        assert_eq!(v.normalize_edge_label("sideways"), None);
    }

    #[test]
    fn clutrr_accepts_hyphen_variants() {
        let v = Vocabulary::for_domain(Domain::Clutrr);
        assert_eq!(
            v.normalize_edge_label("mother-in-law").as_deref(),
            Some("mother-in-law")
        );
        assert_eq!(
            v.normalize_edge_label("mother in law").as_deref(),
            Some("mother-in-law")
        );
        assert_eq!(
            v.normalize_edge_label("Great-Grandson").as_deref(),
            Some("greatgrandson")
        );
        assert_eq!(v.normalize_edge_label("cousin"), None);
    }

    #[test]
    fn spartun_concept_codes_map_to_relation_names() {
        assert_eq!(map_spartun_concept("NTPP"), Some("in"));
        assert_eq!(map_spartun_concept("FAR"), Some("far"));
        assert_eq!(map_spartun_concept("tppi"), Some("cover"));
        assert_eq!(map_spartun_concept("XYZ"), None);

        let v = Vocabulary::for_domain(Domain::Spartun);
        assert_eq!(
            v.normalize_edge_label("covered by").as_deref(),
            Some("covered_by")
        );
        assert_eq!(v.normalize_edge_label("EC").as_deref(), Some("touch"));
        assert_eq!(
            v.normalize_edge_label("in front of").as_deref(),
            Some("front")
        );
    }

    #[test]
    fn chinese_vocabulary_is_open() {
        let v = Vocabulary::for_domain(Domain::ChineseKinship);
        assert!(v.is_open());
        assert_eq!(v.normalize_edge_label("外婆").as_deref(), Some("外婆"));
        assert_eq!(v.normalize_edge_label("  姨妈 ").as_deref(), Some("姨妈"));
        assert_eq!(v.normalize_edge_label("bad,label"), None);
        assert_eq!(v.normalize_edge_label(""), None);
    }

    #[test]
    fn every_domain_reports_symbolic_support_correctly() {
        assert!(Domain::Stepgame.supports_symbolic());
        assert!(Domain::Clutrr.supports_symbolic());
        assert!(!Domain::Spartun.supports_symbolic());
        assert!(!Domain::ChineseKinship.supports_symbolic());
    }
}
