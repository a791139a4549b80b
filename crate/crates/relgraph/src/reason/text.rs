//! Natural-language bridging for the LLM-reasoner mode.
//!
//! [`path_to_text`] renders a reasoning path as the short relational story
//! the reasoner prompts embed: each step's edge is verbalized in its stored
//! direction, kinship renderings append the genders of the people involved,
//! and a domain-appropriate question closes the text.
//! [`parse_bracketed_answer`] recovers an answer set from a completion by
//! taking the last `[...]` group containing at least one valid label.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;

use crate::graph::{Gender, RelationGraph};
use crate::paths::ReasoningPath;
use crate::reason::ReasonError;
use crate::vocab::{Domain, Vocabulary};

/// Render a path as text for the reasoner prompt. Deterministic: same path,
/// same text.
pub fn path_to_text(graph: &RelationGraph, path: &ReasoningPath, domain: Domain) -> String {
    match domain {
        Domain::Stepgame => stepgame_text(graph, path),
        Domain::Clutrr => clutrr_text(graph, path),
        Domain::Spartun => spartun_text(graph, path),
        Domain::ChineseKinship => chinese_text(graph, path),
    }
}

fn stepgame_text(graph: &RelationGraph, path: &ReasoningPath) -> String {
    let phrase = |label: &str| -> String {
        match label {
            "top" => "top".into(),
            "down" => "bottom".into(),
            "top_left" => "top left".into(),
            "top_right" => "top right".into(),
            "down_left" => "bottom left".into(),
            "down_right" => "bottom right".into(),
            other => other.to_string(),
        }
    };
    let clauses: Vec<String> = path
        .steps
        .iter()
        .map(|s| {
            let e = graph.edge(s.edge);
            format!("{} is at the {} of {}", e.head, phrase(&e.relation), e.tail)
        })
        .collect();
    format!(
        "{}. What is the relation of the {} to the {}?",
        clauses.join(", "),
        path.source(),
        path.target()
    )
}

fn clutrr_text(graph: &RelationGraph, path: &ReasoningPath) -> String {
    let clauses: Vec<String> = path
        .steps
        .iter()
        .map(|s| {
            let e = graph.edge(s.edge);
            format!("{} is {}'s {}", e.tail, e.head, e.relation)
        })
        .collect();
    let genders: Vec<String> = path
        .nodes
        .iter()
        .filter_map(|id| {
            let node = graph.node(id)?;
            match node.gender {
                Gender::Unknown => None,
                g => Some(format!("{} is {}", node.id, g.as_str())),
            }
        })
        .collect();
    let mut out = format!("{}.", clauses.join(", "));
    if !genders.is_empty() {
        out.push_str(&format!(" {}.", genders.join(", ")));
    }
    out.push_str(&format!(
        " How should {} address {}?",
        path.source(),
        path.target()
    ));
    out
}

fn spartun_text(graph: &RelationGraph, path: &ReasoningPath) -> String {
    let clause = |label: &str, h: &str, t: &str| -> String {
        match label {
            "in" => format!("{h} is in {t}"),
            "touch" => format!("{h} touches {t}"),
            "has" => format!("{h} has {t}"),
            "cover" => format!("{h} covers {t}"),
            "covered_by" => format!("{h} is covered by {t}"),
            "front" => format!("{h} is in front of {t}"),
            "behind" => format!("{h} is behind {t}"),
            "left" => format!("{h} is to the left of {t}"),
            "right" => format!("{h} is to the right of {t}"),
            "above" => format!("{h} is above {t}"),
            "below" => format!("{h} is below {t}"),
            "near" => format!("{h} is near {t}"),
            "far" => format!("{h} is far from {t}"),
            "disconnected_from" => format!("{h} is disconnected from {t}"),
            "overlap" => format!("{h} overlaps {t}"),
            other => format!("{h} is {other} {t}"),
        }
    };
    let clauses: Vec<String> = path
        .steps
        .iter()
        .map(|s| {
            let e = graph.edge(s.edge);
            clause(&e.relation, e.head.as_str(), e.tail.as_str())
        })
        .collect();
    format!(
        "{}. Where is the {} regarding the {}?",
        clauses.join(", "),
        path.source(),
        path.target()
    )
}

fn chinese_text(graph: &RelationGraph, path: &ReasoningPath) -> String {
    let clauses: Vec<String> = path
        .steps
        .iter()
        .map(|s| {
            let e = graph.edge(s.edge);
            format!("{}的{}是{}", e.head, e.relation, e.tail)
        })
        .collect();
    let genders: Vec<String> = path
        .nodes
        .iter()
        .filter_map(|id| {
            let node = graph.node(id)?;
            match node.gender {
                Gender::Male => Some(format!("{}是男的", node.id)),
                Gender::Female => Some(format!("{}是女的", node.id)),
                Gender::Unknown => None,
            }
        })
        .collect();
    let mut out = format!("{}。", clauses.join("，"));
    if !genders.is_empty() {
        out.push_str(&format!("其中，{}。", genders.join("，")));
    }
    out.push_str(&format!("{}应该怎么称呼{}？", path.source(), path.target()));
    out
}

/// Extract the answer set from an LLM completion.
///
/// Completions are asked to end with `[label]` (or `[label1, label2]`).
/// Bracketed groups are scanned from the end; the first group containing at
/// least one label valid for the domain wins, invalid tokens inside it are
/// reported as warnings, and `NoAnswerFound` is returned when no group
/// qualifies.
pub fn parse_bracketed_answer(
    completion: &str,
    domain: Domain,
) -> Result<(BTreeSet<String>, Vec<String>), ReasonError> {
    static GROUP: LazyLock<Regex> =
        LazyLock::new(|| Regex::new(r"\[([^\[\]]*)\]").expect("static regex compiles"));
    let vocab = Vocabulary::for_domain(domain);
    let groups: Vec<&str> = GROUP
        .captures_iter(completion)
        .map(|c| c.get(1).expect("group 1 exists").as_str())
        .collect();
    for group in groups.iter().rev() {
        let mut answers = BTreeSet::new();
        let mut warnings = Vec::new();
        for token in group.split([',', '，', '、']) {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            match vocab.normalize_answer_label(token) {
                Some(label) => {
                    answers.insert(label);
                }
                None => warnings.push(format!("ignoring invalid answer label `{token}`")),
            }
        }
        if !answers.is_empty() {
            return Ok((answers, warnings));
        }
    }
    Err(ReasonError::NoAnswerFound)
}
