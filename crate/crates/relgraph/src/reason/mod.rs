//! Per-path relation inference and whole-graph baselines.
//!
//! Two symbolic engines turn a reasoning path into candidate answers:
//! [`spatial`] sums unit grid offsets for the step-game domain, and
//! [`kinship`] folds a rule table of relation compositions for English
//! family trees. [`text`] renders paths to natural-language chains for the
//! LLM-reasoner mode and parses bracketed answers back out of completions.
//! [`whole`] solves the complete (possibly noisy) graph at once, the
//! behaviour path-based reasoning is measured against.

pub mod kinship;
pub mod spatial;
pub mod text;
pub mod whole;

use std::collections::BTreeSet;

use crate::vocab::Domain;

/// Errors from the reasoning engines.
#[derive(Debug, thiserror::Error)]
pub enum ReasonError {
    #[error("relation label `{label}` is not usable in the {domain} domain")]
    UnknownRelationLabel { label: String, domain: Domain },
    #[error("no inverse relation for `{label}` with {gender} subject")]
    MissingInverse { label: String, gender: &'static str },
    #[error("no composition rule for `{left}` followed by `{right}`")]
    CompositionGap { left: String, right: String },
    #[error("completion contains no bracketed answer with a valid label")]
    NoAnswerFound,
    #[error("every reasoning path failed to produce an answer")]
    AllPathsFailed,
    #[error("symbolic solving is not available for the {0} domain")]
    UnsupportedDomain(Domain),
    #[error("kinship rule table line {line}: {reason}")]
    InvalidRuleTable { line: usize, reason: String },
}

/// Union of per-path answer sets, with the indices of the paths that
/// contributed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregated {
    pub answers: BTreeSet<String>,
    pub contributing: Vec<usize>,
}

/// Combine per-path outcomes into a final predicted answer set.
///
/// A prediction counts as correct when at least one aggregated answer
/// matches gold, so the union over paths is taken; paths that failed are
/// skipped, and only if every path failed does this error.
pub fn aggregate_answers(
    per_path: &[Result<BTreeSet<String>, String>],
) -> Result<Aggregated, ReasonError> {
    let mut answers = BTreeSet::new();
    let mut contributing = Vec::new();
    for (i, outcome) in per_path.iter().enumerate() {
        if let Ok(set) = outcome {
            if !set.is_empty() {
                answers.extend(set.iter().cloned());
                contributing.push(i);
            }
        }
    }
    if contributing.is_empty() {
        return Err(ReasonError::AllPathsFailed);
    }
    Ok(Aggregated {
        answers,
        contributing,
    })
}
