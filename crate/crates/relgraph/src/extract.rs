//! Prompt templates and extraction-output parsing.
//!
//! Extraction asks the model to rewrite a story as a `RELATIONSHIP` section
//! of parenthesized triplets followed by a `QUERY` section naming the two
//! queried entities. Every extraction template leans on the same four
//! prompting strategies (tagged on each [`PromptTemplate`]):
//!
//! * sectional markup — labeled output sections to anchor parsing;
//! * syntactic delimiters — parenthesized, comma-separated tuples;
//! * predefined categories — a closed relation vocabulary to choose from;
//! * task decomposition — extraction is separated from answering.
//!
//! The parser is deliberately total: anything unexpected degrades into a
//! warning and the offending fragment is skipped. The only hard failures
//! are a completion with no usable triplets at all or no recoverable
//! query pair.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;

use crate::graph::{
    EntityNode, Gender, GraphError, NodeId, RelationEdge, RelationGraph, RelationQuery, RelativeAge,
};
use crate::hash::sha256_hex;
use crate::vocab::Domain;

/// Prompting strategies a template employs (see the module docs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    SectionalMarkup,
    SyntacticDelimiters,
    PredefinedCategories,
    TaskDecomposition,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::SectionalMarkup => "sectional-markup",
            Strategy::SyntacticDelimiters => "syntactic-delimiters",
            Strategy::PredefinedCategories => "predefined-categories",
            Strategy::TaskDecomposition => "task-decomposition",
        }
    }
}

/// What a template is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    /// Story → relationship/query sections.
    Extraction,
    /// One reasoning path → answer.
    PathReasoner,
    /// Story → answer, no reasoning requested.
    BaselineIo,
    /// Story → answer with in-context demonstrations.
    BaselineFewShot,
    /// Story → answer with step-by-step reasoning requested.
    BaselineCot,
}

impl TemplateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TemplateKind::Extraction => "extraction",
            TemplateKind::PathReasoner => "path-reasoner",
            TemplateKind::BaselineIo => "baseline-io",
            TemplateKind::BaselineFewShot => "baseline-few-shot",
            TemplateKind::BaselineCot => "baseline-cot",
        }
    }
}

/// Errors from template rendering and completion parsing.
#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("template `{template}` has no `{{{placeholder}}}` placeholder")]
    MissingPlaceholder {
        template: String,
        placeholder: String,
    },
    #[error("template `{template}` repeats the `{{{placeholder}}}` placeholder")]
    DuplicatePlaceholder {
        template: String,
        placeholder: String,
    },
    #[error("template `{template}` left `{{{placeholder}}}` unsubstituted")]
    UnsubstitutedPlaceholder {
        template: String,
        placeholder: String,
    },
    #[error("no template for domain {domain} and kind {kind}")]
    NoTemplate { domain: Domain, kind: String },
    #[error("completion contains no usable relationship triplets")]
    EmptyExtraction,
    #[error("completion contains no recoverable query pair")]
    NoQueryFound,
}

/// One named prompt template with `{placeholder}` slots.
#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub name: &'static str,
    pub domain: Domain,
    pub kind: TemplateKind,
    pub strategies: &'static [Strategy],
    pub text: &'static str,
}

impl PromptTemplate {
    /// Substitute placeholders, requiring each provided variable to occur
    /// exactly once and leaving no placeholder behind.
    pub fn render(&self, vars: &[(&str, &str)]) -> Result<String, ExtractError> {
        let mut out = self.text.to_string();
        for (key, value) in vars {
            let pattern = format!("{{{key}}}");
            match out.matches(&pattern).count() {
                0 => {
                    return Err(ExtractError::MissingPlaceholder {
                        template: self.name.to_string(),
                        placeholder: key.to_string(),
                    })
                }
                1 => out = out.replace(&pattern, value),
                _ => {
                    return Err(ExtractError::DuplicatePlaceholder {
                        template: self.name.to_string(),
                        placeholder: key.to_string(),
                    })
                }
            }
        }
        static LEFTOVER: LazyLock<Regex> =
            LazyLock::new(|| Regex::new(r"\{([a-z_]+)\}").expect("valid regex"));
        if let Some(m) = LEFTOVER.captures(&out) {
            return Err(ExtractError::UnsubstitutedPlaceholder {
                template: self.name.to_string(),
                placeholder: m[1].to_string(),
            });
        }
        Ok(out)
    }
}

const ALL_FOUR: &[Strategy] = &[
    Strategy::SectionalMarkup,
    Strategy::SyntacticDelimiters,
    Strategy::PredefinedCategories,
    Strategy::TaskDecomposition,
];
const CLOSED_ANSWER: &[Strategy] = &[Strategy::PredefinedCategories];
const OPEN_ANSWER: &[Strategy] = &[];

macro_rules! template {
    ($name:literal, $domain:expr, $kind:expr, $strategies:expr, $file:literal) => {
        PromptTemplate {
            name: $name,
            domain: $domain,
            kind: $kind,
            strategies: $strategies,
            text: include_str!(concat!("../assets/prompts/", $file)),
        }
    };
}

/// Every template shipped with the library.
pub struct TemplateSet {
    templates: Vec<PromptTemplate>,
}

impl TemplateSet {
    pub fn builtin() -> &'static TemplateSet {
        static SET: LazyLock<TemplateSet> = LazyLock::new(|| TemplateSet {
            templates: vec![
                template!(
                    "extract-stepgame",
                    Domain::Stepgame,
                    TemplateKind::Extraction,
                    ALL_FOUR,
                    "extraction_stepgame.txt"
                ),
                template!(
                    "extract-clutrr",
                    Domain::Clutrr,
                    TemplateKind::Extraction,
                    ALL_FOUR,
                    "extraction_clutrr.txt"
                ),
                template!(
                    "extract-spartun",
                    Domain::Spartun,
                    TemplateKind::Extraction,
                    ALL_FOUR,
                    "extraction_spartun.txt"
                ),
                template!(
                    "extract-chinese",
                    Domain::ChineseKinship,
                    TemplateKind::Extraction,
                    // Open vocabulary: relation tokens are copied verbatim,
                    // so no predefined category list applies.
                    &[
                        Strategy::SectionalMarkup,
                        Strategy::SyntacticDelimiters,
                        Strategy::TaskDecomposition,
                    ],
                    "extraction_chinese.txt"
                ),
                template!(
                    "reason-path-stepgame",
                    Domain::Stepgame,
                    TemplateKind::PathReasoner,
                    CLOSED_ANSWER,
                    "reasoner_stepgame.txt"
                ),
                template!(
                    "reason-path-clutrr",
                    Domain::Clutrr,
                    TemplateKind::PathReasoner,
                    CLOSED_ANSWER,
                    "reasoner_clutrr.txt"
                ),
                template!(
                    "reason-path-spartun",
                    Domain::Spartun,
                    TemplateKind::PathReasoner,
                    CLOSED_ANSWER,
                    "reasoner_spartun.txt"
                ),
                template!(
                    "reason-path-chinese",
                    Domain::ChineseKinship,
                    TemplateKind::PathReasoner,
                    OPEN_ANSWER,
                    "reasoner_chinese.txt"
                ),
                template!(
                    "baseline-io-stepgame",
                    Domain::Stepgame,
                    TemplateKind::BaselineIo,
                    CLOSED_ANSWER,
                    "io_stepgame.txt"
                ),
                template!(
                    "baseline-io-clutrr",
                    Domain::Clutrr,
                    TemplateKind::BaselineIo,
                    CLOSED_ANSWER,
                    "io_clutrr.txt"
                ),
                template!(
                    "baseline-io-spartun",
                    Domain::Spartun,
                    TemplateKind::BaselineIo,
                    CLOSED_ANSWER,
                    "io_spartun.txt"
                ),
                template!(
                    "baseline-io-chinese",
                    Domain::ChineseKinship,
                    TemplateKind::BaselineIo,
                    OPEN_ANSWER,
                    "io_chinese.txt"
                ),
                template!(
                    "baseline-few-shot-stepgame",
                    Domain::Stepgame,
                    TemplateKind::BaselineFewShot,
                    CLOSED_ANSWER,
                    "few_shot_stepgame.txt"
                ),
                template!(
                    "baseline-few-shot-clutrr",
                    Domain::Clutrr,
                    TemplateKind::BaselineFewShot,
                    CLOSED_ANSWER,
                    "few_shot_clutrr.txt"
                ),
                template!(
                    "baseline-few-shot-spartun",
                    Domain::Spartun,
                    TemplateKind::BaselineFewShot,
                    CLOSED_ANSWER,
                    "few_shot_spartun.txt"
                ),
                template!(
                    "baseline-few-shot-chinese",
                    Domain::ChineseKinship,
                    TemplateKind::BaselineFewShot,
                    OPEN_ANSWER,
                    "few_shot_chinese.txt"
                ),
                template!(
                    "baseline-cot-stepgame",
                    Domain::Stepgame,
                    TemplateKind::BaselineCot,
                    CLOSED_ANSWER,
                    "cot_stepgame.txt"
                ),
                template!(
                    "baseline-cot-clutrr",
                    Domain::Clutrr,
                    TemplateKind::BaselineCot,
                    CLOSED_ANSWER,
                    "cot_clutrr.txt"
                ),
                template!(
                    "baseline-cot-spartun",
                    Domain::Spartun,
                    TemplateKind::BaselineCot,
                    CLOSED_ANSWER,
                    "cot_spartun.txt"
                ),
                template!(
                    "baseline-cot-chinese",
                    Domain::ChineseKinship,
                    TemplateKind::BaselineCot,
                    OPEN_ANSWER,
                    "cot_chinese.txt"
                ),
            ],
        });
        &SET
    }

    pub fn all(&self) -> &[PromptTemplate] {
        &self.templates
    }

    pub fn get(&self, domain: Domain, kind: TemplateKind) -> Result<&PromptTemplate, ExtractError> {
        self.templates
            .iter()
            .find(|t| t.domain == domain && t.kind == kind)
            .ok_or(ExtractError::NoTemplate {
                domain,
                kind: kind.as_str().to_string(),
            })
    }

    /// Template name → content hash, embedded in reports so a result can be
    /// tied to the exact prompt wording that produced it.
    pub fn manifest(&self) -> BTreeMap<String, String> {
        self.templates
            .iter()
            .map(|t| (t.name.to_string(), sha256_hex(&[t.text])))
            .collect()
    }
}

/// Render the extraction prompt for a story.
pub fn build_extraction_prompt(domain: Domain, story: &str) -> Result<String, ExtractError> {
    TemplateSet::builtin()
        .get(domain, TemplateKind::Extraction)?
        .render(&[("input", story)])
}

/// Render the per-path reasoner prompt. `story` is only consulted by
/// domains whose templates carry a story-context slot.
pub fn build_reasoner_prompt(
    domain: Domain,
    chain_text: &str,
    story: &str,
) -> Result<String, ExtractError> {
    let template = TemplateSet::builtin().get(domain, TemplateKind::PathReasoner)?;
    if template.text.contains("{story}") {
        template.render(&[("input", chain_text), ("story", story)])
    } else {
        template.render(&[("input", chain_text)])
    }
}

/// Render a whole-story baseline prompt of the given kind.
pub fn build_baseline_prompt(
    domain: Domain,
    kind: TemplateKind,
    story: &str,
) -> Result<String, ExtractError> {
    TemplateSet::builtin()
        .get(domain, kind)?
        .render(&[("input", story)])
}

/// An entity token with its angle-bracket tags resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedEntity {
    pub name: String,
    pub gender: Gender,
    pub age: RelativeAge,
}

/// One parsed `(head, relation, tail)` triplet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTriplet {
    pub head: TaggedEntity,
    pub relation: String,
    /// `<older>`/`<younger>` tag attached to the relation token.
    pub seniority: RelativeAge,
    pub tail: TaggedEntity,
}

/// Structured result of parsing an extraction completion.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub triplets: Vec<ParsedTriplet>,
    pub query_source: TaggedEntity,
    pub query_target: TaggedEntity,
    /// Everything tolerated but worth surfacing: skipped fragments,
    /// unknown tags, recovered-by-fallback sections.
    pub warnings: Vec<String>,
}

static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<([^<>]*)>").expect("valid regex"));
static TUPLE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\(([^()]*)\)").expect("valid regex"));

/// Parse one entity token, resolving `<...>` tags into gender and relative
/// age. Unknown tags and unbalanced brackets become warnings, never errors.
pub fn parse_entity_tag(token: &str) -> (TaggedEntity, Vec<String>) {
    let mut warnings = Vec::new();
    let mut gender = Gender::Unknown;
    let mut age = RelativeAge::Unknown;
    for cap in TAG.captures_iter(token) {
        let tag = cap[1].trim().to_lowercase();
        match tag.as_str() {
            "male" | "m" | "man" | "男" => gender = Gender::Male,
            "female" | "f" | "woman" | "女" => gender = Gender::Female,
            "older" | "elder" | "长辈" | "年长" => age = RelativeAge::Older,
            "younger" | "晚辈" | "年幼" => age = RelativeAge::Younger,
            "unknown" | "" => {}
            other => warnings.push(format!("unknown tag `{other}` on `{}`", token.trim())),
        }
    }
    let mut name = TAG.replace_all(token, "").trim().to_string();
    if name.contains('<') || name.contains('>') {
        warnings.push(format!("unbalanced angle bracket in `{}`", token.trim()));
        name = name.replace(['<', '>'], " ").trim().to_string();
        name = name.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    (TaggedEntity { name, gender, age }, warnings)
}

/// Canonical node id for an entity name. The region domain folds case,
/// squeezes whitespace, and drops a leading article so that "The big
/// circle" and "big circle" are one node; other domains keep names
/// verbatim (trimmed).
pub fn normalize_entity_name(domain: Domain, raw: &str) -> String {
    let trimmed = raw.trim();
    match domain {
        Domain::Spartun => {
            let folded = trimmed.to_lowercase();
            let squeezed = folded.split_whitespace().collect::<Vec<_>>().join(" ");
            for article in ["the ", "a ", "an "] {
                if let Some(rest) = squeezed.strip_prefix(article) {
                    return rest.to_string();
                }
            }
            squeezed
        }
        _ => trimmed.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Header {
    Relationship,
    Query,
}

fn header_of(line: &str) -> Option<Header> {
    let cleaned = line
        .trim()
        .trim_start_matches(['#', '*', '-'])
        .trim()
        .trim_end_matches(':')
        .trim()
        .to_ascii_uppercase();
    match cleaned.as_str() {
        "RELATIONSHIP" | "RELATIONSHIPS" => Some(Header::Relationship),
        "QUERY" | "QUERIES" => Some(Header::Query),
        _ => None,
    }
}

/// Parse an extraction completion into triplets and a query pair.
///
/// The triplets come from the last `RELATIONSHIP` section (models sometimes
/// restate their answer; the final statement wins) and the query from the
/// `QUERY` section following it. Missing or misplaced sections degrade to
/// documented fallbacks with warnings. Fragments that do not parse are
/// skipped with warnings. Fails only when no triplet or no query pair is
/// recoverable at all.
pub fn parse_extraction(domain: Domain, completion: &str) -> Result<Extraction, ExtractError> {
    let mut warnings = Vec::new();
    let lines: Vec<&str> = completion.lines().collect();
    let headers: Vec<(usize, Header)> = lines
        .iter()
        .enumerate()
        .filter_map(|(i, l)| header_of(l).map(|h| (i, h)))
        .collect();

    let rel_start = headers
        .iter()
        .rev()
        .find(|(_, h)| *h == Header::Relationship)
        .map(|&(i, _)| i);
    if rel_start.is_none() {
        warnings.push("no RELATIONSHIP header; scanning the whole completion".to_string());
    }
    let query_start = match rel_start {
        Some(r) => headers
            .iter()
            .find(|&&(i, h)| h == Header::Query && i > r)
            .map(|&(i, _)| i)
            .or_else(|| {
                let any = headers
                    .iter()
                    .rev()
                    .find(|(_, h)| *h == Header::Query)
                    .map(|&(i, _)| i);
                if any.is_some() {
                    warnings.push(
                        "QUERY header precedes the final RELATIONSHIP header; using it anyway"
                            .to_string(),
                    );
                }
                any
            }),
        None => headers
            .iter()
            .rev()
            .find(|(_, h)| *h == Header::Query)
            .map(|&(i, _)| i),
    };

    let section_end = |start: usize| {
        headers
            .iter()
            .find(|&&(i, _)| i > start)
            .map(|&(i, _)| i)
            .unwrap_or(lines.len())
    };
    let rel_lines: Vec<&str> = match (rel_start, query_start) {
        (Some(r), _) => lines[r + 1..section_end(r)].to_vec(),
        (None, Some(q)) => {
            // Everything outside the query section.
            let mut v = lines[..q].to_vec();
            v.extend_from_slice(&lines[section_end(q)..]);
            v
        }
        (None, None) => lines.clone(),
    };
    let query_lines: Vec<&str> = query_start
        .map(|q| lines[q + 1..section_end(q)].to_vec())
        .unwrap_or_default();

    let mut triplets = Vec::new();
    let mut stray_pairs: Vec<(TaggedEntity, TaggedEntity)> = Vec::new();
    for line in &rel_lines {
        for cap in TUPLE.captures_iter(line) {
            let parts: Vec<&str> = cap[1].split(',').map(str::trim).collect();
            match parts.len() {
                3 => {
                    let (head, mut w1) = parse_entity_tag(parts[0]);
                    let (relation_entity, mut w2) = parse_entity_tag(parts[1]);
                    let (tail, mut w3) = parse_entity_tag(parts[2]);
                    warnings.append(&mut w1);
                    warnings.append(&mut w2);
                    warnings.append(&mut w3);
                    if head.name.is_empty()
                        || relation_entity.name.is_empty()
                        || tail.name.is_empty()
                    {
                        warnings.push(format!("skipping triplet with empty field: ({})", &cap[1]));
                        continue;
                    }
                    triplets.push(ParsedTriplet {
                        head,
                        relation: relation_entity.name,
                        seniority: relation_entity.age,
                        tail,
                    });
                }
                2 => {
                    // Probably a query pair that strayed into this section;
                    // keep it as a fallback.
                    let (a, _) = parse_entity_tag(parts[0]);
                    let (b, _) = parse_entity_tag(parts[1]);
                    if !a.name.is_empty() && !b.name.is_empty() {
                        stray_pairs.push((a, b));
                    }
                }
                _ => {
                    warnings.push(format!(
                        "skipping tuple with {} fields: ({})",
                        parts.len(),
                        &cap[1]
                    ));
                }
            }
        }
    }

    let mut query: Option<(TaggedEntity, TaggedEntity)> = None;
    for line in &query_lines {
        if query.is_some() {
            break;
        }
        for cap in TUPLE.captures_iter(line) {
            let parts: Vec<&str> = cap[1].split(',').map(str::trim).collect();
            let pair = match parts.len() {
                2 => Some((parts[0], parts[1])),
                3 => {
                    // Ternary query form carries a placeholder relation
                    // token in the middle; drop it (and its tags).
                    if !parts[1].to_lowercase().contains("query") {
                        warnings.push(format!(
                            "query tuple middle token `{}` is not a query placeholder; dropping it",
                            parts[1]
                        ));
                    }
                    Some((parts[0], parts[2]))
                }
                _ => {
                    warnings.push(format!(
                        "skipping query tuple with {} fields: ({})",
                        parts.len(),
                        &cap[1]
                    ));
                    None
                }
            };
            if let Some((a, b)) = pair {
                let (src, mut w1) = parse_entity_tag(a);
                let (tar, mut w2) = parse_entity_tag(b);
                warnings.append(&mut w1);
                warnings.append(&mut w2);
                if src.name.is_empty() || tar.name.is_empty() {
                    warnings.push(format!("skipping query with empty field: ({})", &cap[1]));
                    continue;
                }
                query = Some((src, tar));
                break;
            }
        }
    }
    if query.is_none() {
        if let Some(pair) = stray_pairs.pop() {
            warnings.push(
                "no query pair in a QUERY section; using the last bare pair found".to_string(),
            );
            query = Some(pair);
        }
    }

    if triplets.is_empty() {
        return Err(ExtractError::EmptyExtraction);
    }
    let (query_source, query_target) = query.ok_or(ExtractError::NoQueryFound)?;
    let _ = domain; // Normalization is deferred to graph building.
    Ok(Extraction {
        triplets,
        query_source,
        query_target,
        warnings,
    })
}

/// Assemble a graph and query from a parsed extraction.
///
/// Entity names are normalized per domain; node attributes merge across
/// mentions; triplets whose relation is outside the domain vocabulary are
/// skipped with a warning. Query endpoints that never appeared in a triplet
/// are inserted as isolated nodes (path search will then find no paths,
/// which is the honest outcome).
pub fn build_graph(
    domain: Domain,
    extraction: &Extraction,
) -> (RelationGraph, RelationQuery, Vec<String>) {
    let mut graph = RelationGraph::new(domain);
    let mut warnings = extraction.warnings.clone();
    let upsert = |graph: &mut RelationGraph, entity: &TaggedEntity, warnings: &mut Vec<String>| {
        let id = normalize_entity_name(domain, &entity.name);
        let node = EntityNode {
            id: NodeId::new(id.clone()),
            gender: entity.gender,
            relative_age: entity.age,
        };
        if let Some(conflict) = graph.upsert_node(node) {
            warnings.push(conflict);
        }
        id
    };
    for triplet in &extraction.triplets {
        let head = upsert(&mut graph, &triplet.head, &mut warnings);
        let tail = upsert(&mut graph, &triplet.tail, &mut warnings);
        let mut edge = RelationEdge::new(head.clone(), triplet.relation.clone(), tail.clone());
        edge.seniority = triplet.seniority;
        match graph.add_edge(edge) {
            Ok(_) => {}
            Err(GraphError::UnknownRelationLabel { label, domain }) => {
                warnings.push(format!(
                    "skipping ({head}, {label}, {tail}): `{label}` is not a {domain} relation"
                ));
            }
            Err(other) => warnings.push(other.to_string()),
        }
    }
    let src = normalize_entity_name(domain, &extraction.query_source.name);
    let tar = normalize_entity_name(domain, &extraction.query_target.name);
    for (entity, id) in [
        (&extraction.query_source, &src),
        (&extraction.query_target, &tar),
    ] {
        if !graph.contains_node(&NodeId::new(id.clone())) {
            warnings.push(format!(
                "query entity `{id}` does not appear in any relationship"
            ));
        }
        upsert(&mut graph, entity, &mut warnings);
    }
    (graph, RelationQuery::new(src, tar), warnings)
}

/// Render a graph and query in the completion format [`parse_extraction`]
/// accepts: the exact inverse used to fabricate extraction fixtures.
pub fn render_extraction(graph: &RelationGraph, query: &RelationQuery) -> String {
    let domain = graph.domain();
    let tag_of = |id: &NodeId| -> String {
        let node = graph.node(id).expect("edge endpoints exist");
        let mut tags = String::new();
        if domain.is_kinship() {
            match node.gender {
                Gender::Male => tags.push_str("<male>"),
                Gender::Female => tags.push_str("<female>"),
                Gender::Unknown => {}
            }
        }
        match node.relative_age {
            RelativeAge::Older => tags.push_str("<older>"),
            RelativeAge::Younger => tags.push_str("<younger>"),
            RelativeAge::Unknown => {}
        }
        format!("{id}{tags}")
    };
    let mut out = String::from("RELATIONSHIP\n");
    for e in graph.edges() {
        let seniority = match e.seniority {
            RelativeAge::Older => "<older>",
            RelativeAge::Younger => "<younger>",
            RelativeAge::Unknown => "",
        };
        out.push_str(&format!(
            "({}, {}{}, {})\n",
            tag_of(&e.head),
            e.relation,
            seniority,
            tag_of(&e.tail)
        ));
    }
    out.push_str("QUERY\n");
    if domain == Domain::ChineseKinship {
        out.push_str(&format!(
            "({}, relation_query, {})\n",
            query.source, query.target
        ));
    } else {
        out.push_str(&format!("({}, {})\n", query.source, query.target));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_templates_cover_every_domain_and_kind() {
        let set = TemplateSet::builtin();
        assert_eq!(set.all().len(), 20);
        for domain in Domain::all() {
            for kind in [
                TemplateKind::Extraction,
                TemplateKind::PathReasoner,
                TemplateKind::BaselineIo,
                TemplateKind::BaselineFewShot,
                TemplateKind::BaselineCot,
            ] {
                let t = set.get(domain, kind).unwrap();
                assert!(t.text.contains("{input}"), "{} lacks {{input}}", t.name);
            }
            // Extraction templates all use sectional markup, delimiters,
            // and decomposition; closed domains add the category list.
            let t = set.get(domain, TemplateKind::Extraction).unwrap();
            for s in [
                Strategy::SectionalMarkup,
                Strategy::SyntacticDelimiters,
                Strategy::TaskDecomposition,
            ] {
                assert!(t.strategies.contains(&s), "{} lacks {}", t.name, s.as_str());
            }
            assert_eq!(
                t.strategies.contains(&Strategy::PredefinedCategories),
                domain != Domain::ChineseKinship
            );
        }
        let manifest = set.manifest();
        assert_eq!(manifest.len(), 20);
        assert!(manifest.values().all(|v| v.len() == 64));
    }

    #[test]
    fn render_substitutes_each_placer_exactly_once() {
        let t = TemplateSet::builtin()
            .get(Domain::Stepgame, TemplateKind::Extraction)
            .unwrap();
        let out = t.render(&[("input", "THE STORY")]).unwrap();
        assert!(out.contains("THE STORY"));
        assert!(!out.contains("{input}"));

        assert!(matches!(
            t.render(&[("bogus", "x")]),
            Err(ExtractError::MissingPlaceholder { .. })
        ));
        // The story slot is required.
        assert!(matches!(
            t.render(&[]),
            Err(ExtractError::UnsubstitutedPlaceholder { .. })
        ));
    }

    #[test]
    fn reasoner_prompts_thread_story_context_where_templates_want_it() {
        let with_story = build_reasoner_prompt(Domain::Spartun, "CHAIN", "STORY").unwrap();
        assert!(with_story.contains("CHAIN") && with_story.contains("STORY"));
        let without = build_reasoner_prompt(Domain::Stepgame, "CHAIN", "STORY").unwrap();
        assert!(without.contains("CHAIN") && !without.contains("STORY"));
    }

    #[test]
    fn sectioned_completion_parses_with_last_section_winning() {
        let completion = "\
Let me restate after checking my work.
RELATIONSHIP
(A, top, B)
QUERY
(A, B)

On reflection the full extraction is:
RELATIONSHIP
(H, top, K)
(P, down, K)
(D, right, H)
QUERY
(P, H)
";
        let ex = parse_extraction(Domain::Stepgame, completion).unwrap();
        assert_eq!(ex.triplets.len(), 3);
        assert_eq!(ex.triplets[0].head.name, "H");
        assert_eq!(ex.query_source.name, "P");
        assert_eq!(ex.query_target.name, "H");
    }

    #[test]
    fn gender_tags_and_ternary_queries_parse() {
        let completion = "\
RELATIONSHIP
(小红, 妈妈, 王芳<female>)
(王芳<female>, 哥哥<older>, 王强<male>)
QUERY
(小红, relation_query<unknown>, 王强)
";
        let ex = parse_extraction(Domain::ChineseKinship, completion).unwrap();
        assert_eq!(ex.triplets[1].head.gender, Gender::Female);
        assert_eq!(ex.triplets[1].seniority, RelativeAge::Older);
        assert_eq!(ex.triplets[1].tail.gender, Gender::Male);
        assert_eq!(ex.query_source.name, "小红");
        assert_eq!(ex.query_target.name, "王强");
        assert!(ex.warnings.is_empty(), "{:?}", ex.warnings);
    }

    #[test]
    fn fallbacks_and_warnings_cover_malformed_output() {
        // No QUERY header: last bare pair is recovered with a warning.
        let ex = parse_extraction(Domain::Stepgame, "RELATIONSHIP\n(A, top, B)\n(A, B)\n").unwrap();
        assert_eq!(ex.query_source.name, "A");
        assert!(ex.warnings.iter().any(|w| w.contains("bare pair")));

        // Unknown tags and overlong tuples warn but never fail the parse.
        let ex = parse_extraction(
            Domain::Clutrr,
            "RELATIONSHIP\n(Ann<witch>, sister, Bea)\n(x, y, z, w)\nQUERY\n(Ann, Bea)\n",
        )
        .unwrap();
        assert_eq!(ex.triplets.len(), 1);
        assert!(ex
            .warnings
            .iter()
            .any(|w| w.contains("unknown tag `witch`")));
        assert!(ex.warnings.iter().any(|w| w.contains("4 fields")));

        // Unbalanced bracket: literal is kept, flagged.
        let (entity, warnings) = parse_entity_tag("Bob<male");
        assert_eq!(entity.name, "Bob male");
        assert!(warnings.iter().any(|w| w.contains("unbalanced")));

        assert!(matches!(
            parse_extraction(Domain::Stepgame, "nothing here"),
            Err(ExtractError::EmptyExtraction)
        ));
        assert!(matches!(
            parse_extraction(Domain::Stepgame, "RELATIONSHIP\n(A, top, B)\n"),
            Err(ExtractError::NoQueryFound)
        ));
    }

    #[test]
    fn build_graph_normalizes_skips_and_reports() {
        let completion = "\
RELATIONSHIP
(The red circle, in, block AAA)
(red  circle, touch, blue square)
(blue square, hovering, block AAA)
QUERY
(Blue Square, block AAA)
";
        let ex = parse_extraction(Domain::Spartun, completion).unwrap();
        let (graph, query, warnings) = build_graph(Domain::Spartun, &ex);
        // Article and case fold onto one node.
        assert_eq!(
            graph
                .nodes()
                .iter()
                .filter(|n| n.id.as_str() == "red circle")
                .count(),
            1
        );
        assert_eq!(graph.edges().len(), 2, "unknown relation is skipped");
        assert!(warnings.iter().any(|w| w.contains("hovering")));
        assert_eq!(query.source.as_str(), "blue square");
    }

    #[test]
    fn query_only_entities_become_isolated_nodes_with_warning() {
        let ex = parse_extraction(
            Domain::Stepgame,
            "RELATIONSHIP\n(A, top, B)\nQUERY\n(A, Z)\n",
        )
        .unwrap();
        let (graph, query, warnings) = build_graph(Domain::Stepgame, &ex);
        assert!(graph.contains_node(&query.target));
        assert!(warnings.iter().any(|w| w.contains("`Z` does not appear")));
    }

    #[test]
    fn render_extraction_roundtrips_through_the_parser() {
        let mut g = RelationGraph::new(Domain::Clutrr);
        g.upsert_node(EntityNode::with_gender("Ann", Gender::Female));
        g.upsert_node(EntityNode::with_gender("Bob", Gender::Male));
        g.add_edge(RelationEdge::new("Ann", "brother", "Bob"))
            .unwrap();
        g.add_edge(RelationEdge::new("Bob", "daughter", "Cleo"))
            .unwrap();
        let q = RelationQuery::new("Ann", "Cleo");
        let completion = render_extraction(&g, &q);
        let ex = parse_extraction(Domain::Clutrr, &completion).unwrap();
        let (g2, q2, warnings) = build_graph(Domain::Clutrr, &ex);
        assert_eq!(g2.to_text(Some(&q2)), g.to_text(Some(&q)));
        assert!(warnings.is_empty(), "{warnings:?}");
    }
}
