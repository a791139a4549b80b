//! Relational reasoning over entity-relation graphs extracted from text.
//!
//! The pipeline turns a natural-language story into an explicit graph of
//! entities and relations, enumerates the reasoning paths that connect a
//! query's two entities, resolves each path independently — symbolically or
//! with an LLM reasoner — and unions the per-path answers. Because only the
//! relations along a path participate in an answer, irrelevant or
//! contradictory facts elsewhere in the story cannot poison the result,
//! which is what the noise-injection tooling measures.
//!
//! Modules:
//! - [`vocab`] — task domains and closed relation vocabularies
//! - [`graph`] — entity-relation graph, queries, text serialization
//! - [`extract`] — prompt templates and extraction-output parsing
//! - [`llm`] — chat-completion client: live HTTP, recorded fixtures
//! - [`paths`] — simple-path enumeration between query endpoints
//! - [`reason`] — per-path solvers, answer parsing, whole-graph baseline
//! - [`noise`] — gold-sample corpus generation and noise injection
//! - [`eval`] — dataset loading, pipeline runs, reports, robustness study

pub mod eval;
pub mod extract;
pub mod graph;
pub mod hash;
pub mod llm;
pub mod noise;
pub mod paths;
pub mod reason;
pub mod vocab;
