//! Builds the shipped offline smoke corpus: a 50-sample grid-domain
//! dataset plus recorded extraction completions, so the full pipeline
//! (extraction replayed from fixtures, then path solving) runs without
//! network access.
//!
//! Output layout under the target directory:
//!   dataset.jsonl   one record per line: id, story, answers, hops
//!   fixtures/       completion per prompt key, plus index.tsv
//!
//! Regenerate with:
//!     cargo run -p relgraph --bin smoke_corpusgen -- data/smoke-stepgame
//!
//! The fixtures are keyed for the default client settings (model gpt-4o,
//! temperature 0); replaying with other settings misses deliberately.

use std::path::PathBuf;

use relgraph::extract::{build_extraction_prompt, render_extraction};
use relgraph::llm::{fixture_key, FixtureStore};
use relgraph::noise::generate_gold_corpus;
use relgraph::vocab::Domain;

const COUNT: usize = 50;
const SEED: u64 = 20;
const MODEL: &str = "gpt-4o";
const TEMPERATURE: f64 = 0.0;

fn sentence(head: &str, relation: &str, tail: &str) -> String {
    let phrase = match relation {
        "top" => "directly above",
        "down" => "directly below",
        "left" => "to the left of",
        "right" => "to the right of",
        "top_left" => "to the upper left of",
        "top_right" => "to the upper right of",
        "down_left" => "to the lower left of",
        "down_right" => "to the lower right of",
        other => unreachable!("unexpected grid relation {other}"),
    };
    format!("{head} is {phrase} {tail}.")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/smoke-stepgame".to_string())
        .into();
    std::fs::create_dir_all(&out_dir)?;
    let store = FixtureStore::open(out_dir.join("fixtures"))?;
    let corpus = generate_gold_corpus(Domain::Stepgame, COUNT, 2..=6, SEED)?;
    let mut dataset = String::new();
    for sample in &corpus {
        let mut story = String::new();
        for e in sample.graph.edges() {
            if !story.is_empty() {
                story.push(' ');
            }
            story.push_str(&sentence(e.head.as_str(), &e.relation, e.tail.as_str()));
        }
        story.push_str(&format!(
            " What is the relation of {} to {}?",
            sample.query.source, sample.query.target
        ));
        let prompt = build_extraction_prompt(Domain::Stepgame, &story)?;
        let completion = render_extraction(&sample.graph, &sample.query);
        store.store(
            &fixture_key(MODEL, TEMPERATURE, &prompt),
            &prompt,
            &completion,
        )?;
        let record = serde_json::json!({
            "id": sample.id,
            "story": story,
            "answers": sample.answers.iter().collect::<Vec<_>>(),
            "hops": sample.hops,
        });
        dataset.push_str(&record.to_string());
        dataset.push('\n');
    }
    std::fs::write(out_dir.join("dataset.jsonl"), dataset)?;
    eprintln!(
        "wrote {} samples and {} fixtures under {}",
        corpus.len(),
        store.len(),
        out_dir.display()
    );
    Ok(())
}
