//! Randomized invariant checks across the library: parser totality,
//! direction algebra involutions, path-enumeration contracts, corpus
//! serialization round-trips, and noise-injection guarantees.

use std::collections::BTreeSet;

use proptest::prelude::*;

use relgraph::extract::{build_graph, parse_extraction, render_extraction};
use relgraph::graph::{read_graph_text, EntityNode, RelationEdge, RelationGraph, RelationQuery};
use relgraph::noise::{
    generate_gold_corpus, inject, read_corpus, substream, write_corpus, NoiseType,
};
use relgraph::paths::{find_paths, reconstruct_chain, ReasoningPath};
use relgraph::reason::kinship::{generation_delta, implied_gender, kinship_fold, KinshipRuleTable};
use relgraph::reason::spatial::{label_for_displacement, offset, opposite, spatial_solve};
use relgraph::vocab::Domain;

// The eight storable grid directions; `overlap` is an answer-only label and
// never appears on an edge.
const GRID_LABELS: [&str; 8] = [
    "top",
    "down",
    "left",
    "right",
    "top_left",
    "top_right",
    "down_left",
    "down_right",
];

fn domains() -> impl Strategy<Value = Domain> {
    prop_oneof![
        Just(Domain::Stepgame),
        Just(Domain::Clutrr),
        Just(Domain::Spartun),
        Just(Domain::ChineseKinship),
    ]
}

fn flat(path: &ReasoningPath) -> (Vec<String>, Vec<usize>) {
    (
        path.nodes.iter().map(|n| n.as_str().to_string()).collect(),
        path.steps.iter().map(|s| s.edge).collect(),
    )
}

proptest! {
    /// Arbitrary completions never panic the parser; an accepted completion
    /// always carries at least one triplet.
    #[test]
    fn parser_is_total_on_arbitrary_text(domain in domains(), text in "\\PC{0,300}") {
        if let Ok(extraction) = parse_extraction(domain, &text) {
            prop_assert!(!extraction.triplets.is_empty());
        }
    }

    /// Tuple-shaped junk exercises the recovery paths without panicking,
    /// and whatever parses must survive graph building.
    #[test]
    fn parser_tolerates_tuple_shaped_noise(
        domain in domains(),
        head in "[A-Za-z]{1,8}",
        rel in "[a-z_]{1,12}",
        tail in "[A-Za-z]{1,8}",
        junk in "[A-Za-z0-9 .,:<>_\\-]{0,40}",
    ) {
        let completion = format!(
            "RELATIONSHIP:\n({head},{rel},{tail}),\n{junk}\nQUERY:\n({head},{tail})\n"
        );
        if let Ok(extraction) = parse_extraction(domain, &completion) {
            let (graph, query, _warnings) = build_graph(domain, &extraction);
            prop_assert!(graph.contains_node(&query.source));
            prop_assert!(graph.contains_node(&query.target));
        }
    }

    /// Graph text deserialization never panics on arbitrary input.
    #[test]
    fn graph_text_reader_is_total(domain in domains(), text in "\\PC{0,300}") {
        let _ = read_graph_text(domain, &text);
    }

    /// The displacement-to-label map depends only on the signs.
    #[test]
    fn displacement_label_depends_only_on_signs(dx in -40i64..=40, dy in -40i64..=40) {
        prop_assert_eq!(
            label_for_displacement(dx, dy),
            label_for_displacement(dx.signum(), dy.signum())
        );
    }

    /// Solving a chain backwards yields exactly the opposite direction.
    #[test]
    fn reversed_chain_solves_to_the_opposite_label(
        labels in prop::collection::vec(0usize..GRID_LABELS.len(), 1..=8),
        flips in prop::collection::vec(any::<bool>(), 8),
    ) {
        let k = labels.len();
        let mut graph = RelationGraph::new(Domain::Stepgame);
        let names: Vec<String> = (0..=k).map(|i| format!("N{i}")).collect();
        for name in &names {
            graph.upsert_node(EntityNode::new(name.as_str()));
        }
        for (i, &label) in labels.iter().enumerate() {
            let (a, b) = if flips[i] { (i + 1, i) } else { (i, i + 1) };
            graph
                .add_edge(RelationEdge::new(
                    names[a].as_str(),
                    GRID_LABELS[label],
                    names[b].as_str(),
                ))
                .unwrap();
        }
        let forward_query = RelationQuery::new(names[0].as_str(), names[k].as_str());
        let reverse_query = RelationQuery::new(names[k].as_str(), names[0].as_str());
        let chain: Vec<usize> = (0..k).collect();
        let reversed: Vec<usize> = (0..k).rev().collect();
        let forward = spatial_solve(
            &graph,
            &reconstruct_chain(&graph, &chain, &forward_query).unwrap(),
        )
        .unwrap();
        let backward = spatial_solve(
            &graph,
            &reconstruct_chain(&graph, &reversed, &reverse_query).unwrap(),
        )
        .unwrap();
        if forward == "overlap" {
            // A zero displacement is its own negation.
            prop_assert_eq!(backward.as_str(), "overlap");
        } else {
            prop_assert_eq!(opposite(&forward).unwrap(), backward);
        }
    }

    /// Raising `max_len` only adds paths; `max_paths` truncation always
    /// keeps a prefix of the full deterministic enumeration.
    #[test]
    fn path_enumeration_is_monotone_and_prefix_stable(
        edges in prop::collection::vec((0usize..6, 0usize..6, 0usize..8), 0..=10),
        short in 1usize..=3,
        cap in 1usize..=6,
    ) {
        let pool = ["A", "B", "C", "D", "E", "F"];
        let mut graph = RelationGraph::new(Domain::Stepgame);
        for name in pool {
            graph.upsert_node(EntityNode::new(name));
        }
        for (h, t, l) in edges {
            if h != t {
                graph
                    .add_edge(RelationEdge::new(pool[h], GRID_LABELS[l], pool[t]))
                    .unwrap();
            }
        }
        let query = RelationQuery::new("A", "F");
        let full = find_paths(&graph, &query, pool.len(), 1_000_000).unwrap();
        let shallow = find_paths(&graph, &query, short, 1_000_000).unwrap();
        let full_set: BTreeSet<_> = full.iter().map(flat).collect();
        for p in &shallow {
            prop_assert!(p.len() <= short);
            prop_assert!(full_set.contains(&flat(p)));
        }
        let capped = find_paths(&graph, &query, pool.len(), cap).unwrap();
        let take = cap.min(full.len());
        prop_assert_eq!(&capped[..], &full[..take]);
    }

    /// Corpus serialization is a fixpoint: write → read → write is
    /// byte-identical, and generation itself is seed-deterministic.
    #[test]
    fn corpus_serialization_round_trips(
        domain in prop_oneof![Just(Domain::Stepgame), Just(Domain::Clutrr)],
        count in 1usize..=4,
        seed in 0u64..1_000,
    ) {
        let samples = generate_gold_corpus(domain, count, 2..=5, seed).unwrap();
        let again = generate_gold_corpus(domain, count, 2..=5, seed).unwrap();
        let text = write_corpus(&samples);
        prop_assert_eq!(&text, &write_corpus(&again));
        let reread = read_corpus(domain, &text).unwrap();
        prop_assert_eq!(&text, &write_corpus(&reread));
    }

    /// Any single injection leaves the main chain byte-identical and the
    /// gold answers reachable.
    #[test]
    fn injection_preserves_chain_and_answers(
        domain in prop_oneof![Just(Domain::Stepgame), Just(Domain::Clutrr)],
        type_index in 0usize..7,
        seed in 0u64..10_000,
    ) {
        let sample = &generate_gold_corpus(domain, 1, 3..=5, seed).unwrap()[0];
        let mut rng = substream(seed ^ 0xD15EA5E, 1);
        let Ok(noisy) = inject(sample, NoiseType::all()[type_index], &mut rng) else {
            return Ok(()); // Not applicable to this sample's structure.
        };
        prop_assert_eq!(&noisy.main_chain, &sample.main_chain);
        for &idx in &noisy.main_chain {
            let (before, after) = (sample.graph.edge(idx), noisy.graph.edge(idx));
            prop_assert_eq!(&before.head, &after.head);
            prop_assert_eq!(&before.relation, &after.relation);
            prop_assert_eq!(&before.tail, &after.tail);
        }
        let path = reconstruct_chain(&noisy.graph, &noisy.main_chain, &noisy.query).unwrap();
        let answers = match domain {
            Domain::Stepgame => BTreeSet::from([spatial_solve(&noisy.graph, &path).unwrap()]),
            Domain::Clutrr => kinship_fold(&noisy.graph, &path, KinshipRuleTable::builtin()).unwrap(),
            _ => unreachable!(),
        };
        prop_assert_eq!(&answers, &sample.answers);
    }

    /// Rendering a graph as a model completion and re-parsing it
    /// reconstructs the same graph and query.
    #[test]
    fn rendered_extraction_reparses_to_the_same_graph(
        domain in prop_oneof![Just(Domain::Stepgame), Just(Domain::Clutrr)],
        seed in 0u64..1_000,
    ) {
        let sample = &generate_gold_corpus(domain, 1, 2..=5, seed).unwrap()[0];
        let completion = render_extraction(&sample.graph, &sample.query);
        let extraction = parse_extraction(domain, &completion).unwrap();
        let (rebuilt, query, _warnings) = build_graph(domain, &extraction);
        prop_assert_eq!(&query, &sample.query);
        let (rebuilt_text, original_text) = (
            rebuilt.to_text(Some(&query)),
            sample.graph.to_text(Some(&sample.query)),
        );
        prop_assert_eq!(graph_text_key(&rebuilt_text), graph_text_key(&original_text));
    }
}

/// Split a serialized graph into a sorted node section plus the edge and
/// query lines in document order. Node listing order reflects insertion
/// order, which a render→parse round trip need not preserve; everything
/// else is positional.
fn graph_text_key(text: &str) -> (Vec<&str>, Vec<&str>) {
    let (mut nodes, mut rest) = (Vec::new(), Vec::new());
    for line in text.lines() {
        if line.starts_with("N\t") {
            nodes.push(line);
        } else {
            rest.push(line);
        }
    }
    nodes.sort_unstable();
    (nodes, rest)
}

/// Every storable direction label has an involutive opposite with a negated
/// offset, unit offsets map back to their own label, and the origin maps to
/// the answer-only `overlap`.
#[test]
fn direction_algebra_involutions() {
    for label in GRID_LABELS {
        let opp = opposite(label).expect("every grid label has an opposite");
        assert_eq!(opposite(opp), Some(label));
        let (dx, dy) = offset(label).expect("every grid label has an offset");
        assert_eq!(offset(opp), Some((-dx, -dy)));
        assert_eq!(label_for_displacement(dx, dy), label);
    }
    assert_eq!(label_for_displacement(0, 0), "overlap");
    assert!(offset("overlap").is_none(), "overlap is not a displacement");
    assert!(opposite("overlap").is_none());
}

/// Structural soundness of the shipped rule table: composition adds
/// generation offsets, and result labels agree with the gender they are
/// keyed on; inverses negate generation and name the keyed subject.
#[test]
fn rule_table_respects_generation_and_gender_signatures() {
    let table = KinshipRuleTable::builtin();
    for ((left, right, gender), results) in table.compose_entries() {
        let expected = generation_delta(left).unwrap() + generation_delta(right).unwrap();
        for result in results {
            assert_eq!(
                implied_gender(result),
                Some(*gender),
                "compose({left}, {right}, {gender:?}) -> {result}"
            );
            assert_eq!(
                generation_delta(result),
                Some(expected),
                "compose({left}, {right}, {gender:?}) -> {result}"
            );
        }
    }
    for ((label, gender), inverse) in table.inverse_entries() {
        assert_eq!(
            implied_gender(inverse),
            Some(*gender),
            "inverse({label}, {gender:?}) -> {inverse}"
        );
        assert_eq!(
            generation_delta(inverse),
            Some(-generation_delta(label).unwrap()),
            "inverse({label}, {gender:?}) -> {inverse}"
        );
    }
}
