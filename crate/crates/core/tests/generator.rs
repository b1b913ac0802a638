use floorplan_core::dfg::{graph_metrics, parse_dfg, serialize_dfg};
use floorplan_core::gen::{generate_corpus, GenParams};

#[test]
fn default_corpus_stays_in_table_ranges() {
    let corpus = generate_corpus(&GenParams::default()).unwrap();
    assert_eq!(corpus.len(), 258);
    let mut ids = std::collections::HashSet::new();
    for g in &corpus {
        assert!(ids.insert(g.id().to_string()));
        let m = graph_metrics(g);
        assert!((5..=1000).contains(&m.node_count), "{}", g.id());
        let types: std::collections::BTreeSet<u32> = g.nodes().iter().map(|n| n.task_type).collect();
        assert!((3..=16).contains(&types.len()), "{}: {} types", g.id(), types.len());
        assert!(m.edge_count <= 2 * m.node_count);
        assert!(m.max_parents <= 2);
        assert_eq!(&parse_dfg(&serialize_dfg(g)).unwrap(), g);
    }
    let nodes: Vec<usize> = corpus.iter().map(|g| g.node_count()).collect();
    // A uniform draw over 5..=1000 spreads across the range.
    assert!(*nodes.iter().min().unwrap() < 100 && *nodes.iter().max().unwrap() > 900);
}

#[test]
fn realised_density_tracks_the_target() {
    for target in [0.25, 0.5, 1.0, 1.5, 1.75] {
        let params = GenParams {
            corpus_size: 100,
            seed: 77,
            ..GenParams::default()
        }
        .with_edges_per_node_target(target);
        let corpus = generate_corpus(&params).unwrap();
        let mean = corpus
            .iter()
            .map(|g| g.edge_count() as f64 / g.node_count() as f64)
            .sum::<f64>()
            / corpus.len() as f64;
        assert!((mean - target).abs() <= 0.15, "target {target}, realised {mean}");
    }
}

#[test]
fn corpus_is_a_pure_function_of_params() {
    let params = GenParams {
        corpus_size: 20,
        ..GenParams::default()
    };
    assert_eq!(generate_corpus(&params).unwrap(), generate_corpus(&params).unwrap());
}
