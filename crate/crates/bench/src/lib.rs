//! Benchmark bodies, shared by `benches/pipeline.rs`.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use floorplan_core::dataset::build_dataset;
use floorplan_core::features::extract_features;
use floorplan_core::gen::{generate_corpus, generate_dfg};
use floorplan_core::ml::{cross_validate, train};
use floorplan_core::sim::simulate;
use floorplan_core::{CaseId, CaseSpec, ClassifierKind, ClassifierSpec, Dataset, Dfg, GenParams, TaskLibrary};

/// A graph of roughly `nodes` nodes from the default generator.
pub fn graph(nodes: u32) -> Dfg {
    let params = GenParams {
        node_count_range: (nodes, nodes),
        ..GenParams::default()
    };
    generate_dfg(&params, 0)
}

/// Case III dataset over a small corpus.
pub fn dataset(corpus_size: usize) -> Dataset {
    let corpus = generate_corpus(&GenParams {
        corpus_size,
        node_count_range: (5, 300),
        ..GenParams::default()
    })
    .expect("valid params");
    build_dataset(&corpus, &TaskLibrary::reference(), &CaseSpec::default_for(CaseId::III).unwrap()).unwrap()
}

pub fn benchmarks(c: &mut Criterion) {
    let lib = TaskLibrary::reference();
    let params = GenParams::default();

    c.bench_function("generate_dfg", |b| {
        let mut i = 0;
        b.iter(|| {
            i += 1;
            generate_dfg(&params, black_box(i))
        })
    });

    let mut sim = c.benchmark_group("simulate");
    let case = CaseSpec::default_for(CaseId::I).unwrap();
    for nodes in [100, 1000] {
        let g = graph(nodes);
        for cfg in &case.candidates {
            sim.bench_with_input(BenchmarkId::new(cfg.scheduler.short_name(), nodes), &g, |b, g| {
                b.iter(|| simulate(g, &lib, cfg).unwrap())
            });
        }
    }
    sim.finish();

    let g = graph(1000);
    c.bench_function("extract_features/1000", |b| b.iter(|| extract_features(black_box(&g), &lib).unwrap()));

    let ds = dataset(120);
    let mut learn = c.benchmark_group("train");
    learn.sample_size(10);
    for kind in ClassifierKind::ALL {
        let spec = ClassifierSpec::new(kind, 1);
        learn.bench_function(kind.name(), |b| b.iter(|| train(&ds, &spec).unwrap()));
    }
    learn.finish();

    let spec = ClassifierSpec::new(ClassifierKind::NaiveBayes, 1);
    c.bench_function("cross_validate/NaiveBayes", |b| b.iter(|| cross_validate(&ds, &spec, 10, 1).unwrap()));
}
