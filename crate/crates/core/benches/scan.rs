use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use memeco::corpus::Document;
use memeco::matcher::{scan_corpus, scan_corpus_sequential, Matcher};
use memeco::phraseset::{load_background, load_phrases, PhraseSet};
use memeco::stats;
use memeco::synth::{generate, CommunitySpec, Plant, PlantSpec, Profile, VocabSpec};

fn corpus() -> (Vec<Document>, PhraseSet) {
    let plants = (0..40)
        .map(|i| Plant {
            phrase: format!("meme{i} goes brr"),
            profile: Profile::Constant { rate: 3.0 },
            communities: Vec::new(),
        })
        .collect();
    let spec = PlantSpec {
        window: "0..199".into(),
        seed: 1,
        communities: (0..8)
            .map(|i| CommunitySpec { name: format!("c{i}"), docs_per_day: 25.0 })
            .collect(),
        background: VocabSpec { words: 2000, rate: 1.0, growth: 2.0 },
        plants,
        post_share: 0.2,
    };
    let (docs, truth) = generate(&spec).unwrap();
    let mut lexicon = truth.phrase_file();
    // Pad to the size of the tracked meme set with phrases that never occur.
    for i in 0..312 {
        lexicon.push_str(&format!("absent phrase number {i}\n"));
    }
    let (mut set, _) = load_phrases(&lexicon).unwrap();
    set.background = load_background(&truth.background_file()).unwrap();
    (docs, set)
}

fn scan(c: &mut Criterion) {
    let (docs, set) = corpus();
    let matcher = Matcher::new(&set);
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    group.throughput(Throughput::Elements(docs.len() as u64));
    for shards in [1, 4] {
        group.bench_with_input(BenchmarkId::new("parallel", shards), &shards, |b, &s| {
            b.iter(|| scan_corpus(&matcher, &docs, s))
        });
        group.bench_with_input(BenchmarkId::new("sequential", shards), &shards, |b, &s| {
            b.iter(|| scan_corpus_sequential(&matcher, &docs, s))
        });
    }
    group.finish();
}

fn kendall(c: &mut Criterion) {
    let a: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 1000) as f64).collect();
    let b: Vec<f64> = (0..5000).map(|i| ((i * 104_729) % 997) as f64).collect();
    c.bench_function("kendall_tau_b_5000", |bench| bench.iter(|| stats::kendall_tau_b(&a, &b).unwrap()));
}

criterion_group!(benches, scan, kendall);
criterion_main!(benches);
