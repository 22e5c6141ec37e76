mod common;

use common::*;

use driftlab::corpus::{decode_cache, encode_cache, Split};
use driftlab::crosslingual::{apply_alignment, fit_alignment, BilingualLexicon};
use driftlab::drift::{drift_report, top_drifting};
use driftlab::evaluation::evaluate;
use driftlab::model::{EmbeddingState, Variant};
use driftlab::synth::{generate, Behavior, SynthSpec};
use driftlab::trainer::{init_dynamic, train_dynamic, TrainingConfig};

fn small_config(seed: u64) -> TrainingConfig {
    let mut c = train_config(seed);
    c.minibatches_per_slice = 20;
    c.learning_rate = 0.05;
    c.prior.lambda = 10.0;
    c
}

#[test]
fn cache_round_trip_preserves_generated_corpus() {
    let out = generate(&planted_spec(5_000, 4)).unwrap();
    let b = build(&out.source, 500, 4);
    let bytes = encode_cache(&b.corpus);
    let back = decode_cache(&bytes, std::path::Path::new("mem")).unwrap();
    assert_eq!(back, b.corpus);
}

#[test]
fn training_is_deterministic_per_seed() {
    let out = generate(&planted_spec(5_000, 5)).unwrap();
    let b = build(&out.source, 500, 5);
    let c = small_config(5);
    let first = static_model(&b.corpus, &c);
    let second = static_model(&b.corpus, &c);
    assert_eq!(first, second);
    let other = static_model(&b.corpus, &small_config(6));
    assert_ne!(first, other);
}

#[test]
fn monotone_word_outdrifts_stable_words() {
    let mut spec = SynthSpec::uniform(100, 4, 20_000, 5, 2, 7);
    spec.planted.push(driftlab::synth::Planted {
        word: 3,
        behavior: Behavior::Monotone,
        source: 0,
        target: 2,
    });
    let out = generate(&spec).unwrap();
    let b = build(&out.source, 100, 7);
    let c = small_config(7);
    let s = static_model(&b.corpus, &c);
    let d = dynamic_model(&b.corpus, &c, &s);
    let report = drift_report(&d, 0).unwrap();
    let planted = b.vocab.id("w0003").unwrap() as usize;
    let top = top_drifting(&report, 3).unwrap();
    assert!(top.iter().any(|&(v, _)| v == planted), "top {top:?}");
}

#[test]
fn anchored_variant_trains_and_keeps_finite_state() {
    let out = generate(&planted_spec(5_000, 8)).unwrap();
    let b = build(&out.source, 500, 8);
    let mut c = small_config(8);
    c.prior.variant = Variant::DbeNc;
    let s = static_model(&b.corpus, &c);
    let init = init_dynamic(&s, b.corpus.num_slices()).unwrap();
    let state = train_dynamic(&b.corpus, &c, init).unwrap().into_result().unwrap().state;
    assert!(state.is_finite());
    let curve = evaluate(&state, &b.corpus, Split::Test, c.window, c.batch_size).unwrap();
    assert!(curve.mean.is_finite() && curve.mean < 0.0);
}

#[test]
fn alignment_of_rotated_copy_is_exact() {
    let out = generate(&SynthSpec {
        mirror: Some(Vec::new()),
        ..SynthSpec::uniform(60, 2, 2_000, 3, 2, 9)
    })
    .unwrap();
    let src = build(&out.source, 60, 9);
    let tgt = build(out.mirror.as_ref().unwrap(), 60, 9);
    let state = EmbeddingState::random(1, 60, 6, 1.0, 9);
    let mut rotated = state.clone();
    for v in 0..60 {
        let row = rotated.rho_mut(0, v);
        row.swap(0, 1);
        row[0] = -row[0];
    }
    let pairs = (0..60).map(|v| (src.vocab.word(v).to_string(), tgt.vocab.word(v).to_string()));
    let lexicon = BilingualLexicon::from_words(pairs, &src.vocab, &tgt.vocab);
    let map = fit_alignment(&state, &rotated, &lexicon).unwrap();
    assert!(map.orthogonality_defect() < 1e-10);
    let mapped = apply_alignment(&map, &state).unwrap();
    for v in 0..60 {
        for (a, b) in mapped.rho(0, v).iter().zip(rotated.rho(0, v)) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
