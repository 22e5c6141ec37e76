#![allow(dead_code)]

use driftlab::corpus::{build_vocabulary, slice, Granularity, SliceConfig, Stoplist, TimeSlicedCorpus, Vocabulary};
use driftlab::model::EmbeddingState;
use driftlab::synth::{Behavior, Planted, SynthCorpus, SynthSpec};
use driftlab::trainer::{init_dynamic, train_dynamic, train_static, TrainingConfig};

pub struct Built {
    pub vocab: Vocabulary,
    pub corpus: TimeSlicedCorpus,
}

/// Vocabulary and slices of a generated language, without subsampling.
pub fn build(lang: &SynthCorpus, vocab_size: usize, seed: u64) -> Built {
    let vocab = build_vocabulary(lang.documents.iter().map(|d| &d.tokens), vocab_size, &Stoplist::new()).unwrap();
    let config = SliceConfig {
        granularity: Granularity::Annual,
        subsample_threshold: None,
        seed,
        ..SliceConfig::default()
    };
    let corpus = slice(&lang.documents, &vocab, &config).unwrap();
    Built { vocab, corpus }
}

/// Vocabulary ids of the words with `behavior` in the ground truth.
pub fn ids_with(lang: &SynthCorpus, vocab: &Vocabulary, pred: impl Fn(&Behavior) -> bool) -> Vec<usize> {
    lang.truth
        .iter()
        .filter(|r| pred(&r.1))
        .map(|r| vocab.id(&r.0).unwrap() as usize)
        .collect()
}

/// 500 words in 10 clusters over 10 yearly slices, five monotone words
/// and two transient spikes.
pub fn planted_spec(tokens_per_slice: usize, seed: u64) -> SynthSpec {
    let mut spec = SynthSpec::uniform(500, 10, tokens_per_slice, 10, 2, seed);
    let monotone = [(7, 0, 5), (113, 2, 6), (221, 4, 7), (333, 6, 8), (448, 8, 9)];
    for (word, source, target) in monotone {
        spec.planted.push(Planted {
            word,
            behavior: Behavior::Monotone,
            source,
            target,
        });
    }
    for (word, source, target, at) in [(58, 1, 3, 4), (275, 5, 0, 6)] {
        spec.planted.push(Planted {
            word,
            behavior: Behavior::Spike(at),
            source,
            target,
        });
    }
    spec
}

pub fn train_config(seed: u64) -> TrainingConfig {
    TrainingConfig {
        window: 2,
        dim: 20,
        negatives: 5,
        minibatches_per_slice: 160,
        batch_size: 1000,
        static_epochs: 5,
        epochs: 5,
        seed,
        validate: false,
        ..TrainingConfig::default()
    }
}

pub fn static_model(corpus: &TimeSlicedCorpus, config: &TrainingConfig) -> EmbeddingState {
    train_static(corpus, config).unwrap().into_result().unwrap().state
}

pub fn dynamic_model(corpus: &TimeSlicedCorpus, config: &TrainingConfig, init: &EmbeddingState) -> EmbeddingState {
    let init = init_dynamic(init, corpus.num_slices()).unwrap();
    train_dynamic(corpus, config, init).unwrap().into_result().unwrap().state
}
